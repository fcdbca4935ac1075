#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "swarnet/core/ids.hpp"
#include "swarnet/routing/tables.hpp"

namespace swarnet::core {

// What a JoinRequest asks of its receiver.
enum class RelayIntent : std::uint8_t {
  None,           // ordinary membership (or re-join after a redirect)
  NativeRequest,  // ask the native group owner for the native relay slot
  Visitor,        // relay attaching to an adjacent group as legacy client
};

struct JoinRequest {
  std::string ssid;
  routing::LocalSubscriptionSet subscriptions;
  RelayIntent intent = RelayIntent::None;
  // Set when the sender forwards traffic for other nodes (its topics are
  // then the aggregate of everything behind it).
  bool relay = false;
};

struct JoinRedirect {
  NodeId target;
};

struct JoinAccept {
  bool accepted = true;
  NodeId anchor;
  routing::ForwardingTable table;
};

struct SubscriptionUpdate {
  bool add = true;
  TopicId topic;
};

struct RoutingPush {
  routing::ForwardingTable table;
};

struct Publication {
  PublicationId id;
  TopicId topic;
  std::uint32_t payload_bytes = 0;
  std::uint32_t hops = 0;
};

struct Beacon {
  NodeId sender;
  std::uint64_t seq = 0;
};

struct PromoteToRelay {
  CredentialBundle credentials;
};

struct RelayAck {
  GroupId group;
  bool accepted = true;
};

using MessageBody = std::variant<JoinRequest, JoinRedirect, JoinAccept, SubscriptionUpdate,
                                 RoutingPush, Publication, Beacon, PromoteToRelay, RelayAck>;

// Protocol code fills src completely and dst.node/dst.group; the transport
// resolves the receiving interface and address.
struct Message {
  Endpoint src;
  Endpoint dst;
  MessageBody body;
  std::uint32_t size_bytes = 0;
};

inline constexpr std::uint32_t kHeaderBytes = 40;

std::string_view kind_name(const MessageBody& body);
std::uint32_t wire_size(const MessageBody& body);

}  // namespace swarnet::core
