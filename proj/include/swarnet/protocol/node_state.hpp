#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "swarnet/core/ids.hpp"
#include "swarnet/core/message.hpp"
#include "swarnet/routing/recompute.hpp"
#include "swarnet/routing/tables.hpp"

namespace swarnet::protocol {

using core::GroupId;
using core::NodeId;
using core::TopicId;
using routing::ForwardingTable;
using routing::LocalSubscriptionSet;

// Simulated time in microseconds.
using SimTime = std::int64_t;

inline constexpr SimTime kSecond = 1'000'000;

struct ProtocolConfig {
  SimTime beacon_period = kSecond;
  SimTime beacon_timeout = 3 * kSecond;  // three missed beacons
  SimTime join_retry_delay = 2 * kSecond;
  int join_max_attempts = 3;
  SimTime promotion_timeout = 2 * kSecond;
  std::size_t seen_capacity = 4096;
  routing::AnchorFanout fanout = routing::AnchorFanout::SubscriberDirected;
};

// Credentials each group really uses; the radio layer checks attach
// attempts against it.
using CredentialDirectory = std::map<GroupId, core::CredentialBundle>;

enum class TimerKind : std::uint8_t { Tick, JoinRetry, PromotionTimeout };

struct Send {
  core::Message message;
  core::InterfaceKind via = core::InterfaceKind::P2pNative;
};
struct DeliverLocal {
  core::Publication publication;
};
struct SetTimer {
  TimerKind kind = TimerKind::Tick;
  SimTime delay = 0;
  std::uint64_t token = 0;
  GroupId group;
};
struct RoleChange {
  core::Role role = core::Role::OrdinaryPeer;
};

using OutboundAction = std::variant<Send, DeliverLocal, SetTimer, RoleChange>;
using Actions = std::vector<OutboundAction>;

// A node's attachment to one group: its native group over P2P, or the
// adjacent group a relay visits as a legacy client.
struct Membership {
  GroupId group;
  std::string ssid;
  std::optional<NodeId> owner;  // learned from the first reply when unknown
  std::optional<NodeId> anchor;
  core::InterfaceKind iface = core::InterfaceKind::P2pNative;
  bool accepted = false;
  // Visiting relay that sits under the group's native primary relay.
  bool secondary = false;

  // Join in progress toward join_target, or toward the owner when unset.
  bool joining = false;
  std::optional<NodeId> join_target;
  std::uint64_t join_token = 0;
  int join_attempts = 0;
  bool join_failed = false;
};

struct MemberRecord {
  GroupId group;
  LocalSubscriptionSet topics;
  bool relay = false;
};

// State held by a forwarding anchor for the groups it anchors.
struct AnchorDomain {
  std::map<GroupId, std::string> groups;  // anchored group -> ssid
  std::map<NodeId, MemberRecord> members;
  std::map<NodeId, ForwardingTable> pushed;
  // Table the parent anchor computed for this node (secondary relays only);
  // it reveals which topics have subscribers beyond the parent.
  ForwardingTable parent_table;
  LocalSubscriptionSet reported_up;
  // Topics seen in publications while anchoring (all-endpoints mode).
  LocalSubscriptionSet published;

  [[nodiscard]] bool active() const { return !groups.empty(); }
};

// Group-owner bookkeeping for its own group.
struct GroupRegistry {
  core::CredentialBundle credentials;
  std::set<NodeId> members;
  NodeId anchor;
  std::optional<NodeId> native_relay;
  bool native_active = false;
  std::optional<NodeId> visitor_relay;
  std::optional<NodeId> pending_promotion;
  std::uint64_t promotion_token = 0;
};

// Bounded duplicate-suppression set with FIFO eviction.
class SeenCache {
 public:
  explicit SeenCache(std::size_t capacity = 4096) : capacity_(capacity) {}

  // True when the id was not present (and is now recorded).
  bool insert(core::PublicationId id);
  [[nodiscard]] bool contains(core::PublicationId id) const { return set_.contains(id); }
  [[nodiscard]] std::size_t size() const { return set_.size(); }

 private:
  std::size_t capacity_;
  std::deque<core::PublicationId> order_;
  std::unordered_set<core::PublicationId> set_;
};

struct NodeState {
  NodeId id;
  core::Role role = core::Role::OrdinaryPeer;
  std::vector<core::Endpoint> endpoints;
  Membership native;
  std::optional<Membership> visiting;
  LocalSubscriptionSet subscriptions;
  ForwardingTable table;
  std::map<NodeId, SimTime> liveness;
  AnchorDomain domain;
  std::optional<GroupRegistry> registry;
  std::optional<core::CredentialBundle> pending_promotion;
  bool activation_pending = false;
  SeenCache seen;
  std::uint64_t next_seq = 0;
  std::uint64_t beacon_seq = 0;
  std::uint64_t next_token = 1;
  bool ticking = false;
  std::string last_error;

  // Forwarding anchor of the native group.
  [[nodiscard]] std::optional<NodeId> anchor() const { return native.anchor; }
  [[nodiscard]] bool is_anchor() const { return domain.active(); }
  [[nodiscard]] const core::Endpoint* endpoint_in(GroupId group) const;
  [[nodiscard]] Membership* membership_for(GroupId group);
};

NodeState make_group_owner(NodeId id, const core::CredentialBundle& credentials,
                           std::size_t seen_capacity = 4096);
NodeState make_peer(NodeId id, GroupId group, std::string ssid, std::size_t seen_capacity = 4096);

}  // namespace swarnet::protocol
