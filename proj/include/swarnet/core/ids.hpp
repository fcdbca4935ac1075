#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace swarnet::core {

// One token per physical device. Ordering is used for deterministic
// iteration of next-hop sets.
struct NodeId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct GroupId {
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(GroupId, GroupId) = default;
};

// Topic equality is exact match on the label.
struct TopicId {
  std::string name;

  TopicId() = default;
  explicit TopicId(std::string n) : name(std::move(n)) {}

  friend auto operator<=>(const TopicId&, const TopicId&) = default;
};

enum class Role : std::uint8_t {
  GroupOwner,
  OrdinaryPeer,
  PrimaryRelay,
  SecondaryRelay,
};

enum class InterfaceKind : std::uint8_t {
  P2pNative,
  LegacyClient,
};

using Address = std::uint32_t;

// Every group owner answers on the same P2P address (192.168.49.1). An
// address is therefore meaningful only together with its group.
inline constexpr Address kDefaultGoAddr = 0xC0A83101u;
// First address handed out to clients by a group owner's DHCP pool.
inline constexpr Address kFirstClientAddr = 0xC0A83102u;

struct Endpoint {
  NodeId node;
  InterfaceKind iface = InterfaceKind::P2pNative;
  GroupId group;
  Address addr = 0;

  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct CredentialBundle {
  GroupId group;
  std::string ssid;
  std::string passphrase;

  friend bool operator==(const CredentialBundle&, const CredentialBundle&) = default;
};

// Origin plus a per-origin counter; never reused.
struct PublicationId {
  NodeId origin;
  std::uint64_t seq = 0;

  friend constexpr auto operator<=>(PublicationId, PublicationId) = default;
};

std::string_view to_string(Role role);
std::string_view to_string(InterfaceKind iface);
std::string format_address(Address addr);

inline bool is_relay(Role role) {
  return role == Role::PrimaryRelay || role == Role::SecondaryRelay;
}

}  // namespace swarnet::core

template <>
struct std::hash<swarnet::core::NodeId> {
  std::size_t operator()(swarnet::core::NodeId id) const noexcept {
    return std::hash<std::uint32_t>{}(id.value);
  }
};

template <>
struct std::hash<swarnet::core::PublicationId> {
  std::size_t operator()(swarnet::core::PublicationId id) const noexcept {
    return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(id.origin.value) << 40) ^ id.seq);
  }
};
