#include "doctest.h"

#include <algorithm>

#include "swarnet/core/ids.hpp"
#include "swarnet/core/message.hpp"
#include "swarnet/core/topology.hpp"

using namespace swarnet::core;

namespace {

bool has_code(const std::vector<Violation>& vs, const std::string& code) {
  return std::any_of(vs.begin(), vs.end(), [&](const Violation& v) { return v.code == code; });
}

// GO1, P11, PR | GO2, PR attached to group 2 as legacy client.
TopologyDesc four_device_two_group() {
  TopologyDesc t;
  t.groups = {{GroupId{1}, "g1"}, {GroupId{2}, "g2"}};
  t.nodes = {{NodeId{1}, "GO1", Role::GroupOwner, GroupId{1}},
             {NodeId{2}, "P11", Role::OrdinaryPeer, GroupId{1}},
             {NodeId{3}, "PR", Role::PrimaryRelay, GroupId{1}},
             {NodeId{4}, "GO2", Role::GroupOwner, GroupId{2}}};
  t.endpoints = {{NodeId{1}, InterfaceKind::P2pNative, GroupId{1}, kDefaultGoAddr},
                 {NodeId{2}, InterfaceKind::P2pNative, GroupId{1}, kFirstClientAddr},
                 {NodeId{3}, InterfaceKind::P2pNative, GroupId{1}, kFirstClientAddr + 1},
                 {NodeId{3}, InterfaceKind::LegacyClient, GroupId{2}, kFirstClientAddr},
                 {NodeId{4}, InterfaceKind::P2pNative, GroupId{2}, kDefaultGoAddr}};
  return t;
}

}  // namespace

TEST_CASE("topic equality is exact label match") {
  CHECK(TopicId("T1") == TopicId("T1"));
  CHECK(TopicId("T1") != TopicId("t1"));
  CHECK(TopicId("T1") != TopicId("T1 "));
}

TEST_CASE("default GO address renders as 192.168.49.1") {
  CHECK(format_address(kDefaultGoAddr) == "192.168.49.1");
  CHECK(format_address(kFirstClientAddr) == "192.168.49.2");
}

TEST_CASE("relay roles") {
  CHECK(is_relay(Role::PrimaryRelay));
  CHECK(is_relay(Role::SecondaryRelay));
  CHECK_FALSE(is_relay(Role::GroupOwner));
  CHECK_FALSE(is_relay(Role::OrdinaryPeer));
}

TEST_CASE("publication ids order per origin and hash distinctly") {
  PublicationId a{NodeId{1}, 1}, b{NodeId{1}, 2}, c{NodeId{2}, 1};
  CHECK(a < b);
  CHECK(a != c);
  CHECK(std::hash<PublicationId>{}(a) != std::hash<PublicationId>{}(c));
}

TEST_CASE("wire size is header plus body") {
  Publication p;
  p.payload_bytes = 1400;
  CHECK(wire_size(MessageBody{p}) >= kHeaderBytes + 1400);
  CHECK(wire_size(MessageBody{Beacon{}}) > kHeaderBytes);
  CHECK(kind_name(MessageBody{p}) == "pub");
  CHECK(kind_name(MessageBody{JoinRedirect{}}) == "redirect");
}

TEST_CASE("validate_topology: the four-device two-group layout is ok") {
  const auto vs = validate_topology(four_device_two_group());
  for (const auto& v : vs) MESSAGE(v.code << ": " << v.message);
  CHECK(vs.empty());
}

TEST_CASE("validate_topology: two GOs in one group") {
  auto t = four_device_two_group();
  t.nodes[1].role = Role::GroupOwner;
  t.endpoints[1].addr = kDefaultGoAddr;
  const auto vs = validate_topology(t);
  REQUIRE(has_code(vs, "multiple_gos"));
  const auto it = std::find_if(vs.begin(), vs.end(), [](const Violation& v) { return v.code == "multiple_gos"; });
  CHECK(it->message.find("multiple GOs") != std::string::npos);
}

TEST_CASE("validate_topology: GO acting as legacy client") {
  auto t = four_device_two_group();
  t.endpoints.push_back({NodeId{4}, InterfaceKind::LegacyClient, GroupId{1}, kFirstClientAddr + 5});
  const auto vs = validate_topology(t);
  REQUIRE(has_code(vs, "go_legacy_client"));
  const auto it = std::find_if(vs.begin(), vs.end(), [](const Violation& v) { return v.code == "go_legacy_client"; });
  CHECK(it->message.find("GO acting as legacy client") != std::string::npos);
}

TEST_CASE("validate_topology: missing GO and endpoint cardinality") {
  auto t = four_device_two_group();
  t.groups.push_back({GroupId{3}, "g3"});
  t.endpoints.push_back({NodeId{2}, InterfaceKind::P2pNative, GroupId{1}, kFirstClientAddr + 7});
  const auto vs = validate_topology(t);
  CHECK(has_code(vs, "missing_go"));
  CHECK(has_code(vs, "p2p_endpoint_count"));
}

TEST_CASE("validate_topology: GO address rules") {
  auto t = four_device_two_group();
  t.endpoints[0].addr = kFirstClientAddr + 9;
  t.endpoints[1].addr = kDefaultGoAddr;
  const auto vs = validate_topology(t);
  CHECK(has_code(vs, "go_address"));
  CHECK(has_code(vs, "client_uses_go_address"));
}

TEST_CASE("validate_topology: addresses are group-scoped, never global") {
  // Both GOs hold the same default address, and the same client address is
  // reused in both groups: neither is a conflict.
  auto t = four_device_two_group();
  REQUIRE(t.endpoints[0].addr == t.endpoints[4].addr);
  REQUIRE(t.endpoints[1].addr == t.endpoints[3].addr);
  CHECK(validate_topology(t).empty());
  // The same client address twice inside one group is.
  t.endpoints[2].addr = t.endpoints[1].addr;
  CHECK(has_code(validate_topology(t), "duplicate_address"));
}

TEST_CASE("validate_topology: relay rules") {
  SUBCASE("relay without legacy endpoint") {
    auto t = four_device_two_group();
    t.endpoints.erase(t.endpoints.begin() + 3);
    CHECK(has_code(validate_topology(t), "relay_without_legacy"));
  }
  SUBCASE("legacy endpoint on an ordinary peer") {
    auto t = four_device_two_group();
    t.endpoints.push_back({NodeId{2}, InterfaceKind::LegacyClient, GroupId{2}, kFirstClientAddr + 1});
    CHECK(has_code(validate_topology(t), "legacy_on_ordinary_peer"));
  }
  SUBCASE("legacy attach to own group") {
    auto t = four_device_two_group();
    t.endpoints[3].group = GroupId{1};
    t.endpoints[3].addr = kFirstClientAddr + 4;
    CHECK(has_code(validate_topology(t), "legacy_in_native_group"));
  }
  SUBCASE("two native relays in a group") {
    auto t = four_device_two_group();
    t.nodes[1].role = Role::PrimaryRelay;
    t.endpoints.push_back({NodeId{2}, InterfaceKind::LegacyClient, GroupId{2}, kFirstClientAddr + 1});
    const auto vs = validate_topology(t);
    CHECK(has_code(vs, "multiple_native_relays"));
    CHECK(has_code(vs, "multiple_visiting_relays"));
  }
  SUBCASE("relay cycle between two groups") {
    auto t = four_device_two_group();
    t.nodes.push_back({NodeId{5}, "P21", Role::PrimaryRelay, GroupId{2}});
    t.endpoints.push_back({NodeId{5}, InterfaceKind::P2pNative, GroupId{2}, kFirstClientAddr + 1});
    t.endpoints.push_back({NodeId{5}, InterfaceKind::LegacyClient, GroupId{1}, kFirstClientAddr + 2});
    CHECK(has_code(validate_topology(t), "relay_cycle"));
  }
}

TEST_CASE("validate_topology: unknown references") {
  auto t = four_device_two_group();
  t.endpoints.push_back({NodeId{42}, InterfaceKind::P2pNative, GroupId{1}, kFirstClientAddr + 3});
  t.nodes.push_back({NodeId{6}, "X", Role::OrdinaryPeer, GroupId{9}});
  const auto vs = validate_topology(t);
  CHECK(has_code(vs, "unknown_node"));
  CHECK(has_code(vs, "unknown_group"));
}
