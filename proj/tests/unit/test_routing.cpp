#include "doctest.h"

#include <random>

#include "swarnet/routing/forwarding.hpp"
#include "swarnet/routing/recompute.hpp"
#include "swarnet/routing/tables.hpp"

using namespace swarnet::routing;
using swarnet::core::NodeId;
using swarnet::core::TopicId;

namespace {

const NodeId GO1{1}, P11{2}, PR{3}, GO2{4}, P21{5};
const TopicId T1("T1"), T2("T2");

// Star centred at PR: P2P edges to GO1 and P11, legacy edges to GO2 and P21.
AnchorView two_group_view() {
  AnchorView v;
  v.anchor = PR;
  v.relays = {PR};
  v.backbone = {{PR, GO1, EdgeKind::IntraGroupP2p},
                {PR, P11, EdgeKind::IntraGroupP2p},
                {PR, GO2, EdgeKind::InterGroupLegacy},
                {PR, P21, EdgeKind::InterGroupLegacy}};
  v.subscriptions = {{GO1, {}}, {P11, {T1, T2}}, {PR, {}}, {GO2, {}}, {P21, {}}};
  return v;
}

NextHops hops(const TableSet& t, NodeId n, const TopicId& topic) { return next_hops(t.at(n), topic); }

// Random tree of n nodes rooted at node 1; forwarders are the anchor plus
// every interior node, so non-forwarders are leaves.
AnchorView random_view(std::mt19937_64& rng, int n, int topics) {
  AnchorView v;
  v.anchor = NodeId{1};
  std::vector<int> degree(n + 1, 0);
  for (int i = 2; i <= n; ++i) {
    const int parent = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(i - 1));
    const bool legacy = rng() % 3 == 0;
    v.backbone.push_back({NodeId{static_cast<std::uint32_t>(parent)}, NodeId{static_cast<std::uint32_t>(i)},
                          legacy ? EdgeKind::InterGroupLegacy : EdgeKind::IntraGroupP2p});
    degree[parent] += 1;
    degree[i] += 1;
    if (legacy) v.relays.insert(NodeId{static_cast<std::uint32_t>(parent)});
  }
  for (int i = 1; i <= n; ++i) {
    if (degree[i] > 1) v.relays.insert(NodeId{static_cast<std::uint32_t>(i)});
    LocalSubscriptionSet l;
    for (int t = 0; t < topics; ++t) {
      if (rng() % 3 == 0) l.insert(TopicId("T" + std::to_string(t)));
    }
    v.subscriptions[NodeId{static_cast<std::uint32_t>(i)}] = l;
  }
  return v;
}

}  // namespace

TEST_CASE("subscribe examples") {
  CHECK(subscribe({}, T1) == LocalSubscriptionSet{T1});
  CHECK(subscribe({T1}, T1) == LocalSubscriptionSet{T1});
  CHECK(subscribe({T1}, T2) == LocalSubscriptionSet{T1, T2});
}

TEST_CASE("unsubscribe examples") {
  CHECK(unsubscribe({T1, T2}, T2) == LocalSubscriptionSet{T1});
  CHECK(unsubscribe({}, T1).empty());
  CHECK(subscribe(unsubscribe({T1}, T1), T1) == LocalSubscriptionSet{T1});
}

TEST_CASE("recompute: two-group fixture, subscriber-directed") {
  const auto t = recompute_tables(two_group_view());
  CHECK(hops(t, GO1, T2) == NextHops{PR});
  CHECK(hops(t, P11, T2) == NextHops{PR});
  CHECK(hops(t, GO2, T2) == NextHops{PR});
  CHECK(hops(t, P21, T2) == NextHops{PR});
  CHECK(hops(t, PR, T1) == NextHops{P11});
  CHECK(hops(t, PR, T2) == NextHops{P11});
}

TEST_CASE("recompute: two-group fixture, all-endpoints anchor fanout") {
  auto v = two_group_view();
  SUBCASE("nothing published yet matches subscriber-directed") {
    CHECK(recompute_tables(v, AnchorFanout::AllEndpoints) == recompute_tables(v));
  }
  v.published = {T2};
  const auto t = recompute_tables(v, AnchorFanout::AllEndpoints);
  CHECK(hops(t, PR, T2) == NextHops{P11, GO2, P21});
  CHECK(hops(t, PR, T1) == NextHops{P11});
  CHECK(hops(t, GO1, T2) == NextHops{PR});
  CHECK(hops(t, P11, T2) == NextHops{PR});
  CHECK(hops(t, GO2, T2) == NextHops{PR});
  CHECK(hops(t, P21, T2) == NextHops{PR});
}

TEST_CASE("recompute: no subscribers means empty tables everywhere") {
  auto v = two_group_view();
  for (auto& [n, l] : v.subscriptions) l.clear();
  for (const auto& [n, table] : recompute_tables(v)) CHECK(table.empty());
}

TEST_CASE("recompute: rejects views that are not trees") {
  SUBCASE("cycle") {
    auto v = two_group_view();
    v.backbone.push_back({GO1, P11, EdgeKind::IntraGroupP2p});
    CHECK_THROWS_AS(recompute_tables(v), InvalidView);
  }
  SUBCASE("disconnected") {
    auto v = two_group_view();
    v.backbone.pop_back();
    v.backbone.push_back({GO2, NodeId{9}, EdgeKind::IntraGroupP2p});
    v.backbone.push_back({NodeId{9}, NodeId{10}, EdgeKind::IntraGroupP2p});
    CHECK_THROWS_AS(recompute_tables(v), InvalidView);
  }
  SUBCASE("self loop") {
    auto v = two_group_view();
    v.backbone.push_back({GO1, GO1, EdgeKind::IntraGroupP2p});
    CHECK_THROWS_AS(recompute_tables(v), InvalidView);
  }
  SUBCASE("legacy edge without relay") {
    auto v = two_group_view();
    v.relays.clear();
    CHECK_THROWS_AS(recompute_tables(v), InvalidView);
  }
  SUBCASE("subscriber outside the backbone") {
    auto v = two_group_view();
    v.subscriptions[NodeId{77}] = {T1};
    CHECK_THROWS_AS(recompute_tables(v), InvalidView);
  }
}

TEST_CASE("recompute: idempotent and ordinary peers point at their neighbour") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto v = random_view(rng, 2 + static_cast<int>(rng() % 7), 4);
    const auto a = recompute_tables(v);
    CHECK(a == recompute_tables(v));
    for (const auto& [n, table] : a) {
      if (n == v.anchor || v.relays.contains(n)) continue;
      for (const auto& [topic, next] : table) {
        CHECK(next.size() == 1);
        CHECK_FALSE(next.contains(n));
      }
    }
  }
}

TEST_CASE("recompute: per-topic isolation of unsubscribe") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    auto v = random_view(rng, 3 + static_cast<int>(rng() % 6), 4);
    const auto before = recompute_tables(v);
    auto& subs = v.subscriptions.begin()->second;
    if (subs.empty()) continue;
    const TopicId gone = *subs.begin();
    subs.erase(gone);
    const auto after = recompute_tables(v);
    for (const auto& [n, table] : before) {
      for (const auto& [topic, next] : table) {
        if (topic != gone) CHECK(next_hops(after.at(n), topic) == next);
      }
    }
  }
}

TEST_CASE("forward_decision examples") {
  const auto t = recompute_tables(two_group_view());
  SUBCASE("relay forwards toward the subscriber, excluding the arrival hop") {
    const auto d = forward_decision(PR, {}, t.at(PR), T1, GO2);
    CHECK_FALSE(d.deliver_locally);
    CHECK(d.send_to == std::vector<NodeId>{P11});
  }
  SUBCASE("arrival-hop exclusion stops the echo") {
    const auto d = forward_decision(P11, {T1, T2}, t.at(P11), T2, PR);
    CHECK(d.deliver_locally);
    CHECK(d.send_to.empty());
  }
  SUBCASE("unsubscribed topic with empty table") {
    const auto d = forward_decision(GO1, {}, ForwardingTable{}, TopicId("T9"), std::nullopt);
    CHECK_FALSE(d.deliver_locally);
    CHECK(d.send_to.empty());
  }
}

TEST_CASE("flood_oracle examples") {
  const auto v = two_group_view();
  CHECK(flood_oracle(v.backbone, v.subscriptions, GO2, T2) == std::set<NodeId>{P11});
  CHECK(flood_oracle(v.backbone, v.subscriptions, GO2, TopicId("T9")).empty());
  CHECK_THROWS_AS(flood_oracle(v.backbone, v.subscriptions, NodeId{99}, T1), UnknownOrigin);
}

TEST_CASE("four-node line: three transmissions, delivery only at the subscriber") {
  AnchorView v;
  v.anchor = NodeId{2};
  v.relays = {NodeId{3}};
  v.backbone = {{NodeId{1}, NodeId{2}, EdgeKind::IntraGroupP2p},
                {NodeId{2}, NodeId{3}, EdgeKind::IntraGroupP2p},
                {NodeId{3}, NodeId{4}, EdgeKind::InterGroupLegacy}};
  v.subscriptions = {{NodeId{4}, {T1}}};
  const auto trace = trace_delivery(recompute_tables(v), v.subscriptions, NodeId{1}, T1);
  CHECK(trace.transmissions == 3);
  CHECK(trace.deliveries == std::map<NodeId, int>{{NodeId{4}, 1}});
}

TEST_CASE("tree routing equals flooding on random views, exactly once") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const auto v = random_view(rng, n, 5);
    const auto tables = recompute_tables(v);
    const NodeId origin{1 + static_cast<std::uint32_t>(rng() % n)};
    const TopicId topic("T" + std::to_string(rng() % 5));
    const auto trace = trace_delivery(tables, v.subscriptions, origin, topic);
    const auto expected = flood_oracle(v.backbone, v.subscriptions, origin, topic);
    std::set<NodeId> got;
    for (const auto& [node, count] : trace.deliveries) {
      CHECK(count == 1);
      got.insert(node);
    }
    CHECK(got == expected);
    CHECK(trace.transmissions <= static_cast<int>(v.backbone.size()));
  }
}

TEST_CASE("fanout names round-trip") {
  CHECK(parse_fanout(to_string(AnchorFanout::AllEndpoints)) == AnchorFanout::AllEndpoints);
  CHECK(parse_fanout(to_string(AnchorFanout::SubscriberDirected)) == AnchorFanout::SubscriberDirected);
  CHECK_FALSE(parse_fanout("flood").has_value());
}
