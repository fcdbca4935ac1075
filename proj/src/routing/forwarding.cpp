#include "swarnet/routing/forwarding.hpp"

#include <deque>
#include <utility>

namespace swarnet::routing {

ForwardDecision forward_decision(NodeId self, const LocalSubscriptionSet& local,
                                 const ForwardingTable& table, const TopicId& topic,
                                 std::optional<NodeId> arrival) {
  ForwardDecision out;
  out.deliver_locally = local.contains(topic);
  const auto& hops = next_hops(table, topic);
  out.send_to.reserve(hops.size());
  for (const NodeId v : hops) {
    if (v == self || (arrival && *arrival == v)) continue;
    out.send_to.push_back(v);
  }
  return out;
}

std::set<NodeId> flood_oracle(const BackboneGraph& backbone,
                              const std::map<NodeId, LocalSubscriptionSet>& subscriptions,
                              NodeId origin, const TopicId& topic) {
  std::map<NodeId, std::vector<NodeId>> adj;
  for (const auto& e : backbone) {
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  if (!adj.contains(origin) && !subscriptions.contains(origin)) {
    throw UnknownOrigin("flood origin is not part of the topology");
  }

  std::set<NodeId> reached{origin};
  std::deque<NodeId> frontier{origin};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (const NodeId v : adj[u]) {
      if (reached.insert(v).second) frontier.push_back(v);
    }
  }

  std::set<NodeId> out;
  for (const NodeId n : reached) {
    auto it = subscriptions.find(n);
    if (it != subscriptions.end() && it->second.contains(topic)) out.insert(n);
  }
  return out;
}

DeliveryTrace trace_delivery(const TableSet& tables,
                             const std::map<NodeId, LocalSubscriptionSet>& subscriptions,
                             NodeId origin, const TopicId& topic) {
  static const ForwardingTable kNoTable;
  static const LocalSubscriptionSet kNoSubs;
  auto table_of = [&](NodeId n) -> const ForwardingTable& {
    auto it = tables.find(n);
    return it == tables.end() ? kNoTable : it->second;
  };
  auto subs_of = [&](NodeId n) -> const LocalSubscriptionSet& {
    auto it = subscriptions.find(n);
    return it == subscriptions.end() ? kNoSubs : it->second;
  };

  DeliveryTrace trace;
  std::set<NodeId> seen;
  // (node, arrival-from)
  std::deque<std::pair<NodeId, std::optional<NodeId>>> pending{{origin, std::nullopt}};
  while (!pending.empty()) {
    auto [u, from] = pending.front();
    pending.pop_front();
    if (!seen.insert(u).second) continue;
    const auto d = forward_decision(u, subs_of(u), table_of(u), topic, from);
    if (d.deliver_locally) trace.deliveries[u] += 1;
    for (const NodeId v : d.send_to) {
      ++trace.transmissions;
      pending.emplace_back(v, u);
    }
  }
  return trace;
}

}  // namespace swarnet::routing
