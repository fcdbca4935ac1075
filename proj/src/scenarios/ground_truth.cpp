#include "swarnet/scenarios/ground_truth.hpp"

#include <deque>
#include <sstream>

namespace swarnet::scenarios {

using core::GroupId;
using core::InterfaceKind;
using core::NodeId;

namespace {

bool legacy_in(const protocol::NodeState& s, GroupId g) {
  const core::Endpoint* ep = s.endpoint_in(g);
  return ep != nullptr && ep->iface == InterfaceKind::LegacyClient;
}

}  // namespace

GlobalState observe_global_state(const sim::Simulator& sim) {
  GlobalState out;
  std::map<GroupId, NodeId> anchor_of;
  for (const NodeId id : sim.node_ids()) {
    if (!sim.alive(id)) continue;
    const auto& s = sim.node(id);
    if (!s.registry) continue;
    if (!sim.alive(s.registry->anchor)) {
      out.inconsistencies.push_back("group " + std::to_string(s.native.group.value) +
                                    " is anchored by dead node " +
                                    std::to_string(s.registry->anchor.value));
      continue;
    }
    anchor_of[s.native.group] = s.registry->anchor;
    out.attached.insert(id);
    out.forwarders.insert(s.registry->anchor);
  }

  std::set<routing::BackboneEdge> edges;
  auto attach = [&](NodeId id, const protocol::Membership& m) {
    if (!m.accepted) return;
    auto a = anchor_of.find(m.group);
    if (a == anchor_of.end()) return;
    out.attached.insert(id);
    if (m.anchor != a->second) {
      out.inconsistencies.push_back("node " + std::to_string(id.value) + " in group " +
                                    std::to_string(m.group.value) + " points at the wrong anchor");
    }
    if (a->second == id) return;
    const auto& anchor = sim.node(a->second);
    const bool legacy = legacy_in(sim.node(id), m.group) || legacy_in(anchor, m.group);
    NodeId lo = std::min(id, a->second);
    NodeId hi = std::max(id, a->second);
    edges.insert({lo, hi, legacy ? routing::EdgeKind::InterGroupLegacy : routing::EdgeKind::IntraGroupP2p});
  };
  for (const NodeId id : sim.node_ids()) {
    if (!sim.alive(id)) continue;
    const auto& s = sim.node(id);
    attach(id, s.native);
    if (s.visiting) attach(id, *s.visiting);
    if (core::is_relay(s.role)) out.forwarders.insert(id);
  }
  for (const NodeId id : out.attached) out.subscriptions[id] = sim.node(id).subscriptions;
  std::erase_if(out.forwarders, [&](NodeId n) { return !out.attached.contains(n); });
  out.backbone.assign(edges.begin(), edges.end());
  return out;
}

routing::TableSet ground_truth_tables(const GlobalState& state, routing::AnchorFanout fanout) {
  std::map<NodeId, std::vector<const routing::BackboneEdge*>> adj;
  for (const auto& e : state.backbone) {
    adj[e.a].push_back(&e);
    adj[e.b].push_back(&e);
  }
  routing::TableSet out;
  std::set<NodeId> seen;
  for (const NodeId start : state.attached) {
    if (seen.contains(start)) continue;
    std::set<NodeId> comp{start};
    std::set<const routing::BackboneEdge*> comp_edges;
    std::deque<NodeId> frontier{start};
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop_front();
      for (const auto* e : adj[u]) {
        comp_edges.insert(e);
        const NodeId v = e->a == u ? e->b : e->a;
        if (comp.insert(v).second) frontier.push_back(v);
      }
    }
    seen.insert(comp.begin(), comp.end());

    routing::AnchorView view;
    view.anchor = *comp.begin();
    for (const NodeId n : comp) {
      if (state.forwarders.contains(n)) {
        view.anchor = n;
        break;
      }
    }
    for (const auto* e : comp_edges) view.backbone.push_back(*e);
    for (const NodeId n : comp) {
      if (state.forwarders.contains(n)) view.relays.insert(n);
      if (auto it = state.subscriptions.find(n); it != state.subscriptions.end()) {
        view.subscriptions[n] = it->second;
      }
    }
    auto tables = routing::recompute_tables(view, fanout);
    for (const NodeId n : comp) out[n] = std::move(tables[n]);
  }
  return out;
}

std::string format_table(const routing::ForwardingTable& table) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& [topic, hops] : table) {
    if (!first) os << ", ";
    first = false;
    os << topic.name << ":[";
    bool f2 = true;
    for (const NodeId n : hops) {
      if (!f2) os << ',';
      f2 = false;
      os << n.value;
    }
    os << ']';
  }
  os << '}';
  return os.str();
}

std::vector<std::string> table_mismatches(const sim::Simulator& sim, const GlobalState& state,
                                          const routing::TableSet& expected) {
  std::vector<std::string> out;
  for (const NodeId n : state.attached) {
    const auto& got = sim.node(n).table;
    auto it = expected.find(n);
    const routing::ForwardingTable empty;
    const auto& want = it == expected.end() ? empty : it->second;
    if (got != want) {
      out.push_back("node " + std::to_string(n.value) + ": have " + format_table(got) + ", want " +
                    format_table(want));
    }
  }
  return out;
}

}  // namespace swarnet::scenarios
