#include "swarnet/routing/recompute.hpp"

#include <algorithm>
#include <deque>

namespace swarnet::routing {
namespace {

using TopicCounts = std::map<TopicId, int>;

struct Neighbor {
  NodeId node;
  EdgeKind kind;
};

void add_counts(TopicCounts& into, const TopicCounts& from) {
  for (const auto& [t, c] : from) into[t] += c;
}

int count_of(const TopicCounts& counts, const TopicId& topic) {
  auto it = counts.find(topic);
  return it == counts.end() ? 0 : it->second;
}

}  // namespace

std::set<NodeId> view_nodes(const AnchorView& view) {
  std::set<NodeId> nodes{view.anchor};
  for (const auto& e : view.backbone) {
    nodes.insert(e.a);
    nodes.insert(e.b);
  }
  return nodes;
}

TableSet recompute_tables(const AnchorView& view, AnchorFanout fanout) {
  const auto nodes = view_nodes(view);

  std::map<NodeId, std::vector<Neighbor>> adj;
  std::set<std::pair<NodeId, NodeId>> seen_edges;
  for (const auto& e : view.backbone) {
    if (e.a == e.b) throw InvalidView("backbone contains a self-loop");
    auto key = std::minmax(e.a, e.b);
    if (!seen_edges.insert({key.first, key.second}).second) {
      throw InvalidView("backbone contains a duplicate edge");
    }
    if (e.kind == EdgeKind::InterGroupLegacy && !view.relays.contains(e.a) &&
        !view.relays.contains(e.b)) {
      throw InvalidView("inter-group edge without a relay endpoint");
    }
    adj[e.a].push_back({e.b, e.kind});
    adj[e.b].push_back({e.a, e.kind});
  }
  if (view.backbone.size() + 1 != nodes.size()) throw InvalidView("backbone is not a tree");

  for (const auto& [node, topics] : view.subscriptions) {
    if (!nodes.contains(node)) throw InvalidView("subscription for a node outside the backbone");
  }

  auto is_forwarder = [&](NodeId n) { return n == view.anchor || view.relays.contains(n); };
  for (const auto& [node, neighbors] : adj) {
    if (!is_forwarder(node) && neighbors.size() > 1) {
      throw InvalidView("non-forwarding node is not a leaf");
    }
  }

  // Root the tree at the anchor.
  std::map<NodeId, NodeId> parent;
  std::vector<NodeId> order;
  std::deque<NodeId> frontier{view.anchor};
  std::set<NodeId> visited{view.anchor};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    order.push_back(u);
    for (const auto& nb : adj[u]) {
      if (visited.insert(nb.node).second) {
        parent[nb.node] = u;
        frontier.push_back(nb.node);
      }
    }
  }
  if (order.size() != nodes.size()) throw InvalidView("backbone is not connected");

  // Subscriber counts within each rooted subtree.
  std::map<NodeId, TopicCounts> down;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    auto& counts = down[*it];
    if (auto s = view.subscriptions.find(*it); s != view.subscriptions.end()) {
      for (const auto& t : s->second) counts[t] += 1;
    }
    if (auto p = parent.find(*it); p != parent.end()) add_counts(down[p->second], counts);
  }
  const TopicCounts& total = down[view.anchor];

  TableSet tables;
  for (const NodeId u : order) {
    auto& table = tables[u];
    const auto& neighbors = adj[u];
    if (!is_forwarder(u)) {
      if (neighbors.empty()) continue;
      const NodeId up = neighbors.front().node;
      for (const auto& [topic, count] : total) {
        if (count > 0) table[topic].insert(up);
      }
      continue;
    }
    const auto parent_it = parent.find(u);
    for (const auto& [topic, count] : total) {
      if (count == 0) continue;
      NextHops hops;
      for (const auto& nb : neighbors) {
        const bool toward_parent = parent_it != parent.end() && parent_it->second == nb.node;
        const int beyond = toward_parent ? count - count_of(down[u], topic) : count_of(down[nb.node], topic);
        if (beyond > 0) hops.insert(nb.node);
      }
      if (fanout == AnchorFanout::AllEndpoints && u == view.anchor) {
        const auto own = view.subscriptions.find(u);
        const bool local = own != view.subscriptions.end() && own->second.contains(topic);
        if (!local && view.published.contains(topic)) {
          for (const auto& nb : neighbors) {
            if (nb.kind == EdgeKind::InterGroupLegacy) hops.insert(nb.node);
          }
        }
      }
      if (!hops.empty()) table[topic] = std::move(hops);
    }
  }
  return tables;
}

std::string_view to_string(AnchorFanout fanout) {
  return fanout == AnchorFanout::SubscriberDirected ? "subscriber-directed" : "all-endpoints";
}

std::optional<AnchorFanout> parse_fanout(std::string_view text) {
  if (text == "subscriber-directed") return AnchorFanout::SubscriberDirected;
  if (text == "all-endpoints") return AnchorFanout::AllEndpoints;
  return std::nullopt;
}

}  // namespace swarnet::routing
