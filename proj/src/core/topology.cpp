#include "swarnet/core/topology.hpp"

#include <map>
#include <set>
#include <tuple>

namespace swarnet::core {
namespace {

std::string node_label(const std::map<NodeId, const NodeDecl*>& nodes, NodeId id) {
  auto it = nodes.find(id);
  if (it != nodes.end() && !it->second->name.empty()) return it->second->name;
  return "node#" + std::to_string(id.value);
}

std::string group_label(const std::map<GroupId, const GroupDecl*>& groups, GroupId id) {
  auto it = groups.find(id);
  if (it != groups.end() && !it->second->ssid.empty()) return it->second->ssid;
  return "group#" + std::to_string(id.value);
}

}  // namespace

std::vector<Violation> validate_topology(const TopologyDesc& topology) {
  std::vector<Violation> out;
  auto report = [&out](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };

  std::map<NodeId, const NodeDecl*> nodes;
  for (const auto& n : topology.nodes) {
    if (!nodes.emplace(n.id, &n).second) {
      report("duplicate_node", "node id " + std::to_string(n.id.value) + " declared twice");
    }
  }
  std::map<GroupId, const GroupDecl*> groups;
  for (const auto& g : topology.groups) {
    if (!groups.emplace(g.id, &g).second) {
      report("duplicate_group", "group id " + std::to_string(g.id.value) + " declared twice");
    }
  }

  std::map<GroupId, std::vector<NodeId>> owners;
  for (const auto& n : topology.nodes) {
    if (!groups.contains(n.native_group)) {
      report("unknown_group", node_label(nodes, n.id) + " is native to an undeclared group");
      continue;
    }
    if (n.role == Role::GroupOwner) owners[n.native_group].push_back(n.id);
  }
  for (const auto& g : topology.groups) {
    const auto count = owners[g.id].size();
    if (count == 0) report("missing_go", group_label(groups, g.id) + " has no group owner");
    if (count > 1) report("multiple_gos", group_label(groups, g.id) + " declares multiple GOs");
  }

  std::map<NodeId, std::vector<const Endpoint*>> p2p;
  std::map<NodeId, std::vector<const Endpoint*>> legacy;
  std::map<std::tuple<GroupId, InterfaceKind, Address>, NodeId> addr_owner;
  for (const auto& ep : topology.endpoints) {
    if (!nodes.contains(ep.node)) {
      report("unknown_node", "endpoint references undeclared node " + std::to_string(ep.node.value));
      continue;
    }
    if (!groups.contains(ep.group)) {
      report("unknown_group", node_label(nodes, ep.node) + " has an endpoint in an undeclared group");
      continue;
    }
    (ep.iface == InterfaceKind::P2pNative ? p2p : legacy)[ep.node].push_back(&ep);

    // GO addresses collide by construction; skip them in the uniqueness check.
    if (ep.addr == kDefaultGoAddr && ep.iface == InterfaceKind::P2pNative) continue;
    auto [it, inserted] = addr_owner.emplace(std::tuple{ep.group, ep.iface, ep.addr}, ep.node);
    if (!inserted && it->second != ep.node) {
      report("duplicate_address", format_address(ep.addr) + " assigned twice in " +
                                      group_label(groups, ep.group));
    }
  }

  // Relay edges of the group graph: native group -> adjacent group.
  std::map<GroupId, std::vector<NodeId>> native_relays;
  std::map<GroupId, std::vector<NodeId>> visiting_relays;
  std::map<GroupId, GroupId> relay_edge;

  for (const auto& n : topology.nodes) {
    const auto label = node_label(nodes, n.id);
    const auto& own_p2p = p2p[n.id];
    const auto& own_legacy = legacy[n.id];
    if (own_p2p.size() != 1) {
      report("p2p_endpoint_count", label + " has " + std::to_string(own_p2p.size()) +
                                       " P2P endpoints (expected exactly 1)");
    }
    if (own_legacy.size() > 1) {
      report("legacy_endpoint_count", label + " has " + std::to_string(own_legacy.size()) +
                                          " legacy endpoints (expected at most 1)");
    }
    for (const auto* ep : own_p2p) {
      if (ep->group != n.native_group) {
        report("p2p_outside_native_group", label + " holds a P2P endpoint outside its native group");
      }
      if (n.role == Role::GroupOwner && ep->addr != kDefaultGoAddr) {
        report("go_address", label + " P2P address " + format_address(ep->addr) +
                                 " differs from the default GO address");
      }
      if (n.role != Role::GroupOwner && ep->addr == kDefaultGoAddr) {
        report("client_uses_go_address", label + " uses the default GO address as a client");
      }
    }
    if (n.role == Role::GroupOwner && !own_legacy.empty()) {
      report("go_legacy_client", label + ": GO acting as legacy client");
    }
    if (is_relay(n.role) && own_legacy.empty()) {
      report("relay_without_legacy", label + " is a relay without a legacy endpoint");
    }
    if (n.role == Role::OrdinaryPeer && !own_legacy.empty()) {
      report("legacy_on_ordinary_peer", label + " holds a legacy endpoint but is not a relay");
    }
    if (is_relay(n.role) && own_legacy.size() == 1) {
      const GroupId adjacent = own_legacy.front()->group;
      if (adjacent == n.native_group) {
        report("legacy_in_native_group", label + " attaches as legacy client to its own group");
        continue;
      }
      native_relays[n.native_group].push_back(n.id);
      visiting_relays[adjacent].push_back(n.id);
      relay_edge[n.native_group] = adjacent;
    }
  }

  for (const auto& g : topology.groups) {
    if (native_relays[g.id].size() > 1) {
      report("multiple_native_relays", group_label(groups, g.id) + " has more than one native relay");
    }
    if (visiting_relays[g.id].size() > 1) {
      report("multiple_visiting_relays",
             group_label(groups, g.id) + " hosts more than one non-native relay");
    }
  }

  // Each group has at most one outgoing relay edge, so following the edges
  // either terminates or revisits a group.
  std::set<GroupId> reported;
  for (const auto& [start, next] : relay_edge) {
    std::set<GroupId> seen{start};
    GroupId cur = next;
    while (true) {
      if (seen.contains(cur)) {
        if (cur == start && !reported.contains(start)) {
          for (auto g : seen) reported.insert(g);
          report("relay_cycle", "relay attachments form a cycle through " + group_label(groups, start));
        }
        break;
      }
      seen.insert(cur);
      auto it = relay_edge.find(cur);
      if (it == relay_edge.end()) break;
      cur = it->second;
    }
  }
  return out;
}

}  // namespace swarnet::core
