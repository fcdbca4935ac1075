#include "swarnet/scenarios/scenario.hpp"

#include <algorithm>

namespace swarnet::scenarios {

std::string ScenarioSpec::label(NodeId id) const {
  auto it = names.find(id);
  return it != names.end() ? it->second : "n" + std::to_string(id.value);
}

std::vector<NodeId> ScenarioSpec::all_nodes() const {
  std::set<NodeId> out;
  for (const auto& g : groups) {
    out.insert(g.owner);
    out.insert(g.members.begin(), g.members.end());
  }
  return {out.begin(), out.end()};
}

const GroupSpec* ScenarioSpec::group(GroupId id) const {
  for (const auto& g : groups) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

std::optional<GroupId> ScenarioSpec::native_group(NodeId id) const {
  for (const auto& g : groups) {
    if (g.owner == id || std::find(g.members.begin(), g.members.end(), id) != g.members.end()) {
      return g.id;
    }
  }
  return std::nullopt;
}

double ScenarioSpec::traffic_start_s() const {
  double last = 0.0;
  for (const auto& e : bootstrap) {
    if (e.kind == ScriptKind::StartTraffic) return e.at_s;
    last = std::max(last, e.at_s);
  }
  return last + 2.0;
}

std::string_view to_string(ScriptKind kind) {
  switch (kind) {
    case ScriptKind::Join: return "join";
    case ScriptKind::Subscribe: return "subscribe";
    case ScriptKind::Unsubscribe: return "unsubscribe";
    case ScriptKind::Promote: return "promote";
    case ScriptKind::Kill: return "kill";
    case ScriptKind::StartTraffic: return "start_traffic";
  }
  return "?";
}

std::optional<ScriptKind> parse_script_kind(std::string_view text) {
  for (auto k : {ScriptKind::Join, ScriptKind::Subscribe, ScriptKind::Unsubscribe,
                 ScriptKind::Promote, ScriptKind::Kill, ScriptKind::StartTraffic}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

std::vector<ScriptEvent> default_bootstrap(const ScenarioSpec& spec) {
  std::vector<ScriptEvent> out;
  for (const auto& g : spec.groups) out.push_back({ScriptKind::Join, 0.0, g.owner, {}, {}});
  for (const auto& g : spec.groups) {
    for (const NodeId m : g.members) out.push_back({ScriptKind::Join, 0.1, m, {}, {}});
  }
  double t = 1.0;
  for (const auto& r : spec.relays) {
    out.push_back({ScriptKind::Promote, t, r.node, {}, r.adjacent});
    t += 1.0;
  }
  for (const auto& [node, topics] : spec.subscriptions) {
    for (const auto& topic : topics) out.push_back({ScriptKind::Subscribe, t, node, topic, {}});
  }
  out.push_back({ScriptKind::StartTraffic, t + 2.0, {}, {}, {}});
  return out;
}

core::TopologyDesc intended_topology(const ScenarioSpec& spec) {
  core::TopologyDesc t;
  std::map<GroupId, core::Address> next_addr;
  std::set<NodeId> relays;
  for (const auto& r : spec.relays) relays.insert(r.node);

  for (const auto& g : spec.groups) {
    t.groups.push_back({g.id, g.ssid});
    t.nodes.push_back({g.owner, spec.label(g.owner), core::Role::GroupOwner, g.id});
    t.endpoints.push_back({g.owner, core::InterfaceKind::P2pNative, g.id, core::kDefaultGoAddr});
    for (const NodeId m : g.members) {
      const auto role = relays.contains(m) ? core::Role::PrimaryRelay : core::Role::OrdinaryPeer;
      t.nodes.push_back({m, spec.label(m), role, g.id});
      auto [it, fresh] = next_addr.try_emplace(g.id, core::kFirstClientAddr);
      t.endpoints.push_back({m, core::InterfaceKind::P2pNative, g.id, it->second++});
    }
  }
  for (const auto& r : spec.relays) {
    auto [it, fresh] = next_addr.try_emplace(r.adjacent, core::kFirstClientAddr);
    t.endpoints.push_back({r.node, core::InterfaceKind::LegacyClient, r.adjacent, it->second++});
  }
  return t;
}

std::vector<core::Violation> validate_scenario(const ScenarioSpec& spec) {
  auto out = core::validate_topology(intended_topology(spec));
  auto report = [&out](std::string code, std::string message) {
    out.push_back({std::move(code), std::move(message)});
  };
  const auto nodes = spec.all_nodes();
  auto known = [&](NodeId n) { return std::binary_search(nodes.begin(), nodes.end(), n); };

  std::map<NodeId, int> memberships;
  for (const auto& g : spec.groups) {
    memberships[g.owner] += 1;
    for (const NodeId m : g.members) memberships[m] += 1;
  }
  for (const auto& [n, count] : memberships) {
    if (count > 1) report("node_in_multiple_groups", spec.label(n) + " is declared in more than one group");
  }
  for (const auto& r : spec.relays) {
    if (spec.native_group(r.node) != r.native) {
      report("relay_native_mismatch", spec.label(r.node) + " is not a member of its declared native group");
    }
    if (spec.group(r.adjacent) == nullptr) {
      report("unknown_group", spec.label(r.node) + " relays into an undeclared group");
    }
  }
  if (!known(spec.source)) report("unknown_source", "traffic source is not a declared node");
  if (!known(spec.sink)) report("unknown_sink", "traffic sink is not a declared node");
  auto subs = spec.subscriptions.find(spec.sink);
  if (subs == spec.subscriptions.end() || !subs->second.contains(spec.topic)) {
    report("sink_not_subscribed", "sink " + spec.label(spec.sink) + " does not subscribe to " + spec.topic.name);
  }
  for (const auto& [n, topics] : spec.subscriptions) {
    if (!known(n)) report("unknown_node", "subscription for undeclared node " + std::to_string(n.value));
  }
  for (const auto& e : spec.bootstrap) {
    if (e.at_s < 0.0) report("negative_time", std::string(to_string(e.kind)) + " event scheduled before t=0");
    if (e.kind == ScriptKind::StartTraffic) continue;
    if (!known(e.node)) {
      report("unknown_node", std::string(to_string(e.kind)) + " event names undeclared node " +
                                 std::to_string(e.node.value));
    }
    if ((e.kind == ScriptKind::Subscribe || e.kind == ScriptKind::Unsubscribe) && !e.topic) {
      report("missing_topic", std::string(to_string(e.kind)) + " event without a topic");
    }
    if (e.kind == ScriptKind::Promote && (!e.group || spec.group(*e.group) == nullptr)) {
      report("unknown_group", "promote event for " + spec.label(e.node) + " names no declared group");
    }
  }
  for (const NodeId n : spec.expected_path) {
    if (!known(n)) report("unknown_node", "expected path names undeclared node " + std::to_string(n.value));
  }
  return out;
}

GroupSpec make_group(GroupId id, NodeId owner, std::vector<NodeId> members) {
  const auto s = std::to_string(id.value);
  return GroupSpec{id, "DIRECT-swarnet-g" + s, "swarnet-pass-" + s, owner, std::move(members)};
}

namespace {

NodeId n(std::uint32_t v) { return NodeId{v}; }
GroupId g(std::uint32_t v) { return GroupId{v}; }

GroupSpec group(std::uint32_t id, std::uint32_t owner, std::vector<NodeId> members) {
  return make_group(g(id), n(owner), std::move(members));
}

ScenarioSpec finish(ScenarioSpec spec) {
  if (spec.bootstrap.empty()) spec.bootstrap = default_bootstrap(spec);
  return spec;
}

ScenarioSpec s2d1g() {
  ScenarioSpec s;
  s.name = "2d1g";
  s.description = "2 devices, 1 group: P11 -> GO1, single hop";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}};
  s.groups = {group(1, 1, {n(2)})};
  s.topic = TopicId("T1");
  s.subscriptions[n(1)] = {s.topic};
  s.source = n(2);
  s.sink = n(1);
  s.expected_path = {n(2), n(1)};
  return finish(std::move(s));
}

ScenarioSpec s3d1g() {
  ScenarioSpec s;
  s.name = "3d1g";
  s.description = "3 devices, 1 group: P11 -> GO1 -> P12";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}, {n(3), "P12"}};
  s.groups = {group(1, 1, {n(2), n(3)})};
  s.topic = TopicId("T1");
  s.subscriptions[n(3)] = {s.topic};
  s.source = n(2);
  s.sink = n(3);
  s.expected_path = {n(2), n(1), n(3)};
  return finish(std::move(s));
}

// Four devices leave no room for a separate P21, so group 2's owner is the
// destination.
ScenarioSpec s4d2g() {
  ScenarioSpec s;
  s.name = "4d2g";
  s.description = "4 devices, 2 groups: P11 -> PR -> GO2 (the group-2 destination)";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}, {n(3), "PR"}, {n(4), "GO2"}};
  s.groups = {group(1, 1, {n(2), n(3)}), group(2, 4, {})};
  s.relays = {{n(3), g(1), g(2)}};
  s.topic = TopicId("T1");
  s.subscriptions[n(4)] = {s.topic};
  s.source = n(2);
  s.sink = n(4);
  s.expected_path = {n(2), n(3), n(4)};
  return finish(std::move(s));
}

ScenarioSpec table4() {
  ScenarioSpec s;
  s.name = "table4";
  s.description = "5 devices, 2 groups: two-group forwarding fixture, P11 subscribes T1 and T2";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}, {n(3), "PR"}, {n(4), "GO2"}, {n(5), "P21"}};
  s.groups = {group(1, 1, {n(2), n(3)}), group(2, 4, {n(5)})};
  s.relays = {{n(3), g(1), g(2)}};
  s.topic = TopicId("T2");
  s.subscriptions[n(2)] = {TopicId("T1"), TopicId("T2")};
  s.source = n(5);
  s.sink = n(2);
  s.expected_path = {n(5), n(3), n(2)};
  return finish(std::move(s));
}

ScenarioSpec s5d3g_clean() {
  ScenarioSpec s;
  s.name = "5d3g-clean";
  s.description =
      "6 devices, 3 groups: P11 -> R1 (SR in G2, PR of G1) -> R2 (PR of G2 and G3) -> GO3";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}, {n(3), "R1"}, {n(4), "GO2"}, {n(5), "R2"}, {n(6), "GO3"}};
  s.groups = {group(1, 1, {n(2), n(3)}), group(2, 4, {n(5)}), group(3, 6, {})};
  s.relays = {{n(5), g(2), g(3)}, {n(3), g(1), g(2)}};
  s.topic = TopicId("T1");
  s.subscriptions[n(6)] = {s.topic};
  s.source = n(2);
  s.sink = n(6);
  s.expected_path = {n(2), n(3), n(5), n(6)};
  return finish(std::move(s));
}

ScenarioSpec s5d3g_5dev() {
  ScenarioSpec s;
  s.name = "5d3g-5dev";
  s.description = "5 devices, 3 groups: the source P11 is itself the first relay; P11 -> R2 -> GO3";
  s.names = {{n(1), "GO1"}, {n(2), "P11"}, {n(3), "GO2"}, {n(4), "R2"}, {n(5), "GO3"}};
  s.groups = {group(1, 1, {n(2)}), group(2, 3, {n(4)}), group(3, 5, {})};
  s.relays = {{n(4), g(2), g(3)}, {n(2), g(1), g(2)}};
  s.topic = TopicId("T1");
  s.subscriptions[n(5)] = {s.topic};
  s.source = n(2);
  s.sink = n(5);
  s.expected_path = {n(2), n(4), n(5)};
  return finish(std::move(s));
}

}  // namespace

std::vector<ScenarioSpec> builtin_scenarios() {
  return {s2d1g(), s3d1g(), s4d2g(), s5d3g_clean(), s5d3g_5dev(), table4()};
}

std::optional<ScenarioSpec> find_builtin(std::string_view name) {
  const std::string_view key = name == "5d3g" ? std::string_view("5d3g-clean") : name;
  for (auto& s : builtin_scenarios()) {
    if (s.name == key) return s;
  }
  return std::nullopt;
}

std::vector<std::string> sweep_scenario_names() { return {"2d1g", "3d1g", "4d2g", "5d3g-clean"}; }

}  // namespace swarnet::scenarios
