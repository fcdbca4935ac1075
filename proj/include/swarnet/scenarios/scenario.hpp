#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarnet/core/ids.hpp"
#include "swarnet/core/topology.hpp"

namespace swarnet::scenarios {

using core::GroupId;
using core::NodeId;
using core::TopicId;

struct GroupSpec {
  GroupId id;
  std::string ssid;
  std::string passphrase;
  NodeId owner;
  std::vector<NodeId> members;
};

struct RelaySpec {
  NodeId node;
  GroupId native;
  GroupId adjacent;
};

enum class ScriptKind { Join, Subscribe, Unsubscribe, Promote, Kill, StartTraffic };

struct ScriptEvent {
  ScriptKind kind = ScriptKind::Join;
  double at_s = 0.0;
  NodeId node;                 // unused by StartTraffic
  std::optional<TopicId> topic;  // Subscribe / Unsubscribe
  std::optional<GroupId> group;  // Promote: group whose credentials are handed over
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  std::map<NodeId, std::string> names;
  std::vector<GroupSpec> groups;
  std::vector<RelaySpec> relays;
  std::map<NodeId, std::set<TopicId>> subscriptions;
  NodeId source;
  NodeId sink;
  TopicId topic;
  std::vector<ScriptEvent> bootstrap;
  std::vector<NodeId> expected_path;

  [[nodiscard]] std::string label(NodeId id) const;
  [[nodiscard]] std::vector<NodeId> all_nodes() const;
  [[nodiscard]] const GroupSpec* group(GroupId id) const;
  [[nodiscard]] std::optional<GroupId> native_group(NodeId id) const;
  // Time of the start_traffic event, or the end of the bootstrap plus a
  // settling margin when the script has none.
  [[nodiscard]] double traffic_start_s() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string_view to_string(ScriptKind kind);
std::optional<ScriptKind> parse_script_kind(std::string_view text);

// Joins at t=0 (owners first), promotions one second apart in declaration
// order, subscriptions after the last promotion, traffic two seconds later.
std::vector<ScriptEvent> default_bootstrap(const ScenarioSpec& spec);

// The final intended layout with relays attached, for validate_topology.
core::TopologyDesc intended_topology(const ScenarioSpec& spec);

// Topology violations plus scenario-level problems (unknown source/sink,
// sink not subscribed, script events naming unknown nodes or groups).
std::vector<core::Violation> validate_scenario(const ScenarioSpec& spec);

// Group with the stock credentials for its id.
GroupSpec make_group(GroupId id, NodeId owner, std::vector<NodeId> members);

std::vector<ScenarioSpec> builtin_scenarios();
std::optional<ScenarioSpec> find_builtin(std::string_view name);
// Names of the four sweep scenarios in report order.
std::vector<std::string> sweep_scenario_names();

}  // namespace swarnet::scenarios
