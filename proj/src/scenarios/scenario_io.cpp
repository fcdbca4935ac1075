#include "swarnet/scenarios/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace swarnet::scenarios {
namespace {

using nlohmann::json;

NodeId node_at(const json& j, const char* key) { return NodeId{j.at(key).get<std::uint32_t>()}; }

ScriptEvent parse_event(const json& j) {
  ScriptEvent e;
  const auto kind_text = j.at("event").get<std::string>();
  const auto kind = parse_script_kind(kind_text);
  if (!kind) throw ScenarioError("unknown bootstrap event '" + kind_text + "'");
  e.kind = *kind;
  e.at_s = j.value("at", 0.0);
  if (j.contains("node")) e.node = node_at(j, "node");
  if (j.contains("topic")) e.topic = TopicId(j.at("topic").get<std::string>());
  if (j.contains("group")) e.group = GroupId{j.at("group").get<std::uint32_t>()};
  if (e.kind != ScriptKind::StartTraffic && !j.contains("node")) {
    throw ScenarioError("bootstrap event '" + kind_text + "' needs a node");
  }
  return e;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    ScenarioSpec s;
    s.name = j.at("name").get<std::string>();
    s.description = j.value("description", std::string{});
    for (const auto& nj : j.value("nodes", json::array())) {
      s.names[node_at(nj, "id")] = nj.at("name").get<std::string>();
    }
    for (const auto& gj : j.at("groups")) {
      GroupSpec g;
      g.id = GroupId{gj.at("id").get<std::uint32_t>()};
      g.ssid = gj.at("ssid").get<std::string>();
      g.passphrase = gj.value("passphrase", std::string{});
      g.owner = node_at(gj, "owner");
      for (const auto& m : gj.value("members", json::array())) g.members.push_back(NodeId{m.get<std::uint32_t>()});
      s.groups.push_back(std::move(g));
    }
    for (const auto& rj : j.value("relays", json::array())) {
      s.relays.push_back({node_at(rj, "node"), GroupId{rj.at("native").get<std::uint32_t>()},
                          GroupId{rj.at("adjacent").get<std::uint32_t>()}});
    }
    for (const auto& sj : j.value("subscriptions", json::array())) {
      auto& topics = s.subscriptions[node_at(sj, "node")];
      for (const auto& t : sj.at("topics")) topics.insert(TopicId(t.get<std::string>()));
    }
    s.source = node_at(j, "source");
    s.sink = node_at(j, "sink");
    s.topic = TopicId(j.at("topic").get<std::string>());
    if (j.contains("bootstrap")) {
      for (const auto& ej : j.at("bootstrap")) s.bootstrap.push_back(parse_event(ej));
    } else {
      s.bootstrap = default_bootstrap(s);
    }
    for (const auto& p : j.value("expected_path", json::array())) s.expected_path.push_back(NodeId{p.get<std::uint32_t>()});
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["name"] = s.name;
  j["description"] = s.description;
  j["nodes"] = json::array();
  for (const auto& [id, name] : s.names) j["nodes"].push_back({{"id", id.value}, {"name", name}});
  j["groups"] = json::array();
  for (const auto& g : s.groups) {
    json members = json::array();
    for (const NodeId m : g.members) members.push_back(m.value);
    j["groups"].push_back({{"id", g.id.value},
                           {"ssid", g.ssid},
                           {"passphrase", g.passphrase},
                           {"owner", g.owner.value},
                           {"members", members}});
  }
  j["relays"] = json::array();
  for (const auto& r : s.relays) {
    j["relays"].push_back({{"node", r.node.value}, {"native", r.native.value}, {"adjacent", r.adjacent.value}});
  }
  j["subscriptions"] = json::array();
  for (const auto& [node, topics] : s.subscriptions) {
    json ts = json::array();
    for (const auto& t : topics) ts.push_back(t.name);
    j["subscriptions"].push_back({{"node", node.value}, {"topics", ts}});
  }
  j["source"] = s.source.value;
  j["sink"] = s.sink.value;
  j["topic"] = s.topic.name;
  j["bootstrap"] = json::array();
  for (const auto& e : s.bootstrap) {
    json ej{{"at", e.at_s}, {"event", std::string(to_string(e.kind))}};
    if (e.kind != ScriptKind::StartTraffic) ej["node"] = e.node.value;
    if (e.topic) ej["topic"] = e.topic->name;
    if (e.group) ej["group"] = e.group->value;
    j["bootstrap"].push_back(std::move(ej));
  }
  j["expected_path"] = json::array();
  for (const NodeId p : s.expected_path) j["expected_path"].push_back(p.value);
  return j.dump(2) + "\n";
}

void save_scenario(const ScenarioSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write scenario file " + path.string());
  out << scenario_to_json(spec);
}

}  // namespace swarnet::scenarios
