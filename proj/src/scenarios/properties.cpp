#include "swarnet/scenarios/properties.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "swarnet/routing/forwarding.hpp"

namespace swarnet::scenarios {
namespace {

sim::SimTime to_us(double seconds) { return static_cast<sim::SimTime>(std::llround(seconds * 1e6)); }

int uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& xs) {
  return xs[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(xs.size()) - 1))];
}

TopicId topic_name(int i) { return TopicId("T" + std::to_string(i)); }

RunOptions lossless_options(routing::AnchorFanout fanout) {
  RunOptions opt;
  opt.sim.radio.queue_capacity = std::size_t{1} << 20;
  opt.sim.protocol.fanout = fanout;
  return opt;
}

std::string describe(const std::set<NodeId>& xs) {
  std::string out = "{";
  for (const NodeId n : xs) {
    if (out.size() > 1) out += ',';
    out += std::to_string(n.value);
  }
  return out + "}";
}

// Groups with their owners plus `peers` extra nodes spread across them.
ScenarioSpec random_groups(std::mt19937_64& rng, int groups, int peers) {
  ScenarioSpec spec;
  std::uint32_t next = 1;
  for (int g = 1; g <= groups; ++g) {
    spec.groups.push_back(make_group(GroupId{static_cast<std::uint32_t>(g)}, NodeId{next++}, {}));
  }
  for (int i = 0; i < peers; ++i) {
    auto& g = spec.groups[static_cast<std::size_t>(uniform(rng, 0, groups - 1))];
    g.members.push_back(NodeId{next++});
  }
  for (const NodeId n : spec.all_nodes()) spec.names[n] = "N" + std::to_string(n.value);
  return spec;
}

}  // namespace

OracleInstance random_oracle_instance(std::mt19937_64& rng) {
  const int groups = uniform(rng, 1, 3);
  const int relays = groups - 1;
  const int total = uniform(rng, std::max(2, groups + relays), 8);
  OracleInstance inst;
  // Every group except the last in the chain contributes one relay, so it
  // gets a peer up front; the rest are spread at random.
  ScenarioSpec spec = random_groups(rng, groups, 0);
  std::vector<int> chain(static_cast<std::size_t>(groups));
  for (int i = 0; i < groups; ++i) chain[static_cast<std::size_t>(i)] = i;
  std::shuffle(chain.begin(), chain.end(), rng);
  std::uint32_t next = static_cast<std::uint32_t>(groups) + 1;
  for (int i = 0; i < relays; ++i) {
    auto& native = spec.groups[static_cast<std::size_t>(chain[static_cast<std::size_t>(i)])];
    const auto& adjacent = spec.groups[static_cast<std::size_t>(chain[static_cast<std::size_t>(i + 1)])];
    const NodeId r{next++};
    native.members.push_back(r);
    spec.relays.push_back({r, native.id, adjacent.id});
  }
  while (static_cast<int>(next) <= total) {
    spec.groups[static_cast<std::size_t>(uniform(rng, 0, groups - 1))].members.push_back(NodeId{next++});
  }
  std::shuffle(spec.relays.begin(), spec.relays.end(), rng);
  for (const NodeId n : spec.all_nodes()) spec.names[n] = "N" + std::to_string(n.value);

  const int topics = uniform(rng, 1, 5);
  std::bernoulli_distribution coin(0.3);
  for (const NodeId n : spec.all_nodes()) {
    for (int t = 0; t < topics; ++t) {
      if (coin(rng)) spec.subscriptions[n].insert(topic_name(t));
    }
  }
  const auto nodes = spec.all_nodes();
  inst.publisher = pick(rng, nodes);
  inst.topic = topic_name(uniform(rng, 0, topics - 1));
  spec.name = "oracle";
  spec.source = inst.publisher;
  spec.sink = inst.publisher;
  spec.topic = inst.topic;
  spec.bootstrap = default_bootstrap(spec);
  inst.spec = std::move(spec);
  return inst;
}

OracleOutcome check_oracle_instance(const OracleInstance& inst, std::uint64_t seed,
                                    routing::AnchorFanout fanout) {
  OracleOutcome out;
  try {
    auto sim = build_simulator(inst.spec, seed, lossless_options(fanout));
    const auto t0 = to_us(inst.spec.traffic_start_s());
    sim->run_until(t0);
    check_bootstrap(inst.spec, *sim);
    sim->publish(inst.publisher, inst.topic, 100, t0);
    sim->run_until(t0 + to_us(2.0));

    const auto global = observe_global_state(*sim);
    out.expected = routing::flood_oracle(global.backbone, global.subscriptions, inst.publisher, inst.topic);
    for (const auto& [node, ids] : sim->deliveries()) {
      const auto n = std::count_if(ids.begin(), ids.end(),
                                   [&](const core::PublicationId& id) { return id.origin == inst.publisher; });
      if (n > 0) out.delivered.insert(node);
      if (n > 1) out.duplicates += static_cast<int>(n - 1);
    }
    out.affinity_violations = sim->metrics().affinity_violations;
    out.ok = out.expected == out.delivered && out.duplicates == 0 && global.inconsistencies.empty();
    if (!out.ok) {
      out.detail = "expected " + describe(out.expected) + ", delivered " + describe(out.delivered) +
                   ", duplicates " + std::to_string(out.duplicates);
      for (const auto& s : global.inconsistencies) out.detail += "; " + s;
    }
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = e.what();
    if (dynamic_cast<const sim::AffinityViolation*>(&e) != nullptr) out.affinity_violations += 1;
  }
  return out;
}

namespace {

// Generator-side bookkeeping. Promotions are only scripted when the group
// graph stays a chain: each group has at most one relay out and one in.
struct ChurnModel {
  std::map<NodeId, GroupId> native;
  std::set<NodeId> owners;
  std::set<NodeId> started;
  std::set<NodeId> dead;
  std::map<NodeId, std::pair<GroupId, GroupId>> relays;
  std::map<GroupId, GroupId> out_edge;
  std::map<GroupId, GroupId> in_edge;
  std::map<NodeId, std::set<TopicId>> subs;

  [[nodiscard]] bool live(NodeId n) const { return started.contains(n) && !dead.contains(n); }

  [[nodiscard]] bool reaches(GroupId from, GroupId to) const {
    for (GroupId g = from;;) {
      if (g == to) return true;
      auto it = out_edge.find(g);
      if (it == out_edge.end()) return false;
      g = it->second;
    }
  }
};

}  // namespace

ScenarioSpec random_churn_case(std::mt19937_64& rng, int max_events) {
  const int groups = uniform(rng, 1, 3);
  const int total = uniform(rng, groups + 1, 8);
  ScenarioSpec spec = random_groups(rng, groups, total - groups);
  spec.name = "churn";
  const int topics = uniform(rng, 1, 5);

  ChurnModel m;
  for (const auto& g : spec.groups) {
    m.native[g.owner] = g.id;
    m.owners.insert(g.owner);
    m.started.insert(g.owner);
    spec.bootstrap.push_back({ScriptKind::Join, 0.0, g.owner, std::nullopt, std::nullopt});
    for (const NodeId p : g.members) m.native[p] = g.id;
  }

  enum Kind { Join, Sub, Unsub, Kill, Promote };
  std::discrete_distribution<int> kinds({4, 4, 2, 1.5, 2});
  const int events = uniform(rng, 1, max_events);
  double t = 0.2;
  for (int i = 0; i < events; ++i) {
    t += std::uniform_real_distribution<double>(0.05, 1.5)(rng);
    t = std::round(t * 1000.0) / 1000.0;
    std::vector<NodeId> unstarted, live, peers, subscribed;
    for (const auto& [n, g] : m.native) {
      if (!m.started.contains(n)) unstarted.push_back(n);
      if (!m.live(n)) continue;
      live.push_back(n);
      if (!m.owners.contains(n)) peers.push_back(n);
      if (!m.subs[n].empty()) subscribed.push_back(n);
    }
    std::vector<std::pair<NodeId, GroupId>> promotions;
    for (const NodeId p : peers) {
      if (m.relays.contains(p)) continue;
      const GroupId g = m.native[p];
      if (m.out_edge.contains(g)) continue;
      for (const auto& h : spec.groups) {
        if (h.id == g || m.in_edge.contains(h.id) || m.reaches(h.id, g)) continue;
        promotions.emplace_back(p, h.id);
      }
    }

    ScriptEvent e;
    e.at_s = t;
    bool placed = false;
    for (int attempt = 0; attempt < 8 && !placed; ++attempt) {
      switch (kinds(rng)) {
        case Join:
          if (unstarted.empty()) break;
          e.kind = ScriptKind::Join;
          e.node = pick(rng, unstarted);
          m.started.insert(e.node);
          placed = true;
          break;
        case Sub: {
          if (live.empty()) break;
          e.kind = ScriptKind::Subscribe;
          e.node = pick(rng, live);
          e.topic = topic_name(uniform(rng, 0, topics - 1));
          m.subs[e.node].insert(*e.topic);
          placed = true;
          break;
        }
        case Unsub: {
          if (subscribed.empty()) break;
          e.kind = ScriptKind::Unsubscribe;
          e.node = pick(rng, subscribed);
          const std::vector<TopicId> mine(m.subs[e.node].begin(), m.subs[e.node].end());
          e.topic = pick(rng, mine);
          m.subs[e.node].erase(*e.topic);
          placed = true;
          break;
        }
        case Kill: {
          if (peers.empty()) break;
          e.kind = ScriptKind::Kill;
          e.node = pick(rng, peers);
          m.dead.insert(e.node);
          if (auto r = m.relays.find(e.node); r != m.relays.end()) {
            m.out_edge.erase(r->second.first);
            m.in_edge.erase(r->second.second);
            m.relays.erase(r);
          }
          placed = true;
          break;
        }
        case Promote: {
          if (promotions.empty()) break;
          const auto [p, h] = pick(rng, promotions);
          e.kind = ScriptKind::Promote;
          e.node = p;
          e.group = h;
          const GroupId g = m.native[p];
          m.relays[p] = {g, h};
          m.out_edge[g] = h;
          m.in_edge[h] = g;
          placed = true;
          break;
        }
        default:
          break;
      }
    }
    if (placed) spec.bootstrap.push_back(e);
  }
  for (const auto& [n, g] : m.native) spec.names[n] = "N" + std::to_string(n.value);
  spec.source = spec.groups.front().owner;
  spec.sink = spec.source;
  spec.topic = topic_name(0);
  return spec;
}

ChurnOutcome check_churn_case(const ScenarioSpec& spec, std::uint64_t seed) {
  ChurnOutcome out;
  try {
    RunOptions opt = lossless_options(routing::AnchorFanout::SubscriberDirected);
    auto sim = build_simulator(spec, seed, opt);
    double last = 0.0;
    for (const auto& e : spec.bootstrap) last = std::max(last, e.at_s);
    sim->run_until(to_us(last + kChurnSettleSeconds));
    const auto global = observe_global_state(*sim);
    const auto expected = ground_truth_tables(global);
    auto mismatches = table_mismatches(*sim, global, expected);
    mismatches.insert(mismatches.end(), global.inconsistencies.begin(), global.inconsistencies.end());
    out.attached = global.attached.size();
    out.affinity_violations = sim->metrics().affinity_violations;
    out.ok = mismatches.empty();
    for (const auto& s : mismatches) out.detail += (out.detail.empty() ? "" : "; ") + s;
  } catch (const std::exception& e) {
    out.ok = false;
    out.detail = e.what();
    if (dynamic_cast<const sim::AffinityViolation*>(&e) != nullptr) out.affinity_violations += 1;
  }
  return out;
}

}  // namespace swarnet::scenarios
