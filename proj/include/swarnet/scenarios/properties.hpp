#pragma once

#include <random>
#include <set>
#include <string>

#include "swarnet/scenarios/experiment.hpp"
#include "swarnet/scenarios/ground_truth.hpp"
#include "swarnet/scenarios/scenario.hpp"

namespace swarnet::scenarios {

// A random multi-group network (at most 3 groups, 8 nodes, 5 topics) with
// relays chained between the groups, random subscriptions and a single
// publication from a random node.
struct OracleInstance {
  ScenarioSpec spec;
  NodeId publisher;
  TopicId topic;
};

OracleInstance random_oracle_instance(std::mt19937_64& rng);

struct OracleOutcome {
  bool ok = false;
  std::string detail;
  std::set<NodeId> expected;
  std::set<NodeId> delivered;
  int duplicates = 0;
  std::uint64_t affinity_violations = 0;
};

// Bootstraps the instance over lossless links, publishes once and compares
// the delivery set against a flood over the observed backbone.
OracleOutcome check_oracle_instance(const OracleInstance& instance, std::uint64_t seed,
                                    routing::AnchorFanout fanout = routing::AnchorFanout::SubscriberDirected);

// Random join / subscribe / unsubscribe / disconnect / promote script over a
// fresh network. Group owners start at t=0 and never fail.
ScenarioSpec random_churn_case(std::mt19937_64& rng, int max_events = 30);

struct ChurnOutcome {
  bool ok = false;
  std::string detail;
  std::size_t attached = 0;
  std::uint64_t affinity_violations = 0;
};

// Runs the script, lets the network settle and compares every attached
// node's table against tables recomputed from the global state.
ChurnOutcome check_churn_case(const ScenarioSpec& spec, std::uint64_t seed);

// Quiet time after the last scripted event before tables are compared.
inline constexpr double kChurnSettleSeconds = 20.0;

}  // namespace swarnet::scenarios
