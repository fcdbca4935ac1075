#pragma once

#include <set>
#include <string>
#include <vector>

#include "swarnet/netsim/simulator.hpp"
#include "swarnet/routing/recompute.hpp"

namespace swarnet::scenarios {

// Global picture of a simulated network assembled from outside the
// protocol: which nodes are alive and attached, which node anchors each
// group according to its owner, and what everybody subscribes to.
struct GlobalState {
  routing::BackboneGraph backbone;
  std::map<core::NodeId, routing::LocalSubscriptionSet> subscriptions;
  std::set<core::NodeId> attached;
  std::set<core::NodeId> forwarders;
  // Members whose own anchor pointer disagrees with their owner's record.
  std::vector<std::string> inconsistencies;
};

GlobalState observe_global_state(const sim::Simulator& sim);

// Tables recomputed over the whole backbone, one connected component at a
// time, each rooted at its lowest-numbered forwarder.
routing::TableSet ground_truth_tables(const GlobalState& state,
                                      routing::AnchorFanout fanout = routing::AnchorFanout::SubscriberDirected);

// One line per attached node whose table differs from `expected`.
std::vector<std::string> table_mismatches(const sim::Simulator& sim, const GlobalState& state,
                                          const routing::TableSet& expected);

std::string format_table(const routing::ForwardingTable& table);

}  // namespace swarnet::scenarios
