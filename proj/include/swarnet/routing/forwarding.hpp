#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "swarnet/routing/recompute.hpp"
#include "swarnet/routing/tables.hpp"

namespace swarnet::routing {

struct ForwardDecision {
  bool deliver_locally = false;
  std::vector<NodeId> send_to;  // ascending NodeId order
};

// One forwarding step for a publication that is new at `self`. `arrival` is
// the neighbour it came from, or nullopt at the origin; that neighbour is
// never sent the publication back. Cost is linear in |F(topic)|.
ForwardDecision forward_decision(NodeId self, const LocalSubscriptionSet& local,
                                 const ForwardingTable& table, const TopicId& topic,
                                 std::optional<NodeId> arrival);

class UnknownOrigin : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Independent reference: floods the publication over every backbone edge
// (with duplicate suppression) and returns the nodes that subscribe to the
// topic. Consults no forwarding table.
std::set<NodeId> flood_oracle(const BackboneGraph& backbone,
                              const std::map<NodeId, LocalSubscriptionSet>& subscriptions,
                              NodeId origin, const TopicId& topic);

struct DeliveryTrace {
  std::map<NodeId, int> deliveries;  // subscriber -> number of local deliveries
  int transmissions = 0;
};

// Runs forward_decision hop by hop from `origin` with duplicate suppression,
// using the supplied tables.
DeliveryTrace trace_delivery(const TableSet& tables,
                             const std::map<NodeId, LocalSubscriptionSet>& subscriptions,
                             NodeId origin, const TopicId& topic);

}  // namespace swarnet::routing
