#pragma once

#include <map>
#include <set>

#include "swarnet/core/ids.hpp"

namespace swarnet::routing {

using core::NodeId;
using core::TopicId;

// Topics directly subscribed at one node.
using LocalSubscriptionSet = std::set<TopicId>;

// Next-hop sets per topic. Sets iterate in NodeId order, which keeps every
// fan-out deterministic.
using NextHops = std::set<NodeId>;
using ForwardingTable = std::map<TopicId, NextHops>;

[[nodiscard]] LocalSubscriptionSet subscribe(LocalSubscriptionSet set, const TopicId& topic);
[[nodiscard]] LocalSubscriptionSet unsubscribe(LocalSubscriptionSet set, const TopicId& topic);

// Returns an empty set when the topic has no entry.
const NextHops& next_hops(const ForwardingTable& table, const TopicId& topic);

}  // namespace swarnet::routing
