#include "swarnet/routing/tables.hpp"

namespace swarnet::routing {

LocalSubscriptionSet subscribe(LocalSubscriptionSet set, const TopicId& topic) {
  set.insert(topic);
  return set;
}

LocalSubscriptionSet unsubscribe(LocalSubscriptionSet set, const TopicId& topic) {
  set.erase(topic);
  return set;
}

const NextHops& next_hops(const ForwardingTable& table, const TopicId& topic) {
  static const NextHops kEmpty;
  auto it = table.find(topic);
  return it == table.end() ? kEmpty : it->second;
}

}  // namespace swarnet::routing
