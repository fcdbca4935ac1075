#include "swarnet/protocol/node_state.hpp"

namespace swarnet::protocol {

bool SeenCache::insert(core::PublicationId id) {
  if (!set_.insert(id).second) return false;
  order_.push_back(id);
  while (order_.size() > capacity_) {
    set_.erase(order_.front());
    order_.pop_front();
  }
  return true;
}

const core::Endpoint* NodeState::endpoint_in(GroupId group) const {
  for (const auto& ep : endpoints) {
    if (ep.group == group) return &ep;
  }
  return nullptr;
}

Membership* NodeState::membership_for(GroupId group) {
  if (native.group == group) return &native;
  if (visiting && visiting->group == group) return &*visiting;
  return nullptr;
}

NodeState make_group_owner(NodeId id, const core::CredentialBundle& credentials,
                           std::size_t seen_capacity) {
  NodeState s;
  s.id = id;
  s.role = core::Role::GroupOwner;
  s.seen = SeenCache(seen_capacity);
  s.endpoints.push_back({id, core::InterfaceKind::P2pNative, credentials.group, core::kDefaultGoAddr});
  s.native.group = credentials.group;
  s.native.ssid = credentials.ssid;
  s.native.owner = id;
  s.native.anchor = id;
  s.native.accepted = true;
  s.domain.groups[credentials.group] = credentials.ssid;
  GroupRegistry reg;
  reg.credentials = credentials;
  reg.anchor = id;
  s.registry = std::move(reg);
  return s;
}

NodeState make_peer(NodeId id, GroupId group, std::string ssid, std::size_t seen_capacity) {
  NodeState s;
  s.id = id;
  s.role = core::Role::OrdinaryPeer;
  s.seen = SeenCache(seen_capacity);
  s.endpoints.push_back({id, core::InterfaceKind::P2pNative, group, 0});
  s.native.group = group;
  s.native.ssid = std::move(ssid);
  return s;
}

}  // namespace swarnet::protocol
