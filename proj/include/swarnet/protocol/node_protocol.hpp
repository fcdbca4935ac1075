#pragma once

#include "swarnet/protocol/node_state.hpp"

namespace swarnet::protocol {

struct TimerEvent {
  TimerKind kind = TimerKind::Tick;
  std::uint64_t token = 0;
  GroupId group;
};

// Deterministic per-device machine: every entry point mutates one NodeState
// and returns the actions the host must carry out. The host serializes calls
// per node.
class NodeProtocol {
 public:
  NodeProtocol(ProtocolConfig config, const CredentialDirectory* directory);

  [[nodiscard]] const ProtocolConfig& config() const { return config_; }

  // Powers a node on: group owners start ticking, peers send their join.
  Actions start(NodeState& state, SimTime now) const;
  Actions on_message(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions on_timer(NodeState& state, const TimerEvent& timer, SimTime now) const;

  Actions subscribe(NodeState& state, const TopicId& topic, SimTime now) const;
  Actions unsubscribe(NodeState& state, const TopicId& topic, SimTime now) const;
  Actions publish(NodeState& state, const TopicId& topic, std::uint32_t payload_bytes,
                  SimTime now) const;

  Actions handle_join_request(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_join_redirect(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_join_accept(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_subscription_update(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_routing_push(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_publication(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_beacon(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_promote_to_relay(NodeState& state, const core::Message& msg, SimTime now) const;
  Actions handle_relay_ack(NodeState& state, const core::Message& msg, SimTime now) const;

  Actions emit_beacon(NodeState& state, SimTime now) const;
  Actions detect_membership_change(NodeState& state, SimTime now) const;
  // Group-owner reaction to the loss of its anchoring relay.
  Actions handle_relay_loss(NodeState& state, NodeId lost, SimTime now) const;

 private:
  ProtocolConfig config_;
  const CredentialDirectory* directory_;
};

// Topics with a subscriber on this anchor's side of its parent link.
LocalSubscriptionSet own_side_topics(const NodeState& state);

}  // namespace swarnet::protocol
