#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "swarnet/core/topology.hpp"
#include "swarnet/netsim/event_queue.hpp"
#include "swarnet/netsim/metrics.hpp"
#include "swarnet/netsim/radio.hpp"
#include "swarnet/netsim/traffic.hpp"
#include "swarnet/protocol/node_protocol.hpp"

namespace swarnet::sim {

using core::GroupId;
using core::NodeId;

struct SimConfig {
  RadioConfig radio;
  protocol::ProtocolConfig protocol;
  bool trace = false;
  // Throw on an interface-affinity or scope violation instead of counting it.
  bool strict = true;
};

class AffinityViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Discrete-event host for a set of NodeProtocol machines sharing a radio
// medium. Single-threaded; all randomness comes from the seed.
class Simulator {
 public:
  Simulator(SimConfig config, std::uint64_t seed);
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Topology. Credentials of every group go into the directory that
  // promotions are checked against.
  void add_group_owner(NodeId id, const core::CredentialBundle& credentials);
  void add_peer(NodeId id, GroupId group);

  // Scripted events; `at` must not lie in the past.
  void start_node(NodeId id, SimTime at);
  void subscribe(NodeId id, const core::TopicId& topic, SimTime at);
  void unsubscribe(NodeId id, const core::TopicId& topic, SimTime at);
  void promote(NodeId id, const core::CredentialBundle& credentials, SimTime at);
  void kill(NodeId id, SimTime at);
  void publish(NodeId id, const core::TopicId& topic, std::uint32_t payload_bytes, SimTime at);
  void add_traffic(const TrafficGenerator& gen);
  // Hands a raw message to the radio as if `from` had emitted it; used to
  // probe the medium's guards.
  void inject(NodeId from, core::Message message, core::InterfaceKind via, SimTime at);
  void at(SimTime when, std::function<void()> fn);
  // Only deliveries at the sink count toward RunMetrics::delivered.
  void set_sink(NodeId id);

  void run_until(SimTime t_end);
  [[nodiscard]] SimTime now() const;

  [[nodiscard]] const protocol::NodeState& node(NodeId id) const;
  [[nodiscard]] bool alive(NodeId id) const;
  [[nodiscard]] std::vector<NodeId> node_ids() const;
  [[nodiscard]] core::TopologyDesc topology() const;
  // Local deliveries per node, publications of any origin.
  [[nodiscard]] const std::map<NodeId, std::vector<core::PublicationId>>& deliveries() const;

  // Finalizes publication fates; copies still queued count as in flight.
  [[nodiscard]] RunMetrics metrics() const;
  [[nodiscard]] const std::string& trace() const;
  [[nodiscard]] const protocol::CredentialDirectory& directory() const;
  [[nodiscard]] const protocol::NodeProtocol& protocol() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarnet::sim
