#include "swarnet/netsim/simulator.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>

namespace swarnet::sim {
namespace {

using core::InterfaceKind;
using core::Message;
using core::PublicationId;

std::size_t iface_index(InterfaceKind k) { return k == InterfaceKind::P2pNative ? 0 : 1; }

struct Frame {
  Message msg;
  NodeId receiver;
};

struct TxQueue {
  NodeId node;
  InterfaceKind iface = InterfaceKind::P2pNative;
  GroupId group;
  std::deque<Frame> control;
  std::deque<Frame> data;
  std::optional<Frame> on_air;
  // The frame has left but the sender's radio is still held for local work.
  bool finishing = false;
  SimTime attained = 0;

  [[nodiscard]] bool backlogged() const { return !control.empty() || !data.empty(); }
  Frame& head() { return control.empty() ? data.front() : control.front(); }
  Frame take() {
    auto& q = control.empty() ? data : control;
    Frame f = std::move(q.front());
    q.pop_front();
    return f;
  }
};

struct NodeSlot {
  protocol::NodeState state;
  bool alive = true;
  std::array<bool, 2> radio_busy{false, false};
  std::optional<InterfaceKind> last_iface;
  std::array<int, 2> queue{-1, -1};
};

struct Fate {
  std::uint32_t live = 0;
  bool delivered = false;
  bool dropped = false;
  bool dead = false;
};

struct AirDone {
  int queue;
  bool last = false;  // no local work follows
};
struct TxDone {
  int queue;
};
struct Arrive {
  Frame frame;
};
struct TimerFire {
  NodeId node;
  protocol::TimerEvent timer;
};
struct Generate {
  std::size_t gen;
  std::uint64_t k;
};
struct Script {
  std::size_t index;
};

using Payload = std::variant<AirDone, TxDone, Arrive, TimerFire, Generate, Script>;

constexpr std::size_t kPathSamples = 8;

}  // namespace

struct Simulator::Impl {
  SimConfig config;
  protocol::CredentialDirectory directory;
  protocol::NodeProtocol protocol;
  std::mt19937_64 rng;
  EventQueue<Payload> events;

  std::map<NodeId, NodeSlot> nodes;
  std::vector<TxQueue> queues;
  std::map<GroupId, NodeId> owner_of;
  std::map<GroupId, core::Address> next_addr;
  std::map<GroupId, bool> channel_busy;

  std::vector<TrafficGenerator> generators;
  std::vector<std::function<void()>> scripts;
  std::optional<NodeId> sink;

  std::unordered_map<PublicationId, Fate> fates;
  std::map<PublicationId, std::map<NodeId, NodeId>> sampled_paths;
  std::map<NodeId, std::vector<PublicationId>> deliveries;
  RunMetrics counters;
  std::string trace;

  Impl(SimConfig cfg, std::uint64_t seed)
      : config(std::move(cfg)), protocol(config.protocol, &directory), rng(seed) {}

  NodeSlot& slot(NodeId id) {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw std::out_of_range("unknown node " + std::to_string(id.value));
    return it->second;
  }

  void trace_line(const char* kind, NodeId src, NodeId dst, std::uint32_t size) {
    if (!config.trace) return;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%lld %s %u %u %u\n", static_cast<long long>(events.now()), kind,
                  src.value, dst.value, size);
    trace += buf;
  }

  void violation(std::uint64_t& counter, const std::string& what) {
    ++counter;
    if (config.strict) throw AffinityViolation(what);
  }

  SimTime jitter() {
    if (config.radio.jitter_us <= 0) return 0;
    return static_cast<SimTime>(rng() % static_cast<std::uint64_t>(config.radio.jitter_us + 1));
  }

  int queue_for(NodeSlot& n, const core::Endpoint& ep) {
    int& q = n.queue[iface_index(ep.iface)];
    if (q < 0) {
      TxQueue tq;
      tq.node = ep.node;
      tq.iface = ep.iface;
      tq.group = ep.group;
      queues.push_back(std::move(tq));
      q = static_cast<int>(queues.size()) - 1;
    }
    // A relay may re-attach its legacy side to another group.
    queues[q].group = ep.group;
    return q;
  }

  void assign_addresses(NodeSlot& n) {
    for (auto& ep : n.state.endpoints) {
      if (ep.addr != 0) continue;
      auto [it, fresh] = next_addr.try_emplace(ep.group, core::kFirstClientAddr);
      ep.addr = it->second++;
    }
  }

  const core::Publication* tracked_pub(const Message& m) {
    const auto* pub = std::get_if<core::Publication>(&m.body);
    if (pub == nullptr || !fates.contains(pub->id)) return nullptr;
    return pub;
  }

  void lose_dead(const Message& m, bool was_live) {
    if (const auto* pub = tracked_pub(m)) {
      auto& f = fates[pub->id];
      if (was_live) --f.live;
      f.dead = true;
    }
  }

  bool radio_busy(const NodeSlot& n, InterfaceKind iface) const {
    if (config.radio.shared_radio) return n.radio_busy[0] || n.radio_busy[1];
    return n.radio_busy[iface_index(iface)];
  }

  void dispatch(NodeId from, protocol::Send&& send);
  void process(NodeId id, protocol::Actions&& actions);
  void try_start();
  void start(int qi);
  void on_air_done(int qi, bool last);
  void on_tx_done(int qi);
  void on_arrive(Frame&& frame);
  void on_generate(const Generate& g);
  void kill(NodeId id);
  void run_until(SimTime t_end);
};

void Simulator::Impl::dispatch(NodeId from, protocol::Send&& send) {
  NodeSlot& n = slot(from);
  Message m = std::move(send.message);
  const core::Endpoint* ep = n.state.endpoint_in(m.dst.group);
  if (ep == nullptr || ep->iface != send.via) {
    violation(counters.affinity_violations,
              "node " + std::to_string(from.value) + " sends into group " +
                  std::to_string(m.dst.group.value) + " without a matching endpoint");
    return;
  }
  m.src = *ep;

  const auto& st = n.state;
  if (st.role == core::Role::SecondaryRelay && st.visiting && m.dst.group == st.visiting->group) {
    const bool to_anchor = m.dst.addr != core::kDefaultGoAddr && st.visiting->anchor &&
                           m.dst.node == *st.visiting->anchor;
    if (!to_anchor) {
      violation(counters.scope_violations,
                "secondary relay " + std::to_string(from.value) + " addressed a non-anchor node");
      return;
    }
  }

  NodeId rx;
  if (m.dst.addr == core::kDefaultGoAddr) {
    auto it = owner_of.find(m.dst.group);
    if (it != owner_of.end()) rx = it->second;
  } else {
    rx = m.dst.node;
  }
  auto rx_it = nodes.find(rx);
  const core::Endpoint* rx_ep = nullptr;
  if (rx_it != nodes.end() && rx_it->second.alive) rx_ep = rx_it->second.state.endpoint_in(m.dst.group);
  if (rx_ep == nullptr) {
    ++counters.unreachable;
    lose_dead(m, false);
    trace_line("unreachable", from, rx, m.size_bytes);
    return;
  }
  if (ep->iface == InterfaceKind::LegacyClient && rx_ep->iface == InterfaceKind::LegacyClient) {
    violation(counters.affinity_violations, "legacy-to-legacy transmission");
    return;
  }
  m.dst = *rx_ep;

  TxQueue& q = queues[queue_for(n, *ep)];
  const core::Publication* pub = std::get_if<core::Publication>(&m.body);
  if (pub != nullptr) {
    if (q.data.size() >= config.radio.queue_capacity) {
      ++counters.frame_drops;
      if (tracked_pub(m)) fates[pub->id].dropped = true;
      trace_line("drop", from, rx, m.size_bytes);
      return;
    }
    if (tracked_pub(m)) ++fates[pub->id].live;
    q.data.push_back(Frame{std::move(m), rx});
  } else {
    q.control.push_back(Frame{std::move(m), rx});
  }
}

void Simulator::Impl::process(NodeId id, protocol::Actions&& actions) {
  assign_addresses(slot(id));
  for (auto& action : actions) {
    if (auto* s = std::get_if<protocol::Send>(&action)) {
      dispatch(id, std::move(*s));
    } else if (auto* d = std::get_if<protocol::DeliverLocal>(&action)) {
      const auto& pub = d->publication;
      deliveries[id].push_back(pub.id);
      trace_line("deliver", pub.id.origin, id, pub.payload_bytes);
      if (sink && *sink == id) {
        auto it = fates.find(pub.id);
        if (it != fates.end()) {
          if (it->second.delivered) {
            ++counters.duplicate_deliveries;
          } else {
            it->second.delivered = true;
            counters.bytes_delivered += pub.payload_bytes;
            if (counters.observed_path.empty()) {
              auto p = sampled_paths.find(pub.id);
              if (p != sampled_paths.end()) {
                std::vector<NodeId> path{id};
                while (path.back() != pub.id.origin && path.size() <= p->second.size()) {
                  auto pred = p->second.find(path.back());
                  if (pred == p->second.end()) break;
                  path.push_back(pred->second);
                }
                std::reverse(path.begin(), path.end());
                counters.observed_path = std::move(path);
              }
            }
          }
        }
      }
    } else if (auto* t = std::get_if<protocol::SetTimer>(&action)) {
      events.schedule(events.now() + t->delay,
                      TimerFire{id, protocol::TimerEvent{t->kind, t->token, t->group}});
    } else if (std::get_if<protocol::RoleChange>(&action) != nullptr) {
      trace_line("role", id, id, 0);
    }
  }
  try_start();
}

// Airtime-fair access: whenever resources free up, the startable queue with
// the least attained airtime transmits next, repeated until nothing can start.
void Simulator::Impl::try_start() {
  for (;;) {
    int best = -1;
    for (int i = 0; i < static_cast<int>(queues.size()); ++i) {
      TxQueue& q = queues[i];
      if (q.on_air || q.finishing || !q.backlogged()) continue;
      NodeSlot& tx = slot(q.node);
      if (!tx.alive || radio_busy(tx, q.iface)) continue;
      // Frames toward nodes that died while queued are lost here.
      while (q.backlogged() && !slot(q.head().receiver).alive) {
        lose_dead(q.head().msg, true);
        q.take();
      }
      if (!q.backlogged()) continue;
      const Frame& f = q.head();
      if (radio_busy(slot(f.receiver), f.msg.dst.iface) || channel_busy[f.msg.dst.group]) continue;
      if (best < 0 || q.attained < queues[best].attained) best = i;
    }
    if (best < 0) return;
    start(best);
  }
}

void Simulator::Impl::start(int qi) {
  TxQueue& q = queues[qi];
  Frame f = q.take();
  NodeSlot& tx = slot(q.node);
  NodeSlot& rx = slot(f.receiver);
  const auto& radio = config.radio;

  const SimTime air = frame_airtime(radio, f.msg.size_bytes) + jitter();
  // Forwarding work and a relay's retune occupy only the sender's radio,
  // never the channel or the receiver.
  SimTime local = 0;
  if (const auto* pub = std::get_if<core::Publication>(&f.msg.body); pub && pub->hops >= 2) {
    local += radio.forward_cost_us;
  }
  if (tx.state.endpoints.size() > 1 && tx.last_iface && *tx.last_iface != q.iface) {
    local += radio.switch_cost_us;
  }
  const SimTime dur = air + local;
  tx.last_iface = q.iface;
  rx.last_iface = f.msg.dst.iface;

  q.attained += dur;
  channel_busy[f.msg.dst.group] = true;
  tx.radio_busy[iface_index(q.iface)] = true;
  rx.radio_busy[iface_index(f.msg.dst.iface)] = true;
  ++counters.frames;
  trace_line(core::kind_name(f.msg.body).data(), q.node, f.receiver, f.msg.size_bytes);
  q.on_air = std::move(f);
  events.schedule(events.now() + air, AirDone{qi, local == 0});
  if (local > 0) events.schedule(events.now() + dur, TxDone{qi});
}

void Simulator::Impl::on_air_done(int qi, bool last) {
  TxQueue& q = queues[qi];
  Frame f = std::move(*q.on_air);
  q.on_air.reset();
  q.finishing = !last;
  if (last) slot(q.node).radio_busy[iface_index(q.iface)] = false;
  channel_busy[f.msg.dst.group] = false;
  slot(f.receiver).radio_busy[iface_index(f.msg.dst.iface)] = false;
  if (!slot(q.node).alive) {
    lose_dead(f.msg, true);
  } else {
    events.schedule(events.now() + config.radio.hop_latency_us, Arrive{std::move(f)});
  }
  try_start();
}

void Simulator::Impl::on_tx_done(int qi) {
  TxQueue& q = queues[qi];
  q.finishing = false;
  slot(q.node).radio_busy[iface_index(q.iface)] = false;
  try_start();
}

void Simulator::Impl::on_arrive(Frame&& frame) {
  NodeSlot& rx = slot(frame.receiver);
  const Message& m = frame.msg;
  if (!rx.alive) {
    lose_dead(m, true);
    return;
  }
  if (const auto* pub = tracked_pub(m)) {
    --fates[pub->id].live;
    auto p = sampled_paths.find(pub->id);
    if (p != sampled_paths.end()) p->second.try_emplace(frame.receiver, m.src.node);
  }
  if (m.src.group != m.dst.group) {
    violation(counters.affinity_violations, "cross-group delivery without a legacy endpoint");
    return;
  }
  if (m.src.iface == InterfaceKind::LegacyClient || m.dst.iface == InterfaceKind::LegacyClient) {
    ++counters.cross_group_via_legacy;
  }
  auto actions = protocol.on_message(rx.state, m, events.now());
  process(frame.receiver, std::move(actions));
}

void Simulator::Impl::on_generate(const Generate& g) {
  const TrafficGenerator& gen = generators[g.gen];
  if (g.k + 1 < packet_count(gen)) {
    events.schedule(emission_time(gen, g.k + 1), Generate{g.gen, g.k + 1});
  }
  NodeSlot& src = slot(gen.source);
  if (!src.alive) return;
  for (const int qi : src.queue) {
    if (qi >= 0 && queues[qi].data.size() >= config.radio.queue_capacity) {
      ++counters.blocked;
      return;
    }
  }
  const PublicationId id{gen.source, src.state.next_seq};
  fates.emplace(id, Fate{});
  ++counters.sent;
  if (sampled_paths.size() < kPathSamples) sampled_paths[id];
  auto actions = protocol.publish(src.state, gen.topic, gen.packet_payload, events.now());
  process(gen.source, std::move(actions));
}

void Simulator::Impl::kill(NodeId id) {
  NodeSlot& n = slot(id);
  if (!n.alive) return;
  n.alive = false;
  trace_line("kill", id, id, 0);
  for (const int qi : n.queue) {
    if (qi < 0) continue;
    TxQueue& q = queues[qi];
    for (auto& f : q.data) lose_dead(f.msg, true);
    q.data.clear();
    q.control.clear();
  }
}

void Simulator::Impl::run_until(SimTime t_end) {
  if (t_end < events.now()) throw PastEventError("run_until target lies in the past");
  while (!events.empty() && events.next_time() <= t_end) {
    auto e = events.pop();
    std::visit(
        [&](auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, AirDone>) {
            on_air_done(p.queue, p.last);
          } else if constexpr (std::is_same_v<T, TxDone>) {
            on_tx_done(p.queue);
          } else if constexpr (std::is_same_v<T, Arrive>) {
            on_arrive(std::move(p.frame));
          } else if constexpr (std::is_same_v<T, TimerFire>) {
            NodeSlot& n = slot(p.node);
            if (n.alive) process(p.node, protocol.on_timer(n.state, p.timer, events.now()));
          } else if constexpr (std::is_same_v<T, Generate>) {
            on_generate(p);
          } else {
            scripts[p.index]();
          }
        },
        e.payload);
  }
  events.advance_to(t_end);
}

Simulator::Simulator(SimConfig config, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(std::move(config), seed)) {}

Simulator::~Simulator() = default;

void Simulator::add_group_owner(NodeId id, const core::CredentialBundle& credentials) {
  if (impl_->nodes.contains(id)) throw std::invalid_argument("duplicate node id");
  impl_->directory[credentials.group] = credentials;
  impl_->owner_of[credentials.group] = id;
  NodeSlot n;
  n.state = protocol::make_group_owner(id, credentials, impl_->config.protocol.seen_capacity);
  impl_->nodes.emplace(id, std::move(n));
}

void Simulator::add_peer(NodeId id, GroupId group) {
  if (impl_->nodes.contains(id)) throw std::invalid_argument("duplicate node id");
  auto it = impl_->directory.find(group);
  if (it == impl_->directory.end()) throw std::invalid_argument("peer joins an unknown group");
  NodeSlot n;
  n.state = protocol::make_peer(id, group, it->second.ssid, impl_->config.protocol.seen_capacity);
  impl_->assign_addresses(n);
  impl_->nodes.emplace(id, std::move(n));
}

void Simulator::at(SimTime when, std::function<void()> fn) {
  impl_->scripts.push_back(std::move(fn));
  impl_->events.schedule(when, Script{impl_->scripts.size() - 1});
}

void Simulator::start_node(NodeId id, SimTime when) {
  at(when, [this, id] {
    auto& n = impl_->slot(id);
    if (n.alive) impl_->process(id, impl_->protocol.start(n.state, impl_->events.now()));
  });
}

void Simulator::subscribe(NodeId id, const core::TopicId& topic, SimTime when) {
  at(when, [this, id, topic] {
    auto& n = impl_->slot(id);
    if (n.alive) impl_->process(id, impl_->protocol.subscribe(n.state, topic, impl_->events.now()));
  });
}

void Simulator::unsubscribe(NodeId id, const core::TopicId& topic, SimTime when) {
  at(when, [this, id, topic] {
    auto& n = impl_->slot(id);
    if (n.alive) impl_->process(id, impl_->protocol.unsubscribe(n.state, topic, impl_->events.now()));
  });
}

void Simulator::promote(NodeId id, const core::CredentialBundle& credentials, SimTime when) {
  at(when, [this, id, credentials] {
    auto& n = impl_->slot(id);
    if (!n.alive) return;
    // Out-of-band hand-off: the message never touches the radio.
    Message m;
    m.src = core::Endpoint{id, InterfaceKind::P2pNative, n.state.native.group, 0};
    m.dst = m.src;
    m.body = core::PromoteToRelay{credentials};
    impl_->process(id, impl_->protocol.on_message(n.state, m, impl_->events.now()));
  });
}

void Simulator::kill(NodeId id, SimTime when) {
  at(when, [this, id] { impl_->kill(id); });
}

void Simulator::publish(NodeId id, const core::TopicId& topic, std::uint32_t payload_bytes,
                        SimTime when) {
  at(when, [this, id, topic, payload_bytes] {
    auto& n = impl_->slot(id);
    if (n.alive) {
      impl_->process(id, impl_->protocol.publish(n.state, topic, payload_bytes, impl_->events.now()));
    }
  });
}

void Simulator::add_traffic(const TrafficGenerator& gen) {
  impl_->slot(gen.source);
  impl_->generators.push_back(gen);
  if (packet_count(gen) > 0) {
    impl_->events.schedule(emission_time(gen, 0), Generate{impl_->generators.size() - 1, 0});
  }
}

void Simulator::inject(NodeId from, core::Message message, core::InterfaceKind via, SimTime when) {
  at(when, [this, from, message = std::move(message), via] {
    if (impl_->slot(from).alive) impl_->process(from, protocol::Actions{protocol::Send{message, via}});
  });
}

void Simulator::set_sink(NodeId id) { impl_->sink = id; }

void Simulator::run_until(SimTime t_end) { impl_->run_until(t_end); }

SimTime Simulator::now() const { return impl_->events.now(); }

const protocol::NodeState& Simulator::node(NodeId id) const { return impl_->slot(id).state; }

bool Simulator::alive(NodeId id) const { return impl_->slot(id).alive; }

std::vector<NodeId> Simulator::node_ids() const {
  std::vector<NodeId> out;
  for (const auto& [id, n] : impl_->nodes) out.push_back(id);
  return out;
}

core::TopologyDesc Simulator::topology() const {
  core::TopologyDesc t;
  for (const auto& [g, creds] : impl_->directory) t.groups.push_back({g, creds.ssid});
  for (const auto& [id, n] : impl_->nodes) {
    if (!n.alive) continue;
    t.nodes.push_back({id, "n" + std::to_string(id.value), n.state.role, n.state.native.group});
    for (const auto& ep : n.state.endpoints) t.endpoints.push_back(ep);
  }
  return t;
}

const std::map<NodeId, std::vector<core::PublicationId>>& Simulator::deliveries() const {
  return impl_->deliveries;
}

RunMetrics Simulator::metrics() const {
  RunMetrics m = impl_->counters;
  for (const auto& [id, f] : impl_->fates) {
    if (f.delivered) {
      ++m.delivered;
    } else if (f.live > 0) {
      ++m.in_flight;
    } else if (f.dropped) {
      ++m.queue_drops;
    } else if (f.dead) {
      ++m.dead_losses;
    } else {
      ++m.unrouted;
    }
  }
  return m;
}

const std::string& Simulator::trace() const { return impl_->trace; }
const protocol::CredentialDirectory& Simulator::directory() const { return impl_->directory; }
const protocol::NodeProtocol& Simulator::protocol() const { return impl_->protocol; }

}  // namespace swarnet::sim
