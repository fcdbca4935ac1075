#include "swarnet/protocol/node_protocol.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "swarnet/routing/forwarding.hpp"

namespace swarnet::protocol {
namespace {

using core::InterfaceKind;
using core::Message;
using core::MessageBody;
using core::RelayIntent;
using core::Role;

void set_role(NodeState& s, Role role, Actions& out) {
  if (s.role == role) return;
  s.role = role;
  out.push_back(RoleChange{role});
}

// Sends inside `group`. Without a destination node the message goes to the
// group owner's default address.
void send(const NodeState& s, Actions& out, GroupId group, std::optional<NodeId> dst,
          MessageBody body) {
  const core::Endpoint* ep = s.endpoint_in(group);
  if (ep == nullptr) throw std::logic_error("send into a group without a local endpoint");
  Message m;
  m.src = *ep;
  m.dst.group = group;
  if (dst) {
    m.dst.node = *dst;
  } else {
    m.dst.addr = core::kDefaultGoAddr;
  }
  m.size_bytes = core::wire_size(body);
  m.body = std::move(body);
  out.push_back(Send{std::move(m), ep->iface});
}

void send_to_owner(const NodeState& s, Actions& out, const Membership& m, MessageBody body) {
  send(s, out, m.group, std::nullopt, std::move(body));
}

std::uint64_t fresh_token(NodeState& s) { return s.next_token++; }

std::optional<NodeId> parent_of(const NodeState& s) {
  if (s.visiting && s.visiting->secondary && s.visiting->anchor && *s.visiting->anchor != s.id) {
    return s.visiting->anchor;
  }
  return std::nullopt;
}

LocalSubscriptionSet parent_side_topics(const NodeState& s) {
  LocalSubscriptionSet out;
  const auto parent = parent_of(s);
  if (!parent) return out;
  for (const auto& [topic, hops] : s.domain.parent_table) {
    if (hops.contains(*parent)) out.insert(topic);
  }
  return out;
}

void drop_group_members(NodeState& s, GroupId group) {
  for (auto it = s.domain.members.begin(); it != s.domain.members.end();) {
    if (it->second.group == group) {
      s.domain.pushed.erase(it->first);
      if (!s.registry || !s.registry->members.contains(it->first)) s.liveness.erase(it->first);
      it = s.domain.members.erase(it);
    } else {
      ++it;
    }
  }
}

// Group through which `next` is reached from this node.
std::optional<GroupId> route_group(const NodeState& s, NodeId next) {
  if (auto it = s.domain.members.find(next); it != s.domain.members.end()) return it->second.group;
  if (s.visiting && s.visiting->anchor == next) return s.visiting->group;
  if (s.native.anchor == next) return s.native.group;
  return std::nullopt;
}

void forward_to(const NodeState& s, Actions& out, const core::Publication& pub,
                const std::vector<NodeId>& targets) {
  for (const NodeId v : targets) {
    const auto group = route_group(s, v);
    if (!group) continue;
    core::Publication copy = pub;
    copy.hops += 1;
    send(s, out, *group, v, std::move(copy));
  }
}

}  // namespace

LocalSubscriptionSet own_side_topics(const NodeState& state) {
  LocalSubscriptionSet out = state.subscriptions;
  const auto parent = parent_of(state);
  for (const auto& [node, rec] : state.domain.members) {
    if (parent && node == *parent) continue;
    out.insert(rec.topics.begin(), rec.topics.end());
  }
  return out;
}

namespace {

void arm_join_timer(const ProtocolConfig& cfg, NodeState& s, Membership& m, Actions& out) {
  m.join_token = fresh_token(s);
  out.push_back(SetTimer{TimerKind::JoinRetry, cfg.join_retry_delay, m.join_token, m.group});
}

// Starts (or restarts) a join of membership `m`, toward `target` or, when
// unset, toward the group owner.
void send_join(const ProtocolConfig& cfg, NodeState& s, Membership& m,
               std::optional<NodeId> target, RelayIntent intent, Actions& out) {
  core::JoinRequest req;
  req.ssid = m.ssid;
  req.intent = intent;
  const bool upward = s.visiting && &*s.visiting == &m && s.is_anchor();
  req.relay = upward;
  if (upward) {
    req.subscriptions = own_side_topics(s);
    s.domain.reported_up = req.subscriptions;
  } else {
    req.subscriptions = s.subscriptions;
  }
  m.joining = true;
  m.accepted = false;
  m.join_failed = false;
  m.join_target = target;
  if (target) m.anchor = target;
  arm_join_timer(cfg, s, m, out);
  send(s, out, m.group, target, std::move(req));
}

// Recomputes every table this anchor owns, pushes changed member tables and
// reports own-side topic changes to a parent anchor. `skip` names a member
// whose table travels in a JoinAccept instead of a push.
routing::TableSet refresh(const ProtocolConfig& cfg, NodeState& s, Actions& out,
                          std::optional<NodeId> skip = std::nullopt) {
  if (!s.is_anchor()) return {};
  routing::AnchorView view;
  view.anchor = s.id;
  if (core::is_relay(s.role)) view.relays.insert(s.id);
  view.subscriptions[s.id] = s.subscriptions;
  view.published = s.domain.published;
  const auto parent = parent_of(s);
  for (const auto& [node, rec] : s.domain.members) {
    if (parent && node == *parent) continue;
    const bool legacy = rec.relay || (s.visiting && rec.group == s.visiting->group);
    view.backbone.push_back({s.id, node,
                             legacy ? routing::EdgeKind::InterGroupLegacy
                                    : routing::EdgeKind::IntraGroupP2p});
    view.subscriptions[node] = rec.topics;
    if (rec.relay) view.relays.insert(node);
  }
  if (parent) {
    view.backbone.push_back({s.id, *parent, routing::EdgeKind::InterGroupLegacy});
    view.subscriptions[*parent] = parent_side_topics(s);
    view.relays.insert(*parent);
  }

  auto tables = routing::recompute_tables(view, cfg.fanout);
  s.table = tables[s.id];

  for (const auto& [node, rec] : s.domain.members) {
    if (skip && node == *skip) continue;
    const auto& t = tables[node];
    auto it = s.domain.pushed.find(node);
    if (it != s.domain.pushed.end() && it->second == t) continue;
    s.domain.pushed[node] = t;
    send(s, out, rec.group, node, core::RoutingPush{t});
  }

  if (parent && s.visiting->accepted) {
    const auto own = own_side_topics(s);
    for (const auto& t : own) {
      if (!s.domain.reported_up.contains(t)) {
        send(s, out, s.visiting->group, *parent, core::SubscriptionUpdate{true, t});
      }
    }
    for (const auto& t : s.domain.reported_up) {
      if (!own.contains(t)) {
        send(s, out, s.visiting->group, *parent, core::SubscriptionUpdate{false, t});
      }
    }
    s.domain.reported_up = own;
  }
  return tables;
}

// A first publication on a topic widens the anchor's fanout in
// all-endpoints mode.
void note_published(const ProtocolConfig& cfg, NodeState& s, const TopicId& topic, Actions& out) {
  if (cfg.fanout != routing::AnchorFanout::AllEndpoints || !s.is_anchor()) return;
  if (s.domain.published.insert(topic).second) refresh(cfg, s, out);
}

// Native slot confirmed and the adjacent side settled: start anchoring the
// native group and tell its owner.
void activate_native(NodeState& s, Actions& out) {
  s.activation_pending = false;
  s.domain.groups[s.native.group] = s.native.ssid;
  s.native.anchor = s.id;
  s.native.accepted = true;
  s.native.joining = false;
  s.native.join_target.reset();
  send_to_owner(s, out, s.native, core::RelayAck{s.native.group, true});
}

void become_visiting_anchor(NodeState& s, Actions& out) {
  auto& v = *s.visiting;
  s.domain.groups[v.group] = v.ssid;
  v.anchor = s.id;
  v.accepted = true;
  v.secondary = false;
  v.joining = false;
  v.join_target.reset();
  v.join_attempts = 0;
  s.domain.parent_table.clear();
  s.domain.reported_up.clear();
  set_role(s, Role::PrimaryRelay, out);
}

void detach_visiting(NodeState& s, Actions& out) {
  if (!s.visiting) return;
  const GroupId g = s.visiting->group;
  drop_group_members(s, g);
  s.domain.groups.erase(g);
  std::erase_if(s.endpoints, [&](const core::Endpoint& ep) {
    return ep.iface == InterfaceKind::LegacyClient;
  });
  s.visiting.reset();
  s.domain.parent_table.clear();
  s.domain.reported_up.clear();
  set_role(s, Role::OrdinaryPeer, out);
}

// Group owner moves the anchor of its group to `next` and redirects everyone.
void shift_anchor(const ProtocolConfig& cfg, NodeState& s, NodeId next, SimTime now,
                  Actions& out) {
  auto& reg = *s.registry;
  const GroupId g = s.native.group;
  const NodeId old = reg.anchor;
  reg.anchor = next;
  if (old != s.id && old != next && !reg.members.contains(old)) {
    s.liveness.erase(old);
  }

  std::set<NodeId> redirect = reg.members;
  if (reg.visitor_relay) redirect.insert(*reg.visitor_relay);
  redirect.erase(next);
  redirect.erase(s.id);

  if (next == s.id) {
    s.domain.groups[g] = s.native.ssid;
    s.native.anchor = s.id;
    s.native.accepted = true;
    s.native.joining = false;
    s.native.join_target.reset();
    for (const NodeId n : redirect) send(s, out, g, n, core::JoinRedirect{s.id});
    refresh(cfg, s, out);
    return;
  }

  s.liveness[next] = now;
  drop_group_members(s, g);
  s.domain.groups.erase(g);
  s.domain.pushed.clear();
  s.table.clear();
  s.native.join_attempts = 0;
  send_join(cfg, s, s.native, next, RelayIntent::None, out);
  for (const NodeId n : redirect) send(s, out, g, n, core::JoinRedirect{next});
}

}  // namespace

NodeProtocol::NodeProtocol(ProtocolConfig config, const CredentialDirectory* directory)
    : config_(std::move(config)), directory_(directory) {}

Actions NodeProtocol::start(NodeState& state, SimTime /*now*/) const {
  Actions out;
  if (!state.registry && !state.native.joining && !state.native.accepted) {
    send_join(config_, state, state.native, std::nullopt, RelayIntent::None, out);
  }
  if (!state.ticking) {
    state.ticking = true;
    out.push_back(SetTimer{TimerKind::Tick, config_.beacon_period, 0, state.native.group});
  }
  return out;
}

Actions NodeProtocol::on_message(NodeState& state, const Message& msg, SimTime now) const {
  return std::visit(
      [&](const auto& body) -> Actions {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, core::JoinRequest>) return handle_join_request(state, msg, now);
        if constexpr (std::is_same_v<T, core::JoinRedirect>) return handle_join_redirect(state, msg, now);
        if constexpr (std::is_same_v<T, core::JoinAccept>) return handle_join_accept(state, msg, now);
        if constexpr (std::is_same_v<T, core::SubscriptionUpdate>)
          return handle_subscription_update(state, msg, now);
        if constexpr (std::is_same_v<T, core::RoutingPush>) return handle_routing_push(state, msg, now);
        if constexpr (std::is_same_v<T, core::Publication>) return handle_publication(state, msg, now);
        if constexpr (std::is_same_v<T, core::Beacon>) return handle_beacon(state, msg, now);
        if constexpr (std::is_same_v<T, core::PromoteToRelay>)
          return handle_promote_to_relay(state, msg, now);
        if constexpr (std::is_same_v<T, core::RelayAck>) return handle_relay_ack(state, msg, now);
      },
      msg.body);
}

Actions NodeProtocol::on_timer(NodeState& s, const TimerEvent& timer, SimTime now) const {
  Actions out;
  switch (timer.kind) {
    case TimerKind::Tick: {
      out = emit_beacon(s, now);
      auto more = detect_membership_change(s, now);
      out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
      out.push_back(SetTimer{TimerKind::Tick, config_.beacon_period, 0, s.native.group});
      break;
    }
    case TimerKind::JoinRetry: {
      Membership* m = s.membership_for(timer.group);
      if (m == nullptr || !m->joining || m->join_token != timer.token) break;
      m->join_attempts += 1;
      if (m->join_attempts >= config_.join_max_attempts) {
        m->joining = false;
        m->join_failed = true;
        s.last_error = "join failed: no response after retries";
        break;
      }
      if (m->owner == s.id) {
        // Group owner re-joining its own group's relay anchor.
        if (s.registry && s.registry->anchor != s.id) {
          send_join(config_, s, *m, s.registry->anchor, RelayIntent::None, out);
        }
        break;
      }
      // One retry toward a redirect target, then back to the owner. A
      // secondary relay may only talk to its parent, so it keeps retrying it.
      if (m->join_target && (m->secondary || m->join_attempts < 2)) {
        send_join(config_, s, *m, m->join_target, RelayIntent::None, out);
        break;
      }
      const bool visiting = s.visiting && &*s.visiting == m;
      const RelayIntent intent =
          visiting && !m->secondary ? RelayIntent::Visitor : RelayIntent::None;
      send_join(config_, s, *m, std::nullopt, intent, out);
      break;
    }
    case TimerKind::PromotionTimeout: {
      if (!s.registry) break;
      auto& reg = *s.registry;
      if (!reg.pending_promotion || reg.promotion_token != timer.token) break;
      reg.pending_promotion.reset();
      reg.visitor_relay.reset();
      shift_anchor(config_, s, s.id, now, out);
      break;
    }
  }
  return out;
}

Actions NodeProtocol::subscribe(NodeState& s, const TopicId& topic, SimTime /*now*/) const {
  Actions out;
  if (s.subscriptions.contains(topic)) return out;
  s.subscriptions = routing::subscribe(s.subscriptions, topic);
  if (s.is_anchor()) {
    refresh(config_, s, out);
  } else if (s.native.joining || s.native.accepted) {
    send(s, out, s.native.group, s.native.anchor, core::SubscriptionUpdate{true, topic});
  }
  return out;
}

Actions NodeProtocol::unsubscribe(NodeState& s, const TopicId& topic, SimTime /*now*/) const {
  Actions out;
  if (!s.subscriptions.contains(topic)) return out;
  s.subscriptions = routing::unsubscribe(s.subscriptions, topic);
  if (s.is_anchor()) {
    refresh(config_, s, out);
  } else if (s.native.joining || s.native.accepted) {
    send(s, out, s.native.group, s.native.anchor, core::SubscriptionUpdate{false, topic});
  }
  return out;
}

Actions NodeProtocol::publish(NodeState& s, const TopicId& topic, std::uint32_t payload_bytes,
                              SimTime /*now*/) const {
  Actions out;
  core::Publication pub{core::PublicationId{s.id, s.next_seq++}, topic, payload_bytes, 0};
  s.seen.insert(pub.id);
  note_published(config_, s, topic, out);
  const auto d = routing::forward_decision(s.id, s.subscriptions, s.table, topic, std::nullopt);
  if (d.deliver_locally) out.push_back(DeliverLocal{pub});
  forward_to(s, out, pub, d.send_to);
  return out;
}

Actions NodeProtocol::handle_publication(NodeState& s, const Message& msg, SimTime /*now*/) const {
  Actions out;
  const auto& pub = std::get<core::Publication>(msg.body);
  if (!s.seen.insert(pub.id)) return out;
  note_published(config_, s, pub.topic, out);
  const auto d = routing::forward_decision(s.id, s.subscriptions, s.table, pub.topic, msg.src.node);
  if (d.deliver_locally) out.push_back(DeliverLocal{pub});
  forward_to(s, out, pub, d.send_to);
  return out;
}

Actions NodeProtocol::handle_beacon(NodeState& s, const Message& msg, SimTime now) const {
  const auto& b = std::get<core::Beacon>(msg.body);
  if (auto it = s.liveness.find(b.sender); it != s.liveness.end()) it->second = now;
  return {};
}

Actions NodeProtocol::handle_join_request(NodeState& s, const Message& msg, SimTime now) const {
  Actions out;
  const auto& req = std::get<core::JoinRequest>(msg.body);
  const NodeId from = msg.src.node;
  const GroupId g = msg.dst.group;

  if (s.registry && g == s.native.group) {
    auto& reg = *s.registry;
    if (req.ssid != reg.credentials.ssid) {
      send(s, out, g, from, core::JoinAccept{false, s.id, {}});
      return out;
    }
    switch (req.intent) {
      case RelayIntent::NativeRequest: {
        const bool taken = reg.native_relay && *reg.native_relay != from;
        if (!taken && reg.native_relay != from) {
          reg.native_relay = from;
          reg.native_active = false;
        }
        send(s, out, g, from, core::RelayAck{g, !taken});
        return out;
      }
      case RelayIntent::Visitor: {
        if (reg.visitor_relay && *reg.visitor_relay != from) {
          send(s, out, g, from, core::RelayAck{g, false});
          return out;
        }
        reg.visitor_relay = from;
        s.liveness[from] = now;
        if (reg.anchor == from) {
          send(s, out, g, from, core::RelayAck{g, true});
        } else if (reg.pending_promotion == from) {
          // A takeover is already under way; its reply settles this.
        } else if (reg.anchor == s.id) {
          send(s, out, g, from, core::RelayAck{g, true});
          shift_anchor(config_, s, from, now, out);
        } else {
          send(s, out, g, from, core::JoinRedirect{reg.anchor});
        }
        return out;
      }
      case RelayIntent::None:
        break;
    }
    reg.members.insert(from);
    s.liveness[from] = now;
    if (reg.anchor != s.id) {
      send(s, out, g, from, core::JoinRedirect{reg.anchor});
      return out;
    }
  }

  auto dom = s.domain.groups.find(g);
  if (dom == s.domain.groups.end() || req.intent != RelayIntent::None) return out;
  if (dom->second != req.ssid) {
    send(s, out, g, from, core::JoinAccept{false, s.id, {}});
    return out;
  }
  s.domain.members[from] = MemberRecord{g, req.subscriptions, req.relay};
  s.domain.pushed.erase(from);
  s.liveness[from] = now;
  auto tables = refresh(config_, s, out, from);
  ForwardingTable t = tables[from];
  s.domain.pushed[from] = t;
  send(s, out, g, from, core::JoinAccept{true, s.id, std::move(t)});
  return out;
}

Actions NodeProtocol::handle_join_redirect(NodeState& s, const Message& msg, SimTime /*now*/) const {
  Actions out;
  const auto& red = std::get<core::JoinRedirect>(msg.body);
  const NodeId from = msg.src.node;
  Membership* m = s.membership_for(msg.dst.group);
  if (m == nullptr) return out;
  if (m->owner && *m->owner != from) return out;
  m->owner = from;
  const NodeId target = red.target;
  if (target == s.id) return out;
  if ((m->joining && m->join_target == target) || (m->accepted && m->anchor == target)) return out;

  const bool is_visiting = s.visiting && &*s.visiting == m;
  if (is_visiting) {
    // The adjacent group has (or regained) a native primary relay: serve
    // under it as a secondary relay.
    drop_group_members(s, m->group);
    s.domain.groups.erase(m->group);
    s.domain.parent_table.clear();
    m->secondary = true;
    set_role(s, Role::SecondaryRelay, out);
    if (s.activation_pending) activate_native(s, out);
  }
  m->join_attempts = 0;
  send_join(config_, s, *m, target, RelayIntent::None, out);
  if (s.is_anchor()) refresh(config_, s, out);
  return out;
}

namespace {

void apply_table(const ProtocolConfig& cfg, NodeState& s, Membership& m, ForwardingTable table,
                 Actions& out) {
  const bool upward = s.visiting && &*s.visiting == &m && m.secondary;
  if (upward) {
    s.domain.parent_table = std::move(table);
    refresh(cfg, s, out);
  } else if (!s.is_anchor()) {
    s.table = std::move(table);
  }
}

}  // namespace

Actions NodeProtocol::handle_join_accept(NodeState& s, const Message& msg, SimTime /*now*/) const {
  Actions out;
  const auto& acc = std::get<core::JoinAccept>(msg.body);
  const NodeId from = msg.src.node;
  Membership* m = s.membership_for(msg.dst.group);
  if (m == nullptr || !m->joining) return out;
  if (m->join_target ? *m->join_target != from : (m->owner && *m->owner != from)) return out;
  if (!acc.accepted) {
    m->joining = false;
    m->join_failed = true;
    s.last_error = "join rejected: credentials do not match";
    return out;
  }
  if (!m->join_target) m->owner = from;
  m->anchor = from;
  m->accepted = true;
  m->joining = false;
  m->join_target.reset();
  m->join_attempts = 0;
  apply_table(config_, s, *m, acc.table, out);
  return out;
}

Actions NodeProtocol::handle_routing_push(NodeState& s, const Message& msg, SimTime /*now*/) const {
  Actions out;
  Membership* m = s.membership_for(msg.dst.group);
  if (m == nullptr || !m->accepted || m->anchor != msg.src.node) return out;
  apply_table(config_, s, *m, std::get<core::RoutingPush>(msg.body).table, out);
  return out;
}

Actions NodeProtocol::handle_subscription_update(NodeState& s, const Message& msg,
                                                 SimTime /*now*/) const {
  Actions out;
  const auto& upd = std::get<core::SubscriptionUpdate>(msg.body);
  auto it = s.domain.members.find(msg.src.node);
  if (it == s.domain.members.end() || it->second.group != msg.dst.group) return out;
  auto& topics = it->second.topics;
  const bool changed = upd.add ? topics.insert(upd.topic).second : topics.erase(upd.topic) > 0;
  if (changed) refresh(config_, s, out);
  return out;
}

Actions NodeProtocol::handle_promote_to_relay(NodeState& s, const Message& msg,
                                              SimTime /*now*/) const {
  Actions out;
  const auto& creds = std::get<core::PromoteToRelay>(msg.body).credentials;
  auto valid = [&] {
    if (directory_ == nullptr) return true;
    auto it = directory_->find(creds.group);
    return it != directory_->end() && it->second == creds;
  };
  if (s.role == Role::GroupOwner) {
    s.last_error = "promotion refused: group owner cannot act as legacy client";
    return out;
  }
  if (s.visiting && s.visiting->group == creds.group && core::is_relay(s.role)) {
    // Takeover: the adjacent group's owner lost its primary relay.
    if (!valid()) {
      s.last_error = "takeover refused: bad credentials";
      return out;
    }
    become_visiting_anchor(s, out);
    send_to_owner(s, out, *s.visiting, core::RelayAck{creds.group, true});
    refresh(config_, s, out);
    return out;
  }
  if (core::is_relay(s.role) || s.visiting || s.pending_promotion) {
    s.last_error = "promotion refused: already a relay";
    return out;
  }
  if (creds.group == s.native.group) {
    s.last_error = "promotion refused: credentials name the native group";
    return out;
  }
  if (!valid()) {
    s.last_error = "attach to adjacent group failed: bad credentials";
    return out;
  }
  s.pending_promotion = creds;
  core::JoinRequest req;
  req.ssid = s.native.ssid;
  req.subscriptions = s.subscriptions;
  req.intent = RelayIntent::NativeRequest;
  send_to_owner(s, out, s.native, std::move(req));
  return out;
}

Actions NodeProtocol::handle_relay_ack(NodeState& s, const Message& msg, SimTime now) const {
  Actions out;
  const auto& ack = std::get<core::RelayAck>(msg.body);
  const NodeId from = msg.src.node;
  const GroupId g = msg.dst.group;

  if (s.registry && g == s.native.group) {
    auto& reg = *s.registry;
    if (reg.pending_promotion == from) {
      reg.pending_promotion.reset();
      if (ack.accepted) {
        shift_anchor(config_, s, from, now, out);
      } else {
        reg.visitor_relay.reset();
        shift_anchor(config_, s, s.id, now, out);
      }
    } else if (reg.native_relay == from && !reg.native_active) {
      if (ack.accepted) {
        reg.native_active = true;
        shift_anchor(config_, s, from, now, out);
      } else {
        reg.native_relay.reset();
      }
    }
    return out;
  }

  if (g == s.native.group) {
    if (!s.pending_promotion) return out;
    const auto creds = *s.pending_promotion;
    s.pending_promotion.reset();
    if (!ack.accepted) {
      s.last_error = "promotion refused: native group already has a relay";
      return out;
    }
    s.endpoints.push_back({s.id, InterfaceKind::LegacyClient, creds.group, 0});
    Membership v;
    v.group = creds.group;
    v.ssid = creds.ssid;
    v.iface = InterfaceKind::LegacyClient;
    s.visiting = std::move(v);
    s.activation_pending = true;
    set_role(s, Role::PrimaryRelay, out);
    send_join(config_, s, *s.visiting, std::nullopt, RelayIntent::Visitor, out);
    return out;
  }

  if (s.visiting && g == s.visiting->group) {
    auto& v = *s.visiting;
    if (v.owner && *v.owner != from) return out;
    v.owner = from;
    if (!ack.accepted) {
      const bool withdraw = s.activation_pending;
      s.activation_pending = false;
      detach_visiting(s, out);
      s.last_error = "promotion refused: adjacent group already has a relay";
      if (withdraw) send_to_owner(s, out, s.native, core::RelayAck{s.native.group, false});
      return out;
    }
    if (s.domain.groups.contains(g)) return out;
    become_visiting_anchor(s, out);
    if (s.activation_pending) activate_native(s, out);
    refresh(config_, s, out);
  }
  return out;
}

namespace {

void beacon_to(NodeState& s, const Membership& m, std::optional<NodeId> dst, Actions& out) {
  send(s, out, m.group, dst, core::Beacon{s.id, s.beacon_seq});
}

}  // namespace

Actions NodeProtocol::emit_beacon(NodeState& s, SimTime /*now*/) const {
  Actions out;
  s.beacon_seq += 1;
  auto one = [&](const Membership& m) {
    if (!m.joining && !m.accepted) return;
    const bool owner_is_self = m.owner == s.id;
    if (!owner_is_self && !m.secondary) beacon_to(s, m, std::nullopt, out);
    if (m.anchor && *m.anchor != s.id && m.anchor != m.owner) beacon_to(s, m, *m.anchor, out);
  };
  one(s.native);
  if (s.visiting) one(*s.visiting);
  return out;
}

Actions NodeProtocol::detect_membership_change(NodeState& s, SimTime now) const {
  Actions out;
  std::vector<NodeId> lost;
  for (const auto& [node, last] : s.liveness) {
    if (now - last > config_.beacon_timeout) lost.push_back(node);
  }
  bool changed = false;
  std::vector<NodeId> lost_anchors;
  for (const NodeId n : lost) {
    s.liveness.erase(n);
    if (s.registry) {
      auto& reg = *s.registry;
      reg.members.erase(n);
      if (reg.anchor == n && n != s.id) {
        lost_anchors.push_back(n);
      } else {
        // A secondary relay talks only to its parent anchor, so the owner
        // cannot see it die; a stale visitor slot costs one failed takeover.
        if (reg.native_relay == n) {
          reg.native_relay.reset();
          reg.native_active = false;
        }
      }
    }
    if (s.domain.members.erase(n) > 0) {
      s.domain.pushed.erase(n);
      changed = true;
    }
  }
  if (changed) refresh(config_, s, out);
  for (const NodeId n : lost_anchors) {
    auto more = handle_relay_loss(s, n, now);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  }
  return out;
}

Actions NodeProtocol::handle_relay_loss(NodeState& s, NodeId lost, SimTime now) const {
  Actions out;
  if (!s.registry) return out;
  auto& reg = *s.registry;
  if (reg.native_relay == lost) {
    reg.native_relay.reset();
    reg.native_active = false;
  }
  if (reg.visitor_relay == lost) reg.visitor_relay.reset();
  if (reg.pending_promotion == lost) reg.pending_promotion.reset();
  if (reg.anchor != lost) return out;

  if (reg.visitor_relay && !reg.pending_promotion) {
    const NodeId candidate = *reg.visitor_relay;
    reg.pending_promotion = candidate;
    reg.anchor = candidate;
    reg.promotion_token = fresh_token(s);
    s.liveness[candidate] = now;
    send(s, out, s.native.group, candidate, core::PromoteToRelay{reg.credentials});
    out.push_back(SetTimer{TimerKind::PromotionTimeout, config_.promotion_timeout,
                           reg.promotion_token, s.native.group});
    return out;
  }
  shift_anchor(config_, s, s.id, now, out);
  return out;
}

}  // namespace swarnet::protocol
