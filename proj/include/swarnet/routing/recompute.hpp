#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarnet/routing/tables.hpp"

namespace swarnet::routing {

enum class EdgeKind : std::uint8_t {
  IntraGroupP2p,
  InterGroupLegacy,
};

struct BackboneEdge {
  NodeId a;
  NodeId b;
  EdgeKind kind = EdgeKind::IntraGroupP2p;

  friend auto operator<=>(const BackboneEdge&, const BackboneEdge&) = default;
};

// The labelled backbone. Must be a tree.
using BackboneGraph = std::vector<BackboneEdge>;

// Everything a forwarding anchor knows when it recomputes tables.
struct AnchorView {
  NodeId anchor;
  BackboneGraph backbone;
  std::map<NodeId, LocalSubscriptionSet> subscriptions;
  // Nodes that forward for others (relays, and neighbouring anchors folded
  // into this view). Non-forwarding nodes other than the anchor must be
  // leaves of the backbone.
  std::set<NodeId> relays;
  // Topics already published somewhere in the view. Only these are flooded
  // in all-endpoints mode.
  LocalSubscriptionSet published;
};

enum class AnchorFanout : std::uint8_t {
  // Forwarders send only toward subtrees that contain a subscriber.
  SubscriberDirected,
  // Additionally, the anchor floods every published topic it does not
  // subscribe to itself across all of its inter-group legacy neighbours.
  AllEndpoints,
};

class InvalidView : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using TableSet = std::map<NodeId, ForwardingTable>;

// Full per-node tables for the view. Nodes with no entries map to an empty
// table. Throws InvalidView when the backbone is not a tree or the anchor
// is missing from it.
TableSet recompute_tables(const AnchorView& view,
                          AnchorFanout fanout = AnchorFanout::SubscriberDirected);

// Set of vertices of the backbone plus the anchor.
std::set<NodeId> view_nodes(const AnchorView& view);

std::string_view to_string(AnchorFanout fanout);
std::optional<AnchorFanout> parse_fanout(std::string_view text);

}  // namespace swarnet::routing
