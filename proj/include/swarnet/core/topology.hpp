#pragma once

#include <string>
#include <vector>

#include "swarnet/core/ids.hpp"

namespace swarnet::core {

struct NodeDecl {
  NodeId id;
  std::string name;
  Role role = Role::OrdinaryPeer;
  GroupId native_group;
};

struct GroupDecl {
  GroupId id;
  std::string ssid;
};

struct TopologyDesc {
  std::vector<NodeDecl> nodes;
  std::vector<GroupDecl> groups;
  std::vector<Endpoint> endpoints;
};

struct Violation {
  std::string code;
  std::string message;
};

// Structural rules of a multi-group layout. Violations are data; an empty
// list means the topology is acceptable.
std::vector<Violation> validate_topology(const TopologyDesc& topology);

}  // namespace swarnet::core
