#include "swarnet/core/ids.hpp"

#include <cstdio>

namespace swarnet::core {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::GroupOwner:
      return "GroupOwner";
    case Role::OrdinaryPeer:
      return "OrdinaryPeer";
    case Role::PrimaryRelay:
      return "PrimaryRelay";
    case Role::SecondaryRelay:
      return "SecondaryRelay";
  }
  return "?";
}

std::string_view to_string(InterfaceKind iface) {
  return iface == InterfaceKind::P2pNative ? "p2p" : "legacy";
}

std::string format_address(Address addr) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (addr >> 24) & 0xffu, (addr >> 16) & 0xffu,
                (addr >> 8) & 0xffu, addr & 0xffu);
  return buf;
}

}  // namespace swarnet::core
