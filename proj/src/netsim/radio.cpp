#include "swarnet/netsim/radio.hpp"

#include <cmath>

namespace swarnet::sim {

SimTime frame_airtime(const RadioConfig& radio, std::uint32_t size_bytes) {
  const double us = static_cast<double>(size_bytes) * 8.0 * 1e6 / radio.channel_capacity_bps;
  return static_cast<SimTime>(std::llround(us)) + radio.mac_overhead_us;
}

}  // namespace swarnet::sim
