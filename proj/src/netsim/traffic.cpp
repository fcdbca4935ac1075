#include "swarnet/netsim/traffic.hpp"

#include <cmath>

namespace swarnet::sim {

std::uint64_t packet_count(const TrafficGenerator& gen) {
  if (gen.offered_load_bps <= 0.0 || gen.packet_payload == 0) return 0;
  const double bits = gen.duration_s * gen.offered_load_bps;
  // Guard against 8928.000000001-style representation error before flooring.
  return static_cast<std::uint64_t>(std::floor(bits / (gen.packet_payload * 8.0) + 1e-9));
}

SimTime emission_time(const TrafficGenerator& gen, std::uint64_t k) {
  const double gap_us = gen.packet_payload * 8.0 * 1e6 / gen.offered_load_bps;
  return gen.start_us + static_cast<SimTime>(std::floor(static_cast<double>(k) * gap_us));
}

}  // namespace swarnet::sim
