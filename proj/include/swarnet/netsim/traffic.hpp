#pragma once

#include <cstdint>

#include "swarnet/core/ids.hpp"
#include "swarnet/netsim/event_queue.hpp"

namespace swarnet::sim {

// Constant-bit-rate publisher.
struct TrafficGenerator {
  core::NodeId source;
  core::TopicId topic;
  double offered_load_bps = 1e6;
  std::uint32_t packet_payload = 1400;
  double duration_s = 10.0;
  SimTime start_us = 0;
};

// floor(duration * load / (payload * 8)).
std::uint64_t packet_count(const TrafficGenerator& gen);

// Emission time of packet k (0-based), evenly spaced without drift.
SimTime emission_time(const TrafficGenerator& gen, std::uint64_t k);

}  // namespace swarnet::sim
