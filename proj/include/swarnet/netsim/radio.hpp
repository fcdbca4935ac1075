#pragma once

#include <cstddef>
#include <cstdint>

#include "swarnet/netsim/event_queue.hpp"

namespace swarnet::sim {

// Airtime model. A frame occupies its group's channel, the sender's radio and
// the receiver's radio for
//   size*8 / channel_capacity + mac_overhead
// after which the sender's radio alone stays busy for
//   (+ forward_cost) (+ switch_cost)
// A relay's two interfaces share one radio.
struct RadioConfig {
  double channel_capacity_bps = 22e6;
  SimTime hop_latency_us = 1000;
  SimTime mac_overhead_us = 45;
  // Extra airtime for frames re-sent by a forwarding node.
  SimTime forward_cost_us = 50;
  // Charged when a relay radio moves between its two interfaces.
  SimTime switch_cost_us = 70;
  // Uniform random backoff added to every frame, in [0, jitter].
  SimTime jitter_us = 8;
  std::size_t queue_capacity = 100;  // data packets per (node, interface)
  bool shared_radio = true;
};

SimTime frame_airtime(const RadioConfig& radio, std::uint32_t size_bytes);

}  // namespace swarnet::sim
