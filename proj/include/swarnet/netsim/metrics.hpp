#pragma once

#include <cstdint>
#include <vector>

#include "swarnet/core/ids.hpp"

namespace swarnet::sim {

// Counters of one simulation run. Publication fates cover only traffic
// emitted by generators and each such publication lands in exactly one
// bucket, so
//   sent = delivered + queue_drops + in_flight + dead_losses + unrouted.
struct RunMetrics {
  std::uint64_t sent = 0;
  std::uint64_t blocked = 0;  // skipped at a full source queue, not sent
  std::uint64_t delivered = 0;
  std::uint64_t bytes_delivered = 0;
  std::uint64_t duplicate_deliveries = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t in_flight = 0;
  std::uint64_t dead_losses = 0;
  std::uint64_t unrouted = 0;

  // Frame-level counters over all traffic.
  std::uint64_t frames = 0;
  std::uint64_t frame_drops = 0;
  std::uint64_t unreachable = 0;
  std::uint64_t affinity_violations = 0;
  std::uint64_t scope_violations = 0;
  std::uint64_t cross_group_via_legacy = 0;

  double duration_s = 0.0;
  std::vector<core::NodeId> observed_path;

  [[nodiscard]] double throughput_bps() const;
  [[nodiscard]] double loss() const;
};

double mean(const std::vector<double>& xs);

}  // namespace swarnet::sim
