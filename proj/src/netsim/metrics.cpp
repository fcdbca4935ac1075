#include "swarnet/netsim/metrics.hpp"

#include <numeric>

namespace swarnet::sim {

double RunMetrics::throughput_bps() const {
  if (duration_s <= 0.0) return 0.0;
  return static_cast<double>(bytes_delivered) * 8.0 / duration_s;
}

double RunMetrics::loss() const {
  if (sent == 0) return 0.0;
  return static_cast<double>(sent - delivered) / static_cast<double>(sent);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace swarnet::sim
