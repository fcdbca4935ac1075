#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "swarnet/scenarios/experiment.hpp"

namespace swarnet::scenarios {

inline constexpr const char* kCsvHeader = "scenario,load_bps,run,sent,delivered,throughput_bps,loss";

// Rows are sorted by (scenario, load, run). A non-empty `metadata` is written
// first as a '#' comment line.
std::string format_csv(std::vector<RunResult> results, const std::string& metadata = {});
void write_csv(const std::vector<RunResult>& results, const std::filesystem::path& path,
               const std::string& metadata = {});
// Skips '#' lines. Throws ScenarioError on malformed rows.
std::vector<RunResult> parse_csv(const std::string& text);
std::vector<RunResult> read_csv(const std::filesystem::path& path);
// First '#' line without the marker, or empty.
std::string read_csv_metadata(const std::filesystem::path& path);

struct PointSummary {
  std::string scenario;
  double load_bps = 0.0;
  std::uint32_t runs = 0;
  double mean_throughput_bps = 0.0;
  double mean_loss = 0.0;
};

// Arithmetic means per (scenario, load); independent of row order.
std::vector<PointSummary> aggregate(std::vector<RunResult> results);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace swarnet::scenarios
