#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "swarnet/netsim/simulator.hpp"
#include "swarnet/scenarios/scenario.hpp"

namespace swarnet::scenarios {

struct RunOptions {
  sim::SimConfig sim;
  std::uint32_t packet_payload = 1400;
  // Quiet period after traffic stops so queued packets can land.
  double drain_s = 2.0;
};

class BootstrapError : public ScenarioError {
 public:
  using ScenarioError::ScenarioError;
};

// Builds the simulator and schedules the bootstrap script (traffic excluded).
std::unique_ptr<sim::Simulator> build_simulator(const ScenarioSpec& spec, std::uint64_t seed,
                                                const RunOptions& options);

// Throws BootstrapError when a declared relay did not come up.
void check_bootstrap(const ScenarioSpec& spec, const sim::Simulator& sim);

struct SingleRun {
  sim::RunMetrics metrics;
  std::string trace;
};

SingleRun run_single(const ScenarioSpec& spec, double load_bps, double duration_s,
                     std::uint64_t seed, const RunOptions& options);

struct RunResult {
  std::string scenario;
  double load_bps = 0.0;
  std::uint32_t run = 0;
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  double throughput_bps = 0.0;
  double loss = 0.0;
  int hops = 0;  // observed path length; not written to CSV

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct ExperimentPlan {
  std::vector<double> loads;
  std::uint32_t runs_per_point = 20;
  std::uint64_t seed = 1;
  double duration_s = 10.0;
  unsigned workers = 0;  // 0 = one per hardware thread
};

// Loads 1..25 Mbit/s in 2 Mbit/s steps, 20 runs of 10 s.
ExperimentPlan default_plan();

std::uint64_t point_seed(std::uint64_t base, std::size_t load_index, std::size_t run_index);

// One result per (load, run), sorted by (scenario, load, run).
std::vector<RunResult> run_experiment(const ScenarioSpec& spec, const ExperimentPlan& plan,
                                      const RunOptions& options);

}  // namespace swarnet::scenarios
