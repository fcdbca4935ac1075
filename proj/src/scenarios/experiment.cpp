#include "swarnet/scenarios/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace swarnet::scenarios {
namespace {

sim::SimTime to_us(double seconds) { return static_cast<sim::SimTime>(std::llround(seconds * 1e6)); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

core::CredentialBundle credentials_of(const GroupSpec& g) { return {g.id, g.ssid, g.passphrase}; }

}  // namespace

std::unique_ptr<sim::Simulator> build_simulator(const ScenarioSpec& spec, std::uint64_t seed,
                                                const RunOptions& options) {
  auto sim = std::make_unique<sim::Simulator>(options.sim, seed);
  for (const auto& g : spec.groups) sim->add_group_owner(g.owner, credentials_of(g));
  for (const auto& g : spec.groups) {
    for (const NodeId m : g.members) sim->add_peer(m, g.id);
  }
  sim->set_sink(spec.sink);
  for (const auto& e : spec.bootstrap) {
    const auto at = to_us(e.at_s);
    switch (e.kind) {
      case ScriptKind::Join:
        sim->start_node(e.node, at);
        break;
      case ScriptKind::Subscribe:
        sim->subscribe(e.node, *e.topic, at);
        break;
      case ScriptKind::Unsubscribe:
        sim->unsubscribe(e.node, *e.topic, at);
        break;
      case ScriptKind::Promote: {
        const GroupSpec* g = e.group ? spec.group(*e.group) : nullptr;
        if (g == nullptr) throw BootstrapError("promote event names an undeclared group");
        sim->promote(e.node, credentials_of(*g), at);
        break;
      }
      case ScriptKind::Kill:
        sim->kill(e.node, at);
        break;
      case ScriptKind::StartTraffic:
        break;
    }
  }
  return sim;
}

void check_bootstrap(const ScenarioSpec& spec, const sim::Simulator& sim) {
  for (const auto& r : spec.relays) {
    const auto& st = sim.node(r.node);
    if (!sim.alive(r.node) || !core::is_relay(st.role)) {
      std::string why = st.last_error.empty() ? "promotion did not complete" : st.last_error;
      throw BootstrapError("scenario " + spec.name + ": relay " + spec.label(r.node) + " failed: " + why);
    }
  }
  for (const NodeId n : spec.all_nodes()) {
    const auto& st = sim.node(n);
    if (st.native.join_failed) {
      throw BootstrapError("scenario " + spec.name + ": " + spec.label(n) + " could not join: " + st.last_error);
    }
  }
}

SingleRun run_single(const ScenarioSpec& spec, double load_bps, double duration_s,
                     std::uint64_t seed, const RunOptions& options) {
  auto sim = build_simulator(spec, seed, options);
  const auto start = to_us(spec.traffic_start_s());
  sim->run_until(start > 0 ? start - 1 : 0);
  check_bootstrap(spec, *sim);

  sim::TrafficGenerator gen;
  gen.source = spec.source;
  gen.topic = spec.topic;
  gen.offered_load_bps = load_bps;
  gen.packet_payload = options.packet_payload;
  gen.duration_s = duration_s;
  gen.start_us = start;
  sim->add_traffic(gen);
  sim->run_until(start + to_us(duration_s + options.drain_s));

  SingleRun out;
  out.metrics = sim->metrics();
  out.metrics.duration_s = duration_s;
  out.trace = sim->trace();
  return out;
}

ExperimentPlan default_plan() {
  ExperimentPlan p;
  for (int mbps = 1; mbps <= 25; mbps += 2) p.loads.push_back(mbps * 1e6);
  return p;
}

std::uint64_t point_seed(std::uint64_t base, std::size_t load_index, std::size_t run_index) {
  return base ^ splitmix64((static_cast<std::uint64_t>(load_index) << 32) | run_index);
}

std::vector<RunResult> run_experiment(const ScenarioSpec& spec, const ExperimentPlan& plan,
                                      const RunOptions& options) {
  if (plan.loads.empty()) throw ScenarioError("experiment plan has no loads");
  if (plan.runs_per_point == 0) throw ScenarioError("experiment plan needs at least one run per point");
  for (double l : plan.loads) {
    if (!(l > 0.0)) throw ScenarioError("offered loads must be positive");
  }

  const std::size_t total = plan.loads.size() * plan.runs_per_point;
  std::vector<RunResult> results(total);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t li = i / plan.runs_per_point;
      const auto run = static_cast<std::uint32_t>(i % plan.runs_per_point);
      try {
        auto single = run_single(spec, plan.loads[li], plan.duration_s, point_seed(plan.seed, li, run), options);
        const auto& m = single.metrics;
        RunResult& r = results[i];
        r.scenario = spec.name;
        r.load_bps = plan.loads[li];
        r.run = run;
        r.sent = m.sent;
        r.delivered = m.delivered;
        r.throughput_bps = m.throughput_bps();
        r.loss = m.loss();
        r.hops = m.observed_path.empty() ? 0 : static_cast<int>(m.observed_path.size()) - 1;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
      }
    }
  };

  unsigned workers = plan.workers != 0 ? plan.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, total));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    return std::tie(a.scenario, a.load_bps, a.run) < std::tie(b.scenario, b.load_bps, b.run);
  });
  return results;
}

}  // namespace swarnet::scenarios
