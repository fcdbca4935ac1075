#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "plot.hpp"
#include "swarnet/scenarios/experiment.hpp"
#include "swarnet/scenarios/results.hpp"
#include "swarnet/scenarios/scenario_io.hpp"

#ifndef SWARNET_VERSION
#define SWARNET_VERSION "0.0.0"
#endif

namespace swarnet::cli {
namespace fs = std::filesystem;
using scenarios::ScenarioSpec;

namespace {

// Carries an exit code out of a subcommand.
struct Failure {
  int code;
  std::string message;
};

struct Options {
  std::vector<std::string> scenarios;
  std::string fanout = "subscriber-directed";
  std::uint64_t seed = 1;
  std::uint32_t runs = 0;  // 0 keeps the plan default
  std::string loads;
  double duration_s = 0;  // 0 keeps the plan default
  unsigned workers = 0;
  double load_mbps = 5;
  bool trace = false;
  std::string out_dir;
  std::string in_dir;
};

ScenarioSpec resolve(const std::string& name) {
  if (auto b = scenarios::find_builtin(name)) return *b;
  if (!fs::exists(name)) throw Failure{kExitUnknownScenario, "unknown scenario: " + name};
  try {
    return scenarios::load_scenario(name);
  } catch (const scenarios::ScenarioError& e) {
    throw Failure{kExitBadConfig, e.what()};
  }
}

void require_valid(const ScenarioSpec& spec) {
  const auto v = scenarios::validate_scenario(spec);
  if (v.empty()) return;
  std::string msg = "scenario " + spec.name + " is invalid:";
  for (const auto& x : v) msg += "\n  " + x.code + ": " + x.message;
  throw Failure{kExitBadConfig, msg};
}

scenarios::RunOptions run_options(const Options& o) {
  scenarios::RunOptions opt;
  const auto f = routing::parse_fanout(o.fanout);
  if (!f) throw Failure{kExitBadConfig, "unknown anchor fanout: " + o.fanout};
  opt.sim.protocol.fanout = *f;
  return opt;
}

scenarios::ExperimentPlan plan_from(const Options& o) {
  auto plan = scenarios::default_plan();
  plan.seed = o.seed;
  plan.workers = o.workers;
  if (o.runs > 0) plan.runs_per_point = o.runs;
  if (o.duration_s > 0) plan.duration_s = o.duration_s;
  if (!o.loads.empty()) {
    try {
      plan.loads = parse_loads(o.loads);
    } catch (const std::invalid_argument& e) {
      throw Failure{kExitBadConfig, e.what()};
    }
  }
  return plan;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Hash of everything that shapes the numbers: scenario, radio, protocol, plan.
std::string config_hash(const ScenarioSpec& spec, const scenarios::RunOptions& opt,
                        const scenarios::ExperimentPlan& plan) {
  std::ostringstream os;
  const auto& r = opt.sim.radio;
  const auto& p = opt.sim.protocol;
  os << scenarios::scenario_to_json(spec) << '|' << r.channel_capacity_bps << ',' << r.hop_latency_us << ','
     << r.mac_overhead_us << ',' << r.forward_cost_us << ',' << r.switch_cost_us << ',' << r.jitter_us << ','
     << r.queue_capacity << ',' << r.shared_radio << '|' << p.beacon_period << ',' << p.beacon_timeout << ','
     << p.join_retry_delay << ',' << p.join_max_attempts << ',' << p.promotion_timeout << ','
     << routing::to_string(p.fanout) << '|' << opt.packet_payload << ',' << opt.drain_s << '|'
     << plan.runs_per_point << ',' << plan.duration_s;
  for (const double l : plan.loads) os << ',' << l;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

std::string metadata(const ScenarioSpec& spec, const scenarios::RunOptions& opt,
                     const scenarios::ExperimentPlan& plan) {
  return "seed=" + std::to_string(plan.seed) + " config_hash=" + config_hash(spec, opt, plan) +
         " version=" + version() + " scenario=" + spec.name + " runs=" + std::to_string(plan.runs_per_point) +
         " duration_s=" + scenarios::format_double(plan.duration_s) +
         " fanout=" + std::string(routing::to_string(opt.sim.protocol.fanout));
}

fs::path out_dir(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return kDefaultOutDir;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure{kExitIo, "cannot create " + dir.string() + ": " + ec.message()};
}

std::string mbps(double bps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", bps / 1e6);
  return buf;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", fraction * 100);
  return buf;
}

std::vector<std::string> names_or(const Options& o, std::vector<std::string> fallback) {
  return o.scenarios.empty() ? fallback : o.scenarios;
}

int cmd_validate(const Options& o, std::ostream& out) {
  std::vector<std::string> names = o.scenarios;
  if (names.empty()) {
    for (const auto& s : scenarios::builtin_scenarios()) names.push_back(s.name);
  }
  bool clean = true;
  for (const auto& name : names) {
    const auto spec = resolve(name);
    const auto v = scenarios::validate_scenario(spec);
    if (v.empty()) {
      out << spec.name << ": ok\n";
      continue;
    }
    clean = false;
    out << spec.name << ": " << v.size() << " violation(s)\n";
    for (const auto& x : v) out << "  " << x.code << ": " << x.message << '\n';
  }
  return clean ? kExitOk : kExitViolations;
}

int cmd_run(const Options& o, std::ostream& out) {
  if (o.scenarios.size() > 1) throw Failure{kExitUsage, "run takes a single scenario"};
  const auto spec = resolve(o.scenarios.empty() ? "2d1g" : o.scenarios.front());
  require_valid(spec);
  auto opt = run_options(o);
  opt.sim.trace = o.trace;
  auto plan = plan_from(o);
  plan.loads = {o.load_mbps * 1e6};
  plan.runs_per_point = 1;
  if (!(o.load_mbps > 0)) throw Failure{kExitBadConfig, "--load must be positive"};

  scenarios::SingleRun r;
  try {
    r = scenarios::run_single(spec, plan.loads.front(), plan.duration_s, plan.seed, opt);
  } catch (const scenarios::BootstrapError& e) {
    throw Failure{kExitRunFailed, e.what()};
  }
  const auto& m = r.metrics;
  const auto meta = metadata(spec, opt, plan);
  out << "# " << meta << '\n';
  out << "scenario " << spec.name << " load " << mbps(plan.loads.front()) << " Mbit/s\n";
  out << "sent " << m.sent << " delivered " << m.delivered << " blocked " << m.blocked << '\n';
  out << "queue_drops " << m.queue_drops << " in_flight " << m.in_flight << " dead " << m.dead_losses
      << " unrouted " << m.unrouted << '\n';
  out << "throughput " << mbps(m.throughput_bps()) << " Mbit/s loss " << percent(m.loss()) << " %\n";
  out << "path";
  for (const auto n : m.observed_path) out << ' ' << spec.label(n);
  out << '\n';
  out << "affinity_violations " << m.affinity_violations << '\n';

  if (o.trace) {
    const auto dir = out_dir(o);
    ensure_dir(dir);
    const auto path = dir / (spec.name + "-trace.txt");
    std::ofstream f(path, std::ios::binary);
    f << "# " << meta << '\n' << r.trace;
    if (!f) throw Failure{kExitIo, "cannot write " + path.string()};
    out << "trace " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto opt = run_options(o);
  const auto plan = plan_from(o);
  const auto dir = out_dir(o);
  ensure_dir(dir);
  for (const auto& name : names_or(o, scenarios::sweep_scenario_names())) {
    const auto spec = resolve(name);
    require_valid(spec);
    std::vector<scenarios::RunResult> results;
    try {
      results = scenarios::run_experiment(spec, plan, opt);
    } catch (const scenarios::BootstrapError& e) {
      throw Failure{kExitRunFailed, e.what()};
    } catch (const scenarios::ScenarioError& e) {
      throw Failure{kExitBadConfig, e.what()};
    }
    const auto path = dir / (spec.name + ".csv");
    try {
      scenarios::write_csv(results, path, metadata(spec, opt, plan));
    } catch (const std::exception& e) {
      throw Failure{kExitIo, e.what()};
    }
    out << spec.name << " -> " << path.string() << '\n';
    for (const auto& p : scenarios::aggregate(results)) {
      out << "  load " << mbps(p.load_bps) << " Mbit/s  throughput " << mbps(p.mean_throughput_bps)
          << " Mbit/s  loss " << percent(p.mean_loss) << " %\n";
    }
  }
  return kExitOk;
}

int cmd_plot(const Options& o, std::ostream& out) {
  const fs::path in = o.in_dir.empty() ? out_dir(o) : fs::path(o.in_dir);
  const auto dir = out_dir(o);
  for (const auto& name : names_or(o, scenarios::sweep_scenario_names())) {
    // Accept "5d3g" for the file written under the canonical name.
    std::string stem = name;
    if (auto b = scenarios::find_builtin(name)) stem = b->name;
    const auto csv = in / (stem + ".csv");
    if (!fs::exists(csv)) throw Failure{kExitMissingCsv, "missing sweep output: " + csv.string()};
    std::vector<scenarios::RunResult> rows;
    std::string meta;
    try {
      rows = scenarios::read_csv(csv);
      meta = scenarios::read_csv_metadata(csv);
    } catch (const scenarios::ScenarioError& e) {
      throw Failure{kExitBadConfig, e.what()};
    }
    ensure_dir(dir);
    try {
      const auto files = write_plots(stem, rows, meta, dir);
      out << files.throughput_svg.string() << '\n' << files.loss_svg.string() << '\n' << files.dat.string() << '\n';
    } catch (const std::exception& e) {
      throw Failure{kExitIo, e.what()};
    }
  }
  return kExitOk;
}

}  // namespace

const char* version() { return SWARNET_VERSION; }

std::vector<double> parse_loads(const std::string& text) {
  auto number = [](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("bad load value: '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(number(p));
    if (parts.size() != 3 || parts[2] <= 0 || parts[1] < parts[0]) {
      throw std::invalid_argument("load range must be start:stop:step with step > 0");
    }
    const auto n = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back((parts[0] + i * parts[2]) * 1e6);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p) * 1e6);
  }
  if (out.empty()) throw std::invalid_argument("no loads given");
  for (const double l : out) {
    if (!(l > 0)) throw std::invalid_argument("loads must be positive");
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-group Wi-Fi Direct pub/sub simulator"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-s,--scenario", o.scenarios, "Builtin name or scenario JSON file (repeatable)");
    sub->add_option("--anchor-fanout", o.fanout, "subscriber-directed | all-endpoints")
        ->check(CLI::IsMember({"subscriber-directed", "all-endpoints"}));
    sub->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    sub->add_option("--duration", o.duration_s, "Traffic seconds per run (default 10)");
    sub->add_option("-o,--out-dir", o.out_dir,
                    std::string("Output directory (default $") + kOutDirEnv + " or " + kDefaultOutDir + ")");
  };

  auto* validate = app.add_subcommand("validate", "Check scenarios; exit 1 when any violation is found");
  validate->add_option("-s,--scenario", o.scenarios, "Builtin name or scenario JSON file (default: all builtins)");

  auto* run = app.add_subcommand("run", "Run one simulation and print its metrics");
  common(run);
  run->add_option("--load", o.load_mbps, "Offered load in Mbit/s")->capture_default_str();
  run->add_flag("--trace", o.trace, "Write the event trace to <out-dir>/<scenario>-trace.txt");

  auto* sweep = app.add_subcommand("sweep", "Load sweep; writes <out-dir>/<scenario>.csv");
  common(sweep);
  sweep->add_option("--runs", o.runs, "Runs per load point (default 20)");
  sweep->add_option("--loads", o.loads, "Mbit/s list '1,3,5' or range '1:25:2' (default 1:25:2)");
  sweep->add_option("--workers", o.workers, "Worker threads (default: hardware threads)");

  auto* plot = app.add_subcommand("plot", "Write throughput and loss SVGs plus .dat files from sweep CSVs");
  plot->add_option("-s,--scenario", o.scenarios, "Scenarios to plot (default: the four sweep scenarios)");
  plot->add_option("-i,--in-dir", o.in_dir, "Directory holding sweep CSVs (default: the output directory)");
  plot->add_option("-o,--out-dir", o.out_dir, "Output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(o, out);
    if (*run) return cmd_run(o, out);
    if (*sweep) return cmd_sweep(o, out);
    return cmd_plot(o, out);
  } catch (const Failure& f) {
    err << "error: " << f.message << '\n';
    return f.code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRunFailed;
  }
}

}  // namespace swarnet::cli
