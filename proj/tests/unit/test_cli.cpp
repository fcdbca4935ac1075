#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cli.hpp"
#include "swarnet/scenarios/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace swarnet::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "swarnet");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& leaf) {
  const auto d = fs::temp_directory_path() / "swarnet-cli-tests" / leaf;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

const std::vector<std::string> kSmallSweep{"--loads", "1,25", "--runs", "2", "--duration", "1"};

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("validate accepts every builtin") {
  const auto r = cli({"validate"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("4d2g: ok") != std::string::npos);
}

TEST_CASE("validate flags two owners in one group") {
  auto j = nlohmann::json::parse(swarnet::scenarios::scenario_to_json(*swarnet::scenarios::find_builtin("3d1g")));
  j["groups"][0]["members"] = nlohmann::json::array({2});
  j["groups"].push_back({{"id", 1}, {"owner", 3}, {"members", nlohmann::json::array()},
                         {"ssid", "DIRECT-swarnet-g1"}, {"passphrase", "swarnet-pass-1"}});
  const auto path = fresh_dir("twogo") / "twogo.json";
  std::ofstream(path) << j.dump(2);
  const auto r = cli({"validate", "-s", path.string()});
  CHECK(r.code == kExitViolations);
  CHECK(r.out.find("violation") != std::string::npos);
  CHECK(cli({"run", "-s", path.string()}).code == kExitBadConfig);
}

TEST_CASE("distinct exit codes for the documented failures") {
  CHECK(cli({"run", "-s", "no-such-scenario"}).code == kExitUnknownScenario);
  const auto dir = fresh_dir("codes");
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK(cli({"validate", "-s", (dir / "broken.json").string()}).code == kExitBadConfig);
  CHECK(cli({"plot", "-s", "2d1g", "-i", (dir / "nothing").string(), "-o", dir.string()}).code == kExitMissingCsv);
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"sweep", "--bogus"}).code == kExitUsage);
  CHECK(cli({"sweep", "-s", "2d1g", "--loads", "abc", "-o", dir.string()}).code == kExitBadConfig);
  CHECK(cli({"run", "--anchor-fanout", "flood"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
  std::set<int> codes{kExitOk, kExitViolations, kExitUsage, kExitUnknownScenario, kExitBadConfig,
                      kExitMissingCsv, kExitRunFailed, kExitIo};
  CHECK(codes.size() == 8);
}

TEST_CASE("parse_loads") {
  CHECK(parse_loads("1,3,5") == std::vector<double>{1e6, 3e6, 5e6});
  CHECK(parse_loads("1:5:2") == std::vector<double>{1e6, 3e6, 5e6});
  CHECK(parse_loads("1:25:2").size() == 13);
  CHECK(parse_loads("2.5") == std::vector<double>{2.5e6});
  CHECK_THROWS_AS(parse_loads(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_loads("0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_loads("5:1:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_loads("1:5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_loads("1,x"), std::invalid_argument);
}

TEST_CASE("sweep twice with the same seed gives identical CSVs") {
  const auto a = fresh_dir("sweep-a");
  const auto b = fresh_dir("sweep-b");
  REQUIRE(cli(concat({"sweep", "-s", "2d1g", "--seed", "7", "-o", a.string()}, kSmallSweep)).code == kExitOk);
  REQUIRE(cli(concat({"sweep", "-s", "2d1g", "--seed", "7", "--workers", "3", "-o", b.string()}, kSmallSweep)).code ==
          kExitOk);
  const auto text = slurp(a / "2d1g.csv");
  CHECK(text == slurp(b / "2d1g.csv"));
  CHECK(text.rfind("# seed=7 config_hash=", 0) == 0);
  CHECK(text.find(std::string("version=") + version()) != std::string::npos);
  CHECK(text.find('\r') == std::string::npos);
}

TEST_CASE("the metadata hash follows the configuration") {
  const auto a = fresh_dir("hash-a");
  const auto b = fresh_dir("hash-b");
  cli(concat({"sweep", "-s", "2d1g", "-o", a.string()}, kSmallSweep));
  cli(concat({"sweep", "-s", "2d1g", "--anchor-fanout", "all-endpoints", "-o", b.string()}, kSmallSweep));
  auto first_line = [](const std::string& s) { return s.substr(0, s.find('\n')); };
  CHECK(first_line(slurp(a / "2d1g.csv")) != first_line(slurp(b / "2d1g.csv")));
}

TEST_CASE("plot writes two images per scenario plus data files") {
  const auto dir = fresh_dir("plot");
  REQUIRE(cli(concat({"sweep", "-o", dir.string()}, kSmallSweep)).code == kExitOk);
  const auto r = cli({"plot", "-i", dir.string(), "-o", (dir / "fig").string()});
  REQUIRE(r.code == kExitOk);
  int svgs = 0, dats = 0;
  for (const auto& e : fs::directory_iterator(dir / "fig")) {
    svgs += e.path().extension() == ".svg";
    dats += e.path().extension() == ".dat";
  }
  CHECK(svgs == 8);
  CHECK(dats == 4);
  const auto svg = slurp(dir / "fig" / "4d2g-throughput.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("Offered load (Mbit/s)") != std::string::npos);
  CHECK(svg.find("config_hash=") != std::string::npos);
  CHECK(slurp(dir / "fig" / "4d2g-loss.svg").find("Packet loss (%)") != std::string::npos);
  CHECK(slurp(dir / "fig" / "2d1g.dat").rfind("# seed=", 0) == 0);
}

TEST_CASE("run prints metrics and writes a trace with a metadata line") {
  const auto dir = fresh_dir("run");
  const auto r = cli({"run", "-s", "3d1g", "--load", "2", "--duration", "1", "--trace", "-o", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.find("path P11 GO1 P12") != std::string::npos);
  const auto trace = slurp(dir / "3d1g-trace.txt");
  CHECK(trace.rfind("# seed=1 ", 0) == 0);
  CHECK(trace.find(" deliver ") != std::string::npos);
}

TEST_CASE("output directory defaults to the environment variable") {
  const auto dir = fresh_dir("env");
  ::setenv(kOutDirEnv, dir.string().c_str(), 1);
  const auto r = cli(concat({"sweep", "-s", "2d1g"}, kSmallSweep));
  ::unsetenv(kOutDirEnv);
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "2d1g.csv"));
}

TEST_CASE("a builtin exported to a file runs like the builtin") {
  const auto dir = fresh_dir("export");
  swarnet::scenarios::save_scenario(*swarnet::scenarios::find_builtin("4d2g"), dir / "mine.json");
  const auto a = cli({"run", "-s", "4d2g", "--duration", "1"});
  const auto b = cli({"run", "-s", (dir / "mine.json").string(), "--duration", "1"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
}
