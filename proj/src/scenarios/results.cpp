#include "swarnet/scenarios/results.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

namespace swarnet::scenarios {
namespace {

bool row_less(const RunResult& a, const RunResult& b) {
  return std::tie(a.scenario, a.load_bps, a.run) < std::tie(b.scenario, b.load_bps, b.run);
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T v{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ScenarioError("csv line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const auto comma = row.find(',', pos);
    out.push_back(row.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) return out;
    pos = comma + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string format_csv(std::vector<RunResult> results, const std::string& metadata) {
  std::sort(results.begin(), results.end(), row_less);
  std::string out;
  if (!metadata.empty()) out += "# " + metadata + "\n";
  out += kCsvHeader;
  out += '\n';
  for (const auto& r : results) {
    out += r.scenario;
    out += ',' + format_double(r.load_bps);
    out += ',' + std::to_string(r.run);
    out += ',' + std::to_string(r.sent);
    out += ',' + std::to_string(r.delivered);
    out += ',' + format_double(r.throughput_bps);
    out += ',' + format_double(r.loss);
    out += '\n';
  }
  return out;
}

void write_csv(const std::vector<RunResult>& results, const std::filesystem::path& path,
               const std::string& metadata) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write " + path.string());
  out << format_csv(results, metadata);
  if (!out) throw ScenarioError("write failed for " + path.string());
}

std::vector<RunResult> parse_csv(const std::string& text) {
  std::vector<RunResult> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ScenarioError("csv header mismatch on line " + std::to_string(lineno));
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    if (f.size() != 7) throw ScenarioError("csv line " + std::to_string(lineno) + ": expected 7 fields");
    RunResult r;
    r.scenario = std::string(f[0]);
    r.load_bps = parse_number<double>(f[1], lineno);
    r.run = parse_number<std::uint32_t>(f[2], lineno);
    r.sent = parse_number<std::uint64_t>(f[3], lineno);
    r.delivered = parse_number<std::uint64_t>(f[4], lineno);
    r.throughput_bps = parse_number<double>(f[5], lineno);
    r.loss = parse_number<double>(f[6], lineno);
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ScenarioError("csv has no header line");
  return out;
}

std::vector<RunResult> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string read_csv_metadata(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) return line.substr(2);
    if (!line.empty() && line[0] != '#') break;
  }
  return {};
}

std::vector<PointSummary> aggregate(std::vector<RunResult> results) {
  std::sort(results.begin(), results.end(), row_less);
  std::vector<PointSummary> out;
  for (const auto& r : results) {
    if (out.empty() || out.back().scenario != r.scenario || out.back().load_bps != r.load_bps) {
      out.push_back({r.scenario, r.load_bps, 0, 0.0, 0.0});
    }
    auto& p = out.back();
    p.runs += 1;
    p.mean_throughput_bps += r.throughput_bps;
    p.mean_loss += r.loss;
  }
  for (auto& p : out) {
    p.mean_throughput_bps /= p.runs;
    p.mean_loss /= p.runs;
  }
  return out;
}

}  // namespace swarnet::scenarios
