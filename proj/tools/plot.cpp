#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace swarnet::cli {
namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment.
std::string comment_safe(std::string s) {
  for (std::size_t i = s.find("--"); i != std::string::npos; i = s.find("--", i)) s.replace(i, 2, "- -");
  return s;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

double nice_step(double span) {
  if (span <= 0) return 1;
  const double raw = span / 5;
  const double mag = std::pow(10, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10 * mag;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  if (!f) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace

std::string render_svg(const Chart& chart) {
  double xmax = 0, ymax = 0;
  for (const auto& [x, y] : chart.points) {
    xmax = std::max(xmax, x);
    ymax = std::max(ymax, y);
  }
  const double xstep = nice_step(xmax);
  const double ystep = nice_step(ymax);
  xmax = std::max(xstep, std::ceil(xmax / xstep) * xstep);
  ymax = std::max(ystep, std::ceil(ymax / ystep) * ystep);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + x / xmax * pw; };
  auto sy = [&](double y) { return kTop + ph - y / ymax * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!chart.metadata.empty()) os << "<!-- " << comment_safe(chart.metadata) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
     << escape(chart.title) << "</text>\n";

  for (double x = 0; x <= xmax + 1e-9; x += xstep) {
    os << "<line x1=\"" << num(sx(x)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(sx(x)) << "\" y2=\""
       << num(kTop + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(sx(x)) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(x) << "</text>\n";
  }
  for (double y = 0; y <= ymax + 1e-9; y += ystep) {
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(sy(y)) << "\" x2=\"" << num(kLeft + pw) << "\" y2=\""
       << num(sy(y)) << "\" stroke=\"#e0e0e0\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(sy(y) + 4) << "\" text-anchor=\"end\">"
       << tick_label(y) << "</text>\n";
  }
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
     << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
  os << "<text transform=\"translate(18 " << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(chart.y_label) << "</text>\n";

  if (!chart.points.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < chart.points.size(); ++i) {
      if (i > 0) os << ' ';
      os << num(sx(chart.points[i].first)) << ',' << num(sy(chart.points[i].second));
    }
    os << "\"/>\n";
    for (const auto& [x, y] : chart.points) {
      os << "<circle cx=\"" << num(sx(x)) << "\" cy=\"" << num(sy(y)) << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string format_dat(const std::vector<scenarios::PointSummary>& points, const std::string& metadata) {
  std::ostringstream os;
  if (!metadata.empty()) os << "# " << metadata << '\n';
  os << "# load_mbps throughput_mbps loss_percent runs\n";
  for (const auto& p : points) {
    os << scenarios::format_double(p.load_bps / 1e6) << ' ' << scenarios::format_double(p.mean_throughput_bps / 1e6)
       << ' ' << scenarios::format_double(p.mean_loss * 100) << ' ' << p.runs << '\n';
  }
  return os.str();
}

PlotFiles write_plots(const std::string& scenario, const std::vector<scenarios::RunResult>& results,
                      const std::string& metadata, const std::filesystem::path& out_dir) {
  std::vector<scenarios::RunResult> mine;
  for (const auto& r : results) {
    if (r.scenario == scenario) mine.push_back(r);
  }
  const auto points = scenarios::aggregate(std::move(mine));

  Chart tp{scenario + ": receiver throughput", "Offered load (Mbit/s)", "Receiver throughput (Mbit/s)", metadata, {}};
  Chart loss{scenario + ": packet loss", "Offered load (Mbit/s)", "Packet loss (%)", metadata, {}};
  for (const auto& p : points) {
    tp.points.emplace_back(p.load_bps / 1e6, p.mean_throughput_bps / 1e6);
    loss.points.emplace_back(p.load_bps / 1e6, p.mean_loss * 100);
  }

  std::filesystem::create_directories(out_dir);
  PlotFiles files{out_dir / (scenario + "-throughput.svg"), out_dir / (scenario + "-loss.svg"),
                  out_dir / (scenario + ".dat")};
  write_file(files.throughput_svg, render_svg(tp));
  write_file(files.loss_svg, render_svg(loss));
  write_file(files.dat, format_dat(points, metadata));
  return files;
}

}  // namespace swarnet::cli
