#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "swarnet/scenarios/results.hpp"

namespace swarnet::cli {

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::string metadata;  // embedded as an XML comment
  std::vector<std::pair<double, double>> points;
};

// Static line chart with labelled axes and tick marks.
std::string render_svg(const Chart& chart);

// gnuplot-friendly columns: load_mbps throughput_mbps loss_percent runs.
std::string format_dat(const std::vector<scenarios::PointSummary>& points, const std::string& metadata);

struct PlotFiles {
  std::filesystem::path throughput_svg;
  std::filesystem::path loss_svg;
  std::filesystem::path dat;
};

// Writes <scenario>-throughput.svg, <scenario>-loss.svg and <scenario>.dat.
PlotFiles write_plots(const std::string& scenario, const std::vector<scenarios::RunResult>& results,
                      const std::string& metadata, const std::filesystem::path& out_dir);

}  // namespace swarnet::cli
