#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cardio/calibration.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/sensitivity.hpp"

namespace cardio {

/// One labeled polyline of a chart.
struct Series {
  std::string label;
  std::vector<double> x, y;
  bool closed = false;  // join the last point back to the first
};

/// Self-contained 800x600 line chart: auto-scaled axes with tick labels,
/// one colored polyline per series, legend on the right. With log_y the
/// ordinate is drawn on a log10 scale (non-positive points are dropped).
std::string line_chart_svg(const std::vector<Series>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label, bool log_y = false);

/// Grouped bar chart: one cluster per category, one bar per series member.
/// Values must be non-negative; the ordinate starts at zero.
std::string bar_chart_svg(
    const std::vector<std::string>& categories,
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& title, const std::string& y_label);

/// 800x600 heatmap of values[row][col] with labels and a color bar. The
/// color scale spans [0, vmax]; vmax <= 0 autoscales to the data maximum.
std::string heatmap_svg(const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::string& title, double vmax = 0.0);

/// Ventricular pressure-volume loops, one per labeled beat ("LV" or "RV").
std::string pv_loop_svg(
    const std::vector<std::pair<std::string, const BeatTrajectory*>>& beats,
    const std::string& ventricle);

/// Total-effect indices as a heatmap restricted to the given outputs.
std::string sensitivity_heatmap_svg(const SensitivityResult& s,
                                    const std::vector<std::string>& outputs);

/// Loss-vs-iteration traces of one or more calibration reports (log scale).
std::string loss_trace_svg(
    const std::vector<std::pair<std::string, const CalibrationReport*>>& reports);

void save_svg(const std::string& svg, const std::filesystem::path& path);

}  // namespace cardio
