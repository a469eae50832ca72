#include "cardio/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "cardio/data_io.hpp"

namespace cardio {

namespace {

constexpr double kWidth = 800, kHeight = 600;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#ff7f0e", "#9467bd", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string coord(double v) { return fmt(v, "%.2f"); }

/// Tick step of the form {1,2,5}*10^k giving roughly `target` intervals.
double nice_step(double range, int target) {
  if (!(range > 0.0)) return 1.0;
  const double raw = range / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  if (r <= 1.5) return mag;
  if (r <= 3.5) return 2 * mag;
  if (r <= 7.5) return 5 * mag;
  return 10 * mag;
}

std::vector<double> ticks_in(double lo, double hi, int target = 5) {
  const double step = nice_step(hi - lo, target);
  std::vector<double> t;
  double v = std::ceil(lo / step) * step;
  for (; v <= hi + 1e-9 * step; v += step) t.push_back(v == 0.0 ? 0.0 : v);
  return t;
}

struct Frame {
  double x0, x1, y0, y1;      // data ranges (y possibly log10-transformed)
  double px0, px1, py0, py1;  // plot rectangle in SVG coordinates

  double X(double x) const { return px0 + (x - x0) / (x1 - x0) * (px1 - px0); }
  double Y(double y) const { return py1 - (y - y0) / (y1 - y0) * (py1 - py0); }
};

void pad_range(double& lo, double& hi, double frac = 0.05) {
  if (!(hi > lo)) {
    const double c = std::abs(lo) > 0 ? std::abs(lo) : 1.0;
    lo -= 0.5 * c;
    hi += 0.5 * c;
    return;
  }
  const double pad = (hi - lo) * frac;
  lo -= pad;
  hi += pad;
}

std::string svg_open() {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 600\" "
         "font-family=\"sans-serif\">\n"
         "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
}

void draw_axes(std::string& s, const Frame& f, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               bool log_y) {
  s += "<rect x=\"" + coord(f.px0) + "\" y=\"" + coord(f.py0) + "\" width=\"" +
       coord(f.px1 - f.px0) + "\" height=\"" + coord(f.py1 - f.py0) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + coord((f.px0 + f.px1) / 2) +
       "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" + esc(title) +
       "</text>\n";
  s += "<text x=\"" + coord((f.px0 + f.px1) / 2) + "\" y=\"" +
       coord(f.py1 + 38) + "\" font-size=\"13\" text-anchor=\"middle\">" +
       esc(x_label) + "</text>\n";
  s += "<text x=\"18\" y=\"" + coord((f.py0 + f.py1) / 2) +
       "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       coord((f.py0 + f.py1) / 2) + ")\">" + esc(y_label) + "</text>\n";
  for (double t : ticks_in(f.x0, f.x1)) {
    const double x = f.X(t);
    s += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(f.py1) + "\" x2=\"" +
         coord(x) + "\" y2=\"" + coord(f.py1 + 5) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(f.py0) + "\" x2=\"" +
         coord(x) + "\" y2=\"" + coord(f.py1) +
         "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    s += "<text x=\"" + coord(x) + "\" y=\"" + coord(f.py1 + 18) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + fmt(t) + "</text>\n";
  }
  for (double t : ticks_in(f.y0, f.y1)) {
    const double y = f.Y(t);
    s += "<line x1=\"" + coord(f.px0 - 5) + "\" y1=\"" + coord(y) +
         "\" x2=\"" + coord(f.px0) + "\" y2=\"" + coord(y) +
         "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + coord(f.px0) + "\" y1=\"" + coord(y) + "\" x2=\"" +
         coord(f.px1) + "\" y2=\"" + coord(y) +
         "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    const std::string label = log_y ? fmt(std::pow(10.0, t), "%.3g") : fmt(t);
    s += "<text x=\"" + coord(f.px0 - 8) + "\" y=\"" + coord(y + 4) +
         "\" font-size=\"11\" text-anchor=\"end\">" + label + "</text>\n";
  }
}

}  // namespace

std::string line_chart_svg(const std::vector<Series>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label, bool log_y) {
  if (series.empty())
    throw std::invalid_argument("line_chart_svg: no series");

  std::vector<Series> plotted;
  for (const Series& raw : series) {
    if (raw.x.size() != raw.y.size())
      throw std::invalid_argument("line_chart_svg: series '" + raw.label +
                                  "' has mismatched x/y lengths");
    Series s = raw;
    if (log_y) {
      Series filtered{s.label, {}, {}, s.closed};
      for (std::size_t i = 0; i < s.y.size(); ++i)
        if (s.y[i] > 0.0) {
          filtered.x.push_back(s.x[i]);
          filtered.y.push_back(std::log10(s.y[i]));
        }
      s = std::move(filtered);
    }
    if (!s.x.empty()) plotted.push_back(std::move(s));
  }
  if (plotted.empty())
    throw std::invalid_argument("line_chart_svg: nothing to plot");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
  for (const Series& s : plotted)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  pad_range(x0, x1);
  pad_range(y0, y1);

  const Frame f{x0, x1, y0, y1, 70, 620, 40, 545};
  std::string svg = svg_open();
  draw_axes(svg, f, title, x_label, y_label, log_y);

  for (std::size_t k = 0; k < plotted.size(); ++k) {
    const Series& s = plotted[k];
    const char* color = kPalette[k % kPaletteSize];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      pts += coord(f.X(s.x[i])) + "," + coord(f.Y(s.y[i])) + " ";
    }
    if (s.closed && !s.x.empty())
      pts += coord(f.X(s.x[0])) + "," + coord(f.Y(s.y[0]));
    svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.6\"/>\n";
    const double ly = 60.0 + 22.0 * static_cast<double>(k);
    svg += "<line x1=\"635\" y1=\"" + coord(ly) + "\" x2=\"665\" y2=\"" +
           coord(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"670\" y=\"" + coord(ly + 4) + "\" font-size=\"12\">" +
           esc(s.label) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string bar_chart_svg(
    const std::vector<std::string>& categories,
    const std::vector<std::pair<std::string, std::vector<double>>>& series,
    const std::string& title, const std::string& y_label) {
  if (categories.empty() || series.empty())
    throw std::invalid_argument("bar_chart_svg: nothing to plot");
  double vmax = 0.0;
  for (const auto& [label, vals] : series) {
    if (vals.size() != categories.size())
      throw std::invalid_argument("bar_chart_svg: series '" + label +
                                  "' has the wrong length");
    for (double v : vals) {
      if (v < 0.0)
        throw std::invalid_argument("bar_chart_svg: negative value");
      vmax = std::max(vmax, v);
    }
  }
  if (vmax <= 0.0) vmax = 1.0;

  const Frame f{0, 1, 0, vmax * 1.05, 70, 620, 40, 545};
  std::string svg = svg_open();
  svg += "<rect x=\"" + coord(f.px0) + "\" y=\"" + coord(f.py0) +
         "\" width=\"" + coord(f.px1 - f.px0) + "\" height=\"" +
         coord(f.py1 - f.py0) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + coord((f.px0 + f.px1) / 2) +
         "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" + esc(title) +
         "</text>\n";
  svg += "<text x=\"18\" y=\"" + coord((f.py0 + f.py1) / 2) +
         "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         coord((f.py0 + f.py1) / 2) + ")\">" + esc(y_label) + "</text>\n";
  for (double t : ticks_in(f.y0, f.y1)) {
    const double y = f.Y(t);
    svg += "<line x1=\"" + coord(f.px0 - 5) + "\" y1=\"" + coord(y) +
           "\" x2=\"" + coord(f.px0) + "\" y2=\"" + coord(y) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + coord(f.px0) + "\" y1=\"" + coord(y) + "\" x2=\"" +
           coord(f.px1) + "\" y2=\"" + coord(y) +
           "\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n";
    svg += "<text x=\"" + coord(f.px0 - 8) + "\" y=\"" + coord(y + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + fmt(t) + "</text>\n";
  }

  const std::size_t nc = categories.size(), ns = series.size();
  const double group = (f.px1 - f.px0) / static_cast<double>(nc);
  const double bar = group * 0.8 / static_cast<double>(ns);
  for (std::size_t c = 0; c < nc; ++c) {
    const double gx = f.px0 + group * (static_cast<double>(c) + 0.1);
    for (std::size_t k = 0; k < ns; ++k) {
      const double v = series[k].second[c];
      const double y = f.Y(v);
      svg += "<rect x=\"" + coord(gx + bar * static_cast<double>(k)) +
             "\" y=\"" + coord(y) + "\" width=\"" + coord(bar * 0.92) +
             "\" height=\"" + coord(f.py1 - y) + "\" fill=\"" +
             kPalette[k % kPaletteSize] + "\"/>\n";
    }
    svg += "<text x=\"" + coord(gx + group * 0.4) + "\" y=\"" +
           coord(f.py1 + 16) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           esc(categories[c]) + "</text>\n";
  }
  for (std::size_t k = 0; k < ns; ++k) {
    const double ly = 60.0 + 22.0 * static_cast<double>(k);
    svg += "<rect x=\"635\" y=\"" + coord(ly - 8) +
           "\" width=\"24\" height=\"12\" fill=\"" +
           kPalette[k % kPaletteSize] + "\"/>\n";
    svg += "<text x=\"666\" y=\"" + coord(ly + 3) + "\" font-size=\"12\">" +
           esc(series[k].first) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string heatmap_svg(const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::string& title, double vmax) {
  const std::size_t nr = values.size();
  if (nr == 0 || nr != row_labels.size())
    throw std::invalid_argument("heatmap_svg: bad row count");
  const std::size_t nc = col_labels.size();
  for (const auto& row : values)
    if (row.size() != nc)
      throw std::invalid_argument("heatmap_svg: ragged rows");

  if (vmax <= 0.0) {
    for (const auto& row : values)
      for (double v : row) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;
  }

  const double px0 = 120, px1 = 700, py0 = 70, py1 = 560;
  const double cw = (px1 - px0) / static_cast<double>(nc);
  const double ch = (py1 - py0) / static_cast<double>(nr);

  // White at zero fading to a deep blue at vmax.
  const auto color_of = [vmax](double v) {
    const double u = std::clamp(v / vmax, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(255 + (8 - 255) * u));
    const int g = static_cast<int>(std::lround(255 + (81 - 255) * u));
    const int b = static_cast<int>(std::lround(255 + (156 - 255) * u));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  std::string svg = svg_open();
  svg += "<text x=\"" + coord((px0 + px1) / 2) +
         "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">" + esc(title) +
         "</text>\n";
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      svg += "<rect x=\"" + coord(px0 + cw * static_cast<double>(c)) +
             "\" y=\"" + coord(py0 + ch * static_cast<double>(r)) +
             "\" width=\"" + coord(cw) + "\" height=\"" + coord(ch) +
             "\" fill=\"" + color_of(values[r][c]) +
             "\" stroke=\"#cccccc\" stroke-width=\"0.4\"/>\n";
    }
    svg += "<text x=\"" + coord(px0 - 6) + "\" y=\"" +
           coord(py0 + ch * (static_cast<double>(r) + 0.5) + 3) +
           "\" font-size=\"10\" text-anchor=\"end\">" + esc(row_labels[r]) +
           "</text>\n";
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const double x = px0 + cw * (static_cast<double>(c) + 0.5);
    svg += "<text x=\"" + coord(x) + "\" y=\"" + coord(py0 - 8) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + esc(col_labels[c]) +
           "</text>\n";
  }
  // Color bar.
  const double bx = 720, bw = 22;
  constexpr int kBands = 48;
  for (int i = 0; i < kBands; ++i) {
    const double v = vmax * (kBands - 1 - i) / (kBands - 1);
    const double y = py0 + (py1 - py0) * i / kBands;
    svg += "<rect x=\"" + coord(bx) + "\" y=\"" + coord(y) + "\" width=\"" +
           coord(bw) + "\" height=\"" + coord((py1 - py0) / kBands + 0.5) +
           "\" fill=\"" + color_of(v) + "\"/>\n";
  }
  svg += "<rect x=\"" + coord(bx) + "\" y=\"" + coord(py0) + "\" width=\"" +
         coord(bw) + "\" height=\"" + coord(py1 - py0) +
         "\" fill=\"none\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
  for (double t : ticks_in(0.0, vmax, 4)) {
    const double y = py1 - (py1 - py0) * t / vmax;
    svg += "<text x=\"" + coord(bx + bw + 4) + "\" y=\"" + coord(y + 4) +
           "\" font-size=\"10\">" + fmt(t) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string pv_loop_svg(
    const std::vector<std::pair<std::string, const BeatTrajectory*>>& beats,
    const std::string& ventricle) {
  if (beats.empty())
    throw std::invalid_argument("pv_loop_svg: no beats");
  const bool left = ventricle == "LV";
  if (!left && ventricle != "RV")
    throw std::invalid_argument("pv_loop_svg: ventricle must be LV or RV");
  std::vector<Series> series;
  for (const auto& [label, traj] : beats) {
    Series s;
    s.label = label;
    s.closed = true;
    s.x.reserve(traj->size());
    s.y.reserve(traj->size());
    for (std::size_t i = 0; i < traj->size(); ++i) {
      s.x.push_back(traj->x[i][left ? iV_LV : iV_RV]);
      s.y.push_back(left ? traj->p_LV[i] : traj->p_RV[i]);
    }
    series.push_back(std::move(s));
  }
  return line_chart_svg(series, ventricle + " pressure-volume loop",
                        "volume [mL]", "pressure [mmHg]");
}

std::string sensitivity_heatmap_svg(const SensitivityResult& s,
                                    const std::vector<std::string>& outputs) {
  std::vector<std::size_t> cols;
  for (const auto& name : outputs) {
    const auto it =
        std::find(s.output_names.begin(), s.output_names.end(), name);
    if (it == s.output_names.end())
      throw std::invalid_argument("sensitivity_heatmap_svg: unknown output '" +
                                  name + "'");
    cols.push_back(static_cast<std::size_t>(it - s.output_names.begin()));
  }
  std::vector<std::vector<double>> values(s.param_names.size());
  for (std::size_t r = 0; r < s.param_names.size(); ++r)
    for (std::size_t c : cols) values[r].push_back(s.total[r][c]);
  return heatmap_svg(values, s.param_names, outputs,
                     "Total-effect sensitivity indices", 1.0);
}

std::string loss_trace_svg(
    const std::vector<std::pair<std::string, const CalibrationReport*>>& reports) {
  std::vector<Series> series;
  for (const auto& [label, rep] : reports) {
    Series s;
    s.label = label;
    for (const TracePoint& tp : rep->trace) {
      s.x.push_back(tp.iter);
      s.y.push_back(tp.mse);
    }
    series.push_back(std::move(s));
  }
  return line_chart_svg(series, "Calibration loss", "iteration", "MSE", true);
}

void save_svg(const std::string& svg, const std::filesystem::path& path) {
  write_text_atomic(path, svg);
}

}  // namespace cardio
