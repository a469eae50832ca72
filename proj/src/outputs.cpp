#include "cardio/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cardio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double vmax(const std::vector<double>& v) {
  return *std::max_element(v.begin(), v.end());
}
double vmin(const std::vector<double>& v) {
  return *std::min_element(v.begin(), v.end());
}

// Trapezoidal time-average over the uniform beat grid.
double tmean(const std::vector<double>& v) {
  const std::size_t n = v.size();
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < n; ++i) s += v[i];
  return s / static_cast<double>(n - 1);
}

std::vector<double> column(const std::vector<State>& xs, int idx) {
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i][idx];
  return out;
}

}  // namespace

ModelOutputs compute_outputs(const BeatTrajectory& traj, const ParameterSet& p,
                             std::optional<double> BSA) {
  if (traj.size() < 2)
    throw std::invalid_argument("compute_outputs: empty trajectory");
  if (BSA && !(*BSA > 0.0))
    throw std::invalid_argument("compute_outputs: BSA must be > 0");

  ModelOutputs o;
  const auto V_LA = column(traj.x, iV_LA);
  const auto V_LV = column(traj.x, iV_LV);
  const auto V_RA = column(traj.x, iV_RA);
  const auto V_RV = column(traj.x, iV_RV);
  const auto p_AS = column(traj.x, ip_AR_SYS);
  const auto p_AP = column(traj.x, ip_AR_PUL);
  const auto p_VP = column(traj.x, ip_VEN_PUL);

  o.LA_Vmax = vmax(V_LA);
  o.LV_EDV = vmax(V_LV);
  o.LV_ESV = vmin(V_LV);
  o.LV_SV = o.LV_EDV - o.LV_ESV;
  o.LV_EF = 100.0 * o.LV_SV / o.LV_EDV;
  o.CO = o.LV_SV * p.HR / 1000.0;

  std::vector<double> grad(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i)
    grad[i] = traj.p_RV[i] - traj.p_RA[i];
  o.maxGradP_rAV = vmax(grad);

  o.SAP_max = vmax(p_AS);
  o.SAP_min = vmin(p_AS);
  o.PAP_max = vmax(p_AP);
  o.PAP_min = vmin(p_AP);
  o.PAP_mean = tmean(p_AP);

  o.LA_Pmax = vmax(traj.p_LA);
  o.LA_Pmin = vmin(traj.p_LA);
  o.LA_Pmean = tmean(traj.p_LA);
  o.LV_Pmax = vmax(traj.p_LV);
  o.LV_Pmin = vmin(traj.p_LV);

  o.RA_Vmax = vmax(V_RA);
  o.RA_Pmax = vmax(traj.p_RA);
  o.RA_Pmin = vmin(traj.p_RA);
  o.RA_Pmean = tmean(traj.p_RA);
  o.RV_EDV = vmax(V_RV);
  o.RV_ESV = vmin(V_RV);
  o.RV_EF = 100.0 * (o.RV_EDV - o.RV_ESV) / o.RV_EDV;
  o.RV_Pmax = vmax(traj.p_RV);
  o.RV_Pmin = vmin(traj.p_RV);

  o.PWP_min = vmin(p_VP);
  o.PWP_mean = tmean(p_VP);

  // Vascular resistances in clinical units (mmHg*min/L). The pulmonary one
  // uses the mean left atrial pressure as the downstream reference.
  o.SVR = (tmean(p_AS) - o.RA_Pmean) / o.CO;
  o.PVR = (o.PAP_mean - o.LA_Pmean) / o.CO;

  const double mean_sh = tmean(traj.Q_SH);
  const double mean_cp = tmean(traj.Q_C_PUL);
  o.shunt_fraction = 100.0 * mean_sh / (mean_sh + mean_cp);

  if (BSA) {
    o.BSA = BSA;
    o.LA_I_Vmax = o.LA_Vmax / *BSA;
    o.LV_I_EDV = o.LV_EDV / *BSA;
    o.RA_I_Vmax = o.RA_Vmax / *BSA;
    o.RV_I_EDV = o.RV_EDV / *BSA;
    o.RV_I_ESV = o.RV_ESV / *BSA;
    o.CI = o.CO / *BSA;
  }
  return o;
}

const std::vector<std::string>& calibration_output_names() {
  static const std::vector<std::string> names = {
      "LA_Vmax", "LV_EDV",  "LV_ESV",  "LV_EF",
      "maxGradP_rAV", "SAP_max", "SAP_min", "PAP_max"};
  return names;
}

const std::vector<std::string>& raw_output_names() {
  static const std::vector<std::string> names = {
      "LA_Vmax",  "LV_EDV",   "LV_ESV",   "LV_EF",   "maxGradP_rAV",
      "SAP_max",  "SAP_min",  "PAP_max",  "LA_Pmax", "LA_Pmin",
      "LA_Pmean", "LV_SV",    "CO",       "LV_Pmax", "LV_Pmin",
      "RA_Vmax",  "RA_Pmax",  "RA_Pmin",  "RA_Pmean", "RV_EDV",
      "RV_ESV",   "RV_EF",    "RV_Pmax",  "RV_Pmin", "PAP_min",
      "PAP_mean", "PWP_min",  "PWP_mean", "SVR",     "PVR",
      "ShuntFraction"};
  return names;
}

double output_by_name(const ModelOutputs& o, std::string_view name) {
  static const std::map<std::string, double ModelOutputs::*, std::less<>> table = {
      {"LA_Vmax", &ModelOutputs::LA_Vmax},
      {"LV_EDV", &ModelOutputs::LV_EDV},
      {"LV_ESV", &ModelOutputs::LV_ESV},
      {"LV_EF", &ModelOutputs::LV_EF},
      {"maxGradP_rAV", &ModelOutputs::maxGradP_rAV},
      {"SAP_max", &ModelOutputs::SAP_max},
      {"SAP_min", &ModelOutputs::SAP_min},
      {"PAP_max", &ModelOutputs::PAP_max},
      {"LA_Pmax", &ModelOutputs::LA_Pmax},
      {"LA_Pmin", &ModelOutputs::LA_Pmin},
      {"LA_Pmean", &ModelOutputs::LA_Pmean},
      {"LV_SV", &ModelOutputs::LV_SV},
      {"CO", &ModelOutputs::CO},
      {"LV_Pmax", &ModelOutputs::LV_Pmax},
      {"LV_Pmin", &ModelOutputs::LV_Pmin},
      {"RA_Vmax", &ModelOutputs::RA_Vmax},
      {"RA_Pmax", &ModelOutputs::RA_Pmax},
      {"RA_Pmin", &ModelOutputs::RA_Pmin},
      {"RA_Pmean", &ModelOutputs::RA_Pmean},
      {"RV_EDV", &ModelOutputs::RV_EDV},
      {"RV_ESV", &ModelOutputs::RV_ESV},
      {"RV_EF", &ModelOutputs::RV_EF},
      {"RV_Pmax", &ModelOutputs::RV_Pmax},
      {"RV_Pmin", &ModelOutputs::RV_Pmin},
      {"PAP_min", &ModelOutputs::PAP_min},
      {"PAP_mean", &ModelOutputs::PAP_mean},
      {"PWP_min", &ModelOutputs::PWP_min},
      {"PWP_mean", &ModelOutputs::PWP_mean},
      {"SVR", &ModelOutputs::SVR},
      {"PVR", &ModelOutputs::PVR},
      {"ShuntFraction", &ModelOutputs::shunt_fraction},
  };
  auto it = table.find(name);
  if (it == table.end())
    throw std::invalid_argument("output_by_name: unknown output '" +
                                std::string(name) + "'");
  return o.*(it->second);
}

std::vector<std::pair<std::string, double>> display_outputs(
    const ModelOutputs& o) {
  std::vector<std::pair<std::string, double>> rows;
  auto put = [&rows](const std::string& n, double v) {
    rows.emplace_back(n, v);
  };
  auto put_opt = [&rows](const std::string& n, const std::optional<double>& v) {
    if (v) rows.emplace_back(n, *v);
  };
  put_opt("LA_I-Vmax", o.LA_I_Vmax);
  put_opt("LV_I-EDV", o.LV_I_EDV);
  put("LV_ESV", o.LV_ESV);
  put("LV_EF", o.LV_EF);
  put("maxGradP_rAV", o.maxGradP_rAV);
  put("SAP_max", o.SAP_max);
  put("SAP_min", o.SAP_min);
  put("PAP_max", o.PAP_max);
  put("LA_Pmax", o.LA_Pmax);
  put("LA_Pmin", o.LA_Pmin);
  put("LA_Pmean", o.LA_Pmean);
  put("LV_SV", o.LV_SV);
  put_opt("CI", o.CI);
  put("LV_Pmax", o.LV_Pmax);
  put("LV_Pmin", o.LV_Pmin);
  put_opt("RA_I-Vmax", o.RA_I_Vmax);
  put("RA_Pmax", o.RA_Pmax);
  put("RA_Pmin", o.RA_Pmin);
  put("RA_Pmean", o.RA_Pmean);
  put_opt("RV_I-EDV", o.RV_I_EDV);
  put_opt("RV_I-ESV", o.RV_I_ESV);
  put("RV_EF", o.RV_EF);
  put("RV_Pmax", o.RV_Pmax);
  put("RV_Pmin", o.RV_Pmin);
  put("PAP_min", o.PAP_min);
  put("PAP_mean", o.PAP_mean);
  put("PWP_min", o.PWP_min);
  put("PWP_mean", o.PWP_mean);
  put("SVR", o.SVR);
  put("PVR", o.PVR);
  put("ShuntFraction", o.shunt_fraction);
  return rows;
}

const std::vector<std::string>& display_output_names() {
  static const std::vector<std::string> names = {
      "LA_I-Vmax", "LV_I-EDV", "LV_ESV",   "LV_EF",    "maxGradP_rAV",
      "SAP_max",   "SAP_min",  "PAP_max",  "LA_Pmax",  "LA_Pmin",
      "LA_Pmean",  "LV_SV",    "CI",       "LV_Pmax",  "LV_Pmin",
      "RA_I-Vmax", "RA_Pmax",  "RA_Pmin",  "RA_Pmean", "RV_I-EDV",
      "RV_I-ESV",  "RV_EF",    "RV_Pmax",  "RV_Pmin",  "PAP_min",
      "PAP_mean",  "PWP_min",  "PWP_mean", "SVR",      "PVR",
      "ShuntFraction"};
  return names;
}

const std::map<std::string, Range>& healthy_ranges() {
  static const std::map<std::string, Range> table = {
      {"LA_I-Vmax", {16, 34}},   {"LV_I-EDV", {50, 90}},
      {"LV_ESV", {18, 52}},      {"LV_EF", {53, 73}},
      {"SAP_max", {-kInf, 140}}, {"SAP_min", {-kInf, 80}},
      {"PAP_max", {15, 28}},     {"LA_Pmax", {6, 20}},
      {"LA_Pmin", {-2, 9}},      {"LA_Pmean", {4, 12}},
      {"LV_SV", {30, 80}},       {"CI", {2.8, 4.2}},
      {"LV_Pmax", {90, 140}},    {"LV_Pmin", {4, 12}},
      {"RA_I-Vmax", {10, 36}},   {"RA_Pmax", {2, 14}},
      {"RA_Pmin", {-2, 6}},      {"RA_Pmean", {-1, 8}},
      {"RV_I-EDV", {44, 80}},    {"RV_I-ESV", {19, 46}},
      {"RV_EF", {44, 71}},       {"RV_Pmax", {15, 28}},
      {"RV_Pmin", {0, 8}},       {"PAP_min", {5, 16}},
      {"PAP_mean", {10, 22}},    {"PWP_min", {1, 12}},
      {"PWP_mean", {6, 15}},     {"SVR", {11.3, 17.5}},
      {"PVR", {1.9, 3.1}},       {"ShuntFraction", {0, 5}},
  };
  return table;
}

const std::map<std::string, double>& reference_display_values() {
  static const std::map<std::string, double> table = {
      {"LA_I-Vmax", 22.2}, {"LV_I-EDV", 59.7}, {"LV_ESV", 42.7},
      {"LV_EF", 60.0},     {"maxGradP_rAV", 17.4}, {"SAP_max", 109.6},
      {"SAP_min", 71.3},   {"PAP_max", 23.6},  {"LA_Pmax", 10.3},
      {"LA_Pmin", 5.7},    {"LA_Pmean", 8.8},  {"LV_SV", 64.1},
      {"CI", 2.9},         {"LV_Pmax", 110.5}, {"LV_Pmin", 4.0},
      {"RA_I-Vmax", 29.3}, {"RA_Pmax", 9.6},   {"RA_Pmin", 4.4},
      {"RA_Pmean", 6.9},   {"RV_I-EDV", 68.2}, {"RV_I-ESV", 32.6},
      {"RV_EF", 52.2},     {"RV_Pmax", 25.2},  {"RV_Pmin", 3.4},
      {"PAP_min", 15.9},   {"PAP_mean", 19.5}, {"PWP_min", 11.5},
      {"PWP_mean", 12.0},  {"SVR", 16.2},      {"PVR", 2.09},
      {"ShuntFraction", 4.73},
  };
  return table;
}

}  // namespace cardio
