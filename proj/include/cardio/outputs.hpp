#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cardio/limit_cycle.hpp"
#include "cardio/parameters.hpp"

namespace cardio {

/// The scalar summaries extracted from one converged heartbeat. Volumes are
/// raw millilitres; the indexed (per-BSA) variants are set only when a body
/// surface area is supplied.
struct ModelOutputs {
  // Outputs usable as calibration data (raw values).
  double LA_Vmax = 0, LV_EDV = 0, LV_ESV = 0, LV_EF = 0;
  double maxGradP_rAV = 0, SAP_max = 0, SAP_min = 0, PAP_max = 0;

  // Additional outputs.
  double LA_Pmax = 0, LA_Pmin = 0, LA_Pmean = 0;
  double LV_SV = 0, CO = 0;  // CO in L/min
  double LV_Pmax = 0, LV_Pmin = 0;
  double RA_Vmax = 0, RA_Pmax = 0, RA_Pmin = 0, RA_Pmean = 0;
  double RV_EDV = 0, RV_ESV = 0, RV_EF = 0, RV_Pmax = 0, RV_Pmin = 0;
  double PAP_min = 0, PAP_mean = 0, PWP_min = 0, PWP_mean = 0;
  double SVR = 0, PVR = 0;  // mmHg*min/L
  double shunt_fraction = 0;  // percent

  // Indexed variants (value / BSA), present only when BSA was given.
  std::optional<double> BSA;
  std::optional<double> LA_I_Vmax, LV_I_EDV, RA_I_Vmax, RV_I_EDV, RV_I_ESV, CI;
};

/// Post-process a converged beat into the named outputs. BSA (m^2), when
/// provided, must be positive; it only affects the indexed variants.
ModelOutputs compute_outputs(const BeatTrajectory& traj, const ParameterSet& p,
                             std::optional<double> BSA = std::nullopt);

/// Names of the eight outputs used as calibration data, canonical order.
const std::vector<std::string>& calibration_output_names();

/// Names of all raw outputs reachable by name (calibration eight first).
const std::vector<std::string>& raw_output_names();

/// Raw output by name (raw volumes, never indexed). Throws on unknown name.
double output_by_name(const ModelOutputs& o, std::string_view name);

/// Display-oriented table: the 31 outputs with indexed volumes where the
/// clinical convention indexes them. Entries with absent BSA are skipped.
std::vector<std::pair<std::string, double>> display_outputs(
    const ModelOutputs& o);

/// The 31 display names in table order (independent of BSA availability).
const std::vector<std::string>& display_output_names();

/// Healthy range [lo, hi] per display output; open ends are +-infinity.
struct Range {
  double lo, hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};
const std::map<std::string, Range>& healthy_ranges();

/// Display-output values of the reference individual, kept as a regression
/// target for the default simulation.
const std::map<std::string, double>& reference_display_values();

/// Body surface area (m^2) assumed for the reference individual when the
/// indexed outputs are reported.
inline constexpr double kReferenceBSA = 1.77;

}  // namespace cardio
