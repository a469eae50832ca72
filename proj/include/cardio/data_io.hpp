#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cardio/calibration.hpp"
#include "cardio/correlation.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/outputs.hpp"
#include "cardio/parameters.hpp"
#include "cardio/sensitivity.hpp"

namespace cardio {

/// Directory that overrides the built-in clinical fixtures: when set,
/// load_clinical("x") first looks for "<dir>/x.json".
inline constexpr const char* kFixtureDirEnv = "CARDIOCAL_FIXTURES";

/// Sparse clinical measurements for one patient.
struct ClinicalRecord {
  std::string id;
  double HR = 0.0;
  std::optional<double> BSA;
  std::vector<CalibrationDatum> data;

  friend bool operator==(const ClinicalRecord&, const ClinicalRecord&) = default;
};

/// Built-in records ("monzino", "sacco"), optionally overridden by a file in
/// the kFixtureDirEnv directory. Unknown names raise std::invalid_argument.
ClinicalRecord load_clinical(const std::string& name);
ClinicalRecord load_clinical_file(const std::filesystem::path& path);
void save_clinical(const ClinicalRecord& rec, const std::filesystem::path& path);

/// The calibratable parameters kept free by the variance-based screening
/// when the full set of measurements is available.
const std::vector<std::string>& selected_parameter_names();

/// Free-parameter choice for a record: the screened set, minus parameters
/// whose influential measurements are all absent from the record.
std::vector<int> default_free_parameters(const ClinicalRecord& rec);

/// Healthy-range table with literature source tags (display output names).
struct RangeEntry {
  std::string name;
  Range range;         // open ends are +-infinity
  std::string source;  // short citation tag, empty when none exists
};
const std::vector<RangeEntry>& range_table();
void save_range_table(const std::filesystem::path& path);
std::vector<RangeEntry> load_range_table(const std::filesystem::path& path);

/// A batch of synthetic calibration targets drawn from one hyperbox.
struct Dataset {
  std::vector<std::string> param_names;   // free parameters, canonical order
  std::vector<std::string> output_names;  // data tags
  std::vector<SyntheticSample> samples;
  std::uint64_t seed = 0;
  std::string box_fingerprint;
  double HR = 0.0;
  bool covid = false;
  bool noisy = false;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

void save_parameters(const ParameterSet& p, const std::filesystem::path& path);
ParameterSet load_parameters(const std::filesystem::path& path);

void save_report(const CalibrationReport& r, const std::filesystem::path& path);
CalibrationReport load_report(const std::filesystem::path& path);

void save_correlation(const CorrelationMatrix& m, const std::filesystem::path& path);
CorrelationMatrix load_correlation(const std::filesystem::path& path);

void save_sensitivity(const SensitivityResult& s, const std::filesystem::path& path);
SensitivityResult load_sensitivity(const std::filesystem::path& path);

/// Uniform-grid beat trajectory as CSV: one metadata comment line, a header
/// row, then t, the 14 states, 4 chamber pressures, and 7 flows per line.
void save_trajectory_csv(const BeatTrajectory& traj,
                         const std::filesystem::path& path);
BeatTrajectory load_trajectory_csv(const std::filesystem::path& path);

/// Whole-file atomic write (temp file + rename within the target directory).
void write_text_atomic(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace cardio
