#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "cardio/data_io.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/outputs.hpp"

using namespace cardio;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    std::random_device rd;
    fs::path d = fs::temp_directory_path() /
                 ("cardio_io_test_" + std::to_string(rd()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

}  // namespace

TEST_CASE("built-in clinical records") {
  const ClinicalRecord mon = load_clinical("monzino");
  CHECK(mon.id == "monzino");
  CHECK(mon.HR == 70.0);
  CHECK_FALSE(mon.BSA.has_value());
  REQUIRE(mon.data.size() == 6);
  CHECK(mon.data[0] == CalibrationDatum{"LV_EDV", 233.0});
  CHECK(mon.data[3] == CalibrationDatum{"maxGradP_rAV", 25.0});
  CHECK(mon.data[5] == CalibrationDatum{"SAP_min", 55.0});

  const ClinicalRecord sac = load_clinical("sacco");
  CHECK(sac.HR == 60.0);
  REQUIRE(sac.data.size() == 8);
  CHECK(sac.data.front() == CalibrationDatum{"LA_Vmax", 50.0});
  CHECK(sac.data.back() == CalibrationDatum{"PAP_max", 25.0});

  CHECK_THROWS_AS(load_clinical("nobody"), std::invalid_argument);
}

TEST_CASE("clinical records round-trip and can be overridden on disk") {
  ClinicalRecord rec = load_clinical("sacco");
  rec.BSA = 1.93;
  const fs::path p = scratch_dir() / "sacco_mod.json";
  save_clinical(rec, p);
  CHECK(load_clinical_file(p) == rec);

  // a fixture directory takes precedence over the built-in table
  ClinicalRecord shadowed = load_clinical("monzino");
  shadowed.HR = 99.0;
  save_clinical(shadowed, scratch_dir() / "monzino.json");
  ::setenv(kFixtureDirEnv, scratch_dir().c_str(), 1);
  CHECK(load_clinical("monzino").HR == 99.0);

  // unknown names resolve through the directory as well
  ClinicalRecord extra = shadowed;
  extra.id = "ward3";
  save_clinical(extra, scratch_dir() / "ward3.json");
  CHECK(load_clinical("ward3").id == "ward3");
  ::unsetenv(kFixtureDirEnv);
  CHECK(load_clinical("monzino").HR == 70.0);
  CHECK_THROWS_AS(load_clinical("ward3"), std::invalid_argument);
}

TEST_CASE("screened parameter set and per-record reduction") {
  const auto& names = selected_parameter_names();
  REQUIRE(names.size() == 7);
  const std::vector<std::string> expected{"EB_LA",    "EA_LV",    "EB_LV",
                                          "EA_RV",    "R_AR_SYS", "C_AR_SYS",
                                          "R_VEN_SYS"};
  CHECK(names == expected);

  // full measurement set: everything stays free
  const auto sacco_ids = default_free_parameters(load_clinical("sacco"));
  REQUIRE(sacco_ids.size() == 7);
  for (const auto& n : expected) {
    CHECK(std::count(sacco_ids.begin(), sacco_ids.end(), param_index(n)) == 1);
  }

  // no atrial volume and no pulmonary pressure: the two passive left-heart
  // elastances lose all their leverage and drop out
  const auto monzino_ids = default_free_parameters(load_clinical("monzino"));
  REQUIRE(monzino_ids.size() == 5);
  for (const char* n : {"EA_LV", "EA_RV", "R_AR_SYS", "C_AR_SYS", "R_VEN_SYS"})
    CHECK(std::count(monzino_ids.begin(), monzino_ids.end(), param_index(n)) ==
          1);
  CHECK(std::is_sorted(monzino_ids.begin(), monzino_ids.end()));
}

TEST_CASE("healthy-range table with source tags") {
  const auto& table = range_table();
  REQUIRE(table.size() == display_output_names().size());
  for (std::size_t i = 0; i < table.size(); ++i)
    CHECK(table[i].name == display_output_names()[i]);

  bool saw_grad = false;
  for (const auto& e : table) {
    if (e.name == "maxGradP_rAV") {
      saw_grad = true;
      CHECK(std::isinf(e.range.lo));
      CHECK(std::isinf(e.range.hi));
      CHECK(e.source.empty());
    }
  }
  CHECK(saw_grad);

  const fs::path p = scratch_dir() / "ranges.json";
  save_range_table(p);
  const auto loaded = load_range_table(p);
  REQUIRE(loaded.size() == table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    CHECK(loaded[i].name == table[i].name);
    CHECK(loaded[i].range.lo == table[i].range.lo);
    CHECK(loaded[i].range.hi == table[i].range.hi);
    CHECK(loaded[i].source == table[i].source);
  }
}

TEST_CASE("parameter files restore every calibratable value") {
  ParameterSet p = reference_parameters(72.0);
  set_calibratable(p, param_index("EA_LV"), 1.234567890123);
  set_calibratable(p, param_index("C_VEN_PUL"), 9.87654321);
  const fs::path path = scratch_dir() / "params.json";
  save_parameters(p, path);
  const ParameterSet q = load_parameters(path);
  CHECK(q.HR == p.HR);
  for (int id = 0; id < kNumCalibratable; ++id)
    CHECK(get_calibratable(q, id) == get_calibratable(p, id));
  CHECK(q.LV.tC == p.LV.tC);
  CHECK(q.LA.TR == p.LA.TR);
  CHECK(q.RV.TC == doctest::Approx(0.30 * 60.0 / 72.0));
}

TEST_CASE("dataset round-trip") {
  Dataset ds;
  ds.param_names = {"EA_LV", "R_AR_SYS"};
  ds.output_names = {"SAP_max", "SAP_min"};
  ds.samples = {{{2.0, 0.5}, {{"SAP_max", 120.5}, {"SAP_min", 70.25}}},
                {{3.0, 0.7}, {{"SAP_max", 131.0}, {"SAP_min", 82.125}}}};
  ds.seed = 404;
  ds.box_fingerprint = "abc123";
  ds.HR = 80.0;
  ds.covid = true;
  ds.noisy = false;
  const fs::path p = scratch_dir() / "ds.json";
  save_dataset(ds, p);
  CHECK(load_dataset(p) == ds);
}

TEST_CASE("calibration report round-trip") {
  CalibrationReport r;
  r.method = "hybrid";
  r.param_names = {"EA_LV"};
  r.p_initial = {2.7};
  r.p_final = {2.31};
  r.final_mse = 1.25e-3;
  r.final_rmse = 0.03535533905932738;
  r.success = true;
  r.iterations = 42;
  r.n_sim = 137;
  r.trace = {{0, 0.5, 'c'}, {1, 0.25, 'c'}, {2, 1.25e-3, 'q'}};
  r.seed = 7;
  r.wall_seconds = 12.5;
  r.saturated = true;
  r.stalled = false;
  r.switch_reached = true;
  r.notes = "iteration budget exhausted";
  const fs::path p = scratch_dir() / "report.json";
  save_report(r, p);
  CHECK(load_report(p) == r);
}

TEST_CASE("correlation matrix round-trip") {
  CorrelationMatrix m;
  m.param_names = {"EA_LV", "R_AR_SYS"};
  m.output_names = {"SAP_max", "LV_EF", "PAP_max"};
  m.M = {{0.1, -0.9, 0.0}, {0.75, 0.2, -0.3}};
  m.n_samples = 3200;
  m.seed = 77;
  m.box_fingerprint = "deadbeef";
  m.covid = true;
  m.HR = 70.0;
  const fs::path p = scratch_dir() / "corr.json";
  save_correlation(m, p);
  CHECK(load_correlation(p) == m);
}

TEST_CASE("sensitivity result round-trip") {
  SensitivityResult s;
  s.param_names = {"EA_LV", "EB_LV"};
  s.output_names = {"SAP_max", "LV_EF"};
  s.total = {{0.9, 0.05}, {0.04, 0.6}};
  s.ci_half = {{0.02, 0.01}, {0.015, 0.09}};
  s.degenerate = {false, false};
  s.n_base = 1024;
  s.seed = 2024;
  s.box_fingerprint = "f00";
  s.n_evals = 67584;
  s.n_failures = 3;
  const fs::path p = scratch_dir() / "sens.json";
  save_sensitivity(s, p);
  CHECK(load_sensitivity(p) == s);
}

TEST_CASE("wrong schema and malformed files fail loudly") {
  const fs::path ds_path = scratch_dir() / "schema_probe.json";
  Dataset ds;
  ds.param_names = {"EA_LV"};
  ds.output_names = {"SAP_max"};
  ds.samples = {{{2.0}, {{"SAP_max", 120.0}}}};
  save_dataset(ds, ds_path);
  CHECK_THROWS_WITH_AS(load_report(ds_path),
                       doctest::Contains("schema"), std::runtime_error);

  const fs::path garbled = scratch_dir() / "garbled.json";
  write_text_atomic(garbled, "{ not json ");
  CHECK_THROWS_AS(load_dataset(garbled), std::runtime_error);

  CHECK_THROWS_AS(load_dataset(scratch_dir() / "missing.json"),
                  std::runtime_error);
}

TEST_CASE("trajectory CSV reproduces the beat exactly") {
  const ParameterSet p = reference_parameters();
  IntegratorConfig cfg;
  cfg.beats = 4;
  cfg.grid_points = 150;
  const auto lc = run_to_limit_cycle(p, cfg);
  const fs::path path = scratch_dir() / "beat.csv";
  save_trajectory_csv(lc.beat, path);
  const BeatTrajectory back = load_trajectory_csv(path);

  CHECK(back.t_begin == lc.beat.t_begin);
  CHECK(back.t_end == lc.beat.t_end);
  REQUIRE(back.size() == lc.beat.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back.t[i] == lc.beat.t[i]);  // %.17g survives the round trip
    for (int j = 0; j < 14; ++j) CHECK(back.x[i][j] == lc.beat.x[i][j]);
    CHECK(back.p_LV[i] == lc.beat.p_LV[i]);
    CHECK(back.Q_SH[i] == lc.beat.Q_SH[i]);
  }

  // post-processing the reloaded beat gives identical outputs
  const ModelOutputs a = compute_outputs(lc.beat, p);
  const ModelOutputs b = compute_outputs(back, p);
  CHECK(a.SAP_max == b.SAP_max);
  CHECK(a.LV_EF == b.LV_EF);
  CHECK(a.shunt_fraction == b.shunt_fraction);

  // tampering with the header is caught
  write_text_atomic(scratch_dir() / "bad.csv",
                    "# trajectory v1 t_begin=0 t_end=1\nt,wrong\n1,2\n");
  CHECK_THROWS_AS(load_trajectory_csv(scratch_dir() / "bad.csv"),
                  std::runtime_error);
}

TEST_CASE("atomic text writes create directories and replace content") {
  const fs::path nested = scratch_dir() / "a" / "b" / "note.txt";
  write_text_atomic(nested, "first");
  write_text_atomic(nested, "second");
  std::ifstream in(nested);
  std::string content((std::istreambuf_iterator<char>(in)), {});
  CHECK(content == "second");
  CHECK_FALSE(fs::exists(nested.string() + ".tmp"));
}
