#include "cardio/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace cardio {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

void dump_json_atomic(json& j, const char* kind, const fs::path& path) {
  j["schema"] = kind;
  j["version"] = kSchemaVersion;
  write_text_atomic(path, j.dump(2) + "\n");
}

json load_json_checked(const fs::path& path, const char* kind) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& ex) {
    throw std::runtime_error("malformed JSON in '" + path.string() +
                             "': " + ex.what());
  }
  const std::string schema = j.value("schema", "(missing)");
  if (schema != kind)
    throw std::runtime_error("'" + path.string() + "': expected schema '" +
                             std::string(kind) + "', found '" + schema + "'");
  const int version = j.value("version", -1);
  if (version != kSchemaVersion)
    throw std::runtime_error("'" + path.string() + "': schema version " +
                             std::to_string(version) + " not supported (want " +
                             std::to_string(kSchemaVersion) + ")");
  return j;
}

// JSON cannot hold non-finite numbers; reports of failed runs carry +inf.
json num_out(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double num_in(const json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::runtime_error("expected a number, found '" + s + "'");
}

json data_out(const std::vector<CalibrationDatum>& data) {
  json a = json::array();
  for (const auto& d : data) a.push_back({{"name", d.name}, {"value", d.value}});
  return a;
}

std::vector<CalibrationDatum> data_in(const json& a) {
  std::vector<CalibrationDatum> data;
  for (const auto& e : a)
    data.push_back({e.at("name").get<std::string>(), e.at("value").get<double>()});
  return data;
}

void validate_record(const ClinicalRecord& rec) {
  if (rec.id.empty())
    throw std::invalid_argument("clinical record without an id");
  if (!(rec.HR > 0.0))
    throw std::invalid_argument("clinical record '" + rec.id +
                                "': HR must be positive");
  if (rec.BSA && !(*rec.BSA > 0.0))
    throw std::invalid_argument("clinical record '" + rec.id +
                                "': BSA must be positive");
  if (rec.data.empty())
    throw std::invalid_argument("clinical record '" + rec.id +
                                "' holds no measurements");
  const auto& known = raw_output_names();
  for (const auto& d : rec.data) {
    if (std::find(known.begin(), known.end(), d.name) == known.end())
      throw std::invalid_argument("clinical record '" + rec.id +
                                  "': unknown output '" + d.name + "'");
    if (!(d.value > 0.0))
      throw std::invalid_argument("clinical record '" + rec.id + "': '" +
                                  d.name + "' must be positive");
  }
}

const std::map<std::string, ClinicalRecord>& builtin_clinical() {
  static const std::map<std::string, ClinicalRecord> table = {
      {"monzino",
       {"monzino",
        70.0,
        std::nullopt,
        {{"LV_EDV", 233.0},
         {"LV_ESV", 130.0},
         {"LV_EF", 42.0},
         {"maxGradP_rAV", 25.0},
         {"SAP_max", 140.0},
         {"SAP_min", 55.0}}}},
      {"sacco",
       {"sacco",
        60.0,
        std::nullopt,
        {{"LA_Vmax", 50.0},
         {"LV_EDV", 110.0},
         {"LV_ESV", 33.0},
         {"LV_EF", 70.0},
         {"maxGradP_rAV", 20.0},
         {"SAP_max", 135.0},
         {"SAP_min", 70.0},
         {"PAP_max", 25.0}}}},
  };
  return table;
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& content) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot create '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out)
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

ClinicalRecord load_clinical_file(const fs::path& path) {
  const json j = load_json_checked(path, "clinical");
  ClinicalRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.HR = j.at("HR").get<double>();
  if (j.contains("BSA") && !j.at("BSA").is_null())
    rec.BSA = j.at("BSA").get<double>();
  rec.data = data_in(j.at("data"));
  validate_record(rec);
  return rec;
}

void save_clinical(const ClinicalRecord& rec, const fs::path& path) {
  validate_record(rec);
  json j;
  j["id"] = rec.id;
  j["HR"] = rec.HR;
  if (rec.BSA) j["BSA"] = *rec.BSA;
  j["data"] = data_out(rec.data);
  dump_json_atomic(j, "clinical", path);
}

ClinicalRecord load_clinical(const std::string& name) {
  if (const char* dir = std::getenv(kFixtureDirEnv)) {
    const fs::path candidate = fs::path(dir) / (name + ".json");
    if (fs::exists(candidate)) return load_clinical_file(candidate);
  }
  const auto& table = builtin_clinical();
  const auto it = table.find(name);
  if (it == table.end())
    throw std::invalid_argument("unknown clinical record '" + name + "'");
  return it->second;
}

const std::vector<std::string>& selected_parameter_names() {
  static const std::vector<std::string> names = {
      "EB_LA", "EA_LV", "EB_LV", "EA_RV", "R_AR_SYS", "C_AR_SYS", "R_VEN_SYS"};
  return names;
}

std::vector<int> default_free_parameters(const ClinicalRecord& rec) {
  validate_record(rec);
  // Measurements on which each screened parameter acts with a total-effect
  // index of at least 0.1 (from the variance-based screening at reference
  // conditions). A parameter stays free only while the record retains at
  // least one of its influential measurements.
  static const std::map<std::string, std::vector<std::string>> influence = {
      {"EB_LA", {"LA_Vmax"}},
      {"EA_LV", {"LV_ESV", "LV_EF", "SAP_max", "SAP_min"}},
      {"EB_LV", {"LA_Vmax", "PAP_max"}},
      {"EA_RV", {"maxGradP_rAV"}},
      {"R_AR_SYS", {"LV_ESV", "LV_EF", "SAP_max", "SAP_min"}},
      {"C_AR_SYS", {"SAP_max", "SAP_min"}},
      {"R_VEN_SYS", {"LV_EDV", "LV_ESV", "SAP_max", "SAP_min", "PAP_max"}},
  };
  std::vector<int> ids;
  for (const auto& pname : selected_parameter_names()) {
    const auto& outs = influence.at(pname);
    const bool keep =
        std::any_of(outs.begin(), outs.end(), [&rec](const std::string& o) {
          return std::any_of(rec.data.begin(), rec.data.end(),
                             [&o](const CalibrationDatum& d) { return d.name == o; });
        });
    if (keep) ids.push_back(param_index(pname));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

const std::vector<RangeEntry>& range_table() {
  static const std::vector<RangeEntry> table = [] {
    static const std::map<std::string, std::string> source = {
        {"LA_I-Vmax", "Lang 2015"},   {"LV_I-EDV", "Hurst 1990"},
        {"LV_ESV", "Lang 2015"},      {"LV_EF", "Lang 2015"},
        {"SAP_max", "Lang 2015"},     {"SAP_min", "Lang 2015"},
        {"PAP_max", "Hurst 1990"},    {"LA_Pmax", "Hurst 1990"},
        {"LA_Pmin", "Hurst 1990"},    {"LA_Pmean", "Hurst 1990"},
        {"LV_SV", "Lang 2015"},       {"CI", "Hurst 1990"},
        {"LV_Pmax", "Hurst 1990"},    {"LV_Pmin", "Hurst 1990"},
        {"RA_I-Vmax", "Lang 2015"},   {"RA_Pmax", "Hurst 1990"},
        {"RA_Pmin", "Hurst 1990"},    {"RA_Pmean", "Hurst 1990"},
        {"RV_I-EDV", "Rudski 2010"},  {"RV_I-ESV", "Rudski 2010"},
        {"RV_EF", "Rudski 2010"},     {"RV_Pmax", "Hurst 1990"},
        {"RV_Pmin", "Hurst 1990"},    {"PAP_min", "Hurst 1990"},
        {"PAP_mean", "Hurst 1990"},   {"PWP_min", "Hurst 1990"},
        {"PWP_mean", "Hurst 1990"},   {"SVR", "Hurst 1990"},
        {"PVR", "Hurst 1990"},        {"ShuntFraction", "Velthuis 2015"},
    };
    constexpr double kInf = std::numeric_limits<double>::infinity();
    const auto& ranges = healthy_ranges();
    std::vector<RangeEntry> t;
    for (const auto& name : display_output_names()) {
      const auto r = ranges.find(name);
      const auto s = source.find(name);
      t.push_back({name, r == ranges.end() ? Range{-kInf, kInf} : r->second,
                   s == source.end() ? std::string() : s->second});
    }
    return t;
  }();
  return table;
}

void save_range_table(const fs::path& path) {
  json rows = json::array();
  for (const auto& e : range_table()) {
    json r;
    r["name"] = e.name;
    r["lo"] = num_out(e.range.lo);
    r["hi"] = num_out(e.range.hi);
    r["source"] = e.source;
    rows.push_back(std::move(r));
  }
  json j;
  j["ranges"] = std::move(rows);
  dump_json_atomic(j, "ranges", path);
}

std::vector<RangeEntry> load_range_table(const fs::path& path) {
  const json j = load_json_checked(path, "ranges");
  std::vector<RangeEntry> t;
  for (const auto& r : j.at("ranges")) {
    RangeEntry e{r.at("name").get<std::string>(),
                 {num_in(r.at("lo")), num_in(r.at("hi"))},
                 r.at("source").get<std::string>()};
    if (!(e.range.lo < e.range.hi))
      throw std::runtime_error("range for '" + e.name + "' is empty");
    t.push_back(std::move(e));
  }
  return t;
}

void save_dataset(const Dataset& ds, const fs::path& path) {
  json samples = json::array();
  for (const auto& s : ds.samples) {
    json e;
    e["p_true"] = s.p_true;
    e["data"] = data_out(s.data);
    samples.push_back(std::move(e));
  }
  json j;
  j["param_names"] = ds.param_names;
  j["output_names"] = ds.output_names;
  j["samples"] = std::move(samples);
  j["seed"] = ds.seed;
  j["box_fingerprint"] = ds.box_fingerprint;
  j["HR"] = ds.HR;
  j["covid"] = ds.covid;
  j["noisy"] = ds.noisy;
  dump_json_atomic(j, "dataset", path);
}

Dataset load_dataset(const fs::path& path) {
  const json j = load_json_checked(path, "dataset");
  Dataset ds;
  ds.param_names = j.at("param_names").get<std::vector<std::string>>();
  ds.output_names = j.at("output_names").get<std::vector<std::string>>();
  for (const auto& e : j.at("samples")) {
    SyntheticSample s;
    s.p_true = e.at("p_true").get<std::vector<double>>();
    s.data = data_in(e.at("data"));
    if (s.p_true.size() != ds.param_names.size())
      throw std::runtime_error("dataset sample with wrong parameter count");
    ds.samples.push_back(std::move(s));
  }
  ds.seed = j.at("seed").get<std::uint64_t>();
  ds.box_fingerprint = j.at("box_fingerprint").get<std::string>();
  ds.HR = j.at("HR").get<double>();
  ds.covid = j.at("covid").get<bool>();
  ds.noisy = j.at("noisy").get<bool>();
  return ds;
}

void save_parameters(const ParameterSet& p, const fs::path& path) {
  p.validate();
  json values;
  for (int id = 0; id < kNumCalibratable; ++id)
    values[std::string(param_name(id))] = get_calibratable(p, id);
  const auto timing = [](const ChamberParams& c) {
    return json{{"tC", c.tC}, {"TC", c.TC}, {"tR", c.tR}, {"TR", c.TR}};
  };
  json j;
  j["HR"] = p.HR;
  j["values"] = std::move(values);
  j["timing"] = {{"LA", timing(p.LA)},
                 {"LV", timing(p.LV)},
                 {"RA", timing(p.RA)},
                 {"RV", timing(p.RV)}};
  dump_json_atomic(j, "parameters", path);
}

ParameterSet load_parameters(const fs::path& path) {
  const json j = load_json_checked(path, "parameters");
  ParameterSet p = reference_parameters(j.at("HR").get<double>());
  const json& values = j.at("values");
  for (int id = 0; id < kNumCalibratable; ++id)
    set_calibratable(p, id, values.at(std::string(param_name(id))).get<double>());
  const json& timing = j.at("timing");
  const auto read_timing = [&timing](ChamberParams& c, const char* key) {
    const json& t = timing.at(key);
    c.tC = t.at("tC").get<double>();
    c.TC = t.at("TC").get<double>();
    c.tR = t.at("tR").get<double>();
    c.TR = t.at("TR").get<double>();
  };
  read_timing(p.LA, "LA");
  read_timing(p.LV, "LV");
  read_timing(p.RA, "RA");
  read_timing(p.RV, "RV");
  p.validate();
  return p;
}

void save_report(const CalibrationReport& r, const fs::path& path) {
  json trace = json::array();
  for (const auto& tp : r.trace)
    trace.push_back({{"iter", tp.iter},
                     {"mse", num_out(tp.mse)},
                     {"phase", std::string(1, tp.phase)}});
  json j;
  j["method"] = r.method;
  j["param_names"] = r.param_names;
  j["p_initial"] = r.p_initial;
  j["p_final"] = r.p_final;
  j["final_mse"] = num_out(r.final_mse);
  j["final_rmse"] = num_out(r.final_rmse);
  j["success"] = r.success;
  j["iterations"] = r.iterations;
  j["n_sim"] = r.n_sim;
  j["trace"] = std::move(trace);
  j["seed"] = r.seed;
  j["wall_seconds"] = r.wall_seconds;
  j["saturated"] = r.saturated;
  j["stalled"] = r.stalled;
  j["switch_reached"] = r.switch_reached;
  j["notes"] = r.notes;
  dump_json_atomic(j, "report", path);
}

CalibrationReport load_report(const fs::path& path) {
  const json j = load_json_checked(path, "report");
  CalibrationReport r;
  r.method = j.at("method").get<std::string>();
  r.param_names = j.at("param_names").get<std::vector<std::string>>();
  r.p_initial = j.at("p_initial").get<std::vector<double>>();
  r.p_final = j.at("p_final").get<std::vector<double>>();
  r.final_mse = num_in(j.at("final_mse"));
  r.final_rmse = num_in(j.at("final_rmse"));
  r.success = j.at("success").get<bool>();
  r.iterations = j.at("iterations").get<int>();
  r.n_sim = j.at("n_sim").get<long>();
  for (const auto& e : j.at("trace")) {
    const std::string phase = e.at("phase").get<std::string>();
    if (phase.size() != 1)
      throw std::runtime_error("report trace with malformed phase tag");
    r.trace.push_back({e.at("iter").get<int>(), num_in(e.at("mse")), phase[0]});
  }
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  r.saturated = j.at("saturated").get<bool>();
  r.stalled = j.at("stalled").get<bool>();
  r.switch_reached = j.at("switch_reached").get<bool>();
  r.notes = j.at("notes").get<std::string>();
  return r;
}

void save_correlation(const CorrelationMatrix& m, const fs::path& path) {
  json j;
  j["param_names"] = m.param_names;
  j["output_names"] = m.output_names;
  j["M"] = m.M;
  j["n_samples"] = m.n_samples;
  j["seed"] = m.seed;
  j["box_fingerprint"] = m.box_fingerprint;
  j["covid"] = m.covid;
  j["HR"] = m.HR;
  dump_json_atomic(j, "correlation", path);
}

CorrelationMatrix load_correlation(const fs::path& path) {
  const json j = load_json_checked(path, "correlation");
  CorrelationMatrix m;
  m.param_names = j.at("param_names").get<std::vector<std::string>>();
  m.output_names = j.at("output_names").get<std::vector<std::string>>();
  m.M = j.at("M").get<std::vector<std::vector<double>>>();
  m.n_samples = j.at("n_samples").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.box_fingerprint = j.at("box_fingerprint").get<std::string>();
  m.covid = j.at("covid").get<bool>();
  m.HR = j.at("HR").get<double>();
  if (m.M.size() != m.param_names.size())
    throw std::runtime_error("correlation matrix row count mismatch");
  for (const auto& row : m.M)
    if (row.size() != m.output_names.size())
      throw std::runtime_error("correlation matrix column count mismatch");
  return m;
}

void save_sensitivity(const SensitivityResult& s, const fs::path& path) {
  json j;
  j["param_names"] = s.param_names;
  j["output_names"] = s.output_names;
  j["total"] = s.total;
  j["ci_half"] = s.ci_half;
  j["degenerate"] = s.degenerate;
  j["n_base"] = s.n_base;
  j["seed"] = s.seed;
  j["box_fingerprint"] = s.box_fingerprint;
  j["n_evals"] = s.n_evals;
  j["n_failures"] = s.n_failures;
  dump_json_atomic(j, "sensitivity", path);
}

SensitivityResult load_sensitivity(const fs::path& path) {
  const json j = load_json_checked(path, "sensitivity");
  SensitivityResult s;
  s.param_names = j.at("param_names").get<std::vector<std::string>>();
  s.output_names = j.at("output_names").get<std::vector<std::string>>();
  s.total = j.at("total").get<std::vector<std::vector<double>>>();
  s.ci_half = j.at("ci_half").get<std::vector<std::vector<double>>>();
  s.degenerate = j.at("degenerate").get<std::vector<bool>>();
  s.n_base = j.at("n_base").get<int>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.box_fingerprint = j.at("box_fingerprint").get<std::string>();
  s.n_evals = j.at("n_evals").get<long>();
  s.n_failures = j.at("n_failures").get<long>();
  if (s.total.size() != s.param_names.size() ||
      s.ci_half.size() != s.param_names.size())
    throw std::runtime_error("sensitivity table row count mismatch");
  return s;
}

namespace {

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"t"};
    for (const auto& n : kStateNames) c.emplace_back(n);
    for (const char* n : {"p_LA", "p_LV", "p_RA", "p_RV", "Q_MV", "Q_AV",
                          "Q_TV", "Q_PV", "Q_C_SYS", "Q_C_PUL", "Q_SH"})
      c.emplace_back(n);
    return c;
  }();
  return cols;
}

void append_g17(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void save_trajectory_csv(const BeatTrajectory& traj, const fs::path& path) {
  std::string out;
  out.reserve(traj.size() * 26 * 26 + 1024);
  out += "# trajectory v1 t_begin=";
  append_g17(out, traj.t_begin);
  out += " t_end=";
  append_g17(out, traj.t_end);
  out += '\n';
  const auto& cols = trajectory_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out += ',';
    out += cols[c];
  }
  out += '\n';
  for (std::size_t i = 0; i < traj.size(); ++i) {
    append_g17(out, traj.t[i]);
    for (double v : traj.x[i]) {
      out += ',';
      append_g17(out, v);
    }
    for (const std::vector<double>* v :
         {&traj.p_LA, &traj.p_LV, &traj.p_RA, &traj.p_RV, &traj.Q_MV,
          &traj.Q_AV, &traj.Q_TV, &traj.Q_PV, &traj.Q_C_SYS, &traj.Q_C_PUL,
          &traj.Q_SH}) {
      out += ',';
      append_g17(out, (*v)[i]);
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

BeatTrajectory load_trajectory_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("# trajectory v1 ", 0) != 0)
    throw std::runtime_error("'" + path.string() +
                             "' is not a v1 trajectory file");
  BeatTrajectory traj;
  {
    std::istringstream meta(line.substr(16));
    std::string tok;
    while (meta >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const double val = std::strtod(tok.c_str() + eq + 1, nullptr);
      if (key == "t_begin") traj.t_begin = val;
      if (key == "t_end") traj.t_end = val;
    }
  }
  std::string header;
  for (std::size_t c = 0; c < trajectory_columns().size(); ++c) {
    if (c) header += ',';
    header += trajectory_columns()[c];
  }
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error("'" + path.string() +
                             "' has an unexpected column layout");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 26> v{};
    const char* s = line.c_str();
    for (int c = 0; c < 26; ++c) {
      char* end = nullptr;
      v[c] = std::strtod(s, &end);
      if (end == s)
        throw std::runtime_error("'" + path.string() + "': malformed row '" +
                                 line + "'");
      s = end;
      if (*s == ',') ++s;
    }
    traj.t.push_back(v[0]);
    State x;
    std::copy(v.begin() + 1, v.begin() + 15, x.begin());
    traj.x.push_back(x);
    traj.p_LA.push_back(v[15]);
    traj.p_LV.push_back(v[16]);
    traj.p_RA.push_back(v[17]);
    traj.p_RV.push_back(v[18]);
    traj.Q_MV.push_back(v[19]);
    traj.Q_AV.push_back(v[20]);
    traj.Q_TV.push_back(v[21]);
    traj.Q_PV.push_back(v[22]);
    traj.Q_C_SYS.push_back(v[23]);
    traj.Q_C_PUL.push_back(v[24]);
    traj.Q_SH.push_back(v[25]);
  }
  if (traj.t.empty())
    throw std::runtime_error("'" + path.string() + "' holds no samples");
  return traj;
}

}  // namespace cardio
