// Acceptance harness: every shipped claim about the model, the analysis
// stack, and the calibrators, checked end to end. One verdict line per
// criterion; exit status counts the failures.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "cardio/data_io.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/parallel.hpp"
#include "cardio/sensitivity.hpp"

namespace acceptance {

namespace fs = std::filesystem;
using namespace cardio;

CorrelationMatrix cached_correlation(const Context& ctx,
                                     const ParameterSet& ref,
                                     const Hyperbox& box,
                                     const std::string& tag) {
  const fs::path file =
      ctx.cache / fmt("corr_%s_n%d_s%llu.json", tag.c_str(), ctx.corr_n,
                      static_cast<unsigned long long>(ctx.seed));
  if (!ctx.cache.empty() && fs::exists(file)) {
    CorrelationMatrix m = load_correlation(file);
    if (m.box_fingerprint == box.fingerprint() && m.n_samples == ctx.corr_n &&
        m.HR == ref.HR)
      return m;
    std::fprintf(stderr, "  [cache] %s is stale, rebuilding\n",
                 file.string().c_str());
  }
  std::fprintf(stderr, "  building correlation matrix '%s' (n=%d)...\n",
               tag.c_str(), ctx.corr_n);
  CorrelationMatrix m = build_correlation_matrix(
      ref, box, ctx.corr_n, mix_seed(ctx.seed, 9000), ctx.jobs);
  if (!ctx.cache.empty()) {
    fs::create_directories(ctx.cache);
    save_correlation(m, file);
  }
  return m;
}

SensitivityResult cached_sensitivity(const Context& ctx) {
  const fs::path file =
      ctx.cache / fmt("sobol_n%d_s%llu.json", ctx.sobol_n,
                      static_cast<unsigned long long>(ctx.seed));
  const ParameterSet ref = reference_parameters();
  const Hyperbox box = build_hyperbox(ref, false);
  if (!ctx.cache.empty() && fs::exists(file)) {
    SensitivityResult s = load_sensitivity(file);
    if (s.box_fingerprint == box.fingerprint() && s.n_base == ctx.sobol_n)
      return s;
    std::fprintf(stderr, "  [cache] %s is stale, rebuilding\n",
                 file.string().c_str());
  }
  std::fprintf(stderr,
               "  running the variance sweep (N=%d, %d model runs)...\n",
               ctx.sobol_n, 2 * ctx.sobol_n * (kNumCalibratable + 1));
  SensitivityResult s = total_sobol(box, ref, ctx.sobol_n, ctx.seed, ctx.jobs);
  if (!ctx.cache.empty()) {
    fs::create_directories(ctx.cache);
    save_sensitivity(s, file);
  }
  return s;
}

Dataset cached_dataset(const Context& ctx) {
  const fs::path file = ctx.cache / fmt("dataset_s%llu.json",
                                        static_cast<unsigned long long>(ctx.seed));
  const ParameterSet ref = reference_parameters();
  const Hyperbox box = build_hyperbox(ref, false);

  std::vector<int> ids;
  for (const auto& n : selected_parameter_names())
    ids.push_back(param_index(n));
  std::sort(ids.begin(), ids.end());

  if (!ctx.cache.empty() && fs::exists(file)) {
    Dataset ds = load_dataset(file);
    if (ds.box_fingerprint == box.fingerprint() &&
        ds.samples.size() == 20 && !ds.noisy)
      return ds;
    std::fprintf(stderr, "  [cache] %s is stale, rebuilding\n",
                 file.string().c_str());
  }

  std::fprintf(stderr, "  generating 20 synthetic targets...\n");
  std::vector<CalibrationDatum> placeholder;
  for (const auto& n : calibration_output_names())
    placeholder.push_back({n, 1.0});
  const CalibrationProblem gen(ref, ids, box, placeholder);

  Dataset ds;
  for (int id : ids) ds.param_names.emplace_back(param_name(id));
  ds.output_names = calibration_output_names();
  ds.samples.resize(20);
  ds.seed = ctx.seed;
  ds.box_fingerprint = box.fingerprint();
  ds.HR = ref.HR;
  parallel_for(20, ctx.jobs, [&](std::size_t i) {
    ds.samples[i] = generate_synthetic(gen, mix_seed(ctx.seed, 10 + i));
  });
  if (!ctx.cache.empty()) {
    fs::create_directories(ctx.cache);
    save_dataset(ds, file);
  }
  return ds;
}

}  // namespace acceptance

namespace {

void usage() {
  std::puts(
      "usage: acceptance [options]\n"
      "  --filter STR   run only criteria whose id contains STR (e.g. C4)\n"
      "  --cache DIR    store/reuse heavyweight artifacts in DIR\n"
      "  --jobs N       worker threads for model sweeps (0 = all cores)\n"
      "  --sobol-n N    base samples for the Sobol criterion (default 256)\n"
      "  --corr-n N     sweep size for correlation matrices (default 3200)\n"
      "  --seed S       master seed (default 2024)\n"
      "  --list         print the criteria and exit");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace acceptance;

  Context ctx;
  std::string filter;
  bool list_only = false;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto need = [&](const char* what) -> const char* {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: %s expects a value\n", what);
        std::exit(2);
      }
      return argv[++i];
    };
    if (a == "--filter") filter = need("--filter");
    else if (a == "--cache") ctx.cache = need("--cache");
    else if (a == "--jobs") ctx.jobs = std::atoi(need("--jobs"));
    else if (a == "--sobol-n") ctx.sobol_n = std::atoi(need("--sobol-n"));
    else if (a == "--corr-n") ctx.corr_n = std::atoi(need("--corr-n"));
    else if (a == "--seed") ctx.seed = std::strtoull(need("--seed"), nullptr, 10);
    else if (a == "--list") list_only = true;
    else if (a == "--help" || a == "-h") { usage(); return 0; }
    else {
      std::fprintf(stderr, "error: unknown option '%s'\n", a.c_str());
      usage();
      return 2;
    }
  }

  std::vector<Criterion> all;
  for (auto&& group : {core_criteria(), analysis_criteria(),
                       calibration_criteria()})
    all.insert(all.end(), group.begin(), group.end());
  std::sort(all.begin(), all.end(),
            [](const Criterion& a, const Criterion& b) { return a.id < b.id; });

  if (list_only) {
    for (const auto& c : all)
      std::printf("%-3s %s\n", c.id.c_str(), c.title.c_str());
    return 0;
  }

  int ran = 0, failed = 0;
  for (const auto& c : all) {
    if (!filter.empty() && c.id.find(filter) == std::string::npos) continue;
    ++ran;
    std::fprintf(stderr, "--- %s: %s\n", c.id.c_str(), c.title.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = c.fn(ctx);
    } catch (const std::exception& e) {
      r.pass = false;
      r.details.push_back(std::string("unhandled exception: ") + e.what());
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    for (const auto& d : r.details) std::printf("       %s\n", d.c_str());
    std::printf("[%s] %s %s (%.1f s)\n", r.pass ? "PASS" : "FAIL",
                c.id.c_str(), c.title.c_str(), dt);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }

  if (ran == 0) {
    std::fprintf(stderr, "no criteria match filter '%s'\n", filter.c_str());
    return 2;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed;
}
