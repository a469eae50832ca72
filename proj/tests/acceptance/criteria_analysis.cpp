// C4: the variance-based screening selects exactly the expected free
// parameters for the calibration outputs at threshold 0.1.

#include <algorithm>
#include <set>
#include <string>

#include "acceptance.hpp"
#include "cardio/outputs.hpp"
#include "cardio/sensitivity.hpp"

namespace acceptance {

using namespace cardio;

namespace {

Result c4_selection(const Context& ctx) {
  Result r;
  const SensitivityResult s = cached_sensitivity(ctx);

  r.details.push_back(fmt("N = %d base samples, %ld model runs, %ld failures",
                          s.n_base, s.n_evals, s.n_failures));

  const auto selected =
      select_parameters(s, 0.1, calibration_output_names());

  std::set<std::string> got;
  for (int id : selected) got.insert(std::string(param_name(id)));
  const std::set<std::string> want(selected_parameter_names().begin(),
                                   selected_parameter_names().end());

  // per-parameter peak influence over the calibration outputs, for the log
  for (int id : selected) {
    const auto row = std::find(s.param_names.begin(), s.param_names.end(),
                               std::string(param_name(id))) -
                     s.param_names.begin();
    double peak = 0.0, peak_ci = 0.0;
    std::string peak_out;
    for (const auto& out : calibration_output_names()) {
      const auto col = std::find(s.output_names.begin(), s.output_names.end(),
                                 out) -
                       s.output_names.begin();
      if (s.total[row][col] > peak) {
        peak = s.total[row][col];
        peak_ci = s.ci_half[row][col];
        peak_out = out;
      }
    }
    r.details.push_back(fmt("selected %-10s peak total %.3f +- %.3f on %s",
                            std::string(param_name(id)).c_str(), peak, peak_ci,
                            peak_out.c_str()));
  }

  for (const auto& name : want)
    if (!got.count(name)) r.details.push_back("missing: " + name);
  for (const auto& name : got)
    if (!want.count(name)) r.details.push_back("unexpected: " + name);

  r.pass = got == want;
  if (r.pass)
    r.details.push_back(
        fmt("threshold-0.1 selection over the 8 calibration outputs matches "
            "the screened 7-parameter set"));
  return r;
}

}  // namespace

std::vector<Criterion> analysis_criteria() {
  return {{"C4", "variance screening selects the seven calibration parameters",
           c4_selection}};
}

}  // namespace acceptance
