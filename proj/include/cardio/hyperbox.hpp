#pragma once

#include <string>
#include <vector>

#include "cardio/parameters.hpp"

namespace cardio {

/// Axis-aligned sampling region over the 32 calibratable parameters.
struct Hyperbox {
  std::vector<double> lo, hi;  // size kNumCalibratable, canonical order
  bool covid = false;

  bool contains(const std::vector<double>& p) const;
  /// Short fingerprint of the bounds, recorded with derived artifacts so a
  /// correlation matrix can be matched to the box that produced it.
  std::string fingerprint() const;
};

/// Base bounds: [(1/3) p_ref, (5/3) p_ref] per parameter. The covid variant
/// additionally halves the lower bound of the four active elastances,
/// triples the upper bound of the pulmonary resistances (R_AR_PUL, R_C_PUL,
/// R_SH, R_VEN_PUL) and divides by 3 the lower bound of the pulmonary
/// compliances (C_AR_PUL, C_C_PUL, C_SH, C_VEN_PUL).
Hyperbox build_hyperbox(const ParameterSet& ref, bool covid = false);

}  // namespace cardio
