#pragma once

#include <functional>
#include <vector>

namespace cardio {

struct BoxBounds {
  std::vector<double> lo, hi;
};

struct QNOptions {
  int memory = 10;          // limited-memory pairs
  int max_iter = 100;
  double pg_tol = 1e-8;     // projected-gradient infinity norm
  double rel_f_tol = 1e-12; // relative loss decrease
  double c1 = 1e-4;         // Armijo constant
  double c2 = 0.9;          // curvature constant
  int max_line_steps = 12;
  double fd_abs = 1e-6;     // finite-difference step floor
  double fd_rel = 1e-4;     // relative finite-difference step
};

struct QNResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> g;
  int iterations = 0;
  long n_fev = 0;           // objective evaluations (incl. FD probes)
  bool converged = false;   // projected gradient or f-stagnation criterion met
  bool stalled = false;     // line search failed; best iterate returned
  bool hit_max_iter = false;
  std::vector<double> f_trace;  // loss after each accepted iterate
};

/// Objective; may return +infinity to reject a point (e.g. failed
/// simulation), which the line search treats as an unacceptable step.
using Objective = std::function<double(const std::vector<double>&)>;

/// Box-constrained limited-memory BFGS with gradient projection. Search
/// directions come from the two-loop recursion with bound-blocked components
/// zeroed; steps follow an Armijo backtracking line search capped at the
/// first bound intersection, with a curvature (strong Wolfe) extension pass
/// when the accepted step looks too short. Gradients are central finite
/// differences with per-component step max(fd_abs, fd_rel*|x_i|), switching
/// to one-sided probes against a bound. Iterates stay inside the box.
QNResult minimize_box(const Objective& f, const std::vector<double>& x0,
                      const BoxBounds& bounds, const QNOptions& opt = {});

/// Central finite-difference gradient used by minimize_box, exposed for
/// verification against higher-order oracles.
std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x,
                                double f_at_x, const BoxBounds& bounds,
                                const QNOptions& opt, long& n_fev);

}  // namespace cardio
