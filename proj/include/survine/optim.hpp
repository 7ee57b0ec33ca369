#pragma once
// Derivative-free minimizers used by every fitting routine. Objectives may
// return +infinity to mark infeasible points; they must never return NaN.
#include <functional>
#include <vector>

namespace survine {

struct Optimum1D {
  double x = 0.0;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
};

// Golden-section search on [lo, hi]; assumes unimodality inside the bracket.
Optimum1D golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                          double xtol = 1e-7, int max_iter = 200);

// Coarse grid scan followed by golden section in the best bracket. Robust to
// mild multimodality; n_scan >= 3.
Optimum1D scan_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                               int n_scan = 33, double xtol = 1e-7);

struct OptimumND {
  std::vector<double> x;
  double fx = 0.0;
  int evals = 0;
  bool converged = false;
};

// Nelder-Mead with adaptive restarts disabled; callers wanting multistart loop
// over starting points themselves. step sets the initial simplex spread per
// coordinate (scalar broadcast if size 1).
OptimumND nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                      std::vector<double> x0, std::vector<double> step, double ftol = 1e-9,
                      int max_iter = 2000);

}  // namespace survine
