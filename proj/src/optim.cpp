#include "survine/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace survine {

namespace {
constexpr double kGolden = 0.61803398874989484820;
}

Optimum1D golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                          double xtol, int max_iter) {
  if (!(lo < hi)) throw std::invalid_argument("golden_minimize: empty bracket");
  Optimum1D out;
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  out.evals = 2;
  for (int it = 0; it < max_iter && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    }
    ++out.evals;
  }
  out.converged = (b - a) <= xtol * 1.0001 + 1e-15;
  if (f1 <= f2) { out.x = x1; out.fx = f1; } else { out.x = x2; out.fx = f2; }
  return out;
}

Optimum1D scan_golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                               int n_scan, double xtol) {
  if (n_scan < 3) n_scan = 3;
  int best = 0;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> xs(n_scan);
  for (int i = 0; i < n_scan; ++i) {
    xs[i] = lo + (hi - lo) * i / (n_scan - 1.0);
    double fi = f(xs[i]);
    if (fi < best_f) { best_f = fi; best = i; }
  }
  double a = xs[std::max(0, best - 1)];
  double b = xs[std::min(n_scan - 1, best + 1)];
  Optimum1D out = golden_minimize(f, a, b, xtol, 200);
  out.evals += n_scan;
  if (best_f < out.fx) { out.x = xs[best]; out.fx = best_f; }
  return out;
}

OptimumND nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                      std::vector<double> x0, std::vector<double> step, double ftol,
                      int max_iter) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start");
  if (step.size() == 1) step.assign(n, step[0]);
  if (step.size() != n) throw std::invalid_argument("nelder_mead: step size mismatch");

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += (step[i] != 0.0 ? step[i] : 0.1);
  std::vector<double> fv(n + 1);
  OptimumND out;
  for (std::size_t i = 0; i <= n; ++i) { fv[i] = f(simplex[i]); ++out.evals; }

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  std::vector<std::size_t> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::size_t lo = order[0], hi = order[n], nh = order[n - 1];
    if (std::fabs(fv[hi] - fv[lo]) <= ftol * (std::fabs(fv[lo]) + ftol)) {
      out.converged = true;
      break;
    }
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k] / double(n);
    }
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (centroid[k] - simplex[hi][k]);
      return p;
    };
    std::vector<double> xr = blend(alpha);
    double fr = f(xr); ++out.evals;
    if (fr < fv[lo]) {
      std::vector<double> xe = blend(gamma);
      double fe = f(xe); ++out.evals;
      if (fe < fr) { simplex[hi] = std::move(xe); fv[hi] = fe; }
      else { simplex[hi] = std::move(xr); fv[hi] = fr; }
    } else if (fr < fv[nh]) {
      simplex[hi] = std::move(xr); fv[hi] = fr;
    } else {
      std::vector<double> xc = blend(rho * (fr < fv[hi] ? 1.0 : -1.0));
      double fc = f(xc); ++out.evals;
      if (fc < std::min(fr, fv[hi])) {
        simplex[hi] = std::move(xc); fv[hi] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t k = 0; k < n; ++k)
            simplex[i][k] = simplex[lo][k] + sigma * (simplex[i][k] - simplex[lo][k]);
          fv[i] = f(simplex[i]); ++out.evals;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i <= n; ++i) if (fv[i] < fv[best]) best = i;
  out.x = simplex[best];
  out.fx = fv[best];
  return out;
}

}  // namespace survine
