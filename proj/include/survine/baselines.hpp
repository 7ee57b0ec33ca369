#pragma once
// Comparison models for right-censored responses: Weibull accelerated failure
// time regression and Cox partial likelihood with a parametric Weibull
// baseline, plus conditional cumulative-hazard grids with a crossing count.
#include <string>
#include <vector>

#include "survine/vine.hpp"

namespace survine {

// log y = gamma0 + x'gamma + sigma*W with standard minimum Gumbel W, so
// S(y|x) = exp(-exp(z)), z = (log y - gamma0 - x'gamma)/sigma.
struct AftModel {
  double gamma0 = 0.0;
  std::vector<double> gamma;
  double sigma = 1.0;
  std::vector<double> se;  // for (gamma0, gamma..., log sigma), observed information
  double loglik = 0.0;
  int iters = 0;

  double logsurv(const std::vector<double>& x, double y) const;
  double cumhaz(const std::vector<double>& x, double y) const;
  double quantile(const std::vector<double>& x, double q) const;
};

// S(y|x) = exp(-H0(y) exp(x'beta)) with H0(y) = (y/scale)^shape fitted by
// full likelihood after the partial-likelihood step. The Breslow step
// baseline is kept for diagnostics; it is undefined beyond the last event.
struct CoxModel {
  std::vector<double> beta;
  std::vector<double> se;  // observed partial-likelihood information
  double baseline_shape = 1.0;
  double baseline_scale = 1.0;
  std::vector<double> breslow_times;
  std::vector<double> breslow_H;
  double partial_loglik = 0.0;
  int iters = 0;

  double logsurv(const std::vector<double>& x, double y) const;
  double cumhaz(const std::vector<double>& x, double y) const;
  double quantile(const std::vector<double>& x, double q) const;
  double breslow_cumhaz(double y) const;  // throws past the last event time
};

// X is n rows by p columns; p may be zero for a plain Weibull fit.
AftModel fit_aft(const std::vector<std::vector<double>>& X, const std::vector<double>& times,
                 const std::vector<int>& status);

// Breslow tie handling; requires at least one covariate and one event.
CoxModel fit_cox(const std::vector<std::vector<double>>& X, const std::vector<double>& times,
                 const std::vector<int>& status);

double predict_quantile_aft(const AftModel& m, const std::vector<double>& x, double q);
double predict_quantile_cox(const CoxModel& m, const std::vector<double>& x, double q);

// H(y|x) over a grid in one covariate. crossings counts ordered x-level pairs
// whose hazard curves change sign order somewhere along the y grid; a
// proportional-hazards model always yields zero.
struct CumhazGrid {
  std::vector<double> xgrid, ygrid;
  std::vector<std::vector<double>> H;  // H[yi][xi]
  int crossings = 0;
  double max_spread = 0.0;  // largest across-x range of H at any y
  std::string to_csv() const;
};

CumhazGrid cumhaz_grid_aft(const AftModel& m, const std::vector<double>& base_x, int varying,
                           const std::vector<double>& xgrid, const std::vector<double>& ygrid);
CumhazGrid cumhaz_grid_cox(const CoxModel& m, const std::vector<double>& base_x, int varying,
                           const std::vector<double>& xgrid, const std::vector<double>& ygrid);
// Vine survival is 1 - pi(F_Y(y)|x); base_x holds the d-1 covariates.
CumhazGrid cumhaz_grid_vine(const VineSpec& spec, const std::vector<double>& base_x, int varying,
                            const std::vector<double>& xgrid, const std::vector<double>& ygrid);

}  // namespace survine
