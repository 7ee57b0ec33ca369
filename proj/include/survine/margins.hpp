#pragma once
// Univariate margins: parametric families with right-censored maximum
// likelihood, empirical margins for covariates, and the Kaplan-Meier
// machinery that produces response u-scores.
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "survine/bicop.hpp"

namespace survine {

enum class MarginFamily {
  normal,
  lognormal,
  exponential,
  weibull,
  generalized_gamma,
  truncated_normal,
  skew_normal,
  empirical_continuous,
  empirical_discrete,
};

std::string margin_name(MarginFamily f);
MarginFamily margin_from_name(const std::string& name);
int margin_free_params(MarginFamily f);

// Parameter layouts:
//   normal            {mu, sigma}
//   lognormal         {mu, sigma} of log(y)
//   exponential       {rate}
//   weibull           {shape k, scale lambda}, F = 1 - exp(-(y/lambda)^k)
//   generalized_gamma {mu, sigma, k}: log Y = mu + sigma log G, G ~ Gamma(k, 1)
//   truncated_normal  {mu, sigma, lo, hi}; lo/hi are fixed, not estimated
//   skew_normal       {xi, omega, alpha}
struct MarginSpec {
  MarginFamily family = MarginFamily::normal;
  std::vector<double> params;
  std::vector<double> values;     // empirical_continuous: sorted training sample
  std::vector<double> levels;     // empirical_discrete: ordered category values
  std::vector<double> cum_probs;  // empirical_discrete: cumulative masses, last == 1
  double loglik = 0.0;
  bool converged = true;
  int n_obs = 0;

  bool discrete() const { return family == MarginFamily::empirical_discrete; }
  double cdf(double x) const;
  double cdf_left(double x) const;  // P(X < x); differs from cdf only at atoms
  double pdf(double x) const;
  double logpdf(double x) const;
  double sf(double x) const;
  double logsf(double x) const;
  double quantile(double p) const;

  // {cdf, cdf_left} clamped into the open unit interval. Out-of-support and
  // unseen-category inputs are snapped to the nearest valid point and flagged.
  UScorePair pit(double x, bool* warned = nullptr) const;
};

struct margin_fit_error : std::runtime_error {
  MarginSpec best;
  margin_fit_error(const std::string& what, MarginSpec best_so_far)
      : std::runtime_error(what), best(std::move(best_so_far)) {}
};

struct KaplanMeier {
  std::vector<double> times;  // distinct event times, ascending
  std::vector<double> surv;   // S(t+) after each event time
  int n = 0;
  double cdf_left(double y) const;   // 1 - prod over events strictly before y
  double cdf_right(double y) const;  // 1 - prod over events up to and including y
  double u_mid(double y) const { return 0.5 * (cdf_left(y) + cdf_right(y)); }
};

KaplanMeier kaplan_meier(const std::vector<double>& times, const std::vector<int>& status);

// Censored MLE; empty status means fully observed. extra carries the fixed
// truncation bounds for truncated_normal ({lo, hi}; defaults {0, +inf}).
MarginSpec fit_margin(MarginFamily fam, const std::vector<double>& x,
                      const std::vector<int>& status = {},
                      const std::vector<double>& extra = {});

// Fit each candidate (skipping those whose support rejects the data) and keep
// the smallest censored-likelihood AIC.
MarginSpec select_margin(const std::vector<MarginFamily>& candidates,
                         const std::vector<double>& x, const std::vector<int>& status = {},
                         const std::vector<double>& extra = {});

MarginSpec empirical_continuous_margin(const std::vector<double>& x);
MarginSpec empirical_discrete_margin(const std::vector<double>& x);
// Known category grid (simulation generators): cum must be increasing to 1.
MarginSpec discrete_margin_from_probs(std::vector<double> levels, std::vector<double> cum);

// Response u-scores: Kaplan-Meier midpoint at event times, right-limit cdf at
// censoring times. Both components clamped into the open unit interval.
std::vector<UScorePair> km_uscores(const std::vector<double>& times,
                                   const std::vector<int>& status);

// (theoretical, observed) pairs for the uncensored order statistics; the
// plotting positions come from the KM jump midpoints, so with no censoring
// they reduce to (i - 1/2)/n.
std::vector<std::pair<double, double>> qq_points(const std::vector<double>& times,
                                                 const std::vector<int>& status,
                                                 const MarginSpec& fitted);

}  // namespace survine
