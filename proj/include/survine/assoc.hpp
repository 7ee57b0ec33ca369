#pragma once
// Van der Waerden association: normal-scores correlation for fully observed
// pairs and censored maximum-likelihood variants for the response column.
#include <vector>

#include "survine/bicop.hpp"

namespace survine {

struct VdwResult {
  double rho = 0.0;
  double loglik = 0.0;
  bool at_boundary = false;  // search hit +-0.999
};

// Core estimator on normal scores. The covariate enters as an interval
// (zl, zu]; pass zl == zu for a continuous covariate. z2/status describe the
// response. Censored subjects contribute P(Z1 in interval, Z2 > z2).
VdwResult vdw_mle(const std::vector<double>& zl, const std::vector<double>& zu,
                  const std::vector<double>& z2, const std::vector<int>& status);

// Convenience wrappers building scores internally: empirical margin for x,
// Kaplan-Meier scores for the response (midpoint at events, right limit at
// censoring times). Require n >= 10 and at least one event.
VdwResult vdw_cont_censored(const std::vector<double>& x, const std::vector<double>& times,
                            const std::vector<int>& status);
VdwResult vdw_disc_censored(const std::vector<double>& x, const std::vector<double>& times,
                            const std::vector<int>& status);

// Pearson correlation of midpoint normal scores; both variables fully observed.
double vdw_corr(const std::vector<UScorePair>& ux, const std::vector<UScorePair>& uy);

struct CorrelationMatrix {
  int d = 0;
  std::vector<double> r;  // row-major d*d, symmetric, unit diagonal
  bool projected = false;  // eigenvalue floor applied
  bool clamped = false;    // some entry hit +-0.999
  double operator()(int i, int j) const { return r[std::size_t(i) * d + j]; }
  double& at(int i, int j) { return r[std::size_t(i) * d + j]; }
};

// Response is the last variable. Predictor block: normal-scores Pearson with
// midpoint u for discrete columns. Response column: censored MLE per
// predictor. Indefinite results are projected (eigenvalues floored at 1e-6,
// diagonal rescaled to 1).
CorrelationMatrix build_R(const std::vector<std::vector<UScorePair>>& covariate_scores,
                          const std::vector<bool>& covariate_discrete,
                          const std::vector<UScorePair>& response_scores,
                          const std::vector<int>& status);

// Nearest-PD repair used by build_R; exposed for tests.
void ensure_positive_definite(CorrelationMatrix& m, double floor_eig = 1e-6);

}  // namespace survine
