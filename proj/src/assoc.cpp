#include "survine/assoc.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "survine/margins.hpp"
#include "survine/optim.hpp"
#include "survine/stats.hpp"

namespace survine {

namespace {
constexpr double kRhoCap = 0.999;
constexpr double kLog2Pi = 1.8378770664093454836;

double censored_score_nll(double rho, const std::vector<double>& zl,
                          const std::vector<double>& zu, const std::vector<double>& z2,
                          const std::vector<int>& status) {
  double s = std::sqrt(1.0 - rho * rho);
  double ll = 0.0;
  for (std::size_t i = 0; i < z2.size(); ++i) {
    double term;
    if (zl[i] == zu[i]) {
      double z1 = zu[i];
      if (status[i] == 1) {
        // log of bivariate standard normal density at (z1, z2).
        double q = (z1 * z1 - 2.0 * rho * z1 * z2[i] + z2[i] * z2[i]) / (s * s);
        term = -kLog2Pi - std::log(s) - 0.5 * q;
      } else {
        term = norm_logsf((z2[i] - rho * z1) / s);
      }
    } else {
      if (status[i] == 1) {
        // Interval mass of Z1 given Z2 = z2 plus the rho-free marginal term.
        double p = norm_cdf((zu[i] - rho * z2[i]) / s) - norm_cdf((zl[i] - rho * z2[i]) / s);
        term = (p > 1e-300 ? std::log(p) : kLogFloor) + norm_logpdf(z2[i]);
      } else {
        double p = (norm_cdf(zu[i]) - bvn_cdf(zu[i], z2[i], rho)) -
                   (norm_cdf(zl[i]) - bvn_cdf(zl[i], z2[i], rho));
        term = p > 1e-300 ? std::log(p) : kLogFloor;
      }
    }
    ll += std::max(term, kLogFloor);
  }
  return -ll;
}
}  // namespace

VdwResult vdw_mle(const std::vector<double>& zl, const std::vector<double>& zu,
                  const std::vector<double>& z2, const std::vector<int>& status) {
  std::size_t n = z2.size();
  if (zl.size() != n || zu.size() != n || status.size() != n || n == 0)
    throw std::invalid_argument("vdw_mle: size mismatch");
  bool any_event = false, x_varies = false, y_varies = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (status[i] == 1) any_event = true;
    if (zl[i] != zl[0] || zu[i] != zu[0]) x_varies = true;
    if (z2[i] != z2[0]) y_varies = true;
  }
  if (!any_event) throw std::invalid_argument("vdw_mle: all observations censored");
  if (!x_varies || !y_varies)
    throw std::invalid_argument("vdw_mle: degenerate scores, objective is flat");

  auto f = [&](double rho) { return censored_score_nll(rho, zl, zu, z2, status); };
  Optimum1D opt = scan_golden_minimize(f, -kRhoCap, kRhoCap, 41, 1e-6);
  VdwResult out;
  out.rho = opt.x;
  out.loglik = -opt.fx;
  out.at_boundary = std::fabs(opt.x) > kRhoCap - 1e-4;
  return out;
}

namespace {
VdwResult vdw_censored_impl(const std::vector<double>& x, bool discrete,
                            const std::vector<double>& times, const std::vector<int>& status) {
  if (x.size() != times.size() || x.size() != status.size())
    throw std::invalid_argument("vdw censored: size mismatch");
  if (x.size() < 10) throw std::invalid_argument("vdw censored: need n >= 10");
  MarginSpec mx =
      discrete ? empirical_discrete_margin(x) : empirical_continuous_margin(x);
  std::vector<UScorePair> uy = km_uscores(times, status);
  std::vector<double> zl(x.size()), zu(x.size()), z2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    UScorePair u = mx.pit(x[i]);
    zu[i] = norm_quantile(clamp_unit(u.plus));
    zl[i] = discrete ? norm_quantile(clamp_unit(u.minus)) : zu[i];
    z2[i] = norm_quantile(clamp_unit(uy[i].plus));
  }
  return vdw_mle(zl, zu, z2, status);
}
}  // namespace

VdwResult vdw_cont_censored(const std::vector<double>& x, const std::vector<double>& times,
                            const std::vector<int>& status) {
  return vdw_censored_impl(x, false, times, status);
}

VdwResult vdw_disc_censored(const std::vector<double>& x, const std::vector<double>& times,
                            const std::vector<int>& status) {
  return vdw_censored_impl(x, true, times, status);
}

double vdw_corr(const std::vector<UScorePair>& ux, const std::vector<UScorePair>& uy) {
  if (ux.size() != uy.size() || ux.empty())
    throw std::invalid_argument("vdw_corr: size mismatch");
  std::size_t n = ux.size();
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = norm_quantile(clamp_unit(0.5 * (ux[i].plus + ux[i].minus)));
    double b = norm_quantile(clamp_unit(0.5 * (uy[i].plus + uy[i].minus)));
    sx += a; sy += b; sxx += a * a; syy += b * b; sxy += a * b;
  }
  double vx = sxx - sx * sx / n, vy = syy - sy * sy / n;
  if (vx <= 0.0 || vy <= 0.0) throw std::invalid_argument("vdw_corr: constant scores");
  return (sxy - sx * sy / n) / std::sqrt(vx * vy);
}

void ensure_positive_definite(CorrelationMatrix& m, double floor_eig) {
  Eigen::MatrixXd R(m.d, m.d);
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) R(i, j) = m(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
  if (es.eigenvalues().minCoeff() > floor_eig) return;
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor_eig);
  Eigen::MatrixXd fixed = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Eigen::VectorXd dscale = fixed.diagonal().cwiseSqrt().cwiseInverse();
  fixed = dscale.asDiagonal() * fixed * dscale.asDiagonal();
  for (int i = 0; i < m.d; ++i)
    for (int j = 0; j < m.d; ++j) m.at(i, j) = i == j ? 1.0 : fixed(i, j);
  m.projected = true;
}

CorrelationMatrix build_R(const std::vector<std::vector<UScorePair>>& covariate_scores,
                          const std::vector<bool>& covariate_discrete,
                          const std::vector<UScorePair>& response_scores,
                          const std::vector<int>& status) {
  int p = int(covariate_scores.size());
  if (covariate_discrete.size() != std::size_t(p))
    throw std::invalid_argument("build_R: discrete flags mismatch");
  std::size_t n = response_scores.size();
  for (const auto& col : covariate_scores)
    if (col.size() != n) throw std::invalid_argument("build_R: column length mismatch");

  CorrelationMatrix m;
  m.d = p + 1;
  m.r.assign(std::size_t(m.d) * m.d, 0.0);
  for (int i = 0; i < m.d; ++i) m.at(i, i) = 1.0;

  auto put = [&](int i, int j, double v) {
    if (std::fabs(v) > kRhoCap) {
      v = v > 0 ? kRhoCap : -kRhoCap;
      m.clamped = true;
    }
    m.at(i, j) = v;
    m.at(j, i) = v;
  };

  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      put(i, j, vdw_corr(covariate_scores[i], covariate_scores[j]));

  std::vector<double> z2(n);
  for (std::size_t k = 0; k < n; ++k) z2[k] = norm_quantile(clamp_unit(response_scores[k].plus));
  for (int i = 0; i < p; ++i) {
    std::vector<double> zl(n), zu(n);
    for (std::size_t k = 0; k < n; ++k) {
      zu[k] = norm_quantile(clamp_unit(covariate_scores[i][k].plus));
      zl[k] = covariate_discrete[i] ? norm_quantile(clamp_unit(covariate_scores[i][k].minus))
                                    : zu[k];
    }
    VdwResult r = vdw_mle(zl, zu, z2, status);
    if (r.at_boundary) m.clamped = true;
    put(i, p, r.rho);
  }

  ensure_positive_definite(m);
  return m;
}

}  // namespace survine
