#include "survine/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "survine/optim.hpp"
#include "survine/stats.hpp"

namespace survine {
namespace {

constexpr double kBig = 1e100;

void check_surv_data(const std::vector<std::vector<double>>& X, const std::vector<double>& times,
                     const std::vector<int>& status, const char* who) {
  std::size_t n = times.size();
  if (n == 0 || status.size() != n || X.size() != n)
    throw std::invalid_argument(std::string(who) + ": size mismatch");
  std::size_t p = X[0].size();
  bool any_event = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (X[i].size() != p) throw std::invalid_argument(std::string(who) + ": ragged design matrix");
    if (!(times[i] > 0.0) || !std::isfinite(times[i]))
      throw std::invalid_argument(std::string(who) + ": times must be positive");
    if (status[i] != 0 && status[i] != 1)
      throw std::invalid_argument(std::string(who) + ": status entries must be 0 or 1");
    any_event = any_event || status[i] == 1;
  }
  if (!any_event) throw std::invalid_argument(std::string(who) + ": no observed events");
}

// ---- Weibull AFT ----

// theta = (gamma0, gamma_1..gamma_p, log sigma)
double aft_loglik(const std::vector<double>& th, const std::vector<std::vector<double>>& X,
                  const std::vector<double>& logt, const std::vector<int>& status) {
  std::size_t p = X[0].size();
  double s = std::exp(th[p + 1]);
  double ll = 0.0;
  for (std::size_t i = 0; i < logt.size(); ++i) {
    double mu = th[0];
    for (std::size_t j = 0; j < p; ++j) mu += th[j + 1] * X[i][j];
    double z = (logt[i] - mu) / s;
    if (z > 690.0) return -std::numeric_limits<double>::infinity();
    double ez = std::exp(z);
    ll += status[i] ? z - th[p + 1] - logt[i] - ez : -ez;
  }
  return ll;
}

// Analytic gradient and Hessian of the loglik in theta; w = exp(z).
void aft_derivs(const std::vector<double>& th, const std::vector<std::vector<double>>& X,
                const std::vector<double>& logt, const std::vector<int>& status,
                Eigen::VectorXd& g, Eigen::MatrixXd& H) {
  std::size_t p = X[0].size();
  int m = int(p) + 2;
  double s = std::exp(th[p + 1]);
  g.setZero(m);
  H.setZero(m, m);
  std::vector<double> xi(p + 1, 1.0);  // intercept plus covariates
  for (std::size_t i = 0; i < logt.size(); ++i) {
    double mu = th[0];
    for (std::size_t j = 0; j < p; ++j) {
      mu += th[j + 1] * X[i][j];
      xi[j + 1] = X[i][j];
    }
    double z = (logt[i] - mu) / s;
    double w = std::exp(z);
    double del = status[i];
    for (std::size_t a = 0; a <= p; ++a) {
      g[a] += xi[a] * (w - del) / s;
      for (std::size_t b = a; b <= p; ++b) H(a, b) -= xi[a] * xi[b] * w / (s * s);
      H(a, int(p) + 1) -= xi[a] * (w - del + z * w) / s;
    }
    g[int(p) + 1] += -del - del * z + z * w;
    H(int(p) + 1, int(p) + 1) += del * z - z * w - z * z * w;
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < a; ++b) H(a, b) = H(b, a);
}

std::vector<double> numeric_hessian_se(const std::vector<double>& th,
                                       const std::vector<std::vector<double>>& X,
                                       const std::vector<double>& logt,
                                       const std::vector<int>& status) {
  int m = int(th.size());
  Eigen::MatrixXd H(m, m);
  auto f = [&](const std::vector<double>& t) { return aft_loglik(t, X, logt, status); };
  for (int a = 0; a < m; ++a) {
    double ha = 1e-4 * std::max(1.0, std::fabs(th[a]));
    for (int b = a; b < m; ++b) {
      double hb = 1e-4 * std::max(1.0, std::fabs(th[b]));
      std::vector<double> t = th;
      t[a] += ha; t[b] += hb;
      double fpp = f(t);
      t = th; t[a] += ha; t[b] -= hb;
      double fpm = f(t);
      t = th; t[a] -= ha; t[b] += hb;
      double fmp = f(t);
      t = th; t[a] -= ha; t[b] -= hb;
      double fmm = f(t);
      H(a, b) = H(b, a) = (fpp - fpm - fmp + fmm) / (4.0 * ha * hb);
    }
  }
  Eigen::MatrixXd info = -H;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw std::runtime_error("fit_aft: information matrix not positive definite "
                             "(separation or collinearity)");
  Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  std::vector<double> se(m);
  for (int a = 0; a < m; ++a) {
    if (!(cov(a, a) > 0.0)) throw std::runtime_error("fit_aft: negative variance estimate");
    se[a] = std::sqrt(cov(a, a));
  }
  return se;
}

// ---- Cox partial likelihood ----

struct CoxWork {
  std::vector<int> order;      // indices by time descending
  std::size_t p = 0;
};

double cox_pl(const std::vector<double>& beta, const std::vector<std::vector<double>>& X,
              const std::vector<double>& times, const std::vector<int>& status,
              const CoxWork& wk, Eigen::VectorXd* g, Eigen::MatrixXd* H) {
  std::size_t p = wk.p;
  double pl = 0.0;
  double S0 = 0.0;
  Eigen::VectorXd S1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd S2 = Eigen::MatrixXd::Zero(p, p);
  if (g) g->setZero(p);
  if (H) H->setZero(p, p);
  std::size_t k = 0, n = times.size();
  Eigen::VectorXd xv(p);
  while (k < n) {
    double t = times[wk.order[k]];
    std::size_t k2 = k;
    // risk set grows by everyone tied at this time before its events count
    while (k2 < n && times[wk.order[k2]] == t) {
      int i = wk.order[k2];
      double eta = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        eta += beta[j] * X[i][j];
        xv[j] = X[i][j];
      }
      double r = std::exp(eta);
      if (!std::isfinite(r)) return -std::numeric_limits<double>::infinity();
      S0 += r;
      S1 += r * xv;
      if (H) S2 += r * xv * xv.transpose();
      ++k2;
    }
    for (std::size_t kk = k; kk < k2; ++kk) {
      int i = wk.order[kk];
      if (!status[i]) continue;
      double eta = 0.0;
      for (std::size_t j = 0; j < p; ++j) {
        eta += beta[j] * X[i][j];
        xv[j] = X[i][j];
      }
      pl += eta - std::log(S0);
      if (g) *g += xv - S1 / S0;
      if (H) *H -= S2 / S0 - (S1 / S0) * (S1 / S0).transpose();
    }
    k = k2;
  }
  return pl;
}

// ---- shared cumulative-hazard grid ----

template <typename LogSurv>
CumhazGrid make_grid(LogSurv&& lsurv, const std::vector<double>& base_x, int varying,
                     const std::vector<double>& xgrid, const std::vector<double>& ygrid) {
  if (varying < 0 || varying >= int(base_x.size()))
    throw std::invalid_argument("cumhaz_grid: varying index out of range");
  if (xgrid.empty() || ygrid.empty()) throw std::invalid_argument("cumhaz_grid: empty grid");
  CumhazGrid out;
  out.xgrid = xgrid;
  out.ygrid = ygrid;
  out.H.assign(ygrid.size(), std::vector<double>(xgrid.size(), 0.0));
  for (std::size_t xi = 0; xi < xgrid.size(); ++xi) {
    std::vector<double> x = base_x;
    x[varying] = xgrid[xi];
    for (std::size_t yi = 0; yi < ygrid.size(); ++yi) out.H[yi][xi] = -lsurv(x, ygrid[yi]);
  }
  for (std::size_t yi = 0; yi < ygrid.size(); ++yi) {
    auto [mn, mx] = std::minmax_element(out.H[yi].begin(), out.H[yi].end());
    out.max_spread = std::max(out.max_spread, *mx - *mn);
  }
  // a pair of x levels crosses when the sign of their hazard gap flips
  for (std::size_t a = 0; a + 1 < xgrid.size(); ++a)
    for (std::size_t b = a + 1; b < xgrid.size(); ++b) {
      int last = 0;
      bool crossed = false;
      for (std::size_t yi = 0; yi < ygrid.size(); ++yi) {
        double diff = out.H[yi][a] - out.H[yi][b];
        if (std::fabs(diff) <= 1e-9) continue;
        int sgn = diff > 0.0 ? 1 : -1;
        if (last != 0 && sgn != last) crossed = true;
        last = sgn;
      }
      if (crossed) ++out.crossings;
    }
  return out;
}

}  // namespace

double AftModel::logsurv(const std::vector<double>& x, double y) const {
  if (x.size() != gamma.size()) throw std::invalid_argument("AftModel: covariate width");
  if (!(y > 0.0)) return 0.0;
  double mu = gamma0;
  for (std::size_t j = 0; j < gamma.size(); ++j) mu += gamma[j] * x[j];
  return -std::exp((std::log(y) - mu) / sigma);
}

double AftModel::cumhaz(const std::vector<double>& x, double y) const {
  return -logsurv(x, y);
}

double AftModel::quantile(const std::vector<double>& x, double q) const {
  if (x.size() != gamma.size()) throw std::invalid_argument("AftModel: covariate width");
  q = clamp_unit(q);
  double mu = gamma0;
  for (std::size_t j = 0; j < gamma.size(); ++j) mu += gamma[j] * x[j];
  return std::exp(mu + sigma * std::log(-std::log1p(-q)));
}

double CoxModel::logsurv(const std::vector<double>& x, double y) const {
  if (x.size() != beta.size()) throw std::invalid_argument("CoxModel: covariate width");
  if (!(y > 0.0)) return 0.0;
  double eta = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) eta += beta[j] * x[j];
  return -std::pow(y / baseline_scale, baseline_shape) * std::exp(eta);
}

double CoxModel::cumhaz(const std::vector<double>& x, double y) const {
  return -logsurv(x, y);
}

double CoxModel::quantile(const std::vector<double>& x, double q) const {
  if (x.size() != beta.size()) throw std::invalid_argument("CoxModel: covariate width");
  q = clamp_unit(q);
  double eta = 0.0;
  for (std::size_t j = 0; j < beta.size(); ++j) eta += beta[j] * x[j];
  return baseline_scale * std::pow(-std::log1p(-q) * std::exp(-eta), 1.0 / baseline_shape);
}

double CoxModel::breslow_cumhaz(double y) const {
  if (breslow_times.empty()) throw std::logic_error("CoxModel: no Breslow baseline stored");
  if (y > breslow_times.back())
    throw std::out_of_range("CoxModel: Breslow baseline undefined beyond the last event");
  auto it = std::upper_bound(breslow_times.begin(), breslow_times.end(), y);
  if (it == breslow_times.begin()) return 0.0;
  return breslow_H[std::size_t(it - breslow_times.begin()) - 1];
}

AftModel fit_aft(const std::vector<std::vector<double>>& X, const std::vector<double>& times,
                 const std::vector<int>& status) {
  check_surv_data(X, times, status, "fit_aft");
  std::size_t n = times.size(), p = X[0].size();
  std::vector<double> logt(n);
  for (std::size_t i = 0; i < n; ++i) logt[i] = std::log(times[i]);

  // start: least squares of log time on the events, Gumbel-corrected scale
  std::vector<double> th(p + 2, 0.0);
  std::vector<int> ev;
  for (std::size_t i = 0; i < n; ++i)
    if (status[i]) ev.push_back(int(i));
  if (ev.size() >= p + 2) {
    Eigen::MatrixXd A(ev.size(), p + 1);
    Eigen::VectorXd b(ev.size());
    for (std::size_t r = 0; r < ev.size(); ++r) {
      A(r, 0) = 1.0;
      for (std::size_t j = 0; j < p; ++j) A(r, j + 1) = X[ev[r]][j];
      b(r) = logt[ev[r]];
    }
    Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    double rss = (A * c - b).squaredNorm();
    double sd = std::sqrt(rss / std::max<std::size_t>(1, ev.size()));
    for (std::size_t j = 0; j <= p; ++j) th[j] = c(j);
    th[p + 1] = std::log(std::max(0.05, sd * std::sqrt(6.0) / 3.14159265358979323846));
  }

  auto nll = [&](const std::vector<double>& t) {
    double ll = aft_loglik(t, X, logt, status);
    return std::isfinite(ll) ? -ll : kBig;
  };
  OptimumND nm = nelder_mead(nll, th, {0.25}, 1e-10, 2000);
  th = nm.x;

  // Newton polish with analytic derivatives
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  int newton_iters = 0;
  double cur = aft_loglik(th, X, logt, status);
  for (; newton_iters < 40; ++newton_iters) {
    aft_derivs(th, X, logt, status, g, H);
    if (g.lpNorm<Eigen::Infinity>() < 1e-8) break;
    Eigen::VectorXd step = (-H).ldlt().solve(g);
    if (!step.allFinite()) break;
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, scale *= 0.5) {
      std::vector<double> t2 = th;
      for (std::size_t a = 0; a < t2.size(); ++a) t2[a] += scale * step[int(a)];
      double l2 = aft_loglik(t2, X, logt, status);
      if (l2 > cur) {
        th = t2;
        cur = l2;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  aft_derivs(th, X, logt, status, g, H);
  double gnorm = g.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(cur) || gnorm > 1e-3) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "fit_aft: did not converge (|grad|=%.3e after %d Newton and %d simplex evals)",
                  gnorm, newton_iters, nm.evals);
    throw std::runtime_error(buf);
  }

  AftModel m;
  m.gamma0 = th[0];
  m.gamma.assign(th.begin() + 1, th.begin() + 1 + p);
  m.sigma = std::exp(th[p + 1]);
  m.loglik = cur;
  m.iters = nm.evals + newton_iters;
  m.se = numeric_hessian_se(th, X, logt, status);
  return m;
}

CoxModel fit_cox(const std::vector<std::vector<double>>& X, const std::vector<double>& times,
                 const std::vector<int>& status) {
  check_surv_data(X, times, status, "fit_cox");
  std::size_t n = times.size(), p = X[0].size();
  if (p == 0) throw std::invalid_argument("fit_cox: needs at least one covariate");

  CoxWork wk;
  wk.p = p;
  wk.order.resize(n);
  std::iota(wk.order.begin(), wk.order.end(), 0);
  std::sort(wk.order.begin(), wk.order.end(),
            [&](int a, int b) { return times[a] > times[b]; });

  std::vector<double> beta(p, 0.0);
  Eigen::VectorXd g(p);
  Eigen::MatrixXd H(p, p);
  double cur = cox_pl(beta, X, times, status, wk, &g, &H);
  int it = 0;
  for (; it < 50; ++it) {
    if (g.lpNorm<Eigen::Infinity>() < 1e-8) break;
    Eigen::VectorXd step = (-H).ldlt().solve(g);
    if (!step.allFinite()) throw std::runtime_error("fit_cox: singular information matrix");
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, scale *= 0.5) {
      std::vector<double> b2 = beta;
      for (std::size_t j = 0; j < p; ++j) b2[j] += scale * step[int(j)];
      double l2 = cox_pl(b2, X, times, status, wk, nullptr, nullptr);
      if (l2 > cur) {
        beta = b2;
        cur = l2;
        improved = true;
        break;
      }
    }
    if (!improved) break;
    for (std::size_t j = 0; j < p; ++j)
      if (std::fabs(beta[j]) > 50.0)
        throw std::runtime_error("fit_cox: diverging coefficients (separation)");
    cur = cox_pl(beta, X, times, status, wk, &g, &H);
  }
  if (g.lpNorm<Eigen::Infinity>() > 1e-4)
    throw std::runtime_error("fit_cox: partial likelihood did not converge");

  CoxModel m;
  m.beta = beta;
  m.partial_loglik = cur;
  m.iters = it;
  Eigen::MatrixXd cov = (-H).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  m.se.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    if (!(cov(int(j), int(j)) > 0.0)) throw std::runtime_error("fit_cox: negative variance");
    m.se[j] = std::sqrt(cov(int(j), int(j)));
  }

  // Breslow steps at ascending event times: dH = d_t / S0(t)
  {
    std::vector<int> asc = wk.order;  // descending; walk backwards while keeping S0 of y >= t
    double S0 = 0.0;
    std::vector<std::pair<double, double>> steps;  // time, increment
    std::size_t k = 0;
    while (k < n) {
      double t = times[wk.order[k]];
      std::size_t k2 = k;
      int d = 0;
      while (k2 < n && times[wk.order[k2]] == t) {
        int i = wk.order[k2];
        double eta = 0.0;
        for (std::size_t j = 0; j < p; ++j) eta += beta[j] * X[i][j];
        S0 += std::exp(eta);
        d += status[i];
        ++k2;
      }
      if (d > 0) steps.push_back({t, double(d) / S0});
      k = k2;
    }
    std::sort(steps.begin(), steps.end());
    double acc = 0.0;
    for (auto& sstep : steps) {
      acc += sstep.second;
      m.breslow_times.push_back(sstep.first);
      m.breslow_H.push_back(acc);
    }
    (void)asc;
  }

  // Weibull baseline by full likelihood given beta: profile the shape, the
  // scale then solves scale^shape = sum(y^shape e^eta) / #events.
  {
    std::vector<double> eta(n, 0.0);
    double D = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) eta[i] += beta[j] * X[i][j];
      D += status[i];
    }
    auto prof_nll = [&](double logk) {
      double kk = std::exp(logk);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::pow(times[i], kk) * std::exp(eta[i]);
      double lam_k = s / D;  // scale^shape
      double ll = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double hz = std::pow(times[i], kk) * std::exp(eta[i]) / lam_k;
        if (status[i]) ll += std::log(kk) + (kk - 1.0) * std::log(times[i]) - std::log(lam_k)
                             + eta[i];
        ll -= hz;
      }
      return std::isfinite(ll) ? -ll : kBig;
    };
    Optimum1D o = scan_golden_minimize(prof_nll, std::log(0.05), std::log(20.0), 41, 1e-8);
    m.baseline_shape = std::exp(o.x);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += std::pow(times[i], m.baseline_shape) * std::exp(eta[i]);
    m.baseline_scale = std::pow(s / D, 1.0 / m.baseline_shape);
  }
  return m;
}

double predict_quantile_aft(const AftModel& m, const std::vector<double>& x, double q) {
  return m.quantile(x, q);
}

double predict_quantile_cox(const CoxModel& m, const std::vector<double>& x, double q) {
  return m.quantile(x, q);
}

CumhazGrid cumhaz_grid_aft(const AftModel& m, const std::vector<double>& base_x, int varying,
                           const std::vector<double>& xgrid, const std::vector<double>& ygrid) {
  return make_grid([&](const std::vector<double>& x, double y) { return m.logsurv(x, y); },
                   base_x, varying, xgrid, ygrid);
}

CumhazGrid cumhaz_grid_cox(const CoxModel& m, const std::vector<double>& base_x, int varying,
                           const std::vector<double>& xgrid, const std::vector<double>& ygrid) {
  return make_grid([&](const std::vector<double>& x, double y) { return m.logsurv(x, y); },
                   base_x, varying, xgrid, ygrid);
}

CumhazGrid cumhaz_grid_vine(const VineSpec& spec, const std::vector<double>& base_x, int varying,
                            const std::vector<double>& xgrid, const std::vector<double>& ygrid) {
  int d = spec.A.d;
  if (int(base_x.size()) != d - 1)
    throw std::invalid_argument("cumhaz_grid_vine: expected d-1 covariates");
  if (spec.margins.empty()) throw std::invalid_argument("cumhaz_grid_vine: margins required");
  const MarginSpec& my = spec.margins[d - 1];
  auto lsurv = [&](const std::vector<double>& x, double y) {
    std::vector<UScorePair> ux = pit_row(spec, x);
    ResponseWorkspace w = response_workspace(spec, ux);
    std::vector<Bicop> rcops = response_edges(spec);
    return cond_logsurv(w, rcops, my.cdf(y));
  };
  return make_grid(lsurv, base_x, varying, xgrid, ygrid);
}

std::string CumhazGrid::to_csv() const {
  std::string out = "y";
  char buf[64];
  for (double x : xgrid) {
    std::snprintf(buf, sizeof buf, ",x=%.6g", x);
    out += buf;
  }
  out += "\n";
  for (std::size_t yi = 0; yi < ygrid.size(); ++yi) {
    std::snprintf(buf, sizeof buf, "%.10g", ygrid[yi]);
    out += buf;
    for (std::size_t xi = 0; xi < xgrid.size(); ++xi) {
      std::snprintf(buf, sizeof buf, ",%.10g", H[yi][xi]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

}  // namespace survine
