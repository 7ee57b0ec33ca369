#include "survine/margins.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "survine/optim.hpp"
#include "survine/stats.hpp"

namespace survine {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double vec_mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
}

double vec_sd(const std::vector<double>& x) {
  double m = vec_mean(x), s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return std::sqrt(s / std::max<std::size_t>(1, x.size() - 1));
}
}  // namespace

std::string margin_name(MarginFamily f) {
  switch (f) {
    case MarginFamily::normal: return "normal";
    case MarginFamily::lognormal: return "lognormal";
    case MarginFamily::exponential: return "exponential";
    case MarginFamily::weibull: return "weibull";
    case MarginFamily::generalized_gamma: return "generalized-gamma";
    case MarginFamily::truncated_normal: return "truncated-normal";
    case MarginFamily::skew_normal: return "skew-normal";
    case MarginFamily::empirical_continuous: return "empirical-continuous";
    case MarginFamily::empirical_discrete: return "empirical-discrete";
  }
  throw std::logic_error("margin_name");
}

MarginFamily margin_from_name(const std::string& name) {
  for (MarginFamily f :
       {MarginFamily::normal, MarginFamily::lognormal, MarginFamily::exponential,
        MarginFamily::weibull, MarginFamily::generalized_gamma, MarginFamily::truncated_normal,
        MarginFamily::skew_normal, MarginFamily::empirical_continuous,
        MarginFamily::empirical_discrete})
    if (margin_name(f) == name) return f;
  throw std::invalid_argument("unknown margin family: " + name);
}

int margin_free_params(MarginFamily f) {
  switch (f) {
    case MarginFamily::exponential: return 1;
    case MarginFamily::normal: case MarginFamily::lognormal: case MarginFamily::weibull:
    case MarginFamily::truncated_normal: return 2;
    case MarginFamily::generalized_gamma: case MarginFamily::skew_normal: return 3;
    default: return 0;
  }
}

double MarginSpec::cdf(double x) const {
  const auto& p = params;
  switch (family) {
    case MarginFamily::normal: return norm_cdf((x - p[0]) / p[1]);
    case MarginFamily::lognormal:
      return x <= 0.0 ? 0.0 : norm_cdf((std::log(x) - p[0]) / p[1]);
    case MarginFamily::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-p[0] * x);
    case MarginFamily::weibull:
      return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / p[1], p[0]));
    case MarginFamily::generalized_gamma: {
      if (x <= 0.0) return 0.0;
      double g = std::exp((std::log(x) - p[0]) / p[1]);
      return gamma_p(p[2], g);
    }
    case MarginFamily::truncated_normal: {
      double a = (p[2] - p[0]) / p[1];
      double z = (x - p[0]) / p[1];
      double fa = std::isfinite(p[2]) ? norm_cdf(a) : 0.0;
      double fb = std::isfinite(p[3]) ? norm_cdf((p[3] - p[0]) / p[1]) : 1.0;
      if (x <= p[2]) return 0.0;
      if (x >= p[3]) return 1.0;
      return clamp01((norm_cdf(z) - fa) / (fb - fa));
    }
    case MarginFamily::skew_normal: {
      double z = (x - p[0]) / p[1];
      return clamp01(norm_cdf(z) - 2.0 * owens_t(z, p[2]));
    }
    case MarginFamily::empirical_continuous: {
      auto lo = std::lower_bound(values.begin(), values.end(), x);
      auto hi = std::upper_bound(values.begin(), values.end(), x);
      double below = double(lo - values.begin());
      double ties = double(hi - lo);
      return (below + 0.5 * ties) / double(values.size());
    }
    case MarginFamily::empirical_discrete: {
      auto it = std::upper_bound(levels.begin(), levels.end(), x + 1e-12 * (1.0 + std::fabs(x)));
      if (it == levels.begin()) return 0.0;
      return cum_probs[it - levels.begin() - 1];
    }
  }
  throw std::logic_error("MarginSpec::cdf");
}

double MarginSpec::cdf_left(double x) const {
  if (family != MarginFamily::empirical_discrete) return cdf(x);
  auto it = std::lower_bound(levels.begin(), levels.end(), x - 1e-12 * (1.0 + std::fabs(x)));
  if (it == levels.begin()) return 0.0;
  return cum_probs[it - levels.begin() - 1];
}

double MarginSpec::logpdf(double x) const {
  const auto& p = params;
  switch (family) {
    case MarginFamily::normal: return norm_logpdf((x - p[0]) / p[1]) - std::log(p[1]);
    case MarginFamily::lognormal:
      if (x <= 0.0) return -kInf;
      return norm_logpdf((std::log(x) - p[0]) / p[1]) - std::log(p[1]) - std::log(x);
    case MarginFamily::exponential:
      return x < 0.0 ? -kInf : std::log(p[0]) - p[0] * x;
    case MarginFamily::weibull: {
      if (x <= 0.0) return -kInf;
      double lz = std::log(x / p[1]);
      return std::log(p[0] / p[1]) + (p[0] - 1.0) * lz - std::exp(p[0] * lz);
    }
    case MarginFamily::generalized_gamma: {
      if (x <= 0.0) return -kInf;
      double lg = (std::log(x) - p[0]) / p[1];
      double g = std::exp(lg);
      return p[2] * lg - g - std::lgamma(p[2]) - std::log(p[1]) - std::log(x);
    }
    case MarginFamily::truncated_normal: {
      if (x < p[2] || x > p[3]) return -kInf;
      double fa = std::isfinite(p[2]) ? norm_cdf((p[2] - p[0]) / p[1]) : 0.0;
      double fb = std::isfinite(p[3]) ? norm_cdf((p[3] - p[0]) / p[1]) : 1.0;
      return norm_logpdf((x - p[0]) / p[1]) - std::log(p[1]) - std::log(fb - fa);
    }
    case MarginFamily::skew_normal: {
      double z = (x - p[0]) / p[1];
      double lphi = norm_logpdf(z) - std::log(p[1]);
      double cp = norm_cdf(p[2] * z);
      return std::log(2.0) + lphi + (cp > 0.0 ? std::log(cp) : kLogFloor);
    }
    default:
      throw std::logic_error("logpdf undefined for empirical margins");
  }
}

double MarginSpec::pdf(double x) const { return std::exp(logpdf(x)); }

double MarginSpec::sf(double x) const {
  const auto& p = params;
  switch (family) {
    case MarginFamily::normal: return norm_sf((x - p[0]) / p[1]);
    case MarginFamily::lognormal:
      return x <= 0.0 ? 1.0 : norm_sf((std::log(x) - p[0]) / p[1]);
    case MarginFamily::exponential: return x <= 0.0 ? 1.0 : std::exp(-p[0] * x);
    case MarginFamily::weibull:
      return x <= 0.0 ? 1.0 : std::exp(-std::pow(x / p[1], p[0]));
    case MarginFamily::generalized_gamma: {
      if (x <= 0.0) return 1.0;
      double g = std::exp((std::log(x) - p[0]) / p[1]);
      return gamma_q(p[2], g);
    }
    case MarginFamily::truncated_normal: {
      if (x <= p[2]) return 1.0;
      if (x >= p[3]) return 0.0;
      double sa = std::isfinite(p[2]) ? norm_sf((p[2] - p[0]) / p[1]) : 1.0;
      double sb = std::isfinite(p[3]) ? norm_sf((p[3] - p[0]) / p[1]) : 0.0;
      return clamp01((norm_sf((x - p[0]) / p[1]) - sb) / (sa - sb));
    }
    default:
      return std::max(0.0, 1.0 - cdf(x));
  }
}

double MarginSpec::logsf(double x) const {
  const auto& p = params;
  switch (family) {
    case MarginFamily::normal: return norm_logsf((x - p[0]) / p[1]);
    case MarginFamily::lognormal:
      return x <= 0.0 ? 0.0 : norm_logsf((std::log(x) - p[0]) / p[1]);
    case MarginFamily::exponential: return x <= 0.0 ? 0.0 : -p[0] * x;
    case MarginFamily::weibull:
      return x <= 0.0 ? 0.0 : -std::pow(x / p[1], p[0]);
    default: {
      double s = sf(x);
      return s > 1e-300 ? std::log(s) : kLogFloor;
    }
  }
}

double MarginSpec::quantile(double q) const {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("margin quantile: q outside (0,1)");
  const auto& p = params;
  switch (family) {
    case MarginFamily::normal: return p[0] + p[1] * norm_quantile(q);
    case MarginFamily::lognormal: return std::exp(p[0] + p[1] * norm_quantile(q));
    case MarginFamily::exponential: return -std::log1p(-q) / p[0];
    case MarginFamily::weibull: return p[1] * std::pow(-std::log1p(-q), 1.0 / p[0]);
    case MarginFamily::generalized_gamma:
      return std::exp(p[0] + p[1] * std::log(gamma_p_inv(p[2], q)));
    case MarginFamily::truncated_normal: {
      double fa = std::isfinite(p[2]) ? norm_cdf((p[2] - p[0]) / p[1]) : 0.0;
      double fb = std::isfinite(p[3]) ? norm_cdf((p[3] - p[0]) / p[1]) : 1.0;
      double pp = fa + q * (fb - fa);
      return p[0] + p[1] * norm_quantile(std::min(1.0 - 1e-16, std::max(1e-300, pp)));
    }
    case MarginFamily::skew_normal: {
      // Monotone cdf; bracketed bisection with Newton polish.
      double lo = p[0] - 40.0 * p[1], hi = p[0] + 40.0 * p[1];
      double x = p[0];
      for (int it = 0; it < 200; ++it) {
        double c = cdf(x) - q;
        if (std::fabs(c) < 1e-13 || hi - lo < 1e-12 * p[1]) break;
        if (c > 0.0) hi = x; else lo = x;
        double d = pdf(x);
        double xn = (d > 1e-12) ? x - c / d : 0.5 * (lo + hi);
        x = (xn > lo && xn < hi) ? xn : 0.5 * (lo + hi);
      }
      return x;
    }
    case MarginFamily::empirical_continuous: {
      const auto& v = values;
      std::size_t n = v.size();
      double h = q * n - 0.5;  // inverse of p_i = (i + 1/2)/n with interpolation
      if (h <= 0.0) return v.front();
      if (h >= double(n - 1)) return v.back();
      std::size_t i = std::size_t(h);
      double w = h - double(i);
      return v[i] * (1.0 - w) + v[i + 1] * w;
    }
    case MarginFamily::empirical_discrete: {
      for (std::size_t k = 0; k < levels.size(); ++k)
        if (q <= cum_probs[k] + 1e-15) return levels[k];
      return levels.back();
    }
  }
  throw std::logic_error("MarginSpec::quantile");
}

UScorePair MarginSpec::pit(double x, bool* warned) const {
  if (family == MarginFamily::empirical_discrete) {
    auto it = std::lower_bound(levels.begin(), levels.end(), x);
    bool known = it != levels.end() &&
                 std::fabs(*it - x) <= 1e-9 * (1.0 + std::fabs(x));
    if (!known) {
      // Snap to the nearest observed category.
      double snapped = levels.front();
      double bestd = std::fabs(x - snapped);
      for (double lv : levels)
        if (std::fabs(x - lv) < bestd) { bestd = std::fabs(x - lv); snapped = lv; }
      x = snapped;
      if (warned) *warned = true;
    }
    return UScorePair{clamp_unit(cdf(x)), clamp_unit(cdf_left(x))};
  }
  double u = cdf(x);
  if (warned && (u <= 0.0 || u >= 1.0)) *warned = true;
  u = clamp_unit(u);
  return UScorePair{u, u};
}

KaplanMeier kaplan_meier(const std::vector<double>& times, const std::vector<int>& status) {
  if (times.size() != status.size() || times.empty())
    throw std::invalid_argument("kaplan_meier: times/status size mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("kaplan_meier: times must be positive");
    if (status[i] != 0 && status[i] != 1)
      throw std::invalid_argument("kaplan_meier: status must be 0 or 1");
  }
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  KaplanMeier km;
  km.n = int(times.size());
  double s = 1.0;
  std::size_t i = 0;
  std::size_t at_risk = times.size();
  while (i < idx.size()) {
    double t = times[idx[i]];
    std::size_t j = i;
    int d = 0;
    while (j < idx.size() && times[idx[j]] == t) { d += status[idx[j]]; ++j; }
    if (d > 0) {
      s *= 1.0 - double(d) / double(at_risk);
      km.times.push_back(t);
      km.surv.push_back(s);
    }
    at_risk -= (j - i);
    i = j;
  }
  return km;
}

double KaplanMeier::cdf_left(double y) const {
  auto it = std::lower_bound(times.begin(), times.end(), y);
  if (it == times.begin()) return 0.0;
  return 1.0 - surv[it - times.begin() - 1];
}

double KaplanMeier::cdf_right(double y) const {
  auto it = std::upper_bound(times.begin(), times.end(), y);
  if (it == times.begin()) return 0.0;
  return 1.0 - surv[it - times.begin() - 1];
}

std::vector<UScorePair> km_uscores(const std::vector<double>& times,
                                   const std::vector<int>& status) {
  KaplanMeier km = kaplan_meier(times, status);
  std::vector<UScorePair> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double u = status[i] == 1 ? km.u_mid(times[i]) : km.cdf_right(times[i]);
    out[i] = upair(clamp_unit(u));
  }
  return out;
}

std::vector<std::pair<double, double>> qq_points(const std::vector<double>& times,
                                                 const std::vector<int>& status,
                                                 const MarginSpec& fitted) {
  KaplanMeier km = kaplan_meier(times, status);
  std::vector<double> events;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (status.empty() || status[i] == 1) events.push_back(times[i]);
  std::sort(events.begin(), events.end());
  std::vector<std::pair<double, double>> pts;
  pts.reserve(events.size());
  for (double t : events) {
    double p = clamp_unit(km.u_mid(t));
    pts.emplace_back(fitted.quantile(p), t);
  }
  return pts;
}

namespace {

struct CensoredSample {
  const std::vector<double>& x;
  std::vector<int> status;
  CensoredSample(const std::vector<double>& xs, const std::vector<int>& st) : x(xs) {
    status = st.empty() ? std::vector<int>(xs.size(), 1) : st;
    if (status.size() != xs.size())
      throw std::invalid_argument("fit_margin: status size mismatch");
  }
};

double censored_nll(const MarginSpec& m, const CensoredSample& s) {
  double ll = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double term = s.status[i] == 1 ? m.logpdf(s.x[i]) : m.logsf(s.x[i]);
    ll += std::max(term, kLogFloor);
  }
  return -ll;
}

void require_positive(const std::vector<double>& x, const char* fam) {
  for (double v : x)
    if (!(v > 0.0))
      throw std::invalid_argument(std::string(fam) + ": requires strictly positive data");
}

MarginSpec fit_parametric(MarginFamily fam, const CensoredSample& s,
                          const std::vector<double>& extra) {
  std::vector<double> logx;
  auto need_logs = [&]() {
    if (logx.empty()) { logx.reserve(s.x.size()); for (double v : s.x) logx.push_back(std::log(v)); }
  };

  // decode maps the unconstrained optimizer vector to natural parameters.
  std::function<std::vector<double>(const std::vector<double>&)> decode;
  std::vector<std::vector<double>> starts;
  double tn_lo = 0.0, tn_hi = kInf;

  switch (fam) {
    case MarginFamily::normal: {
      double m = vec_mean(s.x), sd = std::max(1e-8, vec_sd(s.x));
      decode = [](const std::vector<double>& w) {
        return std::vector<double>{w[0], std::exp(w[1])};
      };
      starts = {{m, std::log(sd)}, {m + sd, std::log(2.0 * sd)}};
      break;
    }
    case MarginFamily::lognormal: {
      require_positive(s.x, "lognormal");
      need_logs();
      double m = vec_mean(logx), sd = std::max(1e-8, vec_sd(logx));
      decode = [](const std::vector<double>& w) {
        return std::vector<double>{w[0], std::exp(w[1])};
      };
      starts = {{m, std::log(sd)}, {m + sd, std::log(2.0 * sd)}};
      break;
    }
    case MarginFamily::exponential: {
      require_positive(s.x, "exponential");
      double events = std::accumulate(s.status.begin(), s.status.end(), 0.0);
      double total = std::accumulate(s.x.begin(), s.x.end(), 0.0);
      double r0 = std::max(1e-12, events) / total;
      auto f = [&](double w) {
        MarginSpec m;
        m.family = fam;
        m.params = {std::exp(w)};
        return censored_nll(m, s);
      };
      Optimum1D opt = scan_golden_minimize(f, std::log(r0) - 5.0, std::log(r0) + 5.0, 21, 1e-9);
      MarginSpec out;
      out.family = fam;
      out.params = {std::exp(opt.x)};
      out.loglik = -opt.fx;
      out.converged = opt.converged;
      out.n_obs = int(s.x.size());
      return out;
    }
    case MarginFamily::weibull: {
      require_positive(s.x, "weibull");
      need_logs();
      double sdl = std::max(0.05, vec_sd(logx));
      double k0 = 1.2826 / sdl;
      double l0 = std::exp(vec_mean(logx) + 0.5772 / k0);
      decode = [](const std::vector<double>& w) {
        return std::vector<double>{std::exp(w[0]), std::exp(w[1])};
      };
      starts = {{std::log(k0), std::log(l0)}, {0.0, std::log(vec_mean(s.x))}};
      break;
    }
    case MarginFamily::generalized_gamma: {
      require_positive(s.x, "generalized-gamma");
      need_logs();
      double ml = vec_mean(logx), sdl = std::max(0.05, vec_sd(logx));
      decode = [](const std::vector<double>& w) {
        return std::vector<double>{w[0], std::exp(w[1]), std::exp(std::min(w[2], 8.0))};
      };
      starts = {{ml, std::log(sdl), 0.0},
                {ml, std::log(sdl), 1.4},
                {ml + sdl, std::log(2.0 * sdl), -0.35}};
      break;
    }
    case MarginFamily::truncated_normal: {
      tn_lo = extra.size() > 0 ? extra[0] : 0.0;
      tn_hi = extra.size() > 1 ? extra[1] : kInf;
      for (double v : s.x)
        if (v < tn_lo || v > tn_hi)
          throw std::invalid_argument("truncated-normal: data outside truncation bounds");
      double m = vec_mean(s.x), sd = std::max(1e-8, vec_sd(s.x));
      decode = [tn_lo, tn_hi](const std::vector<double>& w) {
        return std::vector<double>{w[0], std::exp(w[1]), tn_lo, tn_hi};
      };
      starts = {{m, std::log(sd)}, {m - sd, std::log(2.0 * sd)}};
      break;
    }
    case MarginFamily::skew_normal: {
      double m = vec_mean(s.x), sd = std::max(1e-8, vec_sd(s.x));
      decode = [](const std::vector<double>& w) {
        return std::vector<double>{w[0], std::exp(w[1]), w[2]};
      };
      starts = {{m, std::log(sd), 0.5}, {m, std::log(sd), -0.5}, {m - sd, std::log(sd), 2.0}};
      break;
    }
    case MarginFamily::empirical_continuous: {
      for (int st : s.status)
        if (st != 1)
          throw std::invalid_argument("empirical-continuous: cannot absorb censored data");
      return empirical_continuous_margin(s.x);
    }
    case MarginFamily::empirical_discrete: {
      for (int st : s.status)
        if (st != 1)
          throw std::invalid_argument("empirical-discrete: cannot absorb censored data");
      return empirical_discrete_margin(s.x);
    }
  }

  auto f = [&](const std::vector<double>& w) {
    MarginSpec m;
    m.family = fam;
    m.params = decode(w);
    double nll = censored_nll(m, s);
    return std::isfinite(nll) ? nll : 1e100;
  };

  OptimumND best;
  best.fx = kInf;
  for (const auto& st : starts) {
    OptimumND r = nelder_mead(f, st, {0.25}, 1e-10, 800);
    if (r.fx < best.fx) best = r;
  }
  MarginSpec out;
  out.family = fam;
  out.params = decode(best.x);
  out.loglik = -best.fx;
  out.converged = best.converged;
  out.n_obs = int(s.x.size());
  if (!std::isfinite(best.fx))
    throw margin_fit_error("fit_margin: likelihood stayed degenerate for " + margin_name(fam),
                           out);
  return out;
}

}  // namespace

MarginSpec fit_margin(MarginFamily fam, const std::vector<double>& x,
                      const std::vector<int>& status, const std::vector<double>& extra) {
  if (x.empty()) throw std::invalid_argument("fit_margin: empty sample");
  CensoredSample s(x, status);
  return fit_parametric(fam, s, extra);
}

MarginSpec select_margin(const std::vector<MarginFamily>& candidates,
                         const std::vector<double>& x, const std::vector<int>& status,
                         const std::vector<double>& extra) {
  if (candidates.empty()) throw std::invalid_argument("select_margin: no candidates");
  MarginSpec best;
  double best_aic = kInf;
  bool any = false;
  for (MarginFamily fam : candidates) {
    MarginSpec m;
    try {
      m = fit_margin(fam, x, status, extra);
    } catch (const std::exception&) {
      continue;  // support mismatch or degenerate fit: candidate excluded
    }
    double aic = -2.0 * m.loglik + 2.0 * margin_free_params(fam);
    if (aic < best_aic) { best_aic = aic; best = m; any = true; }
  }
  if (!any) throw std::runtime_error("select_margin: every candidate failed");
  return best;
}

MarginSpec empirical_continuous_margin(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("empirical margin: empty sample");
  MarginSpec m;
  m.family = MarginFamily::empirical_continuous;
  m.values = x;
  std::sort(m.values.begin(), m.values.end());
  m.n_obs = int(x.size());
  return m;
}

MarginSpec empirical_discrete_margin(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("empirical margin: empty sample");
  std::vector<double> lv = x;
  std::sort(lv.begin(), lv.end());
  MarginSpec m;
  m.family = MarginFamily::empirical_discrete;
  double n = double(x.size());
  std::size_t i = 0;
  double cum = 0.0;
  while (i < lv.size()) {
    std::size_t j = i;
    while (j < lv.size() && lv[j] == lv[i]) ++j;
    cum += double(j - i) / n;
    m.levels.push_back(lv[i]);
    m.cum_probs.push_back(cum);
    i = j;
  }
  m.cum_probs.back() = 1.0;
  m.n_obs = int(x.size());
  return m;
}

MarginSpec discrete_margin_from_probs(std::vector<double> levels, std::vector<double> cum) {
  if (levels.size() != cum.size() || levels.empty())
    throw std::invalid_argument("discrete margin: levels/probs mismatch");
  for (std::size_t i = 0; i + 1 < cum.size(); ++i)
    if (!(cum[i] < cum[i + 1])) throw std::invalid_argument("discrete margin: cum not increasing");
  if (std::fabs(cum.back() - 1.0) > 1e-12)
    throw std::invalid_argument("discrete margin: last cumulative mass must be 1");
  MarginSpec m;
  m.family = MarginFamily::empirical_discrete;
  m.levels = std::move(levels);
  m.cum_probs = std::move(cum);
  m.cum_probs.back() = 1.0;
  return m;
}

}  // namespace survine
