#include "survine/bicop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "survine/optim.hpp"
#include "survine/stats.hpp"

namespace survine {

namespace {

double log1pexp(double z) { return z > 33.0 ? z : std::log1p(std::exp(z)); }

double logsumexp2(double a, double b) {
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double logistic(double w) { return 1.0 / (1.0 + std::exp(-w)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// ---- Gaussian ----

double ga_logpdf(double u, double v, double rho) {
  double x = norm_quantile(u), y = norm_quantile(v);
  double r2 = 1.0 - rho * rho;
  return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double ga_h1(double u, double v, double rho) {
  double x = norm_quantile(u), y = norm_quantile(v);
  return norm_cdf((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

double ga_h1_sf(double u, double v, double rho) {
  double x = norm_quantile(u), y = norm_quantile(v);
  return norm_sf((y - rho * x) / std::sqrt(1.0 - rho * rho));
}

double ga_hinv1(double u, double p, double rho) {
  double x = norm_quantile(u);
  return norm_cdf(norm_quantile(p) * std::sqrt(1.0 - rho * rho) + rho * x);
}

// ---- Student t ----

double tc_logpdf(double u, double v, double rho, double nu) {
  double x = t_quantile(u, nu), y = t_quantile(v, nu);
  double r2 = 1.0 - rho * rho;
  double lg = std::lgamma((nu + 2.0) / 2.0) + std::lgamma(nu / 2.0) -
              2.0 * std::lgamma((nu + 1.0) / 2.0);
  double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2);
  return lg - 0.5 * std::log(r2) +
         0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu)) -
         0.5 * (nu + 2.0) * std::log1p(q);
}

double tc_cond_z(double x, double y, double rho, double nu) {
  // Conditional Y | X = x is scaled t with nu+1 dof; returns the standardized arg.
  double w = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
  return (y - rho * x) / w;
}

double tc_h1(double u, double v, double rho, double nu) {
  double x = t_quantile(u, nu), y = t_quantile(v, nu);
  return t_cdf(tc_cond_z(x, y, rho, nu), nu + 1.0);
}

double tc_h1_sf(double u, double v, double rho, double nu) {
  double x = t_quantile(u, nu), y = t_quantile(v, nu);
  return t_sf(tc_cond_z(x, y, rho, nu), nu + 1.0);
}

double tc_hinv1(double u, double p, double rho, double nu) {
  double x = t_quantile(u, nu);
  double w = std::sqrt((nu + x * x) * (1.0 - rho * rho) / (nu + 1.0));
  return t_cdf(t_quantile(p, nu + 1.0) * w + rho * x, nu);
}

double tc_cdf(double u, double v, double rho, double nu) {
  // C(u,v) = int_0^u P(V <= v | U = s) ds; bounded smooth integrand.
  double y = t_quantile(v, nu);
  auto f = [&](double s) {
    double x = t_quantile(clamp_unit(s), nu);
    return t_cdf(tc_cond_z(x, y, rho, nu), nu + 1.0);
  };
  return clamp01(integrate(f, 0.0, u, 1e-9));
}

// C(uhi,v) - C(ulo,v) as a single x-space integral: no cancellation, and the
// narrow intervals coming from discrete margins stay cheap.
double tc_cdf_diff1(double ulo, double uhi, double v, double rho, double nu) {
  double xlo = t_quantile(ulo, nu), xhi = t_quantile(uhi, nu);
  double y = t_quantile(v, nu);
  auto f = [&](double x) {
    return t_pdf(x, nu) * t_cdf(tc_cond_z(x, y, rho, nu), nu + 1.0);
  };
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    double a = xlo + (xhi - xlo) * k / 4.0;
    double b = xlo + (xhi - xlo) * (k + 1) / 4.0;
    total += integrate(f, a, b, 2.5e-11);
  }
  return std::max(0.0, total);
}

double tc_rect(double ulo, double uhi, double vlo, double vhi, double rho, double nu) {
  double xlo = t_quantile(ulo, nu), xhi = t_quantile(uhi, nu);
  double ylo = t_quantile(vlo, nu), yhi = t_quantile(vhi, nu);
  auto f = [&](double x) {
    return t_pdf(x, nu) * (t_cdf(tc_cond_z(x, yhi, rho, nu), nu + 1.0) -
                           t_cdf(tc_cond_z(x, ylo, rho, nu), nu + 1.0));
  };
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    double a = xlo + (xhi - xlo) * k / 4.0;
    double b = xlo + (xhi - xlo) * (k + 1) / 4.0;
    total += integrate(f, a, b, 2.5e-11);
  }
  return std::max(0.0, total);
}

// ---- Frank ----
// g(t) = exp(-theta t) - 1. Series branch below |theta| = 1e-5 avoids the
// 0/0 cancellation; its truncation error is O(theta^2).

constexpr double kFrankSeries = 1e-5;

double fr_cdf(double u, double v, double th) {
  if (std::fabs(th) < kFrankSeries) return u * v * (1.0 + 0.5 * th * (1.0 - u) * (1.0 - v));
  double gu = std::expm1(-th * u), gv = std::expm1(-th * v), g1 = std::expm1(-th);
  return -std::log1p(gu * gv / g1) / th;
}

double fr_logpdf(double u, double v, double th) {
  if (std::fabs(th) < kFrankSeries)
    return std::log1p(0.5 * th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v));
  double gu = std::expm1(-th * u), gv = std::expm1(-th * v), g1 = std::expm1(-th);
  double d = g1 + gu * gv;
  return std::log(-th * g1) - th * (u + v) - 2.0 * std::log(std::fabs(d));
}

double fr_h1(double u, double v, double th) {
  if (std::fabs(th) < kFrankSeries) return v + 0.5 * th * v * (1.0 - v) * (1.0 - 2.0 * u);
  double gu = std::expm1(-th * u), gv = std::expm1(-th * v), g1 = std::expm1(-th);
  return std::exp(-th * u) * gv / (g1 + gu * gv);
}

double fr_hinv1(double u, double p, double th) {
  if (std::fabs(th) < kFrankSeries) {
    double beta = 0.5 * th * (1.0 - 2.0 * u);
    return p - beta * p * (1.0 - p);
  }
  double gu = std::expm1(-th * u), g1 = std::expm1(-th);
  double gv = p * g1 / (std::exp(-th * u) - p * gu);
  return -std::log1p(gv) / th;
}

// ---- Gumbel ----

struct GumbelWork {
  double lx, ly;    // log(-log u), log(-log v)
  double x, y;      // -log u, -log v
  double logs, t;   // log(x^d + y^d), s^(1/d)
};

GumbelWork gu_work(double u, double v, double de) {
  GumbelWork w;
  w.x = -std::log(u);
  w.y = -std::log(v);
  w.lx = std::log(w.x);
  w.ly = std::log(w.y);
  w.logs = logsumexp2(de * w.lx, de * w.ly);
  w.t = std::exp(w.logs / de);
  return w;
}

double gu_cdf(double u, double v, double de) {
  if (de == 1.0) return u * v;
  return std::exp(-gu_work(u, v, de).t);
}

double gu_logpdf(double u, double v, double de) {
  if (de == 1.0) return 0.0;
  GumbelWork w = gu_work(u, v, de);
  return -w.t + (de - 1.0) * (w.lx + w.ly) + (1.0 / de - 2.0) * w.logs +
         std::log(w.t + de - 1.0) + w.x + w.y;
}

double gu_h1(double u, double v, double de) {
  if (de == 1.0) return v;
  GumbelWork w = gu_work(u, v, de);
  return std::exp(-w.t + (de - 1.0) * w.lx + (1.0 / de - 1.0) * w.logs + w.x);
}

// ---- BB1 ----

struct BB1Work {
  double lut, lvt;      // log(u^-th - 1), log(v^-th - 1)
  double logs, logsd;   // log(x + y), log s / delta
  double l1psd;         // log(1 + s^(1/delta))
};

BB1Work bb1_work(double u, double v, double th, double de) {
  BB1Work w;
  w.lut = -th * std::log(u) + std::log1p(-std::pow(u, th));
  w.lvt = -th * std::log(v) + std::log1p(-std::pow(v, th));
  w.logs = logsumexp2(de * w.lut, de * w.lvt);
  w.logsd = w.logs / de;
  w.l1psd = log1pexp(w.logsd);
  return w;
}

double bb1_cdf(double u, double v, double th, double de) {
  return std::exp(-bb1_work(u, v, th, de).l1psd / th);
}

double bb1_logpdf(double u, double v, double th, double de) {
  BB1Work w = bb1_work(u, v, th, de);
  double sd = std::exp(w.logsd);
  double mid;  // log(th (de-1) + (th de + 1) sd), stable for huge sd
  if (w.logsd > 30.0)
    mid = std::log(th * de + 1.0) + w.logsd;
  else
    mid = std::log(th * (de - 1.0) + (th * de + 1.0) * sd);
  return -(1.0 / th + 2.0) * w.l1psd + mid + w.logsd - 2.0 * w.logs +
         de * (w.lut + w.lvt) - w.lut - w.lvt - (th + 1.0) * (std::log(u) + std::log(v));
}

double bb1_h1(double u, double v, double th, double de) {
  BB1Work w = bb1_work(u, v, th, de);
  return std::exp(-(1.0 / th + 1.0) * w.l1psd + (1.0 / de - 1.0) * w.logs +
                  (de - 1.0) * w.lut - (th + 1.0) * std::log(u));
}

}  // namespace

std::string family_code(BicopFamily f) {
  switch (f) {
    case BicopFamily::indep: return "I";
    case BicopFamily::gaussian: return "N";
    case BicopFamily::student_t: return "t";
    case BicopFamily::frank: return "F";
    case BicopFamily::gumbel: return "G";
    case BicopFamily::survival_gumbel: return "G.s";
    case BicopFamily::bb1: return "BB1";
  }
  throw std::logic_error("family_code: unknown family");
}

BicopFamily family_from_code(std::string_view code) {
  if (code == "I") return BicopFamily::indep;
  if (code == "N") return BicopFamily::gaussian;
  if (code == "t") return BicopFamily::student_t;
  if (code == "F") return BicopFamily::frank;
  if (code == "G") return BicopFamily::gumbel;
  if (code == "G.s") return BicopFamily::survival_gumbel;
  if (code == "BB1") return BicopFamily::bb1;
  throw std::invalid_argument("unknown copula family code: " + std::string(code));
}

int family_param_count(BicopFamily f) {
  switch (f) {
    case BicopFamily::indep: return 0;
    case BicopFamily::gaussian: case BicopFamily::frank:
    case BicopFamily::gumbel: case BicopFamily::survival_gumbel: return 1;
    case BicopFamily::student_t: case BicopFamily::bb1: return 2;
  }
  return 0;
}

UScorePair upair(double u) { return UScorePair{u, u}; }

Bicop::Bicop(BicopFamily fam, std::vector<double> params) : family_(fam), par_(std::move(params)) {
  if (int(par_.size()) != family_param_count(fam))
    throw std::invalid_argument("Bicop: wrong parameter count for " + family_code(fam));
  for (double p : par_)
    if (!std::isfinite(p)) throw std::invalid_argument("Bicop: non-finite parameter");
  switch (fam) {
    case BicopFamily::indep:
      break;
    case BicopFamily::gaussian:
      if (!(std::fabs(par_[0]) < 1.0)) throw std::invalid_argument("Bicop N: |rho| must be < 1");
      break;
    case BicopFamily::student_t:
      if (!(std::fabs(par_[0]) < 1.0)) throw std::invalid_argument("Bicop t: |rho| must be < 1");
      if (!(par_[1] > 2.0)) throw std::invalid_argument("Bicop t: nu must exceed 2");
      break;
    case BicopFamily::frank:
      if (par_[0] == 0.0) throw std::invalid_argument("Bicop F: theta must be nonzero");
      break;
    case BicopFamily::gumbel:
    case BicopFamily::survival_gumbel:
      if (!(par_[0] >= 1.0)) throw std::invalid_argument("Bicop G: delta must be >= 1");
      break;
    case BicopFamily::bb1:
      if (!(par_[0] > 0.0)) throw std::invalid_argument("Bicop BB1: theta must be positive");
      if (!(par_[1] >= 1.0)) throw std::invalid_argument("Bicop BB1: delta must be >= 1");
      break;
  }
}

double Bicop::cdf(double u, double v) const {
  u = clamp_unit(u); v = clamp_unit(v);
  switch (family_) {
    case BicopFamily::indep: return u * v;
    case BicopFamily::gaussian:
      return clamp01(bvn_cdf(norm_quantile(u), norm_quantile(v), par_[0]));
    case BicopFamily::student_t: return tc_cdf(u, v, par_[0], par_[1]);
    case BicopFamily::frank: return clamp01(fr_cdf(u, v, par_[0]));
    case BicopFamily::gumbel: return clamp01(gu_cdf(u, v, par_[0]));
    case BicopFamily::survival_gumbel:
      return clamp01(u + v - 1.0 + gu_cdf(1.0 - u, 1.0 - v, par_[0]));
    case BicopFamily::bb1: return clamp01(bb1_cdf(u, v, par_[0], par_[1]));
  }
  throw std::logic_error("Bicop::cdf");
}

double Bicop::logpdf(double u, double v) const {
  u = clamp_unit(u); v = clamp_unit(v);
  switch (family_) {
    case BicopFamily::indep: return 0.0;
    case BicopFamily::gaussian: return ga_logpdf(u, v, par_[0]);
    case BicopFamily::student_t: return tc_logpdf(u, v, par_[0], par_[1]);
    case BicopFamily::frank: return fr_logpdf(u, v, par_[0]);
    case BicopFamily::gumbel: return gu_logpdf(u, v, par_[0]);
    case BicopFamily::survival_gumbel: return gu_logpdf(1.0 - u, 1.0 - v, par_[0]);
    case BicopFamily::bb1: return bb1_logpdf(u, v, par_[0], par_[1]);
  }
  throw std::logic_error("Bicop::logpdf");
}

double Bicop::pdf(double u, double v) const { return std::exp(logpdf(u, v)); }

double Bicop::hfunc1(double u, double v) const {
  u = clamp_unit(u); v = clamp_unit(v);
  double h;
  switch (family_) {
    case BicopFamily::indep: h = v; break;
    case BicopFamily::gaussian: h = ga_h1(u, v, par_[0]); break;
    case BicopFamily::student_t: h = tc_h1(u, v, par_[0], par_[1]); break;
    case BicopFamily::frank: h = fr_h1(u, v, par_[0]); break;
    case BicopFamily::gumbel: h = gu_h1(u, v, par_[0]); break;
    case BicopFamily::survival_gumbel: h = 1.0 - gu_h1(1.0 - u, 1.0 - v, par_[0]); break;
    case BicopFamily::bb1: h = bb1_h1(u, v, par_[0], par_[1]); break;
    default: throw std::logic_error("Bicop::hfunc1");
  }
  return std::min(1.0 - kUnitEps, std::max(kUnitEps, h));
}

double Bicop::hfunc1_sf(double u, double v) const {
  u = clamp_unit(u); v = clamp_unit(v);
  switch (family_) {
    case BicopFamily::indep: return 1.0 - v;
    case BicopFamily::gaussian: return ga_h1_sf(u, v, par_[0]);
    case BicopFamily::student_t: return tc_h1_sf(u, v, par_[0], par_[1]);
    case BicopFamily::survival_gumbel: return gu_h1(1.0 - u, 1.0 - v, par_[0]);
    default: return std::max(0.0, 1.0 - hfunc1(u, v));
  }
}

double Bicop::hfunc2(double u, double v) const { return hfunc1(v, u); }

double Bicop::hinv1(double u, double p) const {
  u = clamp_unit(u); p = clamp_unit(p);
  switch (family_) {
    case BicopFamily::indep: return p;
    case BicopFamily::gaussian: return clamp_unit(ga_hinv1(u, p, par_[0]));
    case BicopFamily::student_t: return clamp_unit(tc_hinv1(u, p, par_[0], par_[1]));
    case BicopFamily::frank: return clamp_unit(fr_hinv1(u, p, par_[0]));
    case BicopFamily::survival_gumbel: {
      Bicop base(BicopFamily::gumbel, {par_[0]});
      return 1.0 - base.hinv1(1.0 - u, 1.0 - p);
    }
    default: break;
  }
  // Safeguarded Newton on v; dh/dv is the copula density.
  double lo = kUnitEps, hi = 1.0 - kUnitEps;
  double v = p;
  for (int it = 0; it < 100; ++it) {
    double diff = hfunc1(u, v) - p;
    if (std::fabs(diff) < 1e-12 || hi - lo < 1e-14) break;
    if (diff > 0.0) hi = v; else lo = v;
    double der = std::max(pdf(u, v), 1e-12);
    double vn = v - diff / der;
    if (!(vn > lo && vn < hi)) vn = 0.5 * (lo + hi);
    v = vn;
  }
  return v;
}

double Bicop::hinv2(double p, double v) const { return hinv1(v, p); }

double Bicop::cdf_diff1(double ulo, double uhi, double v) const {
  ulo = clamp_unit(ulo); uhi = clamp_unit(uhi); v = clamp_unit(v);
  if (uhi <= ulo) return 0.0;
  if (family_ == BicopFamily::student_t) return tc_cdf_diff1(ulo, uhi, v, par_[0], par_[1]);
  return std::max(0.0, cdf(uhi, v) - cdf(ulo, v));
}

double Bicop::cdf_rect(double ulo, double uhi, double vlo, double vhi) const {
  ulo = clamp_unit(ulo); uhi = clamp_unit(uhi);
  vlo = clamp_unit(vlo); vhi = clamp_unit(vhi);
  if (uhi <= ulo || vhi <= vlo) return 0.0;
  if (family_ == BicopFamily::student_t)
    return tc_rect(ulo, uhi, vlo, vhi, par_[0], par_[1]);
  return std::max(0.0, cdf(uhi, vhi) - cdf(ulo, vhi) - cdf(uhi, vlo) + cdf(ulo, vlo));
}

double mixed_pdf(const Bicop& cop, const UScorePair& a, bool disc_a, const UScorePair& b,
                 bool disc_b) {
  constexpr double kMinMass = 1e-14;  // zero-mass guard: degrade to the continuous case
  bool da = disc_a && (a.plus - a.minus) > kMinMass;
  bool db = disc_b && (b.plus - b.minus) > kMinMass;
  if (!da && !db) return cop.pdf(a.plus, b.plus);
  if (da && !db) {
    double m = a.plus - a.minus;
    return std::max(0.0, cop.hfunc2(a.plus, b.plus) - cop.hfunc2(a.minus, b.plus)) / m;
  }
  if (!da && db) {
    double m = b.plus - b.minus;
    return std::max(0.0, cop.hfunc1(a.plus, b.plus) - cop.hfunc1(a.plus, b.minus)) / m;
  }
  double m = (a.plus - a.minus) * (b.plus - b.minus);
  return cop.cdf_rect(a.minus, a.plus, b.minus, b.plus) / m;
}

double mixed_logpdf(const Bicop& cop, const UScorePair& a, bool disc_a, const UScorePair& b,
                    bool disc_b) {
  double d = mixed_pdf(cop, a, disc_a, b, disc_b);
  return d > 1e-300 ? std::log(d) : kLogFloor;
}

namespace {

double edge_nll(const Bicop& cop, const std::vector<UScorePair>& a, bool da,
                const std::vector<UScorePair>& b, bool db) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += mixed_logpdf(cop, a[i], da, b[i], db);
  return -s;
}

double midpoint_normal_corr(const std::vector<UScorePair>& a, const std::vector<UScorePair>& b) {
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) {
    double x = norm_quantile(clamp_unit(0.5 * (a[i].plus + a[i].minus)));
    double y = norm_quantile(clamp_unit(0.5 * (b[i].plus + b[i].minus)));
    sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
  }
  double vx = sxx - sx * sx / n, vy = syy - sy * sy / n, cxy = sxy - sx * sy / n;
  if (vx <= 0.0 || vy <= 0.0) return 0.0;
  return cxy / std::sqrt(vx * vy);
}

EdgeFit fit_one_param(BicopFamily fam, double lo, double hi,
                      const std::vector<UScorePair>& a, bool da,
                      const std::vector<UScorePair>& b, bool db) {
  auto f = [&](double p) {
    if (fam == BicopFamily::frank && std::fabs(p) < 1e-8) p = 1e-8;
    return edge_nll(Bicop(fam, {p}), a, da, b, db);
  };
  Optimum1D opt = scan_golden_minimize(f, lo, hi, 41, 1e-6);
  double p = opt.x;
  if (fam == BicopFamily::frank && std::fabs(p) < 1e-5) p = std::copysign(1e-5, p == 0.0 ? 1.0 : p);
  EdgeFit out;
  out.cop = Bicop(fam, {p});
  out.loglik = -opt.fx;
  out.evals = opt.evals;
  out.converged = opt.converged;
  return out;
}

EdgeFit fit_two_param(BicopFamily fam, const std::vector<UScorePair>& a, bool da,
                      const std::vector<UScorePair>& b, bool db) {
  // Smooth logistic boxes keep Nelder-Mead unconstrained.
  auto decode = [&](const std::vector<double>& w) -> std::vector<double> {
    if (fam == BicopFamily::student_t)
      return {0.999 * std::tanh(w[0]), 2.05 + 47.95 * logistic(w[1])};
    return {7.0 * logistic(w[0]), 1.0 + 6.0 * logistic(w[1])};  // BB1
  };
  auto f = [&](const std::vector<double>& w) {
    std::vector<double> p = decode(w);
    if (fam == BicopFamily::bb1 && p[0] < 1e-4) p[0] = 1e-4;
    return edge_nll(Bicop(fam, p), a, da, b, db);
  };

  std::vector<std::vector<double>> starts;
  if (fam == BicopFamily::student_t) {
    double r0 = std::clamp(midpoint_normal_corr(a, b), -0.95, 0.95);
    starts.push_back({std::atanh(r0 / 0.999), logit((5.0 - 2.05) / 47.95)});
    starts.push_back({std::atanh(r0 / 0.999), logit((15.0 - 2.05) / 47.95)});
  } else {
    starts.push_back({logit(0.3 / 7.0), logit(0.2 / 6.0)});
    starts.push_back({logit(1.0 / 7.0), logit(0.5 / 6.0)});
    starts.push_back({logit(2.5 / 7.0), logit(0.1 / 6.0)});
  }

  EdgeFit out;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    OptimumND r = nelder_mead(f, s, {0.4, 0.7}, 1e-9, 600);
    out.evals += r.evals;
    if (r.fx < best) {
      best = r.fx;
      out.cop = Bicop(fam, decode(r.x));
      out.loglik = -r.fx;
      out.converged = r.converged;
    }
  }
  return out;
}

}  // namespace

EdgeFit fit_edge(BicopFamily fam, const std::vector<UScorePair>& a, bool disc_a,
                 const std::vector<UScorePair>& b, bool disc_b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("fit_edge: pseudo-observation vectors mismatch");
  switch (fam) {
    case BicopFamily::indep: {
      EdgeFit out;
      out.cop = Bicop(BicopFamily::indep, {});
      out.converged = true;
      return out;
    }
    case BicopFamily::gaussian:
      return fit_one_param(fam, -0.999, 0.999, a, disc_a, b, disc_b);
    case BicopFamily::frank:
      return fit_one_param(fam, -35.0, 35.0, a, disc_a, b, disc_b);
    case BicopFamily::gumbel:
    case BicopFamily::survival_gumbel:
      return fit_one_param(fam, 1.0, 17.0, a, disc_a, b, disc_b);
    case BicopFamily::student_t:
    case BicopFamily::bb1:
      return fit_two_param(fam, a, disc_a, b, disc_b);
  }
  throw std::logic_error("fit_edge: unknown family");
}

}  // namespace survine
