#include "survine/vine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "survine/stats.hpp"

namespace survine {

namespace {
constexpr double kMinMass = 1e-14;
}

VineArray VineArray::zeros(int dim) {
  VineArray v;
  v.d = dim;
  v.a.assign(std::size_t(dim) * dim, 0);
  return v;
}

std::string VineArray::validate() const {
  if (d < 2) return "dimension must be at least 2";
  if (a.size() != std::size_t(d) * d) return "storage size mismatch";
  for (int k = 1; k <= d; ++k)
    for (int j = 1; j <= d; ++j) {
      int v = at(k, j);
      if (k > j && v != 0) return "nonzero entry below the diagonal";
      if (k <= j && (v < 1 || v > d)) return "upper-triangle entry outside 1..d";
    }
  std::set<int> diag;
  for (int j = 1; j <= d; ++j) diag.insert(at(j, j));
  if (int(diag.size()) != d) return "diagonal is not a permutation of 1..d";

  for (int j = 2; j <= d; ++j) {
    // Column j above the diagonal must be a permutation of the earlier
    // diagonal labels.
    std::set<int> col, prior;
    for (int k = 1; k < j; ++k) {
      col.insert(at(k, j));
      prior.insert(at(k, k));
    }
    if (col != prior) return "column " + std::to_string(j) + " does not permute earlier diagonal";
    for (int l = 2; l < j; ++l) {
      std::set<int> prefix;
      for (int k = 1; k <= l; ++k) prefix.insert(at(k, j));
      bool found = false;
      for (int k = l; k < j && !found; ++k) {
        std::set<int> cand;
        for (int r = 1; r < l; ++r) cand.insert(at(r, k));
        cand.insert(at(k, k));
        found = (cand == prefix);
      }
      if (!found)
        return "column " + std::to_string(j) + " level " + std::to_string(l) +
               " has no matching earlier column";
    }
  }
  return "";
}

bool VineArray::last_is_leaf() const {
  int label = at(d, d);
  for (int j = 1; j <= d; ++j)
    for (int k = 1; k < j; ++k)
      if (at(k, j) == label) return false;
  for (int j = 1; j < d; ++j)
    if (at(j, j) == label) return false;
  return true;
}

VineArray VineArray::normalized(std::vector<int>* perm) const {
  std::vector<int> to_new(d + 1, 0);
  for (int j = 1; j <= d; ++j) to_new[at(j, j)] = j;
  VineArray out = zeros(d);
  for (int j = 1; j <= d; ++j)
    for (int k = 1; k <= j; ++k) out.at(k, j) = to_new[at(k, j)];
  if (perm) {
    perm->assign(d, 0);
    for (int j = 1; j <= d; ++j) (*perm)[j - 1] = at(j, j);
  }
  return out;
}

std::string VineSpec::validate() const {
  std::string err = A.validate();
  if (!err.empty()) return err;
  for (int j = 1; j <= A.d; ++j)
    if (A.at(j, j) != j) return "diagonal must be 1..d (normalize first)";
  if (edges.size() != std::size_t(A.d) * A.d) return "edge storage size mismatch";
  if (int(discrete.size()) != A.d) return "discreteness flags size mismatch";
  if (!margins.empty() && int(margins.size()) != A.d) return "margins size mismatch";
  if (!flipped.empty() && int(flipped.size()) != A.d) return "flip flags size mismatch";
  if (!margins.empty())
    for (int j = 0; j < A.d; ++j)
      if (margins[j].discrete() != discrete[j]) return "margin/discreteness mismatch";
  return "";
}

namespace {

struct AlgTables {
  int d = 0;
  std::vector<int> m;           // m_kj = max{a_1j..a_kj}
  std::vector<uint8_t> need;    // v'_j needed when computing level l (rows l = 2..d-1)
  int mat(int k, int j) const { return m[std::size_t(k - 1) * d + (j - 1)]; }
  bool need_prime(int l, int j) const {
    return need[std::size_t(l - 2) * d + (j - 1)] != 0;
  }
};

AlgTables make_tables(const VineArray& A) {
  AlgTables t;
  t.d = A.d;
  t.m.assign(A.a.size(), 0);
  for (int j = 2; j <= A.d; ++j) {
    int mx = 0;
    for (int k = 1; k < j; ++k) {
      mx = std::max(mx, A.at(k, j));
      t.m[std::size_t(k - 1) * A.d + (j - 1)] = mx;
    }
  }
  if (A.d > 2) t.need.assign(std::size_t(A.d - 2) * A.d, 0);
  for (int l = 2; l <= A.d - 1; ++l)
    for (int j = l + 1; j <= A.d; ++j)
      if (A.at(l, j) != t.mat(l, j))
        t.need[std::size_t(l - 2) * A.d + (t.mat(l, j) - 1)] = 1;
  return t;
}

// One subject, columns 1..dim: predictor-edge log-density terms (columns
// < dim) plus the conditioned score pairs of column dim's partner variable at
// each level. urow must provide model-space pairs for variables 1..dim-1.
ResponseWorkspace run_pass(const VineSpec& spec, const AlgTables& t,
                           const UScorePair* urow, int dim, bool want_ll) {
  const VineArray& A = spec.A;
  ResponseWorkspace rw;
  rw.sp.resize(dim - 1);
  rw.sm.resize(dim - 1);
  rw.disc.resize(dim - 1);
  for (int l = 1; l <= dim - 1; ++l) rw.disc[l - 1] = spec.discrete[A.at(l, dim) - 1] ? 1 : 0;

  std::vector<double> sp(dim), sm(dim), wp(dim), wm(dim);  // index j-1, predictor columns
  std::vector<double> vp(dim), vm(dim), qp(dim), qm(dim);

  for (int j = 2; j <= dim - 1; ++j) {
    int a1 = A.at(1, j);
    sp[j - 1] = urow[a1 - 1].plus;
    sm[j - 1] = urow[a1 - 1].minus;
    wp[j - 1] = urow[j - 1].plus;
    wm[j - 1] = urow[j - 1].minus;
  }
  rw.sp[0] = urow[A.at(1, dim) - 1].plus;
  rw.sm[0] = urow[A.at(1, dim) - 1].minus;

  auto add_term = [&](const Bicop& c, int l, int j) {
    UScorePair a{sp[j - 1], sm[j - 1]}, b{wp[j - 1], wm[j - 1]};
    double term =
        mixed_logpdf(c, a, spec.discrete[A.at(l, j) - 1], b, spec.discrete[j - 1]);
    if (term <= kLogFloor) ++rw.clamped;
    rw.pred_ll += term;
  };

  if (want_ll)
    for (int j = 2; j <= dim - 1; ++j) add_term(spec.edge(1, j), 1, j);

  for (int l = 2; l <= dim - 1; ++l) {
    for (int j = l; j <= dim - 1; ++j) {
      const Bicop& c = spec.edge(l - 1, j);
      double s1 = sp[j - 1], s0 = sm[j - 1], w1 = wp[j - 1], w0 = wm[j - 1];
      double mass_s = s1 - s0;
      if (mass_s > kMinMass) {
        vp[j - 1] = clamp_unit(c.cdf_diff1(s0, s1, w1) / mass_s);
        vm[j - 1] = (w1 != w0) ? clamp_unit(c.cdf_diff1(s0, s1, w0) / mass_s) : vp[j - 1];
      } else {
        vp[j - 1] = c.hfunc1(s1, w1);
        vm[j - 1] = (w1 != w0) ? c.hfunc1(s1, w0) : vp[j - 1];
      }
      if (vm[j - 1] > vp[j - 1]) vm[j - 1] = vp[j - 1];
      if (t.need.empty() ? false : t.need_prime(l, j)) {
        double mass_w = w1 - w0;
        if (mass_w > kMinMass) {
          qp[j - 1] = clamp_unit(c.cdf_diff1(w0, w1, s1) / mass_w);
          qm[j - 1] = (s1 != s0) ? clamp_unit(c.cdf_diff1(w0, w1, s0) / mass_w) : qp[j - 1];
        } else {
          qp[j - 1] = c.hfunc2(s1, w1);
          qm[j - 1] = (s1 != s0) ? c.hfunc2(s0, w1) : qp[j - 1];
        }
        if (qm[j - 1] > qp[j - 1]) qm[j - 1] = qp[j - 1];
      }
    }
    for (int j = l + 1; j <= dim - 1; ++j) {
      int mlj = t.mat(l, j);
      if (A.at(l, j) == mlj) {
        sp[j - 1] = vp[mlj - 1];
        sm[j - 1] = vm[mlj - 1];
      } else {
        sp[j - 1] = qp[mlj - 1];
        sm[j - 1] = qm[mlj - 1];
      }
      wp[j - 1] = vp[j - 1];
      wm[j - 1] = vm[j - 1];
    }
    int mld = t.mat(l, dim);
    if (A.at(l, dim) == mld) {
      rw.sp[l - 1] = vp[mld - 1];
      rw.sm[l - 1] = vm[mld - 1];
    } else {
      rw.sp[l - 1] = qp[mld - 1];
      rw.sm[l - 1] = qm[mld - 1];
    }
    if (want_ll)
      for (int j = l + 1; j <= dim - 1; ++j) add_term(spec.edge(l, j), l, j);
  }
  return rw;
}

double fold_step(const ResponseWorkspace& w, const Bicop& c, int l, double x) {
  if (w.disc[l]) {
    double mass = w.sp[l] - w.sm[l];
    if (mass > kMinMass) return clamp_unit(c.cdf_diff1(w.sm[l], w.sp[l], x) / mass);
  }
  return c.hfunc1(w.sp[l], x);
}

double invert_fold_step(const ResponseWorkspace& w, const Bicop& c, int l, double target) {
  if (w.disc[l]) {
    double mass = w.sp[l] - w.sm[l];
    if (mass > kMinMass) {
      double lo = kUnitEps, hi = 1.0 - kUnitEps;
      for (int it = 0; it < 100 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        if (clamp_unit(c.cdf_diff1(w.sm[l], w.sp[l], mid) / mass) < target)
          lo = mid;
        else
          hi = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return c.hinv1(w.sp[l], target);
}

void check_response_rules(const VineSpec& spec) {
  int d = spec.A.d;
  if (spec.discrete[d - 1])
    throw std::invalid_argument("response variable must be continuous");
  if (!spec.flipped.empty() && spec.flipped[d - 1])
    throw std::invalid_argument("response variable cannot be orientation-flipped");
}

bool var_flipped(const VineSpec& spec, int j) {
  return !spec.flipped.empty() && spec.flipped[j - 1];
}

}  // namespace

ResponseWorkspace response_workspace(const VineSpec& spec,
                                     const std::vector<UScorePair>& xrow_u) {
  if (int(xrow_u.size()) < spec.A.d - 1)
    throw std::invalid_argument("response_workspace: need scores for d-1 covariates");
  AlgTables t = make_tables(spec.A);
  return run_pass(spec, t, xrow_u.data(), spec.A.d, false);
}

std::vector<Bicop> response_edges(const VineSpec& spec) {
  std::vector<Bicop> r;
  r.reserve(spec.A.d - 1);
  for (int l = 1; l <= spec.A.d - 1; ++l) r.push_back(spec.edge(l, spec.A.d));
  return r;
}

double cond_cdf(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u) {
  double x = clamp_unit(u);
  for (std::size_t l = 0; l < rcops.size(); ++l) x = fold_step(w, rcops[l], int(l), x);
  return x;
}

double cond_loglik_event(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u,
                         int* clamped) {
  double x = clamp_unit(u);
  double ll = 0.0;
  for (std::size_t l = 0; l < rcops.size(); ++l) {
    UScorePair a{w.sp[l], w.sm[l]};
    double term = mixed_logpdf(rcops[l], a, w.disc[l] != 0, upair(x), false);
    if (term <= kLogFloor && clamped) ++*clamped;
    ll += term;
    if (l + 1 < rcops.size()) x = fold_step(w, rcops[l], int(l), x);
  }
  return ll;
}

double cond_logsurv(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u,
                    int* clamped) {
  double x = clamp_unit(u);
  std::size_t last = rcops.size() - 1;
  for (std::size_t l = 0; l < last; ++l) x = fold_step(w, rcops[l], int(l), x);
  double surv;
  if (w.disc[last] && (w.sp[last] - w.sm[last]) > kMinMass) {
    double mass = w.sp[last] - w.sm[last];
    double diff = rcops[last].cdf_diff1(w.sm[last], w.sp[last], x);
    surv = std::max(mass - diff, 0.0) / mass;
  } else {
    surv = rcops[last].hfunc1_sf(w.sp[last], x);
  }
  if (surv > 1e-300) return std::log(surv);
  if (clamped) ++*clamped;
  return kLogFloor;
}

double cond_quantile(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("cond_quantile: q outside (0,1)");
  double lo = kUnitEps, hi = 1.0 - kUnitEps;
  if (cond_cdf(w, rcops, lo) >= q) return lo;
  if (cond_cdf(w, rcops, hi) <= q) return hi;
  double mid = 0.5;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double p = cond_cdf(w, rcops, mid);
    if (std::fabs(p - q) <= 1e-9 || hi - lo < 1e-15) return mid;
    if (p < q)
      lo = mid;
    else
      hi = mid;
  }
  return mid;
}

LoglikResult loglik_censored(const VineSpec& spec,
                             const std::vector<std::vector<UScorePair>>& u,
                             const std::vector<int>& status) {
  std::string err = spec.validate();
  if (!err.empty()) throw std::invalid_argument("loglik_censored: " + err);
  check_response_rules(spec);
  if (u.size() != status.size()) throw std::invalid_argument("loglik_censored: size mismatch");
  int d = spec.A.d;
  AlgTables t = make_tables(spec.A);
  std::vector<Bicop> rcops = response_edges(spec);
  LoglikResult out;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (int(u[i].size()) != d) throw std::invalid_argument("loglik_censored: row width");
    if (status[i] != 0 && status[i] != 1)
      throw std::invalid_argument("loglik_censored: status must be 0 or 1");
    ResponseWorkspace rw = run_pass(spec, t, u[i].data(), d, true);
    out.loglik += rw.pred_ll;
    out.clamped += rw.clamped;
    double uy = u[i][d - 1].plus;
    out.loglik += status[i] == 1 ? cond_loglik_event(rw, rcops, uy, &out.clamped)
                                 : cond_logsurv(rw, rcops, uy, &out.clamped);
  }
  return out;
}

double conditional_cdf(const VineSpec& spec, const std::vector<UScorePair>& xrow_u, double u) {
  check_response_rules(spec);
  return cond_cdf(response_workspace(spec, xrow_u), response_edges(spec), u);
}

double conditional_quantile(const VineSpec& spec, const std::vector<UScorePair>& xrow_u,
                            double q) {
  check_response_rules(spec);
  return cond_quantile(response_workspace(spec, xrow_u), response_edges(spec), q);
}

std::vector<UScorePair> pit_row(const VineSpec& spec, const std::vector<double>& xrow,
                                bool* warned) {
  int d = spec.A.d;
  if (spec.margins.empty()) throw std::invalid_argument("pit_row: spec has no margins");
  if (int(xrow.size()) < d - 1) throw std::invalid_argument("pit_row: row width");
  std::vector<UScorePair> u(d - 1);
  for (int j = 1; j <= d - 1; ++j) {
    UScorePair p = spec.margins[j - 1].pit(xrow[j - 1], warned);
    if (var_flipped(spec, j)) p = UScorePair{1.0 - p.minus, 1.0 - p.plus};
    u[j - 1] = p;
  }
  return u;
}

double predict_quantile(const VineSpec& spec, const std::vector<double>& xrow, double q) {
  check_response_rules(spec);
  if (spec.margins.empty()) throw std::invalid_argument("predict_quantile: no margins");
  double u = conditional_quantile(spec, pit_row(spec, xrow), q);
  return spec.margins[spec.A.d - 1].quantile(clamp_unit(u));
}

double density_uncensored(const VineSpec& spec, const std::vector<double>& row) {
  std::string err = spec.validate();
  if (!err.empty()) throw std::invalid_argument("density_uncensored: " + err);
  if (spec.margins.empty()) throw std::invalid_argument("density_uncensored: no margins");
  int d = spec.A.d;
  if (int(row.size()) != d) throw std::invalid_argument("density_uncensored: row width");

  std::vector<UScorePair> u(d);
  double lmarg = 0.0;
  for (int j = 1; j <= d; ++j) {
    UScorePair nat = spec.margins[j - 1].pit(row[j - 1]);
    if (spec.discrete[j - 1]) {
      double mass = nat.plus - nat.minus;
      lmarg += mass > 1e-300 ? std::log(mass) : kLogFloor;
    } else {
      lmarg += spec.margins[j - 1].logpdf(row[j - 1]);
    }
    u[j - 1] = var_flipped(spec, j) ? UScorePair{1.0 - nat.minus, 1.0 - nat.plus} : nat;
  }

  AlgTables t = make_tables(spec.A);
  ResponseWorkspace rw = run_pass(spec, t, u.data(), d, true);
  std::vector<Bicop> rcops = response_edges(spec);
  double lcop = rw.pred_ll;
  // Last column treated like an event row; works for discrete variable d too
  // because mixed_logpdf handles both scales of the linking pair.
  double x = u[d - 1].plus;
  if (spec.discrete[d - 1]) {
    // Fold the pair through the column to keep both coordinates.
    UScorePair wpair = u[d - 1];
    for (std::size_t l = 0; l < rcops.size(); ++l) {
      UScorePair a{rw.sp[l], rw.sm[l]};
      lcop += mixed_logpdf(rcops[l], a, rw.disc[l] != 0, wpair, true);
      if (l + 1 < rcops.size())
        wpair = UScorePair{fold_step(rw, rcops[l], int(l), wpair.plus),
                           fold_step(rw, rcops[l], int(l), wpair.minus)};
    }
  } else {
    lcop += cond_loglik_event(rw, rcops, x, nullptr);
  }
  return std::exp(lmarg + lcop);
}

std::vector<std::vector<double>> simulate(const VineSpec& spec, int n, std::uint64_t seed) {
  std::string err = spec.validate();
  if (!err.empty()) throw std::invalid_argument("simulate: " + err);
  if (spec.margins.empty()) throw std::invalid_argument("simulate: spec has no margins");
  int d = spec.A.d;
  for (int j = 0; j < d; ++j)
    if (spec.discrete[j] && spec.margins[j].cum_probs.empty())
      throw std::invalid_argument("simulate: discrete variable lacks category grid");

  AlgTables t = make_tables(spec.A);
  std::mt19937_64 gen(mix_seed(seed, 0));
  auto next_u = [&gen]() { return double(gen() >> 11) * 0x1.0p-53; };

  std::vector<std::vector<double>> X(n, std::vector<double>(d));
  std::vector<UScorePair> urow(d);
  std::vector<Bicop> rcops;
  for (int i = 0; i < n; ++i) {
    std::vector<double> u01(d);
    for (int j = 0; j < d; ++j) u01[j] = next_u();
    for (int j = 1; j <= d; ++j) {
      ResponseWorkspace rw;
      if (j > 1) {
        rw = run_pass(spec, t, urow.data(), j, false);
        rcops.clear();
        for (int l = 1; l < j; ++l) rcops.push_back(spec.edge(l, j));
      }
      const MarginSpec& mg = spec.margins[j - 1];
      bool flip = var_flipped(spec, j);
      if (spec.discrete[j - 1]) {
        const auto& cum = mg.cum_probs;
        int m = int(cum.size());
        int cat = m - 1;
        double acc_prev = 0.0;
        for (int k = 0; k < m; ++k) {
          double ck = clamp_unit(cum[k]);
          double cond;
          if (j == 1)
            cond = cum[k];
          else
            cond = flip ? 1.0 - cond_cdf(rw, rcops, clamp_unit(1.0 - ck))
                        : cond_cdf(rw, rcops, ck);
          if (k == m - 1) cond = 1.0;
          if (u01[j - 1] < cond) {
            cat = k;
            break;
          }
          acc_prev = cond;
        }
        (void)acc_prev;
        X[i][j - 1] = mg.levels[cat];
        double lo = cat == 0 ? 0.0 : cum[cat - 1];
        double hi = cum[cat];
        UScorePair nat{clamp_unit(hi), clamp_unit(lo)};
        urow[j - 1] = flip ? UScorePair{1.0 - nat.minus, 1.0 - nat.plus} : nat;
      } else {
        double v = clamp_unit(u01[j - 1]);
        if (j > 1)
          for (int l = j - 2; l >= 0; --l) v = invert_fold_step(rw, rcops[l], l, v);
        v = clamp_unit(v);
        double nat = flip ? 1.0 - v : v;
        X[i][j - 1] = mg.quantile(clamp_unit(nat));
        urow[j - 1] = upair(v);
      }
    }
  }
  return X;
}

}  // namespace survine
