#include "survine/select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <iterator>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"
#include "survine/optim.hpp"
#include "survine/stats.hpp"

namespace survine {
namespace {

constexpr double kMinMass = 1e-14;
constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double w) { return 1.0 / (1.0 + std::exp(-w)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// ---- structure search ----

// Edge of one dependence tree. Endpoints n1/n2 are variable labels in tree 1
// and indices into the previous tree's edge list afterwards.
struct TreeEdge {
  int n1 = 0, n2 = 0;
  int ca = 0, cb = 0;     // conditioned pair, ca < cb
  std::vector<int> cond;  // conditioning set, sorted
  std::vector<int> cu;    // complete union, sorted
};

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int x, int y) {
    x = find(x);
    y = find(y);
    if (x == y) return false;
    parent[y] = x;
    return true;
  }
};

struct Cand {
  int i = 0, j = 0;
  double w = 0.0;
};

// Indices of a maximum spanning tree among the candidates, in acceptance
// order. Ties break on the lower node pair, keeping the result deterministic.
std::vector<int> max_spanning(int m, const std::vector<Cand>& cands) {
  std::vector<int> ord(cands.size());
  std::iota(ord.begin(), ord.end(), 0);
  std::sort(ord.begin(), ord.end(), [&](int x, int y) {
    if (cands[x].w != cands[y].w) return cands[x].w > cands[y].w;
    if (cands[x].i != cands[y].i) return cands[x].i < cands[y].i;
    return cands[x].j < cands[y].j;
  });
  DisjointSet ds(m);
  std::vector<int> out;
  for (int k : ord)
    if (ds.unite(cands[k].i, cands[k].j)) {
      out.push_back(k);
      if (int(out.size()) == m - 1) break;
    }
  if (int(out.size()) != m - 1)
    throw std::logic_error("select_structure: spanning-tree candidates are disconnected");
  return out;
}

// Dependence trees of the predictor block: tree 1 maximizes |r|, higher trees
// maximize |partial correlation| among pairs allowed by the proximity
// condition (edges sharing an endpoint node).
std::vector<std::vector<TreeEdge>> build_trees(const CorrelationMatrix& R, int p) {
  std::vector<std::vector<TreeEdge>> trees;
  if (p < 2) return trees;

  std::vector<Cand> c1;
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) c1.push_back({i, j, std::fabs(R(i, j))});
  std::vector<TreeEdge> t1;
  for (int k : max_spanning(p, c1)) {
    TreeEdge e;
    e.n1 = c1[k].i + 1;
    e.n2 = c1[k].j + 1;
    e.ca = std::min(e.n1, e.n2);
    e.cb = std::max(e.n1, e.n2);
    e.cu = {e.ca, e.cb};
    t1.push_back(std::move(e));
  }
  trees.push_back(std::move(t1));

  for (int level = 2; level <= p - 1; ++level) {
    const std::vector<TreeEdge>& prev = trees.back();
    int m = int(prev.size());
    std::vector<Cand> cands;
    std::vector<TreeEdge> protos;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const TreeEdge& a = prev[i];
        const TreeEdge& b = prev[j];
        if (a.n1 != b.n1 && a.n1 != b.n2 && a.n2 != b.n1 && a.n2 != b.n2) continue;
        TreeEdge e;
        e.n1 = i;
        e.n2 = j;
        std::set_intersection(a.cu.begin(), a.cu.end(), b.cu.begin(), b.cu.end(),
                              std::back_inserter(e.cond));
        std::vector<int> diff;
        std::set_symmetric_difference(a.cu.begin(), a.cu.end(), b.cu.begin(), b.cu.end(),
                                      std::back_inserter(diff));
        if (diff.size() != 2) throw std::logic_error("select_structure: malformed tree join");
        e.ca = diff[0];
        e.cb = diff[1];
        std::set_union(a.cu.begin(), a.cu.end(), b.cu.begin(), b.cu.end(),
                       std::back_inserter(e.cu));
        std::vector<int> S;
        S.reserve(e.cond.size());
        for (int s : e.cond) S.push_back(s - 1);
        cands.push_back({i, j, std::fabs(partial_correlation(R, e.ca - 1, e.cb - 1, S))});
        protos.push_back(std::move(e));
      }
    std::vector<TreeEdge> t;
    for (int k : max_spanning(m, cands)) t.push_back(protos[k]);
    trees.push_back(std::move(t));
  }
  return trees;
}

// Response column by greedy descent on |R(x, y)|: at level l the structure
// admits exactly the variables brought in by tree edges incident to the node
// whose complete union is the current prefix.
std::vector<int> response_column(const std::vector<std::vector<TreeEdge>>& trees,
                                 const CorrelationMatrix& R, int p) {
  int yi = p;  // response row/column of R, 0-based
  std::vector<int> pi;
  int first = 1;
  for (int x = 2; x <= p; ++x)
    if (std::fabs(R(x - 1, yi)) > std::fabs(R(first - 1, yi))) first = x;
  pi.push_back(first);
  std::vector<char> used(p + 1, 0);
  used[first] = 1;

  int cur = first;  // variable label at level 2, edge index afterwards
  for (int l = 2; l <= p; ++l) {
    const std::vector<TreeEdge>& tree = trees[l - 2];
    int bestE = -1, bestX = 0;
    double bw = -1.0;
    for (int e = 0; e < int(tree.size()); ++e) {
      const TreeEdge& f = tree[e];
      if (f.n1 != cur && f.n2 != cur) continue;
      int x = 0, fresh = 0;
      for (int v : f.cu)
        if (!used[v]) {
          x = v;
          ++fresh;
        }
      if (fresh != 1) throw std::logic_error("select_structure: response prefix mismatch");
      if (std::fabs(R(x - 1, yi)) > bw) {
        bw = std::fabs(R(x - 1, yi));
        bestE = e;
        bestX = x;
      }
    }
    if (bestE < 0) throw std::logic_error("select_structure: no feasible response candidate");
    pi.push_back(bestX);
    used[bestX] = 1;
    cur = bestE;
  }
  return pi;
}

// Trees to array. Each step takes the single remaining top edge, peels one of
// its conditioned variables onto the diagonal, and walks that variable's
// chain of edges down the trees; chain edges are removed as used.
VineArray peel_to_array(const std::vector<std::vector<TreeEdge>>& trees, int p) {
  VineArray A = VineArray::zeros(p);
  if (p == 1) {
    A.at(1, 1) = 1;
    return A;
  }
  std::vector<std::vector<char>> dead(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) dead[t].assign(trees[t].size(), 0);

  for (int j = p; j >= 2; --j) {
    int te = -1;
    for (int e = 0; e < int(trees[j - 2].size()); ++e)
      if (!dead[j - 2][e]) {
        if (te >= 0) throw std::logic_error("select_structure: top tree not reduced to one edge");
        te = e;
      }
    if (te < 0) throw std::logic_error("select_structure: top tree exhausted early");
    dead[j - 2][te] = 1;
    TreeEdge cur = trees[j - 2][te];
    int va = std::max(cur.ca, cur.cb);
    A.at(j, j) = va;
    A.at(j - 1, j) = cur.ca == va ? cur.cb : cur.ca;
    for (int tt = j - 1; tt >= 2; --tt) {
      const TreeEdge& p1 = trees[tt - 2][cur.n1];
      bool in1 = p1.ca == va || p1.cb == va;
      int pidx = in1 ? cur.n1 : cur.n2;
      const TreeEdge& par = trees[tt - 2][pidx];
      if (par.ca != va && par.cb != va)
        throw std::logic_error("select_structure: peel chain lost its variable");
      if (dead[tt - 2][pidx]) throw std::logic_error("select_structure: peel chain collision");
      dead[tt - 2][pidx] = 1;
      A.at(tt - 1, j) = par.ca == va ? par.cb : par.ca;
      cur = par;
    }
  }
  A.at(1, 1) = A.at(1, 2);
  return A;
}

// ---- edge family choice on pseudo-observations ----

EdgeRecord choose_edge(int l, int j, const std::vector<UScorePair>& a, bool da,
                       const std::vector<UScorePair>& b, bool db, const SelectOptions& opt,
                       double kpen, Bicop* out) {
  EdgeRecord rec;
  rec.level = l;
  rec.column = j;
  rec.chosen = "I";
  rec.trials.push_back({"I", {}, 0.0, 0.0});
  double bestC = 0.0;
  *out = Bicop();
  for (BicopFamily fam : opt.candidates) {
    if (fam == BicopFamily::indep) continue;
    EdgeTrial tr;
    tr.family = family_code(fam);
    try {
      EdgeFit f = fit_edge(fam, a, da, b, db);
      tr.params = f.cop.par();
      tr.loglik = f.loglik;
      tr.criterion = -2.0 * f.loglik + kpen * family_param_count(fam);
      if (std::isfinite(tr.criterion) && tr.criterion < bestC - 1e-12) {
        bestC = tr.criterion;
        *out = f.cop;
        rec.chosen = tr.family;
      }
    } catch (const std::exception&) {
      tr.loglik = -kInf;
      tr.criterion = kInf;
    }
    rec.trials.push_back(std::move(tr));
  }
  return rec;
}

Bicop seed_bicop(BicopFamily fam) {
  switch (fam) {
    case BicopFamily::indep: return Bicop();
    case BicopFamily::gaussian: return Bicop(fam, {0.0});
    case BicopFamily::student_t: return Bicop(fam, {0.3, 8.0});
    case BicopFamily::frank: return Bicop(fam, {2.0});
    case BicopFamily::gumbel:
    case BicopFamily::survival_gumbel: return Bicop(fam, {1.5});
    case BicopFamily::bb1: return Bicop(fam, {0.5, 1.3});
  }
  throw std::logic_error("seed_bicop: unknown family");
}

// ---- response-edge search ----

// Censored response-column loglik over frozen predictor workspaces, with
// per-edge profile optimization. Every edge update keeps the better of the
// old and new parameters, so coordinate sweeps are monotone in the loglik.
class ResponseSearch {
 public:
  ResponseSearch(std::vector<ResponseWorkspace> ws, std::vector<double> uy,
                 std::vector<int> status)
      : ws_(std::move(ws)), uy_(std::move(uy)), status_(std::move(status)) {}

  double loglik(const std::vector<Bicop>& rc) const {
    double s = 0.0;
    for (std::size_t i = 0; i < ws_.size(); ++i)
      s += status_[i] ? cond_loglik_event(ws_[i], rc, uy_[i])
                      : cond_logsurv(ws_[i], rc, uy_[i]);
    return s;
  }

  // Profile-optimizes edge l in place; fresh adds a second start for the
  // two-parameter families. Returns the loglik at the accepted parameters.
  double optimize_edge(std::vector<Bicop>& rc, int l, bool fresh) {
    BicopFamily fam = rc[l].family();
    int np = family_param_count(fam);
    if (np == 0) return loglik(rc);
    std::vector<double> save = rc[l].par();

    if (np == 1) {
      double lo = -0.999, hi = 0.999;
      if (fam == BicopFamily::frank) {
        lo = -35.0;
        hi = 35.0;
      } else if (fam == BicopFamily::gumbel || fam == BicopFamily::survival_gumbel) {
        lo = 1.0;
        hi = 17.0;
      }
      auto f = [&](double th) {
        double pv = th;
        if (fam == BicopFamily::frank && std::fabs(pv) < 1e-8)
          pv = std::copysign(1e-8, pv == 0.0 ? 1.0 : pv);
        rc[l] = Bicop(fam, {pv});
        return -loglik(rc);
      };
      double f0 = f(save[0]);
      Optimum1D o = scan_golden_minimize(f, lo, hi, 21, 1e-5);
      double th = o.fx < f0 ? o.x : save[0];
      if (fam == BicopFamily::frank && std::fabs(th) < 1e-5)
        th = std::copysign(1e-5, th == 0.0 ? 1.0 : th);
      rc[l] = Bicop(fam, {th});
      return o.fx < f0 ? -o.fx : -f0;
    }

    auto decode = [&](const std::vector<double>& w) -> std::vector<double> {
      if (fam == BicopFamily::student_t)
        return {0.999 * std::tanh(w[0]), 2.05 + 47.95 * logistic(w[1])};
      double th = 7.0 * logistic(w[0]);
      return {th < 1e-4 ? 1e-4 : th, 1.0 + 6.0 * logistic(w[1])};
    };
    auto f = [&](const std::vector<double>& w) {
      rc[l] = Bicop(fam, decode(w));
      return -loglik(rc);
    };
    std::vector<std::vector<double>> starts;
    if (fam == BicopFamily::student_t)
      starts.push_back({std::atanh(std::clamp(save[0] / 0.999, -1.0 + 1e-12, 1.0 - 1e-12)),
                        logit(std::clamp((save[1] - 2.05) / 47.95, 1e-9, 1.0 - 1e-9))});
    else
      starts.push_back({logit(std::clamp(save[0] / 7.0, 1e-9, 1.0 - 1e-9)),
                        logit(std::clamp((save[1] - 1.0) / 6.0, 1e-9, 1.0 - 1e-9))});
    if (fresh) {
      if (fam == BicopFamily::student_t)
        starts.push_back({std::atanh(-0.3 / 0.999), logit((15.0 - 2.05) / 47.95)});
      else
        starts.push_back({logit(1.5 / 7.0), logit(1.0 / 6.0)});
    }
    rc[l] = Bicop(fam, save);
    double bestN = -loglik(rc);
    std::vector<double> bestP = save;
    for (const auto& s : starts) {
      OptimumND r = nelder_mead(f, s, {0.35, 0.7}, 1e-8, 200);
      if (r.fx < bestN) {
        bestN = r.fx;
        bestP = decode(r.x);
      }
    }
    rc[l] = Bicop(fam, bestP);
    return -bestN;
  }

  // Coordinate sweeps over edges 0..lmax until the gain falls below tol.
  double optimize_levels(std::vector<Bicop>& rc, int lmax, int max_sweeps, double tol) {
    double cur = loglik(rc);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double prev = cur;
      for (int l = 0; l <= lmax; ++l) {
        if (family_param_count(rc[l].family()) == 0) continue;
        cur = optimize_edge(rc, l, false);
      }
      if (cur - prev <= tol) break;
    }
    return cur;
  }

 private:
  std::vector<ResponseWorkspace> ws_;
  std::vector<double> uy_;
  std::vector<int> status_;
};

}  // namespace

double partial_correlation(const CorrelationMatrix& R, int a, int b, const std::vector<int>& S) {
  if (a < 0 || b < 0 || a >= R.d || b >= R.d || a == b)
    throw std::invalid_argument("partial_correlation: bad variable indices");
  if (S.empty()) return R(a, b);
  int m = int(S.size()) + 2;
  std::vector<int> idx{a, b};
  for (int s : S) {
    if (s < 0 || s >= R.d || s == a || s == b)
      throw std::invalid_argument("partial_correlation: bad conditioning index");
    idx.push_back(s);
  }
  Eigen::MatrixXd sub(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) sub(i, j) = R(idx[i], idx[j]);
  Eigen::MatrixXd om = sub.inverse();
  double r = -om(0, 1) / std::sqrt(om(0, 0) * om(1, 1));
  return std::clamp(r, -1.0, 1.0);
}

VineArray select_structure(const CorrelationMatrix& R) {
  if (R.d < 2) throw std::invalid_argument("select_structure: need at least 2 variables");
  int d = R.d, p = d - 1;
  VineArray A = VineArray::zeros(d);
  A.at(d, d) = d;
  if (p == 1) {
    A.at(1, 1) = 1;
    A.at(1, 2) = 1;
  } else {
    std::vector<std::vector<TreeEdge>> trees = build_trees(R, p);
    std::vector<int> pi = response_column(trees, R, p);
    VineArray Ap = peel_to_array(trees, p);
    for (int j = 1; j <= p; ++j)
      for (int k = 1; k <= j; ++k) A.at(k, j) = Ap.at(k, j);
    for (int l = 1; l <= p; ++l) A.at(l, d) = pi[l - 1];
  }
  std::string err = A.validate();
  if (!err.empty()) throw std::logic_error("select_structure: built an invalid array: " + err);
  if (!A.last_is_leaf()) throw std::logic_error("select_structure: response is not a leaf");
  return A;
}

VineSpec select_predictor_edges(const VineArray& A, const std::vector<std::vector<UScorePair>>& u,
                                const std::vector<bool>& discrete, const SelectOptions& opt,
                                SelectionTrace* trace) {
  std::string err = A.validate();
  if (!err.empty()) throw std::invalid_argument("select_predictor_edges: " + err);
  int d = A.d;
  for (int j = 1; j <= d; ++j)
    if (A.at(j, j) != j)
      throw std::invalid_argument("select_predictor_edges: array must be normalized");
  if (int(discrete.size()) != d)
    throw std::invalid_argument("select_predictor_edges: discrete flag count");
  std::size_t n = u.size();
  if (n < 10) throw std::invalid_argument("select_predictor_edges: need at least 10 rows");
  for (const auto& row : u)
    if (int(row.size()) < d - 1) throw std::invalid_argument("select_predictor_edges: row width");

  VineSpec spec;
  spec.A = A;
  spec.edges.assign(std::size_t(d) * d, Bicop());
  spec.discrete = discrete;

  int dim = d - 1;  // predictor block
  if (dim < 2) return spec;
  double kpen = opt.criterion == Criterion::aic ? 2.0 : std::log(double(n));

  std::vector<std::vector<UScorePair>> s(dim + 1), w(dim + 1);
  for (int j = 2; j <= dim; ++j) {
    s[j].resize(n);
    w[j].resize(n);
    int a1 = A.at(1, j);
    for (std::size_t i = 0; i < n; ++i) {
      s[j][i] = u[i][a1 - 1];
      w[j][i] = u[i][j - 1];
    }
  }

  auto pick = [&](int l, int j) {
    Bicop chosen;
    EdgeRecord rec = choose_edge(l, j, s[j], discrete[A.at(l, j) - 1], w[j], discrete[j - 1],
                                 opt, kpen, &chosen);
    spec.edge(l, j) = chosen;
    if (trace) trace->predictor.push_back(std::move(rec));
  };

  for (int j = 2; j <= dim; ++j) pick(1, j);

  // Prefix maxima and the conditioned-score demand flags of the block.
  std::vector<int> M(std::size_t(dim + 1) * (dim + 1), 0);
  auto mat = [&](int k, int j) -> int& { return M[std::size_t(k) * (dim + 1) + j]; };
  for (int j = 2; j <= dim; ++j) {
    int mx = 0;
    for (int k = 1; k < j; ++k) {
      mx = std::max(mx, A.at(k, j));
      mat(k, j) = mx;
    }
  }
  std::vector<std::uint8_t> need(std::size_t(dim + 1) * (dim + 1), 0);
  for (int l = 2; l <= dim - 1; ++l)
    for (int j = l + 1; j <= dim; ++j)
      if (A.at(l, j) != mat(l, j)) need[std::size_t(l) * (dim + 1) + mat(l, j)] = 1;

  std::vector<std::vector<UScorePair>> v(dim + 1), q(dim + 1);
  for (int j = 1; j <= dim; ++j) {
    v[j].resize(n);
    q[j].resize(n);
  }

  for (int l = 2; l <= dim - 1; ++l) {
    for (int j = l; j <= dim; ++j) {
      const Bicop& c = spec.edge(l - 1, j);
      bool needq = need[std::size_t(l) * (dim + 1) + j] != 0;
      for (std::size_t i = 0; i < n; ++i) {
        double s1 = s[j][i].plus, s0 = s[j][i].minus;
        double w1 = w[j][i].plus, w0 = w[j][i].minus;
        double vp, vm;
        double mass_s = s1 - s0;
        if (mass_s > kMinMass) {
          vp = clamp_unit(c.cdf_diff1(s0, s1, w1) / mass_s);
          vm = (w1 != w0) ? clamp_unit(c.cdf_diff1(s0, s1, w0) / mass_s) : vp;
        } else {
          vp = c.hfunc1(s1, w1);
          vm = (w1 != w0) ? c.hfunc1(s1, w0) : vp;
        }
        if (vm > vp) vm = vp;
        v[j][i] = {vp, vm};
        if (needq) {
          double qp, qm;
          double mass_w = w1 - w0;
          if (mass_w > kMinMass) {
            qp = clamp_unit(c.cdf_diff1(w0, w1, s1) / mass_w);
            qm = (s1 != s0) ? clamp_unit(c.cdf_diff1(w0, w1, s0) / mass_w) : qp;
          } else {
            qp = c.hfunc2(s1, w1);
            qm = (s1 != s0) ? c.hfunc2(s0, w1) : qp;
          }
          if (qm > qp) qm = qp;
          q[j][i] = {qp, qm};
        }
      }
    }
    for (int j = l + 1; j <= dim; ++j) {
      int mlj = mat(l, j);
      s[j] = A.at(l, j) == mlj ? v[mlj] : q[mlj];
      w[j] = v[j];
    }
    for (int j = l + 1; j <= dim; ++j) pick(l, j);
  }

  std::string serr = spec.validate();
  if (!serr.empty()) throw std::logic_error("select_predictor_edges: " + serr);
  return spec;
}

VineSpec select_response_edges(VineSpec spec, const std::vector<std::vector<UScorePair>>& u,
                               const std::vector<int>& status, const SelectOptions& opt,
                               SelectionTrace* trace) {
  std::string err = spec.validate();
  if (!err.empty()) throw std::invalid_argument("select_response_edges: " + err);
  int d = spec.A.d;
  if (d < 2) throw std::invalid_argument("select_response_edges: need at least 2 variables");
  if (spec.discrete[d - 1])
    throw std::invalid_argument("select_response_edges: response must be continuous");
  if (!spec.flipped.empty() && spec.flipped[d - 1])
    throw std::invalid_argument("select_response_edges: response cannot be flipped");
  std::size_t n = u.size();
  if (n < 10) throw std::invalid_argument("select_response_edges: need at least 10 rows");
  if (status.size() != n) throw std::invalid_argument("select_response_edges: status size");
  bool any_event = false;
  for (int sd : status) {
    if (sd != 0 && sd != 1)
      throw std::invalid_argument("select_response_edges: status entries must be 0 or 1");
    any_event = any_event || sd == 1;
  }
  if (!any_event) throw std::invalid_argument("select_response_edges: no observed events");
  for (const auto& row : u)
    if (int(row.size()) != d) throw std::invalid_argument("select_response_edges: row width");

  int L = d - 1;
  double kpen = opt.criterion == Criterion::aic ? 2.0 : std::log(double(n));

  std::vector<ResponseWorkspace> ws;
  ws.reserve(n);
  std::vector<double> uy(n);
  for (std::size_t i = 0; i < n; ++i) {
    ws.push_back(response_workspace(spec, u[i]));
    uy[i] = u[i][d - 1].plus;
  }
  ResponseSearch search(std::move(ws), std::move(uy), status);

  // Predictor-edge contribution: with an independent response column the full
  // loglik splits, and this constant drops out of candidate comparisons.
  VineSpec part = spec;
  for (int l = 1; l <= L; ++l) part.edge(l, d) = Bicop();
  double pred_ll = loglik_censored(part, u, status).loglik
                   - search.loglik(std::vector<Bicop>(L));

  std::vector<Bicop> rc(L, Bicop(BicopFamily::gaussian, {0.2}));
  search.optimize_levels(rc, L - 1, 6, 1e-6);  // Gaussian start, kept above the active level

  for (int l = 0; l < L; ++l) {
    if (!opt.reopt_every_candidate && l > 0) search.optimize_levels(rc, l - 1, 4, 1e-6);
    EdgeRecord rec;
    rec.level = l + 1;
    rec.column = d;
    double bestC = kInf;
    std::vector<Bicop> bestRc;
    std::vector<BicopFamily> fams = opt.candidates;
    fams.push_back(BicopFamily::indep);  // implicit fallback, wins only outright
    for (BicopFamily fam : fams) {
      EdgeTrial tr;
      tr.family = family_code(fam);
      try {
        std::vector<Bicop> trial = rc;
        trial[l] = seed_bicop(fam);
        double rll;
        int npen = 0;
        if (opt.reopt_every_candidate) {
          if (family_param_count(fam) > 0) search.optimize_edge(trial, l, true);
          rll = search.optimize_levels(trial, l, 4, 1e-6);
          for (int k = 0; k <= l; ++k) npen += family_param_count(trial[k].family());
        } else {
          rll = family_param_count(fam) > 0 ? search.optimize_edge(trial, l, true)
                                            : search.loglik(trial);
          npen = family_param_count(fam);
        }
        tr.params = trial[l].par();
        tr.loglik = pred_ll + rll;
        tr.criterion = -2.0 * tr.loglik + kpen * npen;
        if (std::isfinite(tr.criterion) && tr.criterion < bestC - 1e-12) {
          bestC = tr.criterion;
          bestRc = std::move(trial);
          rec.chosen = tr.family;
        }
      } catch (const std::exception&) {
        tr.loglik = -kInf;
        tr.criterion = kInf;
      }
      rec.trials.push_back(std::move(tr));
    }
    if (bestRc.empty()) {
      std::cerr << "select_response_edges: every candidate failed at level " << (l + 1)
                << ", keeping the Gaussian placeholder\n";
      rec.chosen = "N";
    } else {
      rc = std::move(bestRc);
    }
    if (trace) trace->response.push_back(std::move(rec));
  }

  double stepwise = search.loglik(rc);
  double joint = search.optimize_levels(rc, L - 1, 20, 1e-8);
  for (int l = 1; l <= L; ++l) spec.edge(l, d) = rc[l - 1];
  if (trace) {
    trace->stepwise_loglik = pred_ll + stepwise;
    trace->final_loglik = pred_ll + std::max(stepwise, joint);
  }
  return spec;
}

std::string SelectionTrace::to_json() const {
  nlohmann::json root;
  auto dump = [](const std::vector<EdgeRecord>& recs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const EdgeRecord& r : recs) {
      nlohmann::json jr{{"level", r.level}, {"column", r.column}, {"chosen", r.chosen}};
      nlohmann::json tarr = nlohmann::json::array();
      for (const EdgeTrial& t : r.trials)
        tarr.push_back({{"family", t.family},
                        {"params", t.params},
                        {"loglik", t.loglik},
                        {"criterion", t.criterion}});
      jr["trials"] = std::move(tarr);
      arr.push_back(std::move(jr));
    }
    return arr;
  };
  root["predictor"] = dump(predictor);
  root["response"] = dump(response);
  root["stepwise_loglik"] = stepwise_loglik;
  root["final_loglik"] = final_loglik;
  return root.dump(2);
}

}  // namespace survine
