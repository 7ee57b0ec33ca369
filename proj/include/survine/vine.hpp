#pragma once
// R-vine arrays, the censored vine log-likelihood, conditional CDF/quantile of
// the last variable, and mixed-variable simulation. All vine-level evaluation
// takes model-space u-pairs: PIT scores with any orientation flips already
// applied. Raw data crosses the x -> u boundary exactly once, in pit_row.
#include <cstdint>
#include <string>
#include <vector>

#include "survine/bicop.hpp"
#include "survine/margins.hpp"

namespace survine {

// Upper-triangular array a_kj, 1-based accessors, entries are variable labels
// 1..d. Valid arrays have a permutation of 1..d on the diagonal and satisfy
// the column condition: for every j and level l < j there is a k in {l..j-1}
// with {a_1j..a_lj} == {a_1k..a_{l-1,k}, a_kk}.
struct VineArray {
  int d = 0;
  std::vector<int> a;  // row-major d*d; zero below the diagonal

  static VineArray zeros(int dim);
  int at(int k, int j) const { return a[std::size_t(k - 1) * d + (j - 1)]; }
  int& at(int k, int j) { return a[std::size_t(k - 1) * d + (j - 1)]; }

  // Empty string when valid, otherwise the first violation found.
  std::string validate() const;

  // The label at (d,d) appears nowhere else: that variable is a leaf in every
  // tree, the shape required of the response column.
  bool last_is_leaf() const;

  // Relabel variables so the diagonal reads 1..d. perm (if given) receives the
  // old label for each new label: perm[new-1] = old.
  VineArray normalized(std::vector<int>* perm = nullptr) const;
};

// Full model: array (normalized, a_jj = j, response = d when present), one
// Bicop per edge (level l, column j), per-variable discreteness, margins, and
// orientation flags (variable modeled on 1-u).
struct VineSpec {
  VineArray A;
  std::vector<Bicop> edges;       // packed d*d, row-major (level, column)
  std::vector<bool> discrete;     // size d
  std::vector<MarginSpec> margins;  // size d, or empty for pure-copula specs
  std::vector<bool> flipped;        // size d or empty; response entry false
  std::vector<std::string> names;   // optional, normalized order

  const Bicop& edge(int l, int j) const { return edges[std::size_t(l - 1) * A.d + (j - 1)]; }
  Bicop& edge(int l, int j) { return edges[std::size_t(l - 1) * A.d + (j - 1)]; }

  std::string validate() const;  // array validity, sizes, diagonal 1..d
};

struct LoglikResult {
  double loglik = 0.0;
  int clamped = 0;  // per-term floors applied at log(1e-300)
};

// Censored vine copula log-likelihood. u[i] holds model-space score pairs for
// all d variables of subject i (the response pair has plus == minus); status
// is 1 for an observed event, 0 for right censoring. The response must be the
// continuous variable d. Margin terms are excluded: they are constant in the
// copula parameters.
LoglikResult loglik_censored(const VineSpec& spec,
                             const std::vector<std::vector<UScorePair>>& u,
                             const std::vector<int>& status);

// Per-subject response-column state: the conditioned scores s_l of variable
// a_ld at each level, which depend only on predictor-column edges. Response
// edge copulas enter separately so selection can swap them without redoing
// the pass.
struct ResponseWorkspace {
  std::vector<double> sp, sm;   // s pairs, level 1..d-1
  std::vector<uint8_t> disc;    // discreteness of a_ld per level
  double pred_ll = 0.0;         // predictor-edge log c-tilde total
  int clamped = 0;
};

// xrow_u: model-space pairs for variables 1..d-1 (a full d row is accepted,
// the response entry is ignored).
ResponseWorkspace response_workspace(const VineSpec& spec,
                                     const std::vector<UScorePair>& xrow_u);

// Response-column copulas, level order; rcops[l-1] models edge (l, d).
std::vector<Bicop> response_edges(const VineSpec& spec);

// pi(u|x) composed from the workspace folds; nondecreasing in u.
double cond_cdf(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u);
// Sum of response-column log c-tilde terms for an event at F_Y(y) = u.
double cond_loglik_event(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u,
                         int* clamped = nullptr);
// log(1 - pi(u|x)) with a tail-accurate terminal term.
double cond_logsurv(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double u,
                    int* clamped = nullptr);
// Bisection on (1e-10, 1-1e-10) until |pi - q| <= 1e-9.
double cond_quantile(const ResponseWorkspace& w, const std::vector<Bicop>& rcops, double q);

double conditional_cdf(const VineSpec& spec, const std::vector<UScorePair>& xrow_u, double u);
double conditional_quantile(const VineSpec& spec, const std::vector<UScorePair>& xrow_u,
                            double q);

// x -> model-space u for the d-1 covariates (margins required). warned flags
// out-of-support snapping.
std::vector<UScorePair> pit_row(const VineSpec& spec, const std::vector<double>& xrow,
                                bool* warned = nullptr);

// Response quantile on the original scale for covariate row x.
double predict_quantile(const VineSpec& spec, const std::vector<double>& xrow, double q);

// Joint density (margins times copula terms) at a fully observed row of all d
// variables; discrete coordinates contribute their probability mass.
double density_uncensored(const VineSpec& spec, const std::vector<double>& row);

// Diagonal-order simulation; returns n rows of d natural-scale values.
// Continuous variables invert the conditional CDF level by level; discrete
// variables are bucketed by conditional masses of their categories.
std::vector<std::vector<double>> simulate(const VineSpec& spec, int n, std::uint64_t seed);

}  // namespace survine
