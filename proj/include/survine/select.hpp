#pragma once
// Model selection: vine structure from the dependence matrix, sequential
// family choice for predictor edges, and stepwise response-edge selection
// under right censoring.
#include <string>
#include <vector>

#include "survine/assoc.hpp"
#include "survine/bicop.hpp"
#include "survine/vine.hpp"

namespace survine {

enum class Criterion { aic, bic };

struct SelectOptions {
  std::vector<BicopFamily> candidates{BicopFamily::gaussian,  BicopFamily::student_t,
                                      BicopFamily::frank,     BicopFamily::gumbel,
                                      BicopFamily::survival_gumbel, BicopFamily::bb1};
  Criterion criterion = Criterion::aic;
  // Response-edge stepwise search: re-estimate all lower response-edge
  // parameters inside every candidate evaluation. false refreshes them once
  // per level instead, which is cheaper and usually lands on the same family.
  bool reopt_every_candidate = true;
};

struct EdgeTrial {
  std::string family;
  std::vector<double> params;
  double loglik = 0.0;
  double criterion = 0.0;
};

struct EdgeRecord {
  int level = 0;
  int column = 0;
  std::vector<EdgeTrial> trials;
  std::string chosen;
};

struct SelectionTrace {
  std::vector<EdgeRecord> predictor;
  std::vector<EdgeRecord> response;
  double stepwise_loglik = 0.0;  // copula loglik after the stepwise pass
  double final_loglik = 0.0;     // after joint re-optimization
  std::string to_json() const;
};

// Partial correlation from R (0-based indices, conditioning set S).
double partial_correlation(const CorrelationMatrix& R, int a, int b, const std::vector<int>& S);

// Vine array from the dependence matrix (response last). Predictor block:
// maximum spanning trees on absolute (partial) correlations, level by level
// under the proximity condition, peeled into an array. Response column:
// greedy by decreasing |R(X_j, Y)| among candidates the structure permits at
// each level, which keeps the response a leaf in every tree. Labels keep R's
// indexing; the diagonal is a permutation of 1..d with d at (d,d).
VineArray select_structure(const CorrelationMatrix& R);

// Sequential predictor-edge selection on a normalized array (diagonal 1..d).
// u rows hold model-space score pairs in array order; discrete flags one per
// variable. Each edge picks the criterion-best family among the candidates,
// with independence kept whenever no candidate beats it; chosen parameters
// are frozen and pseudo-observations propagate through the fitted copulas.
// The response column is left independent. Requires at least 10 rows.
VineSpec select_predictor_edges(const VineArray& A,
                                const std::vector<std::vector<UScorePair>>& u,
                                const std::vector<bool>& discrete,
                                const SelectOptions& opt = {},
                                SelectionTrace* trace = nullptr);

// Stepwise response-edge selection. Starting from jointly fitted Gaussian
// edges, each level tries every candidate with Gaussian placeholders above,
// scoring the full censored vine loglik; the criterion penalty counts only
// the parameters re-estimated in that comparison. Chosen families are fixed,
// their parameters re-estimated at higher levels, and a final joint
// re-optimization (which cannot decrease the loglik) polishes all response
// parameters. u rows cover all d variables; the response pair is degenerate
// (plus == minus). Requires at least one observed event. If an optimizer
// fails on a candidate the edge falls back to its Gaussian placeholder.
VineSpec select_response_edges(VineSpec spec, const std::vector<std::vector<UScorePair>>& u,
                               const std::vector<int>& status, const SelectOptions& opt = {},
                               SelectionTrace* trace = nullptr);

}  // namespace survine
