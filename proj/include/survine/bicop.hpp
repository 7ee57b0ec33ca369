#pragma once
// Bivariate copula families and the mixed-scale pair mass used throughout the
// vine machinery. Family codes follow the usual survival-literature notation:
// N, t, F, G, G.s (180-degree rotated Gumbel), BB1, plus I for independence.
#include <string>
#include <string_view>
#include <vector>

namespace survine {

enum class BicopFamily { indep, gaussian, student_t, frank, gumbel, survival_gumbel, bb1 };

std::string family_code(BicopFamily f);
BicopFamily family_from_code(std::string_view code);
int family_param_count(BicopFamily f);

// u-scale score pair: cdf at the observed value (plus) and at its left limit
// (minus). Continuous margins have plus == minus.
struct UScorePair {
  double plus = 0.0;
  double minus = 0.0;
};
UScorePair upair(double u);

class Bicop {
 public:
  Bicop() = default;
  Bicop(BicopFamily fam, std::vector<double> params);  // rejects inadmissible params

  BicopFamily family() const { return family_; }
  const std::vector<double>& par() const { return par_; }

  double cdf(double u, double v) const;
  double pdf(double u, double v) const;
  double logpdf(double u, double v) const;

  // hfunc1(u, v) = P(V <= v | U = u); hfunc2(u, v) = P(U <= u | V = v).
  // All six named families are exchangeable, so hfunc2(u, v) = hfunc1(v, u).
  double hfunc1(double u, double v) const;
  double hfunc2(double u, double v) const;
  double hinv1(double u, double p) const;  // v solving hfunc1(u, v) = p
  double hinv2(double p, double v) const;  // u solving hfunc2(u, v) = p

  // 1 - hfunc1(u, v) with full relative accuracy in the upper tail; censored
  // survival terms need this where the plain complement would cancel.
  double hfunc1_sf(double u, double v) const;

  // C(uhi, v) - C(ulo, v), and the rectangle mass over (ulo,uhi] x (vlo,vhi].
  // Family-specific paths avoid cancellation where it matters (Student t).
  double cdf_diff1(double ulo, double uhi, double v) const;
  double cdf_rect(double ulo, double uhi, double vlo, double vhi) const;

 private:
  BicopFamily family_ = BicopFamily::indep;
  std::vector<double> par_;
};

// Mixed-scale pair mass c-tilde: copula density when both margins are
// continuous, finite differences of h-functions over the discrete mass
// otherwise, rectangle probability over the product of masses for two
// discrete margins.
double mixed_pdf(const Bicop& cop, const UScorePair& a, bool disc_a, const UScorePair& b,
                 bool disc_b);
double mixed_logpdf(const Bicop& cop, const UScorePair& a, bool disc_a, const UScorePair& b,
                    bool disc_b);

struct EdgeFit {
  Bicop cop;
  double loglik = 0.0;
  int evals = 0;
  bool converged = false;
};

// Maximum likelihood for one edge on pseudo-observations. One-parameter
// families use a scan-plus-golden search on the natural parameter box;
// two-parameter families use Nelder-Mead multistart on smooth transforms.
EdgeFit fit_edge(BicopFamily fam, const std::vector<UScorePair>& a, bool disc_a,
                 const std::vector<UScorePair>& b, bool disc_b);

}  // namespace survine
