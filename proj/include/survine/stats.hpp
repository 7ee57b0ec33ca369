#pragma once
// Scalar distribution kernels shared by every module. All cdf-like outputs are
// clamped to [0,1]; quantile-like inputs must already lie in (0,1).
#include <cstdint>
#include <functional>

namespace survine {

inline constexpr double kUnitEps = 1e-10;   // working open-interval bound for u-scale values
inline constexpr double kLogFloor = -690.77552789821368;  // log(1e-300), underflow clamp

double clamp_unit(double u);                // clamp into [kUnitEps, 1-kUnitEps]
double clamp01(double u);                   // clamp into [0, 1]

double norm_pdf(double x);
double norm_logpdf(double x);
double norm_cdf(double x);
double norm_sf(double x);                   // 1 - Phi(x), accurate in the far tail
double norm_logsf(double x);                // log(1 - Phi(x)), usable for x up to ~1e8
double norm_quantile(double p);             // Wichura-style rational approximation

// P(X <= x, Y <= y) for standard bivariate normal with correlation rho.
// Hybrid Drezner-Wesolowsky/Genz quadrature, abs error below 1e-14.
double bvn_cdf(double x, double y, double rho);

double t_pdf(double x, double nu);
double t_logpdf(double x, double nu);
double t_cdf(double x, double nu);
double t_sf(double x, double nu);           // 1 - t_cdf(x), accurate in the tail
double t_quantile(double p, double nu);

double owens_t(double h, double a);

// Regularized incomplete gamma P(a, x), Q(a, x) = 1 - P, and the inverse of P.
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double gamma_p_inv(double a, double p);

// Adaptive Simpson on [a, b]; tol is an absolute error target.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol, int max_depth = 28);

// Deterministic stream derivation: distinct (stream, substream) pairs give
// independent mt19937_64 seeds for one master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t substream = 0);

}  // namespace survine
