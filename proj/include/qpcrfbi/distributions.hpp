#pragma once

#include <array>

#include "qpcrfbi/rng.hpp"

namespace qpcrfbi {

// Scaled inverse chi-squared with density proportional to
// v^{-(nu/2+1)} exp(-s/(2v)), i.e. InverseGamma(nu/2, s/2); the second
// argument is the raw sum of squares.
struct ScaledInvChiSq {
  double nu;  // degrees of freedom, > 0
  double s;   // sum of squares, > 0
  double log_density(double v) const;
  double mean() const;  // finite for nu > 2
};

struct TruncatedNormal {
  double mu;
  double sigma;  // > 0
  double lower;  // may be -inf
  double upper;  // may be +inf, lower < upper
};

// Gamma(shape, rate 1). Marsaglia-Tsang; shapes below 1 are boosted in log
// space so small-shape draws do not underflow to zero prematurely.
double draw_gamma(double shape, Rng& rng);

// InverseGamma(shape, scale): density ~ x^{-(shape+1)} exp(-scale/x).
double draw_inverse_gamma(double shape, double scale, Rng& rng);

double draw_scaled_inv_chisq(double nu, double s, Rng& rng);

// Scaled inverse chi-squared conditioned on v <= cap. Rejection against the
// cap while the acceptance probability stays above 1e-3, inverse CDF below
// that.
double draw_scaled_inv_chisq_capped(double nu, double s, double cap, Rng& rng);
double draw_inverse_gamma_capped(double shape, double scale, double cap, Rng& rng);

// Exact draw from N(mu, sigma^2) restricted to (lower, upper). Works for
// truncation regions many sigma into a tail; throws DegenerateStateError if
// the region's mass is below ~1e-300.
double draw_truncated_normal(double mu, double sigma, double lower, double upper,
                             Rng& rng);
inline double draw_truncated_normal(const TruncatedNormal& tn, Rng& rng) {
  return draw_truncated_normal(tn.mu, tn.sigma, tn.lower, tn.upper, rng);
}

// cov is 2x2 row-major and must be symmetric positive semidefinite.
std::array<double, 2> draw_bivariate_normal(const std::array<double, 2>& mean,
                                            const std::array<double, 4>& cov,
                                            Rng& rng);

double draw_uniform(double a, double b, Rng& rng);
int draw_bernoulli(double p, Rng& rng);

// Regularized upper incomplete gamma Q(a, x) and its inverse in x; used for
// the truncated variance conditionals.
double gamma_q(double a, double x);
double gamma_q_inv(double a, double q);

}  // namespace qpcrfbi
