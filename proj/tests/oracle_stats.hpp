// Test-side reference implementations, independent of the library's sampling
// and special-function paths: the library draws by rejection and uses
// Boost's incomplete gamma, the oracles here use series/continued fractions
// and inverse-CDF bisection.
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qpcrfbi/rng.hpp"

namespace oracle {

// Regularized incomplete gamma P(a, x) (lower) and Q(a, x) = 1 - P.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double normal_cdf(double x);
// Inverse of normal_cdf by bisection; p in (0, 1).
double normal_quantile(double p);

double inverse_gamma_cdf(double x, double shape, double scale);
double inverse_gamma_median(double shape, double scale);

// Truncated standard normal CDF on (a, b), tail-stable.
double truncnorm_cdf(double x, double mu, double sigma, double a, double b);

// Inverse-CDF sampler for the truncated normal; complementary form keeps
// deep tails accurate.
double draw_truncnorm_ref(double mu, double sigma, double a, double b,
                          qpcrfbi::Rng& rng);

// Chi-squared with integer df as a sum of squared normals.
double draw_chisq_int_ref(int df, qpcrfbi::Rng& rng);

// One-sample KS statistic against a CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
// Two-sample KS statistic.
double ks_statistic2(std::vector<double> a, std::vector<double> b);

double mean_of(const std::vector<double>& v);
double variance_of(const std::vector<double>& v);
double median_of(std::vector<double> v);

// Posterior summaries of a 1-d unnormalized log density on a uniform grid.
struct GridPosterior {
  double mean = 0;
  double variance = 0;
  double median = 0;
  double mode = 0;
};
GridPosterior grid_posterior(const std::function<double(double)>& logpdf, double lo,
                             double hi, std::size_t n);

}  // namespace oracle
