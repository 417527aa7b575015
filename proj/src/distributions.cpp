#include "qpcrfbi/distributions.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpcrfbi/mathutil.hpp"
#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogTinyMass = -690.77552789821368;  // log(1e-300)
}  // namespace

double ScaledInvChiSq::log_density(double v) const {
  if (v <= 0.0) return -kInf;
  double a = 0.5 * nu;
  double b = 0.5 * s;
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(v) - b / v;
}

double ScaledInvChiSq::mean() const {
  return nu > 2.0 ? (0.5 * s) / (0.5 * nu - 1.0) : kInf;
}

double gamma_q(double a, double x) { return boost::math::gamma_q(a, x); }
double gamma_q_inv(double a, double q) { return boost::math::gamma_q_inv(a, q); }

double draw_gamma(double shape, Rng& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("draw_gamma: shape must be > 0");
  if (shape < 1.0) {
    // Marsaglia-Tsang boost; log space so small shapes do not underflow early.
    double g = draw_gamma(shape + 1.0, rng);
    double u = rng.u01();
    return std::exp(std::log(g) + std::log(u) / shape);
  }
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    double u = rng.u01();
    double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double draw_inverse_gamma(double shape, double scale, Rng& rng) {
  if (!(scale > 0.0)) throw std::invalid_argument("draw_inverse_gamma: scale must be > 0");
  double g = 0.0;
  do {
    g = draw_gamma(shape, rng);
  } while (g <= 0.0);
  return scale / g;
}

double draw_scaled_inv_chisq(double nu, double s, Rng& rng) {
  if (!(nu > 0.0)) throw std::invalid_argument("draw_scaled_inv_chisq: nu must be > 0");
  if (!(s > 0.0)) throw std::invalid_argument("draw_scaled_inv_chisq: S must be > 0");
  return draw_inverse_gamma(0.5 * nu, 0.5 * s, rng);
}

double draw_inverse_gamma_capped(double shape, double scale, double cap, Rng& rng) {
  if (!(cap > 0.0)) throw std::invalid_argument("variance cap must be > 0");
  if (cap == kInf) return draw_inverse_gamma(shape, scale, rng);

  // Pr(v <= cap) = Pr(Gamma(shape) >= scale/cap)
  double accept = gamma_q(shape, scale / cap);
  if (!(accept > 1e-300)) {
    throw DegenerateStateError(
        "truncated variance conditional has no numerically representable mass");
  }
  if (accept >= 1e-3) {
    for (;;) {
      double v = draw_inverse_gamma(shape, scale, rng);
      if (v <= cap) return v;
    }
  }
  // Inverse CDF through the upper incomplete gamma.
  double u = rng.u01();
  double g = gamma_q_inv(shape, u * accept);
  return scale / g;
}

double draw_scaled_inv_chisq_capped(double nu, double s, double cap, Rng& rng) {
  if (!(nu > 0.0)) throw std::invalid_argument("draw_scaled_inv_chisq: nu must be > 0");
  if (!(s > 0.0)) throw std::invalid_argument("draw_scaled_inv_chisq: S must be > 0");
  return draw_inverse_gamma_capped(0.5 * nu, 0.5 * s, cap, rng);
}

namespace {

// Standardized truncated normal on (a, b) with b > 0. Exact rejection
// samplers for each regime; the regime split only affects efficiency.
double draw_std_truncnorm(double a, double b, Rng& rng) {
  if (a <= 0.0) {
    // erf keeps both halves cancellation-free around 0
    double mass = 0.5 * (std::erf(b * 0.7071067811865475244) +
                         std::erf(-a * 0.7071067811865475244));
    if (!(mass > 1e-300)) {
      throw DegenerateStateError("truncated normal: interval mass below 1e-300");
    }
    if (mass >= 0.25) {
      for (;;) {
        double x = rng.normal();
        if (x > a && x < b) return x;
      }
    }
    // narrow window containing the mode
    for (;;) {
      double x = rng.uniform(a, b);
      if (std::log(rng.u01()) <= -0.5 * x * x) return x;
    }
  }

  // right tail: 0 < a < b
  double log_mass;
  if (b == kInf) {
    log_mass = log_norm_sf(a);
  } else {
    double d = log_norm_sf(a) - log_norm_sf(b);  // >= 0
    log_mass = log_norm_sf(a) + std::log(-std::expm1(-d));
  }
  if (log_mass < kLogTinyMass) {
    throw DegenerateStateError("truncated normal: interval mass below 1e-300");
  }

  double mass = norm_sf(a) - (b == kInf ? 0.0 : norm_sf(b));
  if (mass >= 0.25) {
    for (;;) {
      double x = rng.normal();
      if (x > a && x < b) return x;
    }
  }

  double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  if (b - a <= 2.0 / lambda) {
    // window too narrow for the exponential proposal to land inside often
    for (;;) {
      double x = rng.uniform(a, b);
      if (std::log(rng.u01()) <= 0.5 * (a * a - x * x)) return x;
    }
  }
  // translated exponential proposal (Robert)
  for (;;) {
    double x = a - std::log(rng.u01()) / lambda;
    if (x >= b) continue;
    double diff = x - lambda;
    if (std::log(rng.u01()) <= -0.5 * diff * diff) return x;
  }
}

}  // namespace

double draw_truncated_normal(double mu, double sigma, double lower, double upper,
                             Rng& rng) {
  if (!(sigma > 0.0)) throw std::invalid_argument("truncated normal: sigma must be > 0");
  if (!(lower < upper)) throw std::invalid_argument("truncated normal: need lower < upper");
  double a = (lower - mu) / sigma;
  double b = (upper - mu) / sigma;
  if (b <= 0.0) return mu - sigma * draw_std_truncnorm(-b, -a, rng);
  return mu + sigma * draw_std_truncnorm(a, b, rng);
}

std::array<double, 2> draw_bivariate_normal(const std::array<double, 2>& mean,
                                            const std::array<double, 4>& cov,
                                            Rng& rng) {
  double c00 = cov[0], c01 = cov[1], c10 = cov[2], c11 = cov[3];
  double scale = std::fabs(c00) + std::fabs(c11);
  if (std::fabs(c01 - c10) > 1e-12 * std::max(scale, 1.0)) {
    throw std::invalid_argument("bivariate normal: covariance not symmetric");
  }
  if (c00 < 0.0 || c11 < 0.0) {
    throw std::invalid_argument("bivariate normal: covariance not PSD");
  }
  double l00 = std::sqrt(c00);
  double l10 = 0.0;
  if (c00 > 0.0) {
    l10 = c01 / l00;
  } else if (c01 != 0.0) {
    throw std::invalid_argument("bivariate normal: covariance not PSD");
  }
  double disc = c11 - l10 * l10;
  if (disc < -1e-10 * std::max(scale, 1.0)) {
    throw std::invalid_argument("bivariate normal: covariance not PSD");
  }
  double l11 = std::sqrt(std::max(disc, 0.0));
  double n0 = rng.normal();
  double n1 = rng.normal();
  return {mean[0] + l00 * n0, mean[1] + l10 * n0 + l11 * n1};
}

double draw_uniform(double a, double b, Rng& rng) {
  if (!(a < b)) throw std::invalid_argument("draw_uniform: need a < b");
  return rng.uniform(a, b);
}

int draw_bernoulli(double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("draw_bernoulli: p outside [0,1]");
  return rng.bernoulli(p) ? 1 : 0;
}

}  // namespace qpcrfbi
