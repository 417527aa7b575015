#pragma once

#include <cmath>

namespace qpcrfbi {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// log(1 + exp(x)), stable over the whole double range.
inline double softplus(double x) {
  double a = std::fabs(x);
  double t = a > 745.0 ? 0.0 : std::log1p(std::exp(-a));
  return (x > 0.0 ? x : 0.0) + t;
}

// 1 / (1 + exp(-t)); saturates cleanly at extreme logits.
inline double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

inline double norm_pdf(double x) {
  return 0.39894228040143267793994605993438 * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }
inline double norm_sf(double x) { return 0.5 * std::erfc(x * 0.7071067811865475244); }

// log Pr(N(0,1) > x), usable far beyond where erfc underflows.
double log_norm_sf(double x);

inline double normal_logpdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

}  // namespace qpcrfbi
