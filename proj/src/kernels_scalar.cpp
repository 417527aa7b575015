#include "qpcrfbi/kernels.hpp"

#include <cmath>

#include "qpcrfbi/mathutil.hpp"

namespace qpcrfbi::kernels {
namespace {

double bernoulli_loglik_scalar(const double* mu, const double* zsign, std::size_t n,
                               double b0, double b1) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double t = b0 + b1 * mu[j];
    acc += softplus(-zsign[j] * t);
  }
  return -acc;
}

double ssq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j] - b[j];
    acc += d * d;
  }
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += x[j];
  return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

void logistic_probs_scalar(const double* mu, std::size_t n, double b0, double b1,
                           double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = sigmoid(b0 + b1 * mu[j]);
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend{
      "scalar",         bernoulli_loglik_scalar, ssq_diff_scalar,
      sum_scalar,       dot_scalar,              logistic_probs_scalar,
  };
  return backend;
}

}  // namespace qpcrfbi::kernels
