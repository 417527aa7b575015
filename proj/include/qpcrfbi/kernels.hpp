#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace qpcrfbi::kernels {

// Data-parallel inner loops the sampler and diagnostics spend their time in.
// Each entry has a scalar reference implementation and, on capable x86 CPUs,
// an AVX2 variant; the active backend is chosen once at startup (cpuid, or
// the QPCRFBI_KERNELS environment variable) and the variants are
// equivalence-tested against each other.
struct Backend {
  const char* name;

  // Sum over j of log Bernoulli(z_j; p_j) with logit(p_j) = b0 + b1*mu_j.
  // zsign holds +1 for z=1 and -1 for z=0.
  double (*bernoulli_loglik)(const double* mu, const double* zsign, std::size_t n,
                             double b0, double b1);

  // Sum of squared differences: sum (a_j - b_j)^2.
  double (*ssq_diff)(const double* a, const double* b, std::size_t n);

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);

  // out_j = sigmoid(b0 + b1*mu_j).
  void (*logistic_probs)(const double* mu, std::size_t n, double b0, double b1,
                         double* out);
};

const Backend& scalar_backend();
const Backend& active();

// Force a backend by name ("scalar", "avx2"); false if unavailable.
bool select(std::string_view name);
std::vector<std::string_view> available();

}  // namespace qpcrfbi::kernels
