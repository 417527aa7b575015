#pragma once

#include <array>
#include <cstddef>

#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

// Pr(Z = 1) under the eq2 reading: sigmoid(b0 + b1*mu).
double logistic_prob(const std::array<double, 2>& beta, double mu);

// Pr(Z = 1) under the configured convention.
double observed_prob(const std::array<double, 2>& beta, double mu, SignConvention c);

// Maps beta to the coefficients of logit(Pr(Z=1)) under the convention, so
// downstream sums can treat both conventions uniformly.
std::array<double, 2> observed_logit_coeffs(const std::array<double, 2>& beta,
                                            SignConvention c);

// Unnormalized log full conditional of beta: bivariate Gaussian prior
// (truncated to beta1 > 0 when configured) plus the Bernoulli terms over all
// cells with mu_ij = theta_ik + delta_j. Returns -inf outside the support.
double log_target_beta(const std::array<double, 2>& beta, const ChainState& state,
                       const Dataset& data, const ModelConfig& config);

// Unnormalized log full conditional of theta_{ik} at `candidate`: Gaussian
// prior around theta0, Gaussian likelihood of the replicates in type k
// (missing y taken from the current augmentation), and the type's Bernoulli
// terms.
double log_target_theta(std::size_t gene, std::size_t type, double candidate,
                        const ChainState& state, const Dataset& data,
                        const ModelConfig& config);

// log N2(beta; mu, cov) with cov 2x2 row-major SPD.
double bivariate_normal_logpdf(const std::array<double, 2>& x,
                               const std::array<double, 2>& mean,
                               const std::array<double, 4>& cov);

namespace detail {

// Shared cores. The public operations gather into flat buffers and call
// these; the sampler calls them directly on its workspace.

// Coefficients must already be convention-adjusted.
double bernoulli_loglik(const double* mu, const double* zsign, std::size_t n,
                        double b0, double b1);

double theta_block_logpdf(double candidate, const double* y, const double* delta,
                          const double* zsign, std::size_t n, double sigma2,
                          double gamma2, double theta0, double b0_adj, double b1_adj);

void check_state_dims(const ChainState& state, const Dataset& data);

}  // namespace detail

}  // namespace qpcrfbi
