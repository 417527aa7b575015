#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "qpcrfbi/rng.hpp"
#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

// Post-burn-in, thinned draws of every sampled block, flattened draw-major.
struct ChainOutput {
  std::size_t n_genes = 0;
  std::size_t n_types = 0;
  std::size_t n_kept = 0;
  std::vector<std::pair<int, int>> missing_cells;

  std::vector<double> theta;   // n_kept x (n_genes*n_types)
  std::vector<double> sigma2;  // n_kept x n_genes
  std::vector<double> gamma2;  // n_kept x n_genes
  std::vector<double> beta;    // n_kept x 2
  std::vector<double> y_mis;   // n_kept x missing_cells.size()

  double accept_beta = 0.0;   // post-burn-in acceptance rate
  double accept_theta = 0.0;  // pooled over all (gene, type) moves
  SamplerSettings settings;   // echo, seed included

  std::size_t n_theta_params() const { return n_genes * n_types; }
  double theta_draw(std::size_t d, std::size_t i, std::size_t k) const {
    return theta[d * n_theta_params() + i * n_types + k];
  }
  // Column view of one scalar parameter's trace.
  std::vector<double> theta_series(std::size_t i, std::size_t k) const;
  std::vector<double> sigma2_series(std::size_t i) const;
  std::vector<double> gamma2_series(std::size_t i) const;
  std::vector<double> beta_series(std::size_t which) const;
  std::vector<double> y_mis_series(std::size_t m) const;

  bool operator==(const ChainOutput&) const = default;
};

// One-block updates. Each is a pure draw from (or MH step on) the block's
// full conditional given the rest of `state`; none of them mutates its
// arguments.

// gamma2_i ~ ScaledInvChiSq over the gene's type means centered at theta0,
// truncated to the prior's support for the uniform priors, exact
// inverse-gamma posterior for the inverse-gamma prior.
std::vector<double> update_gamma2(const ChainState& state, const Priors& priors,
                                  std::size_t n_types, Rng& rng);

// sigma2_i from the gene's residuals over all samples, imputed cells included.
std::vector<double> update_sigma2(const ChainState& state, const Dataset& data,
                                  const Priors& priors, Rng& rng);

struct ThetaUpdate {
  std::vector<double> theta;
  int accepted = 0;
  int proposed = 0;
};

// Per-(gene, type) Metropolis-Hastings with the conjugate Gaussian part of
// the conditional as an independence proposal.
ThetaUpdate update_theta(const ChainState& state, const Dataset& data,
                         const ModelConfig& config, Rng& rng);

struct BetaUpdate {
  std::array<double, 2> beta;
  bool accepted = false;
};

// Gaussian random-walk step; proposals with beta1 <= 0 are rejected outright
// when the prior is truncated.
BetaUpdate update_beta(const ChainState& state, const Dataset& data,
                       const ModelConfig& config,
                       const std::array<double, 2>& steps, Rng& rng);

// Draw each missing y from its full conditional: a two-component truncated
// normal mixture, below and above the detection bound.
std::vector<double> impute_missing_y(const ChainState& state, const Dataset& data,
                                     const ModelConfig& config, Rng& rng);

// Initial state used by run_chain when settings.init is absent.
ChainState default_init(const Dataset& data, const Priors& priors,
                        const SamplerSettings& settings);

// Sweep order: impute, theta, sigma2, gamma2, beta. Identical inputs and
// seed give bit-identical output.
ChainOutput run_chain(const Dataset& data, const Priors& priors,
                      const SamplerSettings& settings);

// Independent chains with seeds settings.seed, settings.seed+1, ...; runs
// them on up to n_threads threads.
std::vector<ChainOutput> run_chains(const Dataset& data, const Priors& priors,
                                    const SamplerSettings& settings,
                                    int n_chains, int n_threads = 0);

// Concatenates kept draws of several chains over the same data (for pooled
// estimation).
ChainOutput pool_chains(const std::vector<ChainOutput>& chains);

}  // namespace qpcrfbi
