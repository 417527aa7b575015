#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "qpcrfbi/rng.hpp"
#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

// Synthetic MNAR qPCR experiment: complete Gaussian data first, then a
// logistic missingness pass, then the hard detection bound.
struct SimConfig {
  int n_genes = 16;
  int n_types = 6;
  int reps_per_type = 6;
  std::array<double, 2> beta_true{-35.7, 1.0};
  double sigma_theta_sq = 3.0;      // variance of theta around its gene mean
  double mu_theta_mean = 31.0;
  double mu_theta_sd = 1.8708286933869706927918743661578;  // sqrt(3.5)
  std::array<double, 2> mu_theta_bounds{20.0, 40.5};
  std::array<double, 2> sigma2_range{0.06, 1.3};
  std::vector<double> delta;  // per-sample shift; empty means all zero
  double detection_bound = 40.0;
  SignConvention convention = SignConvention::inverted;
  std::uint64_t seed = 1;

  int n_samples() const { return n_types * reps_per_type; }
  void validate() const;
};

// Latent values behind one simulated dataset, kept for scoring.
struct TruthRecord {
  std::size_t n_genes = 0;
  std::size_t n_types = 0;
  std::size_t n_samples = 0;
  std::vector<double> theta;       // n_genes * n_types
  std::vector<double> sigma2;      // n_genes
  std::vector<double> mu_theta;    // n_genes
  std::vector<double> complete_y;  // n_genes * n_samples, before removal
  std::array<double, 2> beta_true{0, 0};
  SignConvention convention = SignConvention::inverted;
  std::uint64_t seed = 0;

  bool operator==(const TruthRecord&) const = default;
};

// Latent true parameters only (theta, sigma2, mu_theta); complete_y is left
// empty until a noise pass fills it.
TruthRecord draw_latents(const SimConfig& config, Rng& rng);

// Complete data, missingness indicators and the detection bound applied on
// top of fixed latents. Used directly by replicated studies, where the
// latents are drawn once and held fixed across replicates.
std::pair<Dataset, TruthRecord> simulate_from_latents(const SimConfig& config,
                                                      const TruthRecord& latents,
                                                      Rng& rng);

std::pair<Dataset, TruthRecord> simulate_dataset(const SimConfig& config, Rng& rng);
inline std::pair<Dataset, TruthRecord> simulate_dataset(const SimConfig& config) {
  Rng rng(config.seed);
  return simulate_dataset(config, rng);
}

struct TruncationReport {
  int cells_truncated = 0;
  // (gene, type) pairs left with no observed replicate.
  std::vector<std::pair<int, int>> emptied_blocks;
};

// Copy of `data` where every observed value >= threshold becomes a
// non-detect; the copy's detection bound is the threshold.
std::pair<Dataset, TruncationReport> truncate_dataset(const Dataset& data,
                                                      double threshold);

}  // namespace qpcrfbi
