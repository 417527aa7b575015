#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpcrfbi {

// Error categories surfaced by the CLI as distinct exit codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Direction of the logistic missingness model.
//   eq2:      logit(Pr(Z=1)) = b0 + b1 * mu   (detection prob rises with level)
//   inverted: logit(Pr(Z=0)) = b0 + b1 * mu   (non-detect prob rises with level)
// Weak signals amplify late, so larger Ct values are more likely to drop out;
// `inverted` is the reading that matches that mechanism and is the default.
enum class SignConvention { eq2, inverted };

const char* to_string(SignConvention c);
SignConvention sign_convention_from_string(const std::string& s);

// Gene-by-sample matrix of delta-Ct values with an observed/non-detect mask
// and a partition of samples into replicate groups (sample types).
// For non-detect cells y holds a placeholder (the detection bound); it is
// never used as data.
struct Dataset {
  std::size_t n_genes = 0;
  std::size_t n_samples = 0;
  std::size_t n_types = 0;
  std::vector<double> y;               // n_genes * n_samples, row-major
  std::vector<std::uint8_t> z;         // 1 = detected, 0 = non-detect
  std::vector<int> type_of_sample;     // sample j -> type k
  std::vector<double> delta;           // per-sample global shift, default 0
  std::vector<std::string> gene_ids;
  std::vector<std::string> sample_names;
  std::vector<std::string> type_labels;
  double detection_bound = 40.0;

  std::size_t idx(std::size_t i, std::size_t j) const { return i * n_samples + j; }
  double y_at(std::size_t i, std::size_t j) const { return y[idx(i, j)]; }
  bool observed(std::size_t i, std::size_t j) const { return z[idx(i, j)] != 0; }

  // Sample indices per type; every type is non-empty for a valid dataset.
  std::vector<std::vector<int>> samples_by_type() const;
  // Non-detect cells in row-major order; fixes the layout of ChainState::y_mis.
  std::vector<std::pair<int, int>> missing_cells() const;
  std::size_t n_missing() const;

  void validate() const;  // throws ConfigError on broken invariants

  bool operator==(const Dataset&) const = default;
};

// Prior on a variance component (one family: all sigma_i or all gamma_i).
struct VariancePrior {
  enum class Kind { uniform_sd, uniform_variance, inverse_gamma };
  Kind kind = Kind::uniform_sd;
  double bound = 100.0;  // A for the uniform kinds
  double shape = 1.0;    // w1 for inverse_gamma
  double scale = 1.0;    // w2 for inverse_gamma

  static VariancePrior uniform_sd(double a) { return {Kind::uniform_sd, a, 0, 0}; }
  static VariancePrior uniform_variance(double a) { return {Kind::uniform_variance, a, 0, 0}; }
  static VariancePrior inverse_gamma(double w1, double w2) {
    return {Kind::inverse_gamma, 0, w1, w2};
  }

  // Upper bound on the variance implied by the prior support (inf if none).
  double variance_cap() const;
  std::string label() const;
  void validate() const;

  bool operator==(const VariancePrior&) const = default;
};

struct Priors {
  double theta0 = 60.0;  // prior mean of theta, above any observable delta-Ct
  VariancePrior sigma_prior = VariancePrior::uniform_sd(100.0);
  VariancePrior gamma_prior = VariancePrior::uniform_sd(100.0);
  std::array<double, 2> mu_beta{0.0, 0.0};
  std::array<double, 4> b_cov{100.0, 0.0, 0.0, 100.0};  // 2x2 row-major, SPD
  bool beta1_positive = true;

  void validate() const;

  bool operator==(const Priors&) const = default;
};

// Everything the likelihood evaluations need besides the data itself.
struct ModelConfig {
  Priors priors;
  SignConvention convention = SignConvention::inverted;
  double detection_bound = 40.0;
};

// Current values of all sampled quantities. Missing y are latent parameters
// (data augmentation); y_mis is ordered like Dataset::missing_cells().
struct ChainState {
  std::vector<double> theta;   // n_genes * n_types, row-major
  std::vector<double> sigma2;  // per gene
  std::vector<double> gamma2;  // per gene
  std::array<double, 2> beta{0.0, 0.1};
  std::vector<double> y_mis;

  double theta_at(std::size_t i, std::size_t k, std::size_t n_types) const {
    return theta[i * n_types + k];
  }

  bool operator==(const ChainState&) const = default;
};

// Which blocks a sweep updates. Freezing blocks turns the chain into a
// conditional sampler, which the conjugate-exactness tests rely on.
struct UpdateBlocks {
  bool impute = true;
  bool theta = true;
  bool sigma2 = true;
  bool gamma2 = true;
  bool beta = true;

  bool operator==(const UpdateBlocks&) const = default;
};

struct SamplerSettings {
  int n_draws = 10000;
  int burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  double beta_step0 = 1.0;   // random-walk sd for beta0
  double beta_step1 = 0.05;  // random-walk sd for beta1
  int adapt_window = 100;    // burn-in step-size adaptation window
  double detection_bound = 40.0;
  SignConvention convention = SignConvention::inverted;
  UpdateBlocks update;
  std::optional<ChainState> init;  // overrides the default initialization

  ModelConfig model_config(const Priors& priors) const {
    return ModelConfig{priors, convention, detection_bound};
  }
  void validate() const;

  bool operator==(const SamplerSettings&) const = default;
};

}  // namespace qpcrfbi
