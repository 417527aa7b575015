#include "qpcrfbi/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qpcrfbi/kernels.hpp"
#include "qpcrfbi/mathutil.hpp"

namespace qpcrfbi {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(SignConvention c) {
  return c == SignConvention::eq2 ? "eq2" : "inverted";
}

SignConvention sign_convention_from_string(const std::string& s) {
  if (s == "eq2") return SignConvention::eq2;
  if (s == "inverted") return SignConvention::inverted;
  throw ConfigError("unknown missingness sign convention: '" + s +
                    "' (expected eq2 or inverted)");
}

std::vector<std::vector<int>> Dataset::samples_by_type() const {
  std::vector<std::vector<int>> groups(n_types);
  for (std::size_t j = 0; j < n_samples; ++j) {
    groups[static_cast<std::size_t>(type_of_sample[j])].push_back(static_cast<int>(j));
  }
  return groups;
}

std::vector<std::pair<int, int>> Dataset::missing_cells() const {
  std::vector<std::pair<int, int>> cells;
  for (std::size_t i = 0; i < n_genes; ++i) {
    for (std::size_t j = 0; j < n_samples; ++j) {
      if (!z[idx(i, j)]) cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  return cells;
}

std::size_t Dataset::n_missing() const {
  return static_cast<std::size_t>(
      std::count(z.begin(), z.end(), static_cast<std::uint8_t>(0)));
}

void Dataset::validate() const {
  if (n_genes == 0 || n_samples == 0 || n_types == 0) {
    throw ConfigError("dataset: empty dimension");
  }
  std::size_t cells = n_genes * n_samples;
  if (y.size() != cells || z.size() != cells) {
    throw ConfigError("dataset: y/z size does not match dimensions");
  }
  if (type_of_sample.size() != n_samples) {
    throw ConfigError("dataset: sample-type map size mismatch");
  }
  if (delta.size() != n_samples) {
    throw ConfigError("dataset: delta size mismatch");
  }
  std::vector<int> count(n_types, 0);
  for (std::size_t j = 0; j < n_samples; ++j) {
    int k = type_of_sample[j];
    if (k < 0 || static_cast<std::size_t>(k) >= n_types) {
      throw ConfigError("dataset: sample " + std::to_string(j) +
                        " has out-of-range sample type");
    }
    ++count[static_cast<std::size_t>(k)];
  }
  for (std::size_t k = 0; k < n_types; ++k) {
    if (count[k] == 0) {
      throw ConfigError("dataset: sample type " + std::to_string(k) + " is empty");
    }
  }
  for (std::size_t i = 0; i < n_genes; ++i) {
    for (std::size_t j = 0; j < n_samples; ++j) {
      if (z[idx(i, j)]) {
        double v = y[idx(i, j)];
        if (!std::isfinite(v) || v <= 0.0) {
          throw ConfigError("dataset: observed value at gene " + std::to_string(i) +
                            ", sample " + std::to_string(j) +
                            " is not a positive finite number");
        }
      }
    }
  }
}

double VariancePrior::variance_cap() const {
  switch (kind) {
    case Kind::uniform_sd:
      return bound * bound;
    case Kind::uniform_variance:
      return bound;
    case Kind::inverse_gamma:
      return kInf;
  }
  return kInf;
}

std::string VariancePrior::label() const {
  auto fmt = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  switch (kind) {
    case Kind::uniform_sd:
      return "UnifSd(0," + fmt(bound) + ")";
    case Kind::uniform_variance:
      return "UnifVar(0," + fmt(bound) + ")";
    case Kind::inverse_gamma:
      return "IG(" + fmt(shape) + "," + fmt(scale) + ")";
  }
  return "?";
}

void VariancePrior::validate() const {
  switch (kind) {
    case Kind::uniform_sd:
    case Kind::uniform_variance:
      if (!(bound > 0.0)) throw ConfigError("variance prior: bound A must be > 0");
      break;
    case Kind::inverse_gamma:
      if (!(shape > 0.0) || !(scale > 0.0)) {
        throw ConfigError("variance prior: inverse-gamma parameters must be > 0");
      }
      break;
  }
}

void Priors::validate() const {
  if (!std::isfinite(theta0)) throw ConfigError("priors: theta0 must be finite");
  sigma_prior.validate();
  gamma_prior.validate();
  double c00 = b_cov[0], c01 = b_cov[1], c10 = b_cov[2], c11 = b_cov[3];
  if (c01 != c10) throw ConfigError("priors: B must be symmetric");
  if (!(c00 > 0.0) || !(c11 > 0.0) || !(c00 * c11 - c01 * c01 > 0.0)) {
    throw ConfigError("priors: B must be positive definite");
  }
}

void SamplerSettings::validate() const {
  if (!(n_draws > burn_in) || burn_in < 0) {
    throw ConfigError("sampler: need nDraws > burnIn >= 0");
  }
  if (thin < 1) throw ConfigError("sampler: thin must be >= 1");
  if (!(beta_step0 > 0.0) || !(beta_step1 > 0.0)) {
    throw ConfigError("sampler: beta step sizes must be > 0");
  }
  if (adapt_window < 1) throw ConfigError("sampler: adaptation window must be >= 1");
  if (!(detection_bound > 0.0)) throw ConfigError("sampler: detection bound must be > 0");
}

double logistic_prob(const std::array<double, 2>& beta, double mu) {
  return sigmoid(beta[0] + beta[1] * mu);
}

double observed_prob(const std::array<double, 2>& beta, double mu, SignConvention c) {
  double t = beta[0] + beta[1] * mu;
  return sigmoid(c == SignConvention::eq2 ? t : -t);
}

std::array<double, 2> observed_logit_coeffs(const std::array<double, 2>& beta,
                                            SignConvention c) {
  if (c == SignConvention::eq2) return beta;
  return {-beta[0], -beta[1]};
}

double bivariate_normal_logpdf(const std::array<double, 2>& x,
                               const std::array<double, 2>& mean,
                               const std::array<double, 4>& cov) {
  double det = cov[0] * cov[3] - cov[1] * cov[2];
  if (!(det > 0.0)) throw std::invalid_argument("bivariate normal logpdf: singular covariance");
  double d0 = x[0] - mean[0];
  double d1 = x[1] - mean[1];
  double quad = (cov[3] * d0 * d0 - (cov[1] + cov[2]) * d0 * d1 + cov[0] * d1 * d1) / det;
  return -kLog2Pi - 0.5 * std::log(det) - 0.5 * quad;
}

namespace detail {

double bernoulli_loglik(const double* mu, const double* zsign, std::size_t n,
                        double b0, double b1) {
  return kernels::active().bernoulli_loglik(mu, zsign, n, b0, b1);
}

double theta_block_logpdf(double candidate, const double* y, const double* delta,
                          const double* zsign, std::size_t n, double sigma2,
                          double gamma2, double theta0, double b0_adj, double b1_adj) {
  double lp = normal_logpdf(candidate, theta0, gamma2);
  double ssq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = y[j] - candidate - delta[j];
    ssq += d * d;
  }
  lp += -0.5 * static_cast<double>(n) * (kLog2Pi + std::log(sigma2)) -
        0.5 * ssq / sigma2;
  // Bernoulli terms share the candidate through mu_j = candidate + delta_j,
  // so the logit is (b0 + b1*candidate) + b1*delta_j.
  lp += kernels::active().bernoulli_loglik(delta, zsign, n,
                                           b0_adj + b1_adj * candidate, b1_adj);
  return lp;
}

void check_state_dims(const ChainState& state, const Dataset& data) {
  if (state.sigma2.size() != data.n_genes || state.gamma2.size() != data.n_genes) {
    throw std::invalid_argument("chain state: variance vectors do not match gene count");
  }
  if (state.theta.size() != data.n_genes * data.n_types) {
    throw std::invalid_argument("chain state: theta size does not match genes x types");
  }
  if (state.y_mis.size() != data.n_missing()) {
    throw std::invalid_argument("chain state: imputed-value count does not match mask");
  }
}

}  // namespace detail

namespace {

// y with the current augmentation patched in, plus mu and z-sign rows,
// flattened over all cells. Scratch is reused across calls.
struct FlatBuffers {
  std::vector<double> mu;
  std::vector<double> zsign;
};

void fill_flat(const ChainState& state, const Dataset& data, FlatBuffers& buf) {
  std::size_t cells = data.n_genes * data.n_samples;
  buf.mu.resize(cells);
  buf.zsign.resize(cells);
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      std::size_t c = data.idx(i, j);
      int k = data.type_of_sample[j];
      buf.mu[c] = state.theta[i * data.n_types + static_cast<std::size_t>(k)] +
                  data.delta[j];
      buf.zsign[c] = data.z[c] ? 1.0 : -1.0;
    }
  }
}

}  // namespace

double log_target_beta(const std::array<double, 2>& beta, const ChainState& state,
                       const Dataset& data, const ModelConfig& config) {
  detail::check_state_dims(state, data);
  if (config.priors.beta1_positive && beta[1] <= 0.0) return -kInf;

  double lp = bivariate_normal_logpdf(beta, config.priors.mu_beta, config.priors.b_cov);

  thread_local FlatBuffers buf;
  fill_flat(state, data, buf);
  auto adj = observed_logit_coeffs(beta, config.convention);
  lp += detail::bernoulli_loglik(buf.mu.data(), buf.zsign.data(), buf.mu.size(),
                                 adj[0], adj[1]);
  return lp;
}

double log_target_theta(std::size_t gene, std::size_t type, double candidate,
                        const ChainState& state, const Dataset& data,
                        const ModelConfig& config) {
  detail::check_state_dims(state, data);
  if (gene >= data.n_genes || type >= data.n_types) {
    throw std::invalid_argument("log_target_theta: gene/type index out of range");
  }

  thread_local std::vector<double> yv, dv, sv;
  yv.clear();
  dv.clear();
  sv.clear();
  std::size_t mis_rank = 0;
  for (std::size_t i2 = 0; i2 <= gene; ++i2) {
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      bool last_gene = (i2 == gene);
      bool is_mis = !data.z[data.idx(i2, j)];
      if (last_gene && static_cast<std::size_t>(data.type_of_sample[j]) == type) {
        yv.push_back(is_mis ? state.y_mis[mis_rank] : data.y_at(i2, j));
        dv.push_back(data.delta[j]);
        sv.push_back(is_mis ? -1.0 : 1.0);
      }
      if (is_mis) ++mis_rank;
    }
  }

  auto adj = observed_logit_coeffs(state.beta, config.convention);
  return detail::theta_block_logpdf(candidate, yv.data(), dv.data(), sv.data(),
                                    yv.size(), state.sigma2[gene], state.gamma2[gene],
                                    config.priors.theta0, adj[0], adj[1]);
}

}  // namespace qpcrfbi
