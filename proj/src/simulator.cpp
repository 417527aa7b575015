#include "qpcrfbi/simulator.hpp"

#include <cmath>
#include <string>

#include "qpcrfbi/distributions.hpp"
#include "qpcrfbi/model.hpp"

namespace qpcrfbi {

void SimConfig::validate() const {
  if (n_genes < 1 || n_types < 1 || reps_per_type < 1) {
    throw ConfigError("sim: counts must be positive");
  }
  if (!(mu_theta_bounds[0] < mu_theta_bounds[1])) {
    throw ConfigError("sim: mu_theta bounds out of order");
  }
  if (!(mu_theta_sd > 0.0) || !(sigma_theta_sq > 0.0)) {
    throw ConfigError("sim: scale parameters must be > 0");
  }
  if (!(sigma2_range[0] > 0.0) || !(sigma2_range[0] < sigma2_range[1])) {
    throw ConfigError("sim: sigma2 range must be positive and ordered");
  }
  if (!(detection_bound > 0.0)) throw ConfigError("sim: detection bound must be > 0");
  if (!delta.empty() && delta.size() != static_cast<std::size_t>(n_samples())) {
    throw ConfigError("sim: delta length must match sample count");
  }
}

TruthRecord draw_latents(const SimConfig& config, Rng& rng) {
  config.validate();
  std::size_t I = static_cast<std::size_t>(config.n_genes);
  std::size_t K = static_cast<std::size_t>(config.n_types);

  TruthRecord truth;
  truth.n_genes = I;
  truth.n_types = K;
  truth.n_samples = static_cast<std::size_t>(config.n_samples());
  truth.beta_true = config.beta_true;
  truth.convention = config.convention;
  truth.seed = config.seed;
  truth.theta.resize(I * K);
  truth.sigma2.resize(I);
  truth.mu_theta.resize(I);

  double sd_theta = std::sqrt(config.sigma_theta_sq);
  for (std::size_t i = 0; i < I; ++i) {
    truth.mu_theta[i] = draw_truncated_normal(config.mu_theta_mean, config.mu_theta_sd,
                                              config.mu_theta_bounds[0],
                                              config.mu_theta_bounds[1], rng);
    for (std::size_t k = 0; k < K; ++k) {
      truth.theta[i * K + k] = rng.normal(truth.mu_theta[i], sd_theta);
    }
    truth.sigma2[i] = draw_uniform(config.sigma2_range[0], config.sigma2_range[1], rng);
  }
  return truth;
}

std::pair<Dataset, TruthRecord> simulate_from_latents(const SimConfig& config,
                                                      const TruthRecord& latents,
                                                      Rng& rng) {
  config.validate();
  std::size_t I = static_cast<std::size_t>(config.n_genes);
  std::size_t K = static_cast<std::size_t>(config.n_types);
  std::size_t J = static_cast<std::size_t>(config.n_samples());
  if (latents.n_genes != I || latents.n_types != K || latents.n_samples != J) {
    throw ConfigError("simulate: latents do not match the configuration");
  }

  Dataset data;
  data.n_genes = I;
  data.n_samples = J;
  data.n_types = K;
  data.detection_bound = config.detection_bound;
  data.y.assign(I * J, 0.0);
  data.z.assign(I * J, 1);
  data.delta = config.delta.empty() ? std::vector<double>(J, 0.0) : config.delta;
  data.type_of_sample.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    data.type_of_sample[j] = static_cast<int>(j / static_cast<std::size_t>(config.reps_per_type));
  }
  data.gene_ids.resize(I);
  data.sample_names.resize(J);
  data.type_labels.resize(K);
  for (std::size_t i = 0; i < I; ++i) data.gene_ids[i] = "gene_" + std::to_string(i + 1);
  for (std::size_t j = 0; j < J; ++j) data.sample_names[j] = "sample_" + std::to_string(j + 1);
  for (std::size_t k = 0; k < K; ++k) data.type_labels[k] = "type_" + std::to_string(k + 1);

  TruthRecord truth = latents;
  truth.complete_y.resize(I * J);

  for (std::size_t i = 0; i < I; ++i) {
    double sd = std::sqrt(truth.sigma2[i]);
    for (std::size_t j = 0; j < J; ++j) {
      std::size_t k = static_cast<std::size_t>(data.type_of_sample[j]);
      double mu = truth.theta[i * K + k] + data.delta[j];
      double value = mu + sd * rng.normal();
      truth.complete_y[i * J + j] = value;

      double p = logistic_prob(config.beta_true, mu);
      bool missing;
      if (config.convention == SignConvention::inverted) {
        missing = rng.bernoulli(p);  // p is the miss probability
      } else {
        missing = !rng.bernoulli(p);  // p is the detection probability
      }
      if (value >= config.detection_bound) missing = true;

      std::size_t c = data.idx(i, j);
      if (missing) {
        data.z[c] = 0;
        data.y[c] = config.detection_bound;  // placeholder, never used as data
      } else {
        data.y[c] = value;
      }
    }
  }
  data.validate();
  return {std::move(data), std::move(truth)};
}

std::pair<Dataset, TruthRecord> simulate_dataset(const SimConfig& config, Rng& rng) {
  TruthRecord latents = draw_latents(config, rng);
  return simulate_from_latents(config, latents, rng);
}

std::pair<Dataset, TruncationReport> truncate_dataset(const Dataset& data,
                                                      double threshold) {
  if (!(threshold > 0.0)) throw ConfigError("truncate: threshold must be > 0");
  Dataset out = data;
  TruncationReport report;
  out.detection_bound = threshold;
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      std::size_t c = data.idx(i, j);
      if (out.z[c] && out.y[c] >= threshold) {
        out.z[c] = 0;
        ++report.cells_truncated;
      }
      if (!out.z[c]) out.y[c] = threshold;
    }
  }
  auto groups = out.samples_by_type();
  for (std::size_t i = 0; i < out.n_genes; ++i) {
    for (std::size_t k = 0; k < out.n_types; ++k) {
      bool any = false;
      for (int j : groups[k]) {
        if (out.observed(i, static_cast<std::size_t>(j))) {
          any = true;
          break;
        }
      }
      if (!any) report.emptied_blocks.emplace_back(static_cast<int>(i), static_cast<int>(k));
    }
  }
  return {std::move(out), std::move(report)};
}

}  // namespace qpcrfbi
