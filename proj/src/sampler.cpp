#include "qpcrfbi/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <utility>

#include "qpcrfbi/distributions.hpp"
#include "qpcrfbi/kernels.hpp"
#include "qpcrfbi/mathutil.hpp"
#include "qpcrfbi/model.hpp"

namespace qpcrfbi {

namespace {

std::vector<double> strided(const std::vector<double>& flat, std::size_t stride,
                            std::size_t offset, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t d = 0; d < count; ++d) out[d] = flat[d * stride + offset];
  return out;
}

// -1 for observed cells, otherwise the cell's rank among missing cells in
// row-major order (the layout of ChainState::y_mis).
void build_missing_ranks(const Dataset& data, std::vector<int>& rank) {
  rank.assign(data.n_genes * data.n_samples, -1);
  int next = 0;
  for (std::size_t c = 0; c < rank.size(); ++c) {
    if (!data.z[c]) rank[c] = next++;
  }
}

double cell_value(const ChainState& state, const Dataset& data,
                  const std::vector<int>& rank, std::size_t i, std::size_t j) {
  int r = rank[data.idx(i, j)];
  return r < 0 ? data.y_at(i, j) : state.y_mis[static_cast<std::size_t>(r)];
}

// Conditional degrees of freedom implied by each variance prior; n is the
// number of Gaussian terms in the gene's likelihood for this family.
double conditional_df(const VariancePrior& prior, std::size_t n) {
  switch (prior.kind) {
    case VariancePrior::Kind::uniform_sd:
      return static_cast<double>(n) - 1.0;
    case VariancePrior::Kind::uniform_variance:
      return static_cast<double>(n) - 2.0;
    case VariancePrior::Kind::inverse_gamma:
      return 0.0;  // unused
  }
  return 0.0;
}

double draw_variance(const VariancePrior& prior, std::size_t n, double ssq,
                     Rng& rng) {
  if (prior.kind == VariancePrior::Kind::inverse_gamma) {
    return draw_inverse_gamma(prior.shape + 0.5 * static_cast<double>(n),
                              prior.scale + 0.5 * ssq, rng);
  }
  double nu = conditional_df(prior, n);
  if (!(nu > 0.0)) {
    throw ConfigError("variance conditional has nonpositive degrees of freedom; "
                      "this prior needs more replicates");
  }
  return draw_scaled_inv_chisq_capped(nu, ssq, prior.variance_cap(), rng);
}

}  // namespace

std::vector<double> ChainOutput::theta_series(std::size_t i, std::size_t k) const {
  return strided(theta, n_theta_params(), i * n_types + k, n_kept);
}
std::vector<double> ChainOutput::sigma2_series(std::size_t i) const {
  return strided(sigma2, n_genes, i, n_kept);
}
std::vector<double> ChainOutput::gamma2_series(std::size_t i) const {
  return strided(gamma2, n_genes, i, n_kept);
}
std::vector<double> ChainOutput::beta_series(std::size_t which) const {
  return strided(beta, 2, which, n_kept);
}
std::vector<double> ChainOutput::y_mis_series(std::size_t m) const {
  return strided(y_mis, missing_cells.size(), m, n_kept);
}

std::vector<double> update_gamma2(const ChainState& state, const Priors& priors,
                                  std::size_t n_types, Rng& rng) {
  if (n_types == 0 || state.theta.size() % n_types != 0) {
    throw std::invalid_argument("update_gamma2: theta size not divisible by type count");
  }
  std::size_t n_genes = state.theta.size() / n_types;
  std::vector<double> out(n_genes);
  for (std::size_t i = 0; i < n_genes; ++i) {
    double ssq = 0.0;
    for (std::size_t k = 0; k < n_types; ++k) {
      double d = state.theta[i * n_types + k] - priors.theta0;
      ssq += d * d;
    }
    if (!(ssq > 0.0)) {
      throw DegenerateStateError("update_gamma2: gene " + std::to_string(i) +
                                 " has all type means exactly at theta0");
    }
    out[i] = draw_variance(priors.gamma_prior, n_types, ssq, rng);
  }
  return out;
}

std::vector<double> update_sigma2(const ChainState& state, const Dataset& data,
                                  const Priors& priors, Rng& rng) {
  detail::check_state_dims(state, data);
  thread_local std::vector<int> rank;
  thread_local std::vector<double> yrow, murow;
  build_missing_ranks(data, rank);
  yrow.resize(data.n_samples);
  murow.resize(data.n_samples);

  std::vector<double> out(data.n_genes);
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      yrow[j] = cell_value(state, data, rank, i, j);
      int k = data.type_of_sample[j];
      murow[j] = state.theta[i * data.n_types + static_cast<std::size_t>(k)] +
                 data.delta[j];
    }
    double ssq = kernels::active().ssq_diff(yrow.data(), murow.data(), data.n_samples);
    if (!(ssq > 0.0)) {
      throw DegenerateStateError("update_sigma2: gene " + std::to_string(i) +
                                 " has all residuals exactly zero");
    }
    out[i] = draw_variance(priors.sigma_prior, data.n_samples, ssq, rng);
  }
  return out;
}

ThetaUpdate update_theta(const ChainState& state, const Dataset& data,
                         const ModelConfig& config, Rng& rng) {
  detail::check_state_dims(state, data);
  thread_local std::vector<int> rank;
  thread_local std::vector<double> yv, dv, sv;
  build_missing_ranks(data, rank);
  auto groups = data.samples_by_type();
  auto adj = observed_logit_coeffs(state.beta, config.convention);
  double theta0 = config.priors.theta0;

  ThetaUpdate result;
  result.theta = state.theta;
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    double s2 = state.sigma2[i];
    double g2 = state.gamma2[i];
    for (std::size_t k = 0; k < data.n_types; ++k) {
      const auto& js = groups[k];
      std::size_t n = js.size();
      yv.resize(n);
      dv.resize(n);
      sv.resize(n);
      double sum_yd = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        std::size_t j = static_cast<std::size_t>(js[r]);
        yv[r] = cell_value(state, data, rank, i, j);
        dv[r] = data.delta[j];
        sv[r] = data.z[data.idx(i, j)] ? 1.0 : -1.0;
        sum_yd += yv[r] - dv[r];
      }
      // Conjugate Gaussian part of the conditional as independence proposal;
      // data precision carries the replicate count.
      double prec = static_cast<double>(n) / s2 + 1.0 / g2;
      double v = 1.0 / prec;
      double m = v * (sum_yd / s2 + theta0 / g2);
      double cur = state.theta[i * data.n_types + k];
      double cand = rng.normal(m, std::sqrt(v));

      double lp_cand = detail::theta_block_logpdf(cand, yv.data(), dv.data(), sv.data(),
                                                  n, s2, g2, theta0, adj[0], adj[1]);
      double lp_cur = detail::theta_block_logpdf(cur, yv.data(), dv.data(), sv.data(),
                                                 n, s2, g2, theta0, adj[0], adj[1]);
      double log_ratio = (lp_cand - lp_cur) +
                         (normal_logpdf(cur, m, v) - normal_logpdf(cand, m, v));
      ++result.proposed;
      if (log_ratio >= 0.0 || std::log(rng.u01()) < log_ratio) {
        result.theta[i * data.n_types + k] = cand;
        ++result.accepted;
      }
    }
  }
  return result;
}

BetaUpdate update_beta(const ChainState& state, const Dataset& data,
                       const ModelConfig& config,
                       const std::array<double, 2>& steps, Rng& rng) {
  detail::check_state_dims(state, data);
  std::array<double, 2> cand{state.beta[0] + steps[0] * rng.normal(),
                             state.beta[1] + steps[1] * rng.normal()};
  if (config.priors.beta1_positive && cand[1] <= 0.0) {
    return {state.beta, false};
  }
  double log_ratio = log_target_beta(cand, state, data, config) -
                     log_target_beta(state.beta, state, data, config);
  if (log_ratio >= 0.0 || std::log(rng.u01()) < log_ratio) {
    return {cand, true};
  }
  return {state.beta, false};
}

std::vector<double> impute_missing_y(const ChainState& state, const Dataset& data,
                                     const ModelConfig& config, Rng& rng) {
  detail::check_state_dims(state, data);
  auto cells = data.missing_cells();
  std::vector<double> out(cells.size());
  double bound = config.detection_bound;
  for (std::size_t m = 0; m < cells.size(); ++m) {
    auto [gi, sj] = cells[m];
    std::size_t i = static_cast<std::size_t>(gi);
    std::size_t j = static_cast<std::size_t>(sj);
    int k = data.type_of_sample[j];
    double mu = state.theta[i * data.n_types + static_cast<std::size_t>(k)] +
                data.delta[j];
    double sd = std::sqrt(state.sigma2[i]);
    double g = observed_prob(state.beta, mu, config.convention);

    double zl = (0.0 - mu) / sd;
    double zb = (bound - mu) / sd;
    double mass_low = zl > 0.0 ? norm_sf(zl) - norm_sf(zb) : norm_cdf(zb) - norm_cdf(zl);
    mass_low = std::max(mass_low, 0.0);
    // Below the bound a non-detect needs the Bernoulli miss; at or above the
    // bound it is certain.
    double w_low = (1.0 - g) * mass_low;
    double w_high = norm_sf(zb);
    double total = w_low + w_high;
    if (!(total > 1e-300)) {
      throw DegenerateStateError(
          "impute_missing_y: no representable mass for gene " + std::to_string(i) +
          ", sample " + std::to_string(j));
    }
    if (rng.u01() * total < w_low) {
      out[m] = draw_truncated_normal(mu, sd, 0.0, bound, rng);
    } else {
      out[m] = draw_truncated_normal(mu, sd, bound,
                                     std::numeric_limits<double>::infinity(), rng);
    }
  }
  return out;
}

ChainState default_init(const Dataset& data, const Priors& priors,
                        const SamplerSettings& settings) {
  ChainState state;
  state.theta.assign(data.n_genes * data.n_types, priors.theta0);
  state.sigma2.assign(data.n_genes, 1.0);
  state.gamma2.assign(data.n_genes, 1.0);
  state.beta = {0.0, 0.1};
  state.y_mis.assign(data.n_missing(), settings.detection_bound);

  auto groups = data.samples_by_type();
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    for (std::size_t k = 0; k < data.n_types; ++k) {
      double sum = 0.0;
      int n = 0;
      for (int j : groups[k]) {
        std::size_t sj = static_cast<std::size_t>(j);
        if (data.observed(i, sj)) {
          sum += data.y_at(i, sj) - data.delta[sj];
          ++n;
        }
      }
      if (n > 0) state.theta[i * data.n_types + k] = sum / n;
    }
    double ssq = 0.0;
    int nobs = 0;
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      if (!data.observed(i, j)) continue;
      int k = data.type_of_sample[j];
      double d = data.y_at(i, j) - state.theta[i * data.n_types + static_cast<std::size_t>(k)] -
                 data.delta[j];
      ssq += d * d;
      ++nobs;
    }
    if (nobs >= 2) state.sigma2[i] = std::max(ssq / (nobs - 1), 1e-3);
    double gsq = 0.0;
    for (std::size_t k = 0; k < data.n_types; ++k) {
      double d = state.theta[i * data.n_types + k] - priors.theta0;
      gsq += d * d;
    }
    state.gamma2[i] = std::max(gsq / static_cast<double>(data.n_types), 1e-3);
    // keep the start inside uniform prior supports
    state.sigma2[i] = std::min(state.sigma2[i], priors.sigma_prior.variance_cap());
    state.gamma2[i] = std::min(state.gamma2[i], priors.gamma_prior.variance_cap());
  }
  return state;
}

ChainOutput run_chain(const Dataset& data, const Priors& priors,
                      const SamplerSettings& settings) {
  data.validate();
  priors.validate();
  settings.validate();

  ChainState state = settings.init ? *settings.init : default_init(data, priors, settings);
  detail::check_state_dims(state, data);

  ModelConfig config = settings.model_config(priors);
  Rng rng(settings.seed);

  ChainOutput out;
  out.n_genes = data.n_genes;
  out.n_types = data.n_types;
  out.missing_cells = data.missing_cells();
  out.settings = settings;

  std::size_t kept_target =
      static_cast<std::size_t>((settings.n_draws - settings.burn_in) / settings.thin);
  out.theta.reserve(kept_target * state.theta.size());
  out.sigma2.reserve(kept_target * data.n_genes);
  out.gamma2.reserve(kept_target * data.n_genes);
  out.beta.reserve(kept_target * 2);
  out.y_mis.reserve(kept_target * state.y_mis.size());

  std::array<double, 2> steps{settings.beta_step0, settings.beta_step1};
  long theta_acc = 0, theta_prop = 0;
  long beta_acc = 0, beta_prop = 0;
  int window_acc = 0, window_prop = 0;

  for (int t = 1; t <= settings.n_draws; ++t) {
    try {
      if (settings.update.impute && !state.y_mis.empty()) {
        state.y_mis = impute_missing_y(state, data, config, rng);
      }
      if (settings.update.theta) {
        ThetaUpdate r = update_theta(state, data, config, rng);
        state.theta = std::move(r.theta);
        if (t > settings.burn_in) {
          theta_acc += r.accepted;
          theta_prop += r.proposed;
        }
      }
      if (settings.update.sigma2) {
        state.sigma2 = update_sigma2(state, data, priors, rng);
      }
      if (settings.update.gamma2) {
        state.gamma2 = update_gamma2(state, priors, data.n_types, rng);
      }
      if (settings.update.beta) {
        BetaUpdate r = update_beta(state, data, config, steps, rng);
        state.beta = r.beta;
        if (t > settings.burn_in) {
          beta_acc += r.accepted ? 1 : 0;
          ++beta_prop;
        } else {
          window_acc += r.accepted ? 1 : 0;
          if (++window_prop == settings.adapt_window) {
            double rate = static_cast<double>(window_acc) / window_prop;
            double f = rate < 0.2 ? 0.7 : (rate > 0.5 ? 1.3 : 1.0);
            steps[0] = std::clamp(steps[0] * f, 1e-9, 1e9);
            steps[1] = std::clamp(steps[1] * f, 1e-9, 1e9);
            window_acc = window_prop = 0;
          }
        }
      }
    } catch (const DegenerateStateError& e) {
      throw DegenerateStateError("sweep " + std::to_string(t) + ": " + e.what());
    }

    if (t > settings.burn_in && (t - settings.burn_in) % settings.thin == 0) {
      out.theta.insert(out.theta.end(), state.theta.begin(), state.theta.end());
      out.sigma2.insert(out.sigma2.end(), state.sigma2.begin(), state.sigma2.end());
      out.gamma2.insert(out.gamma2.end(), state.gamma2.begin(), state.gamma2.end());
      out.beta.insert(out.beta.end(), state.beta.begin(), state.beta.end());
      out.y_mis.insert(out.y_mis.end(), state.y_mis.begin(), state.y_mis.end());
      ++out.n_kept;
    }
  }

  out.accept_theta = theta_prop > 0 ? static_cast<double>(theta_acc) / theta_prop : 0.0;
  out.accept_beta = beta_prop > 0 ? static_cast<double>(beta_acc) / beta_prop : 0.0;
  return out;
}

std::vector<ChainOutput> run_chains(const Dataset& data, const Priors& priors,
                                    const SamplerSettings& settings, int n_chains,
                                    int n_threads) {
  if (n_chains < 1) throw ConfigError("run_chains: need at least one chain");
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  std::vector<ChainOutput> outputs(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int c = next.fetch_add(1);
      if (c >= n_chains) return;
      try {
        SamplerSettings s = settings;
        s.seed = settings.seed + static_cast<std::uint64_t>(c);
        outputs[static_cast<std::size_t>(c)] = run_chain(data, priors, s);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  int n_workers = std::min(n_threads, n_chains);
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return outputs;
}

ChainOutput pool_chains(const std::vector<ChainOutput>& chains) {
  if (chains.empty()) throw std::invalid_argument("pool_chains: no chains");
  ChainOutput out = chains.front();
  for (std::size_t c = 1; c < chains.size(); ++c) {
    const ChainOutput& ch = chains[c];
    if (ch.n_genes != out.n_genes || ch.n_types != out.n_types ||
        ch.missing_cells != out.missing_cells) {
      throw std::invalid_argument("pool_chains: chains disagree on layout");
    }
    out.theta.insert(out.theta.end(), ch.theta.begin(), ch.theta.end());
    out.sigma2.insert(out.sigma2.end(), ch.sigma2.begin(), ch.sigma2.end());
    out.gamma2.insert(out.gamma2.end(), ch.gamma2.begin(), ch.gamma2.end());
    out.beta.insert(out.beta.end(), ch.beta.begin(), ch.beta.end());
    out.y_mis.insert(out.y_mis.end(), ch.y_mis.begin(), ch.y_mis.end());
    double w0 = static_cast<double>(out.n_kept);
    double w1 = static_cast<double>(ch.n_kept);
    if (w0 + w1 > 0) {
      out.accept_beta = (out.accept_beta * w0 + ch.accept_beta * w1) / (w0 + w1);
      out.accept_theta = (out.accept_theta * w0 + ch.accept_theta * w1) / (w0 + w1);
    }
    out.n_kept += ch.n_kept;
  }
  return out;
}

}  // namespace qpcrfbi
