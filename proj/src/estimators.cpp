#include "qpcrfbi/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

namespace qpcrfbi {

namespace {

void parallel_for(int n, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  n_threads = std::min(n_threads, n);
  if (n_threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  auto worker = [&](int w) {
    try {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker, w);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

FamilySummary summarize(std::vector<double> bias, std::vector<double> se) {
  FamilySummary f;
  f.n_cells = bias.size();
  if (bias.empty()) return f;
  f.bias_q25 = quantile(bias, 0.25);
  f.bias_q50 = quantile(bias, 0.50);
  f.bias_q75 = quantile(bias, 0.75);
  f.mse_q25 = quantile(se, 0.25);
  f.mse_q50 = quantile(se, 0.50);
  f.mse_q75 = quantile(se, 0.75);
  return f;
}

}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  if (p <= 0.0) return values.front();
  if (p >= 1.0) return values.back();
  // linear interpolation between inclusive order statistics: h = (n-1)p
  double h = static_cast<double>(values.size() - 1) * p;
  std::size_t lo = static_cast<std::size_t>(h);
  double frac = h - static_cast<double>(lo);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

EstimateTable fbi_estimates(const ChainOutput& chain) {
  if (chain.n_kept == 0) throw std::invalid_argument("fbi_estimates: empty chain");
  EstimateTable t;
  t.method = "FBI";
  t.n_genes = chain.n_genes;
  t.n_types = chain.n_types;
  t.theta_hat.resize(chain.n_theta_params());
  t.theta_present.assign(chain.n_theta_params(), 1);
  t.sigma2_hat.resize(chain.n_genes);
  t.sigma2_present.assign(chain.n_genes, 1);
  for (std::size_t i = 0; i < chain.n_genes; ++i) {
    for (std::size_t k = 0; k < chain.n_types; ++k) {
      t.theta_hat[i * chain.n_types + k] = median(chain.theta_series(i, k));
    }
    t.sigma2_hat[i] = median(chain.sigma2_series(i));
  }
  return t;
}

EstimateTable si_bayes_estimates(const ChainOutput& chain, const Dataset& data) {
  if (chain.n_kept == 0) throw std::invalid_argument("si_bayes_estimates: empty chain");
  if (chain.n_genes != data.n_genes || chain.n_types != data.n_types ||
      chain.missing_cells != data.missing_cells()) {
    throw std::invalid_argument("si_bayes_estimates: chain does not match dataset");
  }

  // completed matrix: observed values as-is, missing cells at the median of
  // their draws
  std::vector<double> completed(data.y.begin(), data.y.end());
  for (std::size_t m = 0; m < chain.missing_cells.size(); ++m) {
    auto [i, j] = chain.missing_cells[m];
    completed[data.idx(static_cast<std::size_t>(i), static_cast<std::size_t>(j))] =
        median(chain.y_mis_series(m));
  }

  EstimateTable t;
  t.method = "SI-Bayes";
  t.n_genes = data.n_genes;
  t.n_types = data.n_types;
  t.theta_hat.resize(data.n_genes * data.n_types);
  t.theta_present.assign(data.n_genes * data.n_types, 1);
  t.sigma2_hat.assign(data.n_genes, 0.0);
  t.sigma2_present.assign(data.n_genes, 1);

  auto groups = data.samples_by_type();
  long dof = static_cast<long>(data.n_samples) - static_cast<long>(data.n_types);
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    for (std::size_t k = 0; k < data.n_types; ++k) {
      double sum = 0.0;
      for (int j : groups[k]) {
        std::size_t sj = static_cast<std::size_t>(j);
        sum += completed[data.idx(i, sj)] - data.delta[sj];
      }
      t.theta_hat[i * data.n_types + k] = sum / static_cast<double>(groups[k].size());
    }
    if (dof <= 0) {
      t.sigma2_present[i] = 0;
      continue;
    }
    double ssq = 0.0;
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      std::size_t k = static_cast<std::size_t>(data.type_of_sample[j]);
      double r = completed[data.idx(i, j)] - t.theta_hat[i * data.n_types + k] -
                 data.delta[j];
      ssq += r * r;
    }
    t.sigma2_hat[i] = ssq / static_cast<double>(dof);
  }
  return t;
}

EstimateTable trunc_estimates(const Dataset& data) {
  EstimateTable t;
  t.method = "Trunc";
  t.n_genes = data.n_genes;
  t.n_types = data.n_types;
  t.theta_hat.assign(data.n_genes * data.n_types, 0.0);
  t.theta_present.assign(data.n_genes * data.n_types, 0);
  t.sigma2_hat.assign(data.n_genes, 0.0);
  t.sigma2_present.assign(data.n_genes, 0);

  auto groups = data.samples_by_type();
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    int nobs_total = 0;
    int blocks_with_obs = 0;
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
      if (n > 0) {
        t.theta_hat[i * data.n_types + k] = sum / n;
        t.theta_present[i * data.n_types + k] = 1;
        nobs_total += n;
        ++blocks_with_obs;
      }
    }
    int dof = nobs_total - blocks_with_obs;
    if (dof < 1) continue;
    double ssq = 0.0;
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      if (!data.observed(i, j)) continue;
      std::size_t k = static_cast<std::size_t>(data.type_of_sample[j]);
      if (!t.theta_present[i * data.n_types + k]) continue;
      double r = data.y_at(i, j) - t.theta_hat[i * data.n_types + k] - data.delta[j];
      ssq += r * r;
    }
    t.sigma2_hat[i] = ssq / dof;
    t.sigma2_present[i] = 1;
  }
  return t;
}

namespace {

// Per-parameter aggregation across simulation replicates: bias is the mean
// error of one cell over replicates, MSE its mean squared error; quantiles
// are then taken across cells. This is the aggregation whose quartile
// spread matches the per-cell sampling variability of a replicated study.
struct CellAccum {
  double sum_err = 0;
  double sum_sq = 0;
  int n = 0;
};

void accum(std::vector<CellAccum>& acc, std::size_t c, double err) {
  acc[c].sum_err += err;
  acc[c].sum_sq += err * err;
  ++acc[c].n;
}

void collect(const std::vector<CellAccum>& acc, std::vector<double>& bias,
             std::vector<double>& mse) {
  for (const CellAccum& a : acc) {
    if (a.n == 0) continue;
    bias.push_back(a.sum_err / a.n);
    mse.push_back(a.sum_sq / a.n);
  }
}

}  // namespace

ScoreSummary score_against_truth(const std::vector<EstimateTable>& tables,
                                 const std::vector<TruthRecord>& truths) {
  if (tables.size() != truths.size()) {
    throw std::invalid_argument("score_against_truth: list lengths differ");
  }
  if (tables.empty()) throw std::invalid_argument("score_against_truth: empty input");
  std::size_t n_theta = tables.front().theta_hat.size();
  std::size_t n_genes = tables.front().sigma2_hat.size();
  std::vector<CellAccum> theta_acc(n_theta), s2_acc(n_genes);

  for (std::size_t s = 0; s < tables.size(); ++s) {
    const EstimateTable& t = tables[s];
    const TruthRecord& truth = truths[s];
    if (t.n_genes != truth.n_genes || t.n_types != truth.n_types ||
        t.theta_hat.size() != n_theta || t.sigma2_hat.size() != n_genes) {
      throw std::invalid_argument("score_against_truth: dimension mismatch at replicate " +
                                  std::to_string(s));
    }
    for (std::size_t c = 0; c < n_theta; ++c) {
      if (t.theta_present[c]) accum(theta_acc, c, t.theta_hat[c] - truth.theta[c]);
    }
    for (std::size_t i = 0; i < n_genes; ++i) {
      if (t.sigma2_present[i]) accum(s2_acc, i, t.sigma2_hat[i] - truth.sigma2[i]);
    }
  }

  std::vector<double> theta_bias, theta_mse, s2_bias, s2_mse;
  collect(theta_acc, theta_bias, theta_mse);
  collect(s2_acc, s2_bias, s2_mse);
  ScoreSummary s;
  s.theta = summarize(std::move(theta_bias), std::move(theta_mse));
  s.sigma2 = summarize(std::move(s2_bias), std::move(s2_mse));
  return s;
}

SimStudyResult run_sim_study(const SimConfig& sim, const Priors& priors,
                             const SamplerSettings& settings, int n_sims,
                             int n_threads) {
  if (n_sims < 1) throw ConfigError("sim study: need at least one replicate");
  SimStudyResult res;
  res.fbi.resize(static_cast<std::size_t>(n_sims));
  res.si_bayes.resize(static_cast<std::size_t>(n_sims));
  res.trunc.resize(static_cast<std::size_t>(n_sims));
  res.truths.resize(static_cast<std::size_t>(n_sims));

  // One set of latent true parameters per study; replicates redraw only the
  // noise and the missingness, so per-cell bias/MSE are estimator properties
  // at fixed truth.
  Rng latent_rng(sim.seed);
  TruthRecord latents = draw_latents(sim, latent_rng);

  parallel_for(n_sims, n_threads, [&](int s) {
    Rng noise_rng(sim.seed + 1ull + static_cast<std::uint64_t>(s));
    auto [data, truth] = simulate_from_latents(sim, latents, noise_rng);

    SamplerSettings st = settings;
    st.seed = settings.seed + 7919ull * static_cast<std::uint64_t>(s);
    ChainOutput chain = run_chain(data, priors, st);

    std::size_t idx = static_cast<std::size_t>(s);
    res.fbi[idx] = fbi_estimates(chain);
    res.si_bayes[idx] = si_bayes_estimates(chain, data);
    res.trunc[idx] = trunc_estimates(data);
    res.truths[idx] = std::move(truth);
  });
  return res;
}

std::vector<PriorGridEntry> default_prior_grid() {
  using VP = VariancePrior;
  auto entry = [](VP sigma, VP gamma) {
    return PriorGridEntry{"sigma~" + sigma.label() + " gamma~" + gamma.label(),
                          sigma, gamma};
  };
  return {
      entry(VP::uniform_sd(100), VP::uniform_sd(100)),
      entry(VP::uniform_sd(10), VP::uniform_sd(10)),
      entry(VP::inverse_gamma(0.001, 0.5), VP::inverse_gamma(0.1, 0.1)),
      entry(VP::inverse_gamma(0.001, 0.5), VP::inverse_gamma(0.001, 0.5)),
      entry(VP::inverse_gamma(0.001, 0.5), VP::inverse_gamma(1, 10)),
      entry(VP::inverse_gamma(0.001, 0.5), VP::inverse_gamma(0.001, 0.001)),
      entry(VP::inverse_gamma(1, 10), VP::inverse_gamma(0.001, 0.001)),
      entry(VP::inverse_gamma(0.001, 0.001), VP::inverse_gamma(0.001, 0.001)),
  };
}

std::vector<SensitivityRow> sensitivity_sweep(const SimConfig& sim,
                                              const std::vector<PriorGridEntry>& grid,
                                              const SamplerSettings& settings,
                                              int n_sims, int n_threads) {
  if (grid.empty()) throw ConfigError("sensitivity: prior grid is empty");
  std::vector<SensitivityRow> rows;
  rows.reserve(grid.size());
  for (const PriorGridEntry& entry : grid) {
    Priors priors;
    priors.sigma_prior = entry.sigma_prior;
    priors.gamma_prior = entry.gamma_prior;
    SimStudyResult study = run_sim_study(sim, priors, settings, n_sims, n_threads);
    SensitivityRow row;
    row.label = entry.label;
    row.fbi = score_against_truth(study.fbi, study.truths);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace qpcrfbi
