#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpcrfbi/sampler.hpp"
#include "qpcrfbi/simulator.hpp"
#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

// Per-(gene, type) mean estimates and per-gene variance estimates from one
// method. A cleared presence flag marks blocks the method cannot estimate
// (all replicates missing under Trunc).
struct EstimateTable {
  std::string method;                        // "FBI", "SI-Bayes", "Trunc"
  std::size_t n_genes = 0;
  std::size_t n_types = 0;
  std::vector<double> theta_hat;             // n_genes * n_types
  std::vector<std::uint8_t> theta_present;
  std::vector<double> sigma2_hat;            // n_genes
  std::vector<std::uint8_t> sigma2_present;
};

// 25/50/75 quantiles of bias and squared error, pooled over cells and
// simulation replicates, for each parameter family.
struct FamilySummary {
  double bias_q25 = 0, bias_q50 = 0, bias_q75 = 0;
  double mse_q25 = 0, mse_q50 = 0, mse_q75 = 0;
  std::size_t n_cells = 0;
};

struct ScoreSummary {
  FamilySummary theta;
  FamilySummary sigma2;
};

// Quantile with linear interpolation between order statistics, inclusive
// endpoints: h = (n-1)p, q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h]).
double quantile(std::vector<double> values, double p);

// Posterior medians of theta and sigma2 draws.
EstimateTable fbi_estimates(const ChainOutput& chain);

// Missing cells replaced by the median of their draws, then plug-in type
// means and the pooled within-type variance with divisor J - K.
EstimateTable si_bayes_estimates(const ChainOutput& chain, const Dataset& data);

// Observed cells only; blocks with no observed replicate are absent.
EstimateTable trunc_estimates(const Dataset& data);

ScoreSummary score_against_truth(const std::vector<EstimateTable>& tables,
                                 const std::vector<TruthRecord>& truths);

// One simulate -> fit -> estimate -> score pipeline, n_sims times.
struct SimStudyResult {
  std::vector<EstimateTable> fbi;
  std::vector<EstimateTable> si_bayes;
  std::vector<EstimateTable> trunc;
  std::vector<TruthRecord> truths;
};

SimStudyResult run_sim_study(const SimConfig& sim, const Priors& priors,
                             const SamplerSettings& settings, int n_sims,
                             int n_threads = 0);

struct PriorGridEntry {
  std::string label;
  VariancePrior sigma_prior;
  VariancePrior gamma_prior;
};

// The default prior grid of the sensitivity study: uniform sd bounds 100 and
// 10, then the six inverse-gamma combinations.
std::vector<PriorGridEntry> default_prior_grid();

struct SensitivityRow {
  std::string label;
  ScoreSummary fbi;
};

// Full pipeline per grid entry, FBI scoring pooled over n_sims replicates.
std::vector<SensitivityRow> sensitivity_sweep(const SimConfig& sim,
                                              const std::vector<PriorGridEntry>& grid,
                                              const SamplerSettings& settings,
                                              int n_sims, int n_threads = 0);

}  // namespace qpcrfbi
