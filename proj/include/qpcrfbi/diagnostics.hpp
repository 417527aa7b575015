#pragma once

#include <span>
#include <string>
#include <vector>

#include "qpcrfbi/sampler.hpp"

namespace qpcrfbi {

// ESS via the initial monotone positive sequence truncation of the
// autocorrelation sum. Throws std::invalid_argument for series shorter than
// 10 or (numerically) constant series.
double effective_sample_size(std::span<const double> series);

// Split-chain potential scale reduction: each chain is halved, then the
// usual between/within ratio over the split pieces.
double split_rhat(const std::vector<std::vector<double>>& chains);

struct ParameterDiagnostic {
  std::string name;
  double ess = 0;     // summed across chains; NaN when undefined
  double rhat = 0;    // NaN when undefined
  bool flagged = false;
};

struct DiagnosticsReport {
  std::vector<ParameterDiagnostic> parameters;  // theta, sigma2, gamma2, beta
  std::vector<ParameterDiagnostic> y_mis;       // reported separately
  double average_ess = 0;      // over theta, sigma2 and beta parameters
  double average_ess_y_mis = 0;
  double accept_beta = 0;
  double accept_theta = 0;
  std::vector<std::string> flagged;  // ESS < 100 or Rhat > 1.1

  double ess_threshold = 100.0;
  double rhat_threshold = 1.1;
};

DiagnosticsReport diagnose(const std::vector<ChainOutput>& chains);

std::string report_to_text(const DiagnosticsReport& report);

}  // namespace qpcrfbi
