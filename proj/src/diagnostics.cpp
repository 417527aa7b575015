#include "qpcrfbi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qpcrfbi/kernels.hpp"

namespace qpcrfbi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> x) {
  return kernels::active().sum(x.data(), x.size()) / static_cast<double>(x.size());
}

// Autocovariance at one lag of an already centered series, 1/n normalization.
double autocov(const std::vector<double>& centered, std::size_t lag) {
  std::size_t n = centered.size();
  return kernels::active().dot(centered.data(), centered.data() + lag, n - lag) /
         static_cast<double>(n);
}

}  // namespace

double effective_sample_size(std::span<const double> series) {
  std::size_t n = series.size();
  if (n < 10) throw std::invalid_argument("ess: series shorter than 10");

  double m = mean_of(series);
  std::vector<double> centered(n);
  for (std::size_t i = 0; i < n; ++i) centered[i] = series[i] - m;
  double c0 = autocov(centered, 0);
  double scale = 0.0;
  for (double v : series) scale = std::max(scale, std::fabs(v));
  if (!(c0 > scale * scale * 1e-28) || !std::isfinite(c0)) {
    throw std::invalid_argument("ess: series is constant");
  }

  // Initial monotone positive sequence (Geyer): sum pair sums of
  // autocorrelations until one turns nonpositive, clipping to keep the pair
  // sums nonincreasing.
  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  std::size_t max_pairs = (n - 1) / 2;
  bool closed = false;
  for (std::size_t p = 0; p < max_pairs; ++p) {
    double rho_even = autocov(centered, 2 * p) / c0;
    double rho_odd = autocov(centered, 2 * p + 1) / c0;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) {
      closed = true;
      break;
    }
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += 2.0 * pair;
    if (p > n / 4) {  // no truncation point found in any reasonable window
      closed = true;
      break;
    }
  }
  (void)closed;
  tau -= 1.0;  // the lag-0 term was counted twice inside the first pair
  tau = std::max(tau, 1e-12);
  double ess = static_cast<double>(n) / tau;
  return std::min(ess, static_cast<double>(n));
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  if (chains.empty()) throw std::invalid_argument("split_rhat: no chains");
  std::size_t len = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != len) throw std::invalid_argument("split_rhat: unequal chain lengths");
  }
  std::size_t half = len / 2;
  if (half < 2) throw std::invalid_argument("split_rhat: chains too short to split");

  std::vector<std::pair<double, double>> pieces;  // (mean, variance)
  for (const auto& c : chains) {
    for (int piece = 0; piece < 2; ++piece) {
      const double* begin = c.data() + (piece == 0 ? 0 : half);
      double mean = kernels::active().sum(begin, half) / static_cast<double>(half);
      double ssq = 0.0;
      for (std::size_t i = 0; i < half; ++i) {
        double d = begin[i] - mean;
        ssq += d * d;
      }
      pieces.emplace_back(mean, ssq / static_cast<double>(half - 1));
    }
  }
  std::size_t m = pieces.size();
  if (m < 2) throw std::invalid_argument("split_rhat: fewer than 2 splits");

  double grand = 0.0;
  for (auto& p : pieces) grand += p.first;
  grand /= static_cast<double>(m);
  double b = 0.0, w = 0.0;
  for (auto& p : pieces) {
    double d = p.first - grand;
    b += d * d;
    w += p.second;
  }
  double nd = static_cast<double>(half);
  b *= nd / static_cast<double>(m - 1);
  w /= static_cast<double>(m);
  if (!(w > 0.0)) return kNaN;
  double var_plus = (nd - 1.0) / nd * w + b / nd;
  return std::sqrt(var_plus / w);
}

namespace {

ParameterDiagnostic diagnose_one(const std::string& name,
                                 const std::vector<std::vector<double>>& series,
                                 const DiagnosticsReport& thresholds) {
  ParameterDiagnostic d;
  d.name = name;
  double ess_total = 0.0;
  bool ess_ok = true;
  for (const auto& s : series) {
    try {
      ess_total += effective_sample_size(s);
    } catch (const std::invalid_argument&) {
      ess_ok = false;
      break;
    }
  }
  d.ess = ess_ok ? ess_total : kNaN;
  try {
    d.rhat = split_rhat(series);
  } catch (const std::invalid_argument&) {
    d.rhat = kNaN;
  }
  d.flagged = !ess_ok || d.ess < thresholds.ess_threshold ||
              (std::isfinite(d.rhat) && d.rhat > thresholds.rhat_threshold);
  return d;
}

}  // namespace

DiagnosticsReport diagnose(const std::vector<ChainOutput>& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnose: no chains");
  const ChainOutput& first = chains.front();
  for (const auto& c : chains) {
    if (c.n_genes != first.n_genes || c.n_types != first.n_types ||
        c.n_kept != first.n_kept || c.missing_cells != first.missing_cells) {
      throw std::invalid_argument("diagnose: chains disagree on shape");
    }
  }

  DiagnosticsReport report;
  auto gather = [&](auto&& extract) {
    std::vector<std::vector<double>> series;
    series.reserve(chains.size());
    for (const auto& c : chains) series.push_back(extract(c));
    return series;
  };

  double ess_sum = 0.0;
  std::size_t ess_count = 0;
  auto add_param = [&](const std::string& name, std::vector<std::vector<double>> series,
                       bool in_average) {
    ParameterDiagnostic d = diagnose_one(name, series, report);
    if (in_average && std::isfinite(d.ess)) {
      ess_sum += d.ess;
      ++ess_count;
    }
    if (d.flagged) report.flagged.push_back(name);
    report.parameters.push_back(std::move(d));
  };

  for (std::size_t i = 0; i < first.n_genes; ++i) {
    for (std::size_t k = 0; k < first.n_types; ++k) {
      add_param("theta[" + std::to_string(i) + "][" + std::to_string(k) + "]",
                gather([&](const ChainOutput& c) { return c.theta_series(i, k); }), true);
    }
  }
  for (std::size_t i = 0; i < first.n_genes; ++i) {
    add_param("sigma2[" + std::to_string(i) + "]",
              gather([&](const ChainOutput& c) { return c.sigma2_series(i); }), true);
  }
  for (std::size_t i = 0; i < first.n_genes; ++i) {
    add_param("gamma2[" + std::to_string(i) + "]",
              gather([&](const ChainOutput& c) { return c.gamma2_series(i); }), false);
  }
  add_param("beta0", gather([](const ChainOutput& c) { return c.beta_series(0); }), true);
  add_param("beta1", gather([](const ChainOutput& c) { return c.beta_series(1); }), true);

  double ymis_sum = 0.0;
  std::size_t ymis_count = 0;
  for (std::size_t mcell = 0; mcell < first.missing_cells.size(); ++mcell) {
    auto [i, j] = first.missing_cells[mcell];
    ParameterDiagnostic d = diagnose_one(
        "y_mis[" + std::to_string(i) + "][" + std::to_string(j) + "]",
        gather([&](const ChainOutput& c) { return c.y_mis_series(mcell); }), report);
    if (std::isfinite(d.ess)) {
      ymis_sum += d.ess;
      ++ymis_count;
    }
    if (d.flagged) report.flagged.push_back(d.name);
    report.y_mis.push_back(std::move(d));
  }

  report.average_ess = ess_count > 0 ? ess_sum / static_cast<double>(ess_count) : kNaN;
  report.average_ess_y_mis =
      ymis_count > 0 ? ymis_sum / static_cast<double>(ymis_count) : kNaN;

  double ab = 0.0, at = 0.0;
  for (const auto& c : chains) {
    ab += c.accept_beta;
    at += c.accept_theta;
  }
  report.accept_beta = ab / static_cast<double>(chains.size());
  report.accept_theta = at / static_cast<double>(chains.size());
  return report;
}

std::string report_to_text(const DiagnosticsReport& report) {
  std::ostringstream os;
  os << "MCMC diagnostics\n";
  os << "  parameters monitored: " << report.parameters.size() << "\n";
  os << "  average ESS (theta, sigma2, beta): " << report.average_ess << "\n";
  if (!report.y_mis.empty()) {
    os << "  average ESS (imputed y): " << report.average_ess_y_mis << "\n";
  }
  os << "  acceptance rate beta:  " << report.accept_beta << "\n";
  os << "  acceptance rate theta: " << report.accept_theta << "\n";
  if (report.flagged.empty()) {
    os << "  no parameters flagged (ESS >= " << report.ess_threshold
       << ", Rhat <= " << report.rhat_threshold << ")\n";
  } else {
    os << "  flagged parameters (" << report.flagged.size() << "):\n";
    for (const auto& name : report.flagged) os << "    " << name << "\n";
  }
  return os.str();
}

}  // namespace qpcrfbi
