// Command line front end: simulate, fit, truncate, sensitivity, diagnose,
// score. Exit codes: 0 ok, 2 usage, 3 parse/config, 4 sampler degeneracy,
// 5 I/O.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpcrfbi/diagnostics.hpp"
#include "qpcrfbi/estimators.hpp"
#include "qpcrfbi/io.hpp"
#include "qpcrfbi/kernels.hpp"
#include "qpcrfbi/sampler.hpp"
#include "qpcrfbi/simulator.hpp"

namespace fs = std::filesystem;
using namespace qpcrfbi;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration");
  cmd->add_option("--seed", args.seed, "seed override");
  cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--threads", args.threads, "worker pool size (0 = hardware)");
}

RunConfig load_config(const CommonArgs& args) {
  RunConfig cfg;
  if (!args.config_path.empty()) cfg = load_run_config(args.config_path);
  if (args.seed) {
    cfg.sampler.seed = *args.seed;
    cfg.sim.seed = *args.seed;
  }
  return cfg;
}

fs::path ensure_out_dir(const CommonArgs& args) {
  fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

std::vector<ManifestEntry> input_entries(const std::vector<std::string>& paths) {
  std::vector<ManifestEntry> entries;
  for (const auto& p : paths) entries.push_back({p, hash_file(p)});
  return entries;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_simulate(const CommonArgs& args) {
  RunConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(args);
  auto [data, truth] = simulate_dataset(cfg.sim);
  save_dataset(dir / "dataset.csv", data);
  save_truth(dir / "truth.json", truth);
  save_effective_config(dir / "config_used.json", cfg);
  std::vector<std::string> inputs;
  if (!args.config_path.empty()) inputs.push_back(args.config_path);
  save_manifest(dir / "manifest.json", "simulate", cfg.sim.seed, input_entries(inputs),
                {"dataset.csv", "truth.json", "config_used.json"});
  std::cout << "simulated " << data.n_genes << " genes x " << data.n_samples
            << " samples, " << data.n_missing() << " non-detects -> " << dir.string()
            << "\n";
  return 0;
}

int cmd_fit(const CommonArgs& args, const std::string& data_path, int n_chains) {
  RunConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(args);
  std::vector<std::string> warnings;
  Dataset data = load_dataset(data_path, cfg.sampler.detection_bound, &warnings);
  print_warnings(warnings);

  std::vector<ChainOutput> chains =
      run_chains(data, cfg.priors, cfg.sampler, n_chains, args.threads);
  std::vector<std::string> outputs;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    std::string prefix = "chain_" + std::to_string(c);
    save_chain(dir, prefix, chains[c]);
    outputs.push_back(prefix + ".csv");
    outputs.push_back(prefix + "_meta.json");
  }

  ChainOutput pooled = pool_chains(chains);
  std::vector<EstimateTable> tables{fbi_estimates(pooled),
                                    si_bayes_estimates(pooled, data),
                                    trunc_estimates(data)};
  save_estimates(dir / "estimates.csv", tables, data);
  outputs.push_back("estimates.csv");
  save_effective_config(dir / "config_used.json", cfg);
  outputs.push_back("config_used.json");

  std::vector<std::string> inputs{data_path};
  if (!args.config_path.empty()) inputs.push_back(args.config_path);
  save_manifest(dir / "manifest.json", "fit", cfg.sampler.seed, input_entries(inputs),
                outputs);
  std::cout << "fit complete: " << n_chains << " chain(s), acceptance beta="
            << format_double(pooled.accept_beta)
            << " theta=" << format_double(pooled.accept_theta) << " -> " << dir.string()
            << "\n";
  return 0;
}

int cmd_truncate(const CommonArgs& args, const std::string& data_path,
                 double threshold) {
  RunConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(args);
  std::vector<std::string> warnings;
  Dataset data = load_dataset(data_path, cfg.sampler.detection_bound, &warnings);
  print_warnings(warnings);
  auto [truncated, report] = truncate_dataset(data, threshold);
  save_dataset(dir / "dataset.csv", truncated);

  nlohmann::ordered_json rep;
  rep["threshold"] = threshold;
  rep["cells_truncated"] = report.cells_truncated;
  rep["emptied_blocks"] = report.emptied_blocks;
  {
    std::ofstream out(dir / "truncate_report.json");
    if (!out) throw IoError("cannot write truncate_report.json");
    out << rep.dump(2) << "\n";
  }
  save_manifest(dir / "manifest.json", "truncate", cfg.sampler.seed,
                input_entries({data_path}), {"dataset.csv", "truncate_report.json"});
  std::cout << "truncated " << report.cells_truncated << " cells at threshold "
            << format_double(threshold) << "; " << report.emptied_blocks.size()
            << " gene/type blocks left with no observed replicate\n";
  return 0;
}

int cmd_sensitivity(const CommonArgs& args, int n_sims) {
  RunConfig cfg = load_config(args);
  fs::path dir = ensure_out_dir(args);
  std::vector<PriorGridEntry> grid =
      cfg.prior_grid.empty() ? default_prior_grid() : cfg.prior_grid;
  std::vector<SensitivityRow> rows =
      sensitivity_sweep(cfg.sim, grid, cfg.sampler, n_sims, args.threads);
  save_scores(dir / "table1.csv", rows);
  RunConfig echo = cfg;
  echo.prior_grid = grid;
  save_effective_config(dir / "config_used.json", echo);
  std::vector<std::string> inputs;
  if (!args.config_path.empty()) inputs.push_back(args.config_path);
  save_manifest(dir / "manifest.json", "sensitivity", cfg.sampler.seed,
                input_entries(inputs), {"table1.csv", "config_used.json"});
  std::cout << "sensitivity sweep: " << grid.size() << " prior configurations x "
            << n_sims << " simulations -> " << (dir / "table1.csv").string() << "\n";
  return 0;
}

int cmd_diagnose(const CommonArgs& args, const std::string& run_dir) {
  fs::path dir = ensure_out_dir(args);
  std::vector<ChainOutput> chains;
  for (int c = 0;; ++c) {
    fs::path csv = fs::path(run_dir) / ("chain_" + std::to_string(c) + ".csv");
    if (!fs::exists(csv)) break;
    chains.push_back(load_chain(run_dir, "chain_" + std::to_string(c)));
  }
  if (chains.empty()) {
    throw IoError("no chain_<n>.csv files under " + run_dir);
  }
  DiagnosticsReport report = diagnose(chains);
  save_diagnostics(dir / "diagnostics.json", dir / "diagnostics.txt", report);
  save_manifest(dir / "manifest.json", "diagnose", chains.front().settings.seed,
                input_entries({run_dir + "/chain_0.csv"}),
                {"diagnostics.json", "diagnostics.txt"});
  std::cout << report_to_text(report);
  return 0;
}

int cmd_score(const CommonArgs& args, const std::vector<std::string>& estimate_paths,
              const std::vector<std::string>& truth_paths) {
  fs::path dir = ensure_out_dir(args);
  if (estimate_paths.size() != truth_paths.size()) {
    throw ConfigError("score: need as many --estimates as --truth files");
  }
  std::vector<TruthRecord> truths;
  std::map<std::string, std::vector<EstimateTable>> by_method;
  std::map<std::string, std::vector<TruthRecord>> truths_by_method;
  for (std::size_t s = 0; s < estimate_paths.size(); ++s) {
    TruthRecord truth = load_truth(truth_paths[s]);
    for (EstimateTable& t : load_estimates(estimate_paths[s])) {
      truths_by_method[t.method].push_back(truth);
      by_method[t.method].push_back(std::move(t));
    }
  }
  std::vector<SensitivityRow> rows;
  for (auto& [method, tables] : by_method) {
    SensitivityRow row;
    row.label = method;
    row.fbi = score_against_truth(tables, truths_by_method[method]);
    rows.push_back(std::move(row));
  }
  save_scores(dir / "scores.csv", rows);
  std::vector<std::string> inputs = estimate_paths;
  inputs.insert(inputs.end(), truth_paths.begin(), truth_paths.end());
  save_manifest(dir / "manifest.json", "score", 0, input_entries(inputs),
                {"scores.csv"});
  std::cout << "scored " << estimate_paths.size() << " replicate(s), "
            << rows.size() << " method(s) -> " << (dir / "scores.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian imputation for qPCR non-detects (MNAR)"};
  app.require_subcommand(1);

  CommonArgs sim_args, fit_args, trunc_args, sens_args, diag_args, score_args;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic MNAR dataset");
  add_common(sim, sim_args);

  CLI::App* fit = app.add_subcommand("fit", "run the Gibbs sampler on a dataset");
  add_common(fit, fit_args);
  std::string fit_data;
  int fit_chains = 2;
  fit->add_option("--data", fit_data, "dataset CSV")->required();
  fit->add_option("--chains", fit_chains, "number of chains");

  CLI::App* trunc = app.add_subcommand("truncate", "re-code values above a threshold as non-detects");
  add_common(trunc, trunc_args);
  std::string trunc_data;
  double trunc_threshold = 0.0;
  trunc->add_option("--data", trunc_data, "dataset CSV")->required();
  trunc->add_option("--threshold", trunc_threshold, "truncation threshold")->required();

  CLI::App* sens = app.add_subcommand("sensitivity", "prior sensitivity study");
  add_common(sens, sens_args);
  int sens_sims = 100;
  sens->add_option("--sims", sens_sims, "simulation replicates per prior");

  CLI::App* diag = app.add_subcommand("diagnose", "convergence diagnostics for a fit");
  add_common(diag, diag_args);
  std::string diag_run;
  diag->add_option("--run", diag_run, "directory with chain_<n>.csv files")->required();

  CLI::App* score = app.add_subcommand("score", "score estimates against simulation truth");
  add_common(score, score_args);
  std::vector<std::string> score_estimates, score_truths;
  score->add_option("--estimates", score_estimates, "estimates CSV (repeatable)")->required();
  score->add_option("--truth", score_truths, "truth JSON (repeatable)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (fit->parsed()) return cmd_fit(fit_args, fit_data, fit_chains);
    if (trunc->parsed()) return cmd_truncate(trunc_args, trunc_data, trunc_threshold);
    if (sens->parsed()) return cmd_sensitivity(sens_args, sens_sims);
    if (diag->parsed()) return cmd_diagnose(diag_args, diag_run);
    if (score->parsed()) return cmd_score(score_args, score_estimates, score_truths);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateStateError& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
