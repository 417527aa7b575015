#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qpcrfbi/diagnostics.hpp"
#include "qpcrfbi/estimators.hpp"
#include "qpcrfbi/sampler.hpp"
#include "qpcrfbi/simulator.hpp"
#include "qpcrfbi/types.hpp"

namespace qpcrfbi {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& token, const std::string& where);

// Dataset CSV layout:
//   gene_id,<sample names...>
//   sample_type,<type labels...>
//   <gene>,<value or ND>...
// Observed values at or above the detection bound are coerced to non-detects
// and reported through `warnings`.
Dataset load_dataset(const std::filesystem::path& path, double detection_bound,
                     std::vector<std::string>* warnings = nullptr);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

// Chain persistence: <prefix>.csv holds the draws (one column per scalar
// parameter), <prefix>_meta.json the settings, seed and acceptance rates.
void save_chain(const std::filesystem::path& dir, const std::string& prefix,
                const ChainOutput& chain);
ChainOutput load_chain(const std::filesystem::path& dir, const std::string& prefix);

void save_estimates(const std::filesystem::path& path,
                    const std::vector<EstimateTable>& tables,
                    const Dataset& data);
std::vector<EstimateTable> load_estimates(const std::filesystem::path& path);

void save_scores(const std::filesystem::path& path,
                 const std::vector<SensitivityRow>& rows);

void save_truth(const std::filesystem::path& path, const TruthRecord& truth);
TruthRecord load_truth(const std::filesystem::path& path);

void save_diagnostics(const std::filesystem::path& json_path,
                      const std::filesystem::path& text_path,
                      const DiagnosticsReport& report);

// Run configuration file. Every field is optional; defaults match the model
// and study defaults in the headers above. Unknown keys are rejected.
struct RunConfig {
  Priors priors;
  SamplerSettings sampler;
  SimConfig sim;
  std::vector<PriorGridEntry> prior_grid;  // empty means default_prior_grid()
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Writes the configuration a command actually ran with (defaults resolved).
void save_effective_config(const std::filesystem::path& path, const RunConfig& config);

// FNV-1a over a file's bytes; provenance for manifests.
std::uint64_t hash_file(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;
  std::uint64_t hash = 0;
};

void save_manifest(const std::filesystem::path& path, const std::string& command,
                   std::uint64_t seed, const std::vector<ManifestEntry>& inputs,
                   const std::vector<std::string>& outputs);

}  // namespace qpcrfbi
