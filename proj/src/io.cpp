#include "qpcrfbi/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"
#include "qpcrfbi/kernels.hpp"

namespace qpcrfbi {

namespace {

using njson = nlohmann::ordered_json;

constexpr const char* kVersion = "qpcrfbi 0.1.0";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, const std::string& where) {
  std::string t = trim(token);
  if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ParseError(where + ": cannot parse number '" + token + "'");
  }
  return value;
}

// ---------------------------------------------------------------------------
// dataset CSV

Dataset load_dataset(const std::filesystem::path& path, double detection_bound,
                     std::vector<std::string>* warnings) {
  std::string text = read_file(path);
  std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 3) {
    throw ParseError(path.string() + ": expected a header row, a sample_type row "
                     "and at least one gene row");
  }

  std::vector<std::string> header = split_csv(lines[0]);
  if (header.size() < 2 || header[0] != "gene_id") {
    throw ParseError(path.string() + ": row 1 must start with 'gene_id'");
  }
  std::size_t n_samples = header.size() - 1;

  std::vector<std::string> type_row = split_csv(lines[1]);
  if (type_row.size() != header.size() || type_row[0] != "sample_type") {
    throw ParseError(path.string() + ": row 2 must start with 'sample_type' and "
                     "cover every sample column");
  }

  Dataset data;
  data.n_samples = n_samples;
  data.detection_bound = detection_bound;
  data.sample_names.assign(header.begin() + 1, header.end());
  data.type_of_sample.resize(n_samples);
  std::map<std::string, int> type_index;
  for (std::size_t j = 0; j < n_samples; ++j) {
    const std::string& label = type_row[j + 1];
    if (label.empty()) {
      throw ParseError(path.string() + ": row 2, column " + std::to_string(j + 2) +
                       ": empty sample type");
    }
    auto it = type_index.find(label);
    if (it == type_index.end()) {
      it = type_index.emplace(label, static_cast<int>(data.type_labels.size())).first;
      data.type_labels.push_back(label);
    }
    data.type_of_sample[j] = it->second;
  }
  data.n_types = data.type_labels.size();

  for (std::size_t r = 2; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) continue;
    std::vector<std::string> row = split_csv(lines[r]);
    if (row.size() != header.size()) {
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(header.size()));
    }
    data.gene_ids.push_back(row[0]);
    for (std::size_t j = 0; j < n_samples; ++j) {
      const std::string& cell = row[j + 1];
      std::string where = path.string() + ": row " + std::to_string(r + 1) +
                          ", column " + std::to_string(j + 2);
      if (cell == "ND") {
        data.y.push_back(detection_bound);
        data.z.push_back(0);
        continue;
      }
      double v = parse_double(cell, where);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParseError(where + ": value must be a positive real or ND");
      }
      if (v >= detection_bound) {
        if (warnings) {
          warnings->push_back(where + ": value " + cell + " is at or above the " +
                              "detection bound " + format_double(detection_bound) +
                              "; treated as non-detect");
        }
        data.y.push_back(detection_bound);
        data.z.push_back(0);
      } else {
        data.y.push_back(v);
        data.z.push_back(1);
      }
    }
  }
  data.n_genes = data.gene_ids.size();
  data.delta.assign(n_samples, 0.0);
  data.validate();
  return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream os;
  os << "gene_id";
  for (const auto& s : data.sample_names) os << "," << csv_quote(s);
  os << "\n";
  os << "sample_type";
  for (std::size_t j = 0; j < data.n_samples; ++j) {
    os << "," << csv_quote(data.type_labels[static_cast<std::size_t>(data.type_of_sample[j])]);
  }
  os << "\n";
  for (std::size_t i = 0; i < data.n_genes; ++i) {
    os << csv_quote(data.gene_ids[i]);
    for (std::size_t j = 0; j < data.n_samples; ++j) {
      if (data.observed(i, j)) {
        os << "," << format_double(data.y_at(i, j));
      } else {
        os << ",ND";
      }
    }
    os << "\n";
  }
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// settings / priors JSON helpers

namespace {

void require_keys(const njson& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

njson variance_prior_to_json(const VariancePrior& p) {
  njson j;
  switch (p.kind) {
    case VariancePrior::Kind::uniform_sd:
      j["kind"] = "uniform_sd";
      j["A"] = p.bound;
      break;
    case VariancePrior::Kind::uniform_variance:
      j["kind"] = "uniform_variance";
      j["A"] = p.bound;
      break;
    case VariancePrior::Kind::inverse_gamma:
      j["kind"] = "inverse_gamma";
      j["w1"] = p.shape;
      j["w2"] = p.scale;
      break;
  }
  return j;
}

VariancePrior variance_prior_from_json(const njson& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  require_keys(j, where, {"kind", "A", "w1", "w2"});
  std::string kind = j.value("kind", "uniform_sd");
  VariancePrior p;
  if (kind == "uniform_sd") {
    p = VariancePrior::uniform_sd(j.value("A", 100.0));
  } else if (kind == "uniform_variance") {
    p = VariancePrior::uniform_variance(j.value("A", 100.0));
  } else if (kind == "inverse_gamma") {
    p = VariancePrior::inverse_gamma(j.value("w1", 1.0), j.value("w2", 1.0));
  } else {
    throw ConfigError(where + ": unknown prior kind '" + kind + "'");
  }
  p.validate();
  return p;
}

njson priors_to_json(const Priors& p) {
  njson j;
  j["theta0"] = p.theta0;
  j["sigma_prior"] = variance_prior_to_json(p.sigma_prior);
  j["gamma_prior"] = variance_prior_to_json(p.gamma_prior);
  j["mu_beta"] = p.mu_beta;
  j["b_cov"] = p.b_cov;
  j["beta1_positive"] = p.beta1_positive;
  return j;
}

Priors priors_from_json(const njson& j, const std::string& where) {
  require_keys(j, where,
               {"theta0", "sigma_prior", "gamma_prior", "mu_beta", "b_cov",
                "beta1_positive"});
  Priors p;
  p.theta0 = j.value("theta0", p.theta0);
  if (j.contains("sigma_prior")) {
    p.sigma_prior = variance_prior_from_json(j["sigma_prior"], where + ".sigma_prior");
  }
  if (j.contains("gamma_prior")) {
    p.gamma_prior = variance_prior_from_json(j["gamma_prior"], where + ".gamma_prior");
  }
  if (j.contains("mu_beta")) p.mu_beta = j["mu_beta"].get<std::array<double, 2>>();
  if (j.contains("b_cov")) p.b_cov = j["b_cov"].get<std::array<double, 4>>();
  p.beta1_positive = j.value("beta1_positive", p.beta1_positive);
  p.validate();
  return p;
}

njson sampler_to_json(const SamplerSettings& s) {
  njson j;
  j["n_draws"] = s.n_draws;
  j["burn_in"] = s.burn_in;
  j["thin"] = s.thin;
  j["seed"] = s.seed;
  j["beta_step0"] = s.beta_step0;
  j["beta_step1"] = s.beta_step1;
  j["adapt_window"] = s.adapt_window;
  j["detection_bound"] = s.detection_bound;
  j["convention"] = to_string(s.convention);
  return j;
}

SamplerSettings sampler_from_json(const njson& j, const std::string& where) {
  require_keys(j, where,
               {"n_draws", "burn_in", "thin", "seed", "beta_step0", "beta_step1",
                "adapt_window", "detection_bound", "convention"});
  SamplerSettings s;
  s.n_draws = j.value("n_draws", s.n_draws);
  s.burn_in = j.value("burn_in", s.burn_in);
  s.thin = j.value("thin", s.thin);
  s.seed = j.value("seed", s.seed);
  s.beta_step0 = j.value("beta_step0", s.beta_step0);
  s.beta_step1 = j.value("beta_step1", s.beta_step1);
  s.adapt_window = j.value("adapt_window", s.adapt_window);
  s.detection_bound = j.value("detection_bound", s.detection_bound);
  if (j.contains("convention")) {
    s.convention = sign_convention_from_string(j["convention"].get<std::string>());
  }
  s.validate();
  return s;
}

njson sim_to_json(const SimConfig& s) {
  njson j;
  j["n_genes"] = s.n_genes;
  j["n_types"] = s.n_types;
  j["reps_per_type"] = s.reps_per_type;
  j["beta_true"] = s.beta_true;
  j["sigma_theta_sq"] = s.sigma_theta_sq;
  j["mu_theta_mean"] = s.mu_theta_mean;
  j["mu_theta_sd"] = s.mu_theta_sd;
  j["mu_theta_bounds"] = s.mu_theta_bounds;
  j["sigma2_range"] = s.sigma2_range;
  j["delta"] = s.delta;
  j["detection_bound"] = s.detection_bound;
  j["convention"] = to_string(s.convention);
  j["seed"] = s.seed;
  return j;
}

SimConfig sim_from_json(const njson& j, const std::string& where) {
  require_keys(j, where,
               {"n_genes", "n_types", "reps_per_type", "beta_true", "sigma_theta_sq",
                "mu_theta_mean", "mu_theta_sd", "mu_theta_bounds", "sigma2_range",
                "delta", "detection_bound", "convention", "seed"});
  SimConfig s;
  s.n_genes = j.value("n_genes", s.n_genes);
  s.n_types = j.value("n_types", s.n_types);
  s.reps_per_type = j.value("reps_per_type", s.reps_per_type);
  if (j.contains("beta_true")) s.beta_true = j["beta_true"].get<std::array<double, 2>>();
  s.sigma_theta_sq = j.value("sigma_theta_sq", s.sigma_theta_sq);
  s.mu_theta_mean = j.value("mu_theta_mean", s.mu_theta_mean);
  s.mu_theta_sd = j.value("mu_theta_sd", s.mu_theta_sd);
  if (j.contains("mu_theta_bounds")) {
    s.mu_theta_bounds = j["mu_theta_bounds"].get<std::array<double, 2>>();
  }
  if (j.contains("sigma2_range")) {
    s.sigma2_range = j["sigma2_range"].get<std::array<double, 2>>();
  }
  if (j.contains("delta")) s.delta = j["delta"].get<std::vector<double>>();
  s.detection_bound = j.value("detection_bound", s.detection_bound);
  if (j.contains("convention")) {
    s.convention = sign_convention_from_string(j["convention"].get<std::string>());
  }
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// chain persistence

void save_chain(const std::filesystem::path& dir, const std::string& prefix,
                const ChainOutput& chain) {
  std::ostringstream os;
  bool first = true;
  auto col = [&](const std::string& name) {
    if (!first) os << ",";
    os << name;
    first = false;
  };
  for (std::size_t i = 0; i < chain.n_genes; ++i) {
    for (std::size_t k = 0; k < chain.n_types; ++k) {
      col("theta[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  for (std::size_t i = 0; i < chain.n_genes; ++i) col("sigma2[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < chain.n_genes; ++i) col("gamma2[" + std::to_string(i) + "]");
  col("beta0");
  col("beta1");
  for (auto [i, j] : chain.missing_cells) {
    col("y_mis[" + std::to_string(i) + "][" + std::to_string(j) + "]");
  }
  os << "\n";

  std::size_t tp = chain.n_theta_params();
  std::size_t mm = chain.missing_cells.size();
  for (std::size_t d = 0; d < chain.n_kept; ++d) {
    for (std::size_t c = 0; c < tp; ++c) {
      if (c) os << ",";
      os << format_double(chain.theta[d * tp + c]);
    }
    for (std::size_t i = 0; i < chain.n_genes; ++i) {
      os << "," << format_double(chain.sigma2[d * chain.n_genes + i]);
    }
    for (std::size_t i = 0; i < chain.n_genes; ++i) {
      os << "," << format_double(chain.gamma2[d * chain.n_genes + i]);
    }
    os << "," << format_double(chain.beta[d * 2]) << ","
       << format_double(chain.beta[d * 2 + 1]);
    for (std::size_t m = 0; m < mm; ++m) {
      os << "," << format_double(chain.y_mis[d * mm + m]);
    }
    os << "\n";
  }
  write_file(dir / (prefix + ".csv"), os.str());

  njson meta;
  meta["version"] = kVersion;
  meta["n_genes"] = chain.n_genes;
  meta["n_types"] = chain.n_types;
  meta["n_kept"] = chain.n_kept;
  meta["missing_cells"] = chain.missing_cells;
  meta["accept_beta"] = chain.accept_beta;
  meta["accept_theta"] = chain.accept_theta;
  meta["settings"] = sampler_to_json(chain.settings);
  write_file(dir / (prefix + "_meta.json"), meta.dump(2) + "\n");
}

ChainOutput load_chain(const std::filesystem::path& dir, const std::string& prefix) {
  njson meta;
  try {
    meta = njson::parse(read_file(dir / (prefix + "_meta.json")));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("chain metadata: ") + e.what());
  }
  ChainOutput chain;
  chain.n_genes = meta.at("n_genes").get<std::size_t>();
  chain.n_types = meta.at("n_types").get<std::size_t>();
  chain.n_kept = meta.at("n_kept").get<std::size_t>();
  chain.missing_cells = meta.at("missing_cells").get<std::vector<std::pair<int, int>>>();
  chain.accept_beta = meta.at("accept_beta").get<double>();
  chain.accept_theta = meta.at("accept_theta").get<double>();
  chain.settings = sampler_from_json(meta.at("settings"), "chain settings");

  std::string text = read_file(dir / (prefix + ".csv"));
  std::vector<std::string> lines = split_lines(text);
  std::size_t tp = chain.n_theta_params();
  std::size_t mm = chain.missing_cells.size();
  std::size_t cols = tp + 2 * chain.n_genes + 2 + mm;
  if (lines.size() != chain.n_kept + 1) {
    throw ParseError("chain CSV: expected " + std::to_string(chain.n_kept + 1) +
                     " rows, found " + std::to_string(lines.size()));
  }
  chain.theta.reserve(chain.n_kept * tp);
  chain.sigma2.reserve(chain.n_kept * chain.n_genes);
  chain.gamma2.reserve(chain.n_kept * chain.n_genes);
  chain.beta.reserve(chain.n_kept * 2);
  chain.y_mis.reserve(chain.n_kept * mm);
  for (std::size_t d = 0; d < chain.n_kept; ++d) {
    std::vector<std::string> row = split_csv(lines[d + 1]);
    if (row.size() != cols) {
      throw ParseError("chain CSV: row " + std::to_string(d + 2) + " has " +
                       std::to_string(row.size()) + " fields, expected " +
                       std::to_string(cols));
    }
    std::size_t c = 0;
    std::string where = "chain CSV row " + std::to_string(d + 2);
    for (std::size_t t = 0; t < tp; ++t) chain.theta.push_back(parse_double(row[c++], where));
    for (std::size_t i = 0; i < chain.n_genes; ++i) {
      chain.sigma2.push_back(parse_double(row[c++], where));
    }
    for (std::size_t i = 0; i < chain.n_genes; ++i) {
      chain.gamma2.push_back(parse_double(row[c++], where));
    }
    chain.beta.push_back(parse_double(row[c++], where));
    chain.beta.push_back(parse_double(row[c++], where));
    for (std::size_t m = 0; m < mm; ++m) {
      chain.y_mis.push_back(parse_double(row[c++], where));
    }
  }
  return chain;
}

// ---------------------------------------------------------------------------
// estimates / scores / truth

void save_estimates(const std::filesystem::path& path,
                    const std::vector<EstimateTable>& tables, const Dataset& data) {
  std::ostringstream os;
  os << "method,kind,gene_index,type_index,gene_id,type_label,value\n";
  for (const EstimateTable& t : tables) {
    for (std::size_t i = 0; i < t.n_genes; ++i) {
      for (std::size_t k = 0; k < t.n_types; ++k) {
        std::size_t c = i * t.n_types + k;
        os << t.method << ",theta," << i << "," << k << ","
           << csv_quote(data.gene_ids[i]) << "," << csv_quote(data.type_labels[k]) << ","
           << (t.theta_present[c] ? format_double(t.theta_hat[c]) : "NA") << "\n";
      }
    }
    for (std::size_t i = 0; i < t.n_genes; ++i) {
      os << t.method << ",sigma2," << i << ",-1," << csv_quote(data.gene_ids[i]) << ",,"
         << (t.sigma2_present[i] ? format_double(t.sigma2_hat[i]) : "NA") << "\n";
    }
  }
  write_file(path, os.str());
}

std::vector<EstimateTable> load_estimates(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::vector<std::string> lines = split_lines(text);
  if (lines.empty()) throw ParseError(path.string() + ": empty estimates file");

  struct Cell {
    std::string method, kind;
    long gene, type;
    bool present;
    double value;
  };
  std::vector<Cell> cells;
  long max_gene = -1, max_type = -1;
  std::vector<std::string> method_order;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (trim(lines[r]).empty()) continue;
    std::vector<std::string> row = split_csv(lines[r]);
    if (row.size() != 7) {
      throw ParseError(path.string() + ": row " + std::to_string(r + 1) +
                       " has wrong field count");
    }
    std::string where = path.string() + ": row " + std::to_string(r + 1);
    Cell cell;
    cell.method = row[0];
    cell.kind = row[1];
    cell.gene = static_cast<long>(parse_double(row[2], where));
    cell.type = static_cast<long>(parse_double(row[3], where));
    cell.present = row[6] != "NA";
    cell.value = cell.present ? parse_double(row[6], where) : 0.0;
    max_gene = std::max(max_gene, cell.gene);
    if (cell.kind == "theta") max_type = std::max(max_type, cell.type);
    if (std::find(method_order.begin(), method_order.end(), cell.method) ==
        method_order.end()) {
      method_order.push_back(cell.method);
    }
    cells.push_back(std::move(cell));
  }
  if (max_gene < 0 || max_type < 0) throw ParseError(path.string() + ": no estimate rows");

  std::vector<EstimateTable> tables;
  for (const std::string& m : method_order) {
    EstimateTable t;
    t.method = m;
    t.n_genes = static_cast<std::size_t>(max_gene + 1);
    t.n_types = static_cast<std::size_t>(max_type + 1);
    t.theta_hat.assign(t.n_genes * t.n_types, 0.0);
    t.theta_present.assign(t.n_genes * t.n_types, 0);
    t.sigma2_hat.assign(t.n_genes, 0.0);
    t.sigma2_present.assign(t.n_genes, 0);
    tables.push_back(std::move(t));
  }
  for (const Cell& cell : cells) {
    std::size_t mi = 0;
    while (method_order[mi] != cell.method) ++mi;
    EstimateTable& t = tables[mi];
    if (cell.kind == "theta") {
      std::size_t c = static_cast<std::size_t>(cell.gene) * t.n_types +
                      static_cast<std::size_t>(cell.type);
      t.theta_hat[c] = cell.value;
      t.theta_present[c] = cell.present ? 1 : 0;
    } else if (cell.kind == "sigma2") {
      t.sigma2_hat[static_cast<std::size_t>(cell.gene)] = cell.value;
      t.sigma2_present[static_cast<std::size_t>(cell.gene)] = cell.present ? 1 : 0;
    } else {
      throw ParseError(path.string() + ": unknown estimate kind '" + cell.kind + "'");
    }
  }
  return tables;
}

void save_scores(const std::filesystem::path& path,
                 const std::vector<SensitivityRow>& rows) {
  std::ostringstream os;
  os << "prior,family,bias_q25,bias_q50,bias_q75,mse_q25,mse_q50,mse_q75,n_cells\n";
  auto emit = [&](const std::string& label, const char* family, const FamilySummary& f) {
    os << csv_quote(label) << "," << family << "," << format_double(f.bias_q25) << ","
       << format_double(f.bias_q50) << "," << format_double(f.bias_q75) << ","
       << format_double(f.mse_q25) << "," << format_double(f.mse_q50) << ","
       << format_double(f.mse_q75) << "," << f.n_cells << "\n";
  };
  for (const SensitivityRow& row : rows) {
    emit(row.label, "theta", row.fbi.theta);
    emit(row.label, "sigma2", row.fbi.sigma2);
  }
  write_file(path, os.str());
}

void save_truth(const std::filesystem::path& path, const TruthRecord& truth) {
  njson j;
  j["version"] = kVersion;
  j["n_genes"] = truth.n_genes;
  j["n_types"] = truth.n_types;
  j["n_samples"] = truth.n_samples;
  j["theta"] = truth.theta;
  j["sigma2"] = truth.sigma2;
  j["mu_theta"] = truth.mu_theta;
  j["complete_y"] = truth.complete_y;
  j["beta_true"] = truth.beta_true;
  j["convention"] = to_string(truth.convention);
  j["seed"] = truth.seed;
  write_file(path, j.dump(2) + "\n");
}

TruthRecord load_truth(const std::filesystem::path& path) {
  njson j;
  try {
    j = njson::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  TruthRecord t;
  t.n_genes = j.at("n_genes").get<std::size_t>();
  t.n_types = j.at("n_types").get<std::size_t>();
  t.n_samples = j.at("n_samples").get<std::size_t>();
  t.theta = j.at("theta").get<std::vector<double>>();
  t.sigma2 = j.at("sigma2").get<std::vector<double>>();
  t.mu_theta = j.at("mu_theta").get<std::vector<double>>();
  t.complete_y = j.at("complete_y").get<std::vector<double>>();
  t.beta_true = j.at("beta_true").get<std::array<double, 2>>();
  t.convention = sign_convention_from_string(j.at("convention").get<std::string>());
  t.seed = j.at("seed").get<std::uint64_t>();
  return t;
}

void save_diagnostics(const std::filesystem::path& json_path,
                      const std::filesystem::path& text_path,
                      const DiagnosticsReport& report) {
  njson j;
  j["version"] = kVersion;
  j["average_ess"] = report.average_ess;
  j["average_ess_y_mis"] = report.average_ess_y_mis;
  j["accept_beta"] = report.accept_beta;
  j["accept_theta"] = report.accept_theta;
  j["ess_threshold"] = report.ess_threshold;
  j["rhat_threshold"] = report.rhat_threshold;
  j["flagged"] = report.flagged;
  auto params = njson::array();
  auto dump_param = [&](const ParameterDiagnostic& d) {
    njson p;
    p["name"] = d.name;
    p["ess"] = std::isfinite(d.ess) ? njson(d.ess) : njson(nullptr);
    p["rhat"] = std::isfinite(d.rhat) ? njson(d.rhat) : njson(nullptr);
    p["flagged"] = d.flagged;
    return p;
  };
  for (const auto& d : report.parameters) params.push_back(dump_param(d));
  j["parameters"] = params;
  auto ymis = njson::array();
  for (const auto& d : report.y_mis) ymis.push_back(dump_param(d));
  j["y_mis"] = ymis;
  write_file(json_path, j.dump(2) + "\n");
  write_file(text_path, report_to_text(report));
}

// ---------------------------------------------------------------------------
// run configuration

RunConfig parse_run_config(const std::string& json_text) {
  njson j;
  try {
    j = njson::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  require_keys(j, "config", {"priors", "sampler", "sim", "prior_grid"});

  RunConfig cfg;
  if (j.contains("priors")) cfg.priors = priors_from_json(j["priors"], "config.priors");
  if (j.contains("sampler")) cfg.sampler = sampler_from_json(j["sampler"], "config.sampler");
  if (j.contains("sim")) cfg.sim = sim_from_json(j["sim"], "config.sim");
  if (j.contains("prior_grid")) {
    if (!j["prior_grid"].is_array()) throw ConfigError("config.prior_grid: expected array");
    int idx = 0;
    for (const auto& entry : j["prior_grid"]) {
      std::string where = "config.prior_grid[" + std::to_string(idx) + "]";
      require_keys(entry, where, {"label", "sigma_prior", "gamma_prior"});
      PriorGridEntry g;
      g.sigma_prior = entry.contains("sigma_prior")
                          ? variance_prior_from_json(entry["sigma_prior"], where)
                          : cfg.priors.sigma_prior;
      g.gamma_prior = entry.contains("gamma_prior")
                          ? variance_prior_from_json(entry["gamma_prior"], where)
                          : cfg.priors.gamma_prior;
      g.label = entry.value("label", "sigma~" + g.sigma_prior.label() + " gamma~" +
                                         g.gamma_prior.label());
      cfg.prior_grid.push_back(std::move(g));
      ++idx;
    }
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_file(path));
}

void save_effective_config(const std::filesystem::path& path, const RunConfig& config) {
  njson j;
  j["priors"] = priors_to_json(config.priors);
  j["sampler"] = sampler_to_json(config.sampler);
  j["sim"] = sim_to_json(config.sim);
  auto grid = njson::array();
  for (const PriorGridEntry& g : config.prior_grid) {
    njson e;
    e["label"] = g.label;
    e["sigma_prior"] = variance_prior_to_json(g.sigma_prior);
    e["gamma_prior"] = variance_prior_to_json(g.gamma_prior);
    grid.push_back(e);
  }
  j["prior_grid"] = grid;
  write_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// manifest

std::uint64_t hash_file(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : content) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void save_manifest(const std::filesystem::path& path, const std::string& command,
                   std::uint64_t seed, const std::vector<ManifestEntry>& inputs,
                   const std::vector<std::string>& outputs) {
  njson j;
  j["version"] = kVersion;
  j["command"] = command;
  j["seed"] = seed;
  j["kernel_backend"] = kernels::active().name;
  auto ins = njson::array();
  for (const ManifestEntry& e : inputs) {
    njson one;
    one["path"] = e.path;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(e.hash));
    one["fnv1a64"] = buf;
    ins.push_back(one);
  }
  j["inputs"] = ins;
  j["outputs"] = outputs;
  write_file(path, j.dump(2) + "\n");
}

}  // namespace qpcrfbi
