#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <json.hpp>

#include "bayesdiff/dataio.hpp"
#include "bayesdiff/errors.hpp"
#include "bayesdiff/inference.hpp"
#include "bayesdiff/simulation.hpp"
#include "bayesdiff/threading.hpp"
#include "bayesdiff/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Validation failure that should print the subcommand usage.
struct UsageError : bayesdiff::InvalidInput {
  using InvalidInput::InvalidInput;
};

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bayesdiff::InvalidInput("cannot open config '" + path + "'");
  try {
    return json::parse(in);
  } catch (const std::exception& e) {
    throw bayesdiff::InvalidInput("config '" + path + "': " + e.what());
  }
}

void check_config_keys(const json& cfg, const std::set<std::string>& allowed,
                       const std::string& path) {
  if (!cfg.is_object())
    throw bayesdiff::InvalidInput("config '" + path + "' must be a JSON object");
  for (const auto& item : cfg.items())
    if (!allowed.count(item.key()))
      throw bayesdiff::InvalidInput("config '" + path + "': unknown key '" +
                                    item.key() + "'");
}

// Flags beat config values beat defaults.
template <typename T>
void cfg_set(const json& cfg, const char* key, const CLI::Option* opt, T& target) {
  if (opt->count() > 0 || !cfg.contains(key)) return;
  try {
    target = cfg.at(key).get<T>();
  } catch (const std::exception&) {
    throw bayesdiff::InvalidInput(std::string("config key '") + key +
                                  "' has the wrong type");
  }
}

bool was_given(const json& cfg, const char* key, const CLI::Option* opt) {
  return opt->count() > 0 || cfg.contains(key);
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bayesdiff::InvalidInput("cannot open matrix '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - pos);
      double v = 0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw bayesdiff::ParseError("matrix '" + path + "' row " +
                                    std::to_string(rows.size() + 1) +
                                    ": cannot parse '" + cell + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows[0].size())
      throw bayesdiff::ParseError("matrix '" + path + "' is ragged");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw bayesdiff::ParseError("matrix '" + path + "' is empty");
  Eigen::MatrixXd m(long(rows.size()), long(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(long(i), long(j)) = rows[i][j];
  return m;
}

std::string manifest_path_for(const std::string& out) {
  fs::path p(out);
  p.replace_extension();
  return p.string() + ".manifest.json";
}

void ensure_parent_dir(const std::string& out) {
  fs::path parent = fs::path(out).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_json_file(const ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw bayesdiff::Error("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

ordered_json file_entry(const std::string& path) {
  return ordered_json{{"path", path}, {"digest", bayesdiff::file_digest_hex(path)}};
}

void report_run(const bayesdiff::DifferenceSamples& samples,
                const bayesdiff::PosteriorSummary& summary,
                const std::string& out) {
  for (const auto& w : samples.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : summary.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& [id, why] : samples.skipped)
    std::cerr << "skipped " << id << ": " << why << '\n';
  int flagged = 0;
  for (const auto& row : summary.rows) flagged += row.flagged ? 1 : 0;
  std::cout << "wrote " << out << " (" << summary.rows.size() << " peptides, "
            << samples.draws.rows() << " draws, " << flagged << " flagged)\n";
}

ordered_json diagnostics_json(const bayesdiff::DifferenceSamples& samples,
                              const bayesdiff::PosteriorSummary& summary) {
  ordered_json d;
  d["skipped"] = ordered_json::array();
  for (const auto& [id, why] : samples.skipped)
    d["skipped"].push_back(ordered_json{{"peptide", id}, {"reason", why}});
  d["warnings"] = ordered_json::array();
  for (const auto& w : samples.warnings) d["warnings"].push_back(w);
  for (const auto& w : summary.warnings) d["warnings"].push_back(w);
  return d;
}

struct ThreadsOpt {
  int threads = 0;
  CLI::Option* opt = nullptr;
};

void resolve_threads(const ThreadsOpt& t, const json& cfg) {
  int threads = t.threads;
  if (t.opt->count() == 0 && cfg.contains("threads"))
    threads = cfg.at("threads").get<int>();
  if (threads < 0) throw bayesdiff::InvalidInput("--threads must be >= 0");
  if (threads > 0) bayesdiff::set_default_threads(threads);
}

struct AnalysisOpts {
  std::string data, design, group_a, group_b, config;
  std::string out = "summary.csv";
  std::string emit_draws, emit_hist;
  int r = 10000;
  int bins = 50;
  uint64_t seed = bayesdiff::kDefaultSeed;
  double level = 0.95, tau = 0.0;
  double mu0 = 0.0, lambda0 = 1.0, alpha0 = 1.0, beta0 = 1.0;
  bool data_imputed = false;

  // multivariate only
  int d = 7;
  double nu0 = 10.0;
  std::string sigma0_path;
  bool by_protein = false;
  std::string combine = "average";
  std::vector<std::string> pre_imputed;
};

struct AnalysisOptHandles {
  CLI::Option *data, *design, *group_a, *group_b, *out, *emit_draws, *emit_hist;
  CLI::Option *r, *bins, *seed, *level, *tau, *mu0, *lambda0, *alpha0, *beta0;
  CLI::Option *data_imputed;
  CLI::Option *d = nullptr, *nu0 = nullptr, *sigma0 = nullptr,
              *by_protein = nullptr, *combine = nullptr, *pre_imputed = nullptr;
};

AnalysisOptHandles add_analysis_options(CLI::App* cmd, AnalysisOpts& o) {
  AnalysisOptHandles h{};
  h.data = cmd->add_option("--data", o.data,
                           "wide intensity CSV (peptide id, optional protein, "
                           "one column per sample)");
  h.design = cmd->add_option("--design", o.design, "sample,condition CSV");
  h.group_a = cmd->add_option("--group-a", o.group_a, "first condition label");
  h.group_b = cmd->add_option("--group-b", o.group_b, "second condition label");
  h.r = cmd->add_option("--r", o.r, "posterior draws per peptide");
  h.seed = cmd->add_option("--seed", o.seed, "RNG seed");
  h.level = cmd->add_option("--level", o.level, "credible level in (0,1)");
  h.tau = cmd->add_option("--tau", o.tau, "effect threshold for P(|diff|>tau)");
  h.mu0 = cmd->add_option("--mu0", o.mu0,
                          "prior mean (omit to pool the observed values)");
  h.lambda0 = cmd->add_option("--lambda0", o.lambda0, "prior precision scale");
  h.alpha0 = cmd->add_option("--alpha0", o.alpha0, "prior shape");
  h.beta0 = cmd->add_option("--beta0", o.beta0, "prior rate");
  h.out = cmd->add_option("--out", o.out, "summary CSV path");
  h.emit_draws = cmd->add_option("--emit-draws", o.emit_draws, "draws CSV path");
  h.emit_hist = cmd->add_option("--emit-hist", o.emit_hist,
                                "histogram CSV path (plot-ready)");
  h.bins = cmd->add_option("--bins", o.bins, "histogram bin count");
  h.data_imputed = cmd->add_flag("--data-imputed", o.data_imputed,
                                 "declare the input matrix as already imputed");
  cmd->add_option("--config", o.config,
                  "JSON config; keys named exactly as flags, flags win");
  return h;
}

void merge_analysis_config(const json& cfg, const AnalysisOptHandles& h,
                           AnalysisOpts& o) {
  cfg_set(cfg, "data", h.data, o.data);
  cfg_set(cfg, "design", h.design, o.design);
  cfg_set(cfg, "group-a", h.group_a, o.group_a);
  cfg_set(cfg, "group-b", h.group_b, o.group_b);
  cfg_set(cfg, "r", h.r, o.r);
  cfg_set(cfg, "seed", h.seed, o.seed);
  cfg_set(cfg, "level", h.level, o.level);
  cfg_set(cfg, "tau", h.tau, o.tau);
  cfg_set(cfg, "mu0", h.mu0, o.mu0);
  cfg_set(cfg, "lambda0", h.lambda0, o.lambda0);
  cfg_set(cfg, "alpha0", h.alpha0, o.alpha0);
  cfg_set(cfg, "beta0", h.beta0, o.beta0);
  cfg_set(cfg, "out", h.out, o.out);
  cfg_set(cfg, "emit-draws", h.emit_draws, o.emit_draws);
  cfg_set(cfg, "emit-hist", h.emit_hist, o.emit_hist);
  cfg_set(cfg, "bins", h.bins, o.bins);
  cfg_set(cfg, "data-imputed", h.data_imputed, o.data_imputed);
}

void require_analysis_args(const AnalysisOpts& o) {
  if (o.data.empty()) throw UsageError("--data is required");
  if (o.design.empty()) throw UsageError("--design is required");
  if (o.group_a.empty()) throw UsageError("--group-a is required");
  if (o.group_b.empty()) throw UsageError("--group-b is required");
}

bayesdiff::PriorConfig build_prior(const AnalysisOpts& o, bool mu0_given) {
  bayesdiff::PriorConfig prior;
  if (mu0_given) {
    prior.mu0_policy = bayesdiff::Mu0Policy::explicit_value;
    prior.mu0 = o.mu0;
  }
  prior.lambda0 = o.lambda0;
  prior.alpha0 = o.alpha0;
  prior.beta0 = o.beta0;
  prior.nu0 = o.nu0;
  if (!o.sigma0_path.empty()) prior.sigma0 = load_matrix_csv(o.sigma0_path);
  return prior;
}

std::pair<bayesdiff::GroupData, bayesdiff::GroupData> load_groups(
    const AnalysisOpts& o) {
  auto groups = bayesdiff::load_dataset(o.data, o.design);
  auto find = [&](const std::string& id) {
    auto it = groups.find(id);
    if (it == groups.end()) {
      std::string known;
      for (const auto& [k, v] : groups)
        known += (known.empty() ? "" : ", ") + k;
      throw bayesdiff::InvalidInput("condition '" + id +
                                    "' is not in the design; available: " + known);
    }
    return it->second;
  };
  auto a = find(o.group_a);
  auto b = find(o.group_b);
  if (o.group_a == o.group_b)
    throw bayesdiff::InvalidInput("--group-a and --group-b must differ");
  if (o.data_imputed) {
    a.declared_imputed = true;
    b.declared_imputed = true;
  }
  return {std::move(a), std::move(b)};
}

ordered_json common_parameters(const AnalysisOpts& o, bool mu0_given) {
  ordered_json p;
  p["group-a"] = o.group_a;
  p["group-b"] = o.group_b;
  p["r"] = o.r;
  p["seed"] = o.seed;
  p["level"] = o.level;
  p["tau"] = o.tau;
  p["mu0"] = mu0_given ? ordered_json(o.mu0) : ordered_json("pooled");
  p["lambda0"] = o.lambda0;
  p["alpha0"] = o.alpha0;
  p["beta0"] = o.beta0;
  p["data-imputed"] = o.data_imputed;
  return p;
}

void write_outputs_and_manifest(const std::string& subcommand,
                                const AnalysisOpts& o, ordered_json parameters,
                                const bayesdiff::DifferenceSamples& samples) {
  bayesdiff::PosteriorSummary summary =
      bayesdiff::summarize(samples, o.level, o.tau);
  ensure_parent_dir(o.out);
  bayesdiff::write_summary(summary, o.out);

  ordered_json outputs;
  outputs["summary"] = file_entry(o.out);
  if (!o.emit_draws.empty()) {
    ensure_parent_dir(o.emit_draws);
    bayesdiff::write_samples(samples, o.emit_draws);
    outputs["draws"] = file_entry(o.emit_draws);
  }
  if (!o.emit_hist.empty()) {
    ensure_parent_dir(o.emit_hist);
    bayesdiff::write_histogram(samples, o.bins, o.level, o.emit_hist);
    outputs["histogram"] = file_entry(o.emit_hist);
  }

  ordered_json m;
  m["tool"] = "bayesdiff";
  m["version"] = bayesdiff::kVersion;
  m["subcommand"] = subcommand;
  m["parameters"] = std::move(parameters);
  ordered_json inputs;
  inputs["data"] = file_entry(o.data);
  inputs["design"] = file_entry(o.design);
  if (!o.sigma0_path.empty()) inputs["sigma0"] = file_entry(o.sigma0_path);
  if (!o.config.empty()) inputs["config"] = file_entry(o.config);
  for (const auto& f : o.pre_imputed) inputs["pre-imputed"].push_back(file_entry(f));
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  ordered_json diag = diagnostics_json(samples, summary);
  m["skipped"] = diag["skipped"];
  m["warnings"] = diag["warnings"];
  write_json_file(m, manifest_path_for(o.out));

  report_run(samples, summary, o.out);
}

int run_univariate(AnalysisOpts& o, const AnalysisOptHandles& h,
                   const ThreadsOpt& threads) {
  json cfg = o.config.empty() ? json::object() : load_json_file(o.config);
  check_config_keys(cfg,
                    {"data", "design", "group-a", "group-b", "r", "seed",
                     "level", "tau", "mu0", "lambda0", "alpha0", "beta0", "out",
                     "emit-draws", "emit-hist", "bins", "data-imputed",
                     "threads"},
                    o.config);
  merge_analysis_config(cfg, h, o);
  resolve_threads(threads, cfg);
  require_analysis_args(o);
  bool mu0_given = was_given(cfg, "mu0", h.mu0);

  auto [a, b] = load_groups(o);
  bayesdiff::PriorConfig prior = build_prior(o, mu0_given);
  bayesdiff::RngStream rng(o.seed);
  bayesdiff::DifferenceSamples samples =
      bayesdiff::univariate_difference(a, b, prior, o.r, rng);

  write_outputs_and_manifest("univariate", o, common_parameters(o, mu0_given),
                             samples);
  return 0;
}

bayesdiff::ImputedSet load_pre_imputed(const std::vector<std::string>& files,
                                       const std::string& design_path,
                                       const bayesdiff::GroupData& g) {
  bayesdiff::ImputedSet set;
  set.mask = g.missing;
  for (const auto& f : files) {
    auto groups = bayesdiff::load_dataset(f, design_path);
    auto it = groups.find(g.group_id);
    if (it == groups.end())
      throw bayesdiff::InvalidInput("pre-imputed file '" + f +
                                    "' lacks condition '" + g.group_id + "'");
    bayesdiff::GroupData& cg = it->second;
    if (cg.peptide_ids != g.peptide_ids)
      throw bayesdiff::InvalidInput("pre-imputed file '" + f +
                                    "' does not match the --data peptide ids");
    if (cg.n() != g.n())
      throw bayesdiff::InvalidInput("pre-imputed file '" + f +
                                    "' has a different sample count");
    if (cg.missing.any())
      throw bayesdiff::InvalidInput("pre-imputed file '" + f +
                                    "' still contains missing cells");
    set.draws.push_back(std::move(cg.values));
  }
  return set;
}

int run_multivariate(AnalysisOpts& o, const AnalysisOptHandles& h,
                     const ThreadsOpt& threads) {
  json cfg = o.config.empty() ? json::object() : load_json_file(o.config);
  check_config_keys(cfg,
                    {"data", "design", "group-a", "group-b", "r", "seed",
                     "level", "tau", "mu0", "lambda0", "alpha0", "beta0", "out",
                     "emit-draws", "emit-hist", "bins", "data-imputed",
                     "threads", "d", "nu0", "sigma0", "by-protein", "combine",
                     "pre-imputed"},
                    o.config);
  merge_analysis_config(cfg, h, o);
  cfg_set(cfg, "d", h.d, o.d);
  cfg_set(cfg, "nu0", h.nu0, o.nu0);
  cfg_set(cfg, "sigma0", h.sigma0, o.sigma0_path);
  cfg_set(cfg, "by-protein", h.by_protein, o.by_protein);
  cfg_set(cfg, "combine", h.combine, o.combine);
  cfg_set(cfg, "pre-imputed", h.pre_imputed, o.pre_imputed);
  resolve_threads(threads, cfg);
  require_analysis_args(o);
  bool mu0_given = was_given(cfg, "mu0", h.mu0);

  bayesdiff::Combine combine;
  if (o.combine == "average")
    combine = bayesdiff::Combine::average;
  else if (o.combine == "mixture")
    combine = bayesdiff::Combine::mixture;
  else
    throw UsageError("--combine must be 'average' or 'mixture'");

  auto [a, b] = load_groups(o);
  bool bp_given = was_given(cfg, "by-protein", h.by_protein);
  bool by_protein = bp_given ? o.by_protein : a.has_proteins();
  if (by_protein && !a.has_proteins())
    throw bayesdiff::InvalidInput(
        "--by-protein needs a protein column in the data CSV");

  bayesdiff::PriorConfig prior = build_prior(o, mu0_given);
  bayesdiff::RngStream rng(o.seed);

  bayesdiff::DifferenceSamples samples;
  if (!o.pre_imputed.empty()) {
    if (by_protein)
      throw bayesdiff::InvalidInput(
          "pre-imputed ingestion runs the whole panel jointly; pass "
          "--no-by-protein");
    if (h.d->count() > 0 || cfg.contains("d")) {
      if (o.d != int(o.pre_imputed.size()))
        throw bayesdiff::InvalidInput(
            "--d disagrees with the number of pre-imputed files");
    }
    auto ia = load_pre_imputed(o.pre_imputed, o.design, a);
    auto ib = load_pre_imputed(o.pre_imputed, o.design, b);
    samples = bayesdiff::multivariate_difference(a, b, ia, ib, prior, o.r, rng,
                                                 combine);
  } else if (by_protein) {
    samples = bayesdiff::multivariate_by_protein(a, b, prior, o.d, o.r, rng,
                                                 combine);
  } else {
    samples =
        bayesdiff::multivariate_difference(a, b, prior, o.d, o.r, rng, combine);
  }

  ordered_json params = common_parameters(o, mu0_given);
  params["d"] = samples.d_used;
  params["nu0"] = o.nu0;
  params["sigma0"] = o.sigma0_path.empty() ? "identity" : o.sigma0_path;
  params["combine"] = o.combine;
  params["by-protein"] = by_protein;
  if (by_protein) {
    ordered_json blocks = ordered_json::array();
    std::vector<std::string> order;
    std::map<std::string, int> counts;
    for (const auto& prot : a.protein_ids) {
      if (!counts.count(prot)) order.push_back(prot);
      ++counts[prot];
    }
    for (const auto& prot : order)
      blocks.push_back(ordered_json{{"protein", prot}, {"peptides", counts[prot]}});
    params["blocks"] = std::move(blocks);
  }

  write_outputs_and_manifest("multivariate", o, std::move(params), samples);
  return 0;
}

struct SimulateOpts {
  std::string design_table, config;
  std::string out = "benchmark.csv";
  std::string engine;
  int reps = 0;
  uint64_t seed = 0;
  bool timing = false;
};

bayesdiff::SimConfig sim_config_from_json(const json& cfg,
                                          const std::string& path) {
  check_config_keys(cfg,
                    {"label", "m", "sigma2", "covariance", "n", "p",
                     "replications", "seed", "missing_rate", "r_draws",
                     "d_imputations", "level", "lambda0", "alpha0",
                     "beta0_scale", "fixed_beta0", "nu0"},
                    path);
  bayesdiff::SimConfig c;
  c.label = "custom";
  auto get = [&](const char* key, auto& target) {
    if (cfg.contains(key)) target = cfg.at(key).get<std::decay_t<decltype(target)>>();
  };
  get("label", c.label);
  get("m", c.m);
  get("sigma2", c.sigma2);
  get("n", c.n);
  get("p", c.p);
  get("replications", c.replications);
  get("seed", c.seed);
  get("missing_rate", c.missing_rate);
  get("r_draws", c.r_draws);
  get("d_imputations", c.d_imputations);
  get("level", c.level);
  get("lambda0", c.lambda0);
  get("alpha0", c.alpha0);
  get("beta0_scale", c.beta0_scale);
  get("nu0", c.nu0);
  if (cfg.contains("fixed_beta0")) c.fixed_beta0 = cfg.at("fixed_beta0").get<double>();
  if (cfg.contains("covariance")) {
    const json& cov = cfg.at("covariance");
    if (cov.is_string()) {
      c.covariance = load_matrix_csv(cov.get<std::string>());
    } else {
      auto rows = cov.get<std::vector<std::vector<double>>>();
      if (rows.empty()) throw bayesdiff::InvalidInput("covariance is empty");
      Eigen::MatrixXd m(long(rows.size()), long(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
          throw bayesdiff::InvalidInput("covariance is ragged");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
          m(long(i), long(j)) = rows[i][j];
      }
      c.covariance = m;
    }
  }
  return c;
}

ordered_json sim_parameters(const bayesdiff::SimConfig& c,
                            const std::string& engine, bool timing) {
  ordered_json p;
  p["label"] = c.label;
  p["m"] = c.m;
  p["sigma2"] = c.sigma2;
  p["covariance"] = c.covariance ? "explicit" : "identity";
  p["n"] = c.n;
  p["p"] = c.p;
  p["replications"] = c.replications;
  p["seed"] = c.seed;
  p["missing_rate"] = c.missing_rate;
  p["r_draws"] = c.r_draws;
  p["d_imputations"] = c.d_imputations;
  p["level"] = c.level;
  p["lambda0"] = c.lambda0;
  p["alpha0"] = c.alpha0;
  if (c.fixed_beta0)
    p["beta0"] = *c.fixed_beta0;
  else
    p["beta0_scale"] = c.beta0_scale;
  p["nu0"] = c.nu0;
  p["engine"] = engine;
  p["timing"] = timing;
  return p;
}

void print_benchmark_rows(const std::vector<bayesdiff::BenchmarkRow>& rows) {
  std::printf("%-24s %6s %14s %14s %12s %10s %10s\n", "design", "reps",
              "mean diff (sd)", "width (sd)", "welch p (sd)", "rmse",
              "cic95 (sd)");
  for (const auto& r : rows)
    std::printf("%-24s %6d %7.3f (%.3f) %7.3f (%.3f) %5.3f (%.3f) %10.4f %5.1f (%.1f)\n",
                r.label.c_str(), r.reps, r.mean_diff_mean, r.mean_diff_sd,
                r.width_mean, r.width_sd, r.p_mean, r.p_sd, r.rmse, r.cic,
                r.cic_sd);
}

int run_simulate(SimulateOpts& o, CLI::Option* reps_opt, CLI::Option* seed_opt,
                 CLI::Option* engine_opt, const ThreadsOpt& threads) {
  resolve_threads(threads, json::object());
  if (!o.design_table.empty() && !o.config.empty())
    throw UsageError("pass either --design-table or --config, not both");
  if (o.design_table.empty() && o.config.empty())
    throw UsageError("one of --design-table or --config is required");

  bayesdiff::SimConfig cfg;
  if (!o.design_table.empty()) {
    cfg = bayesdiff::make_design(o.design_table);
  } else {
    cfg = sim_config_from_json(load_json_file(o.config), o.config);
  }
  if (reps_opt->count() > 0) cfg.replications = o.reps;
  if (seed_opt->count() > 0) cfg.seed = o.seed;
  cfg.validate();

  std::string engine = o.engine;
  if (engine_opt->count() == 0) engine = cfg.p > 1 ? "both" : "univariate";
  if (engine != "univariate" && engine != "multivariate" && engine != "both")
    throw UsageError("--engine must be univariate, multivariate, or both");

  std::vector<bayesdiff::BenchmarkRow> rows;
  int narrower = -1;
  if (engine == "both") {
    bayesdiff::WidthComparison wc = bayesdiff::run_width_comparison(cfg);
    rows.push_back(wc.univariate_row);
    rows.push_back(wc.multivariate_row);
    narrower = wc.multivariate_narrower;
  } else {
    rows.push_back(bayesdiff::run_benchmark(
        cfg, engine == "univariate" ? bayesdiff::Engine::univariate
                                    : bayesdiff::Engine::multivariate));
  }

  ensure_parent_dir(o.out);
  fs::path csv_path(o.out);
  if (csv_path.extension() == ".json") csv_path.replace_extension(".csv");
  fs::path json_path = csv_path;
  json_path.replace_extension(".json");
  bayesdiff::write_benchmark_csv(rows, csv_path.string());
  bayesdiff::write_benchmark_json(rows, json_path.string());

  ordered_json outputs;
  outputs["csv"] = file_entry(csv_path.string());
  outputs["json"] = file_entry(json_path.string());

  std::string timing_path;
  if (o.timing) {
    auto timing_rows = bayesdiff::run_timing(
        {100, 1000, 10000},
        {bayesdiff::Engine::univariate, bayesdiff::Engine::multivariate}, cfg);
    fs::path tp = csv_path;
    tp.replace_extension();
    timing_path = tp.string() + "-timing.csv";
    bayesdiff::write_timing_csv(timing_rows, timing_path);
    outputs["timing"] = file_entry(timing_path);
    std::printf("%-14s %9s %12s\n", "engine", "peptides", "seconds");
    for (const auto& t : timing_rows)
      std::printf("%-14s %9d %12.3f\n", t.engine.c_str(), t.peptides, t.seconds);
  }

  ordered_json m;
  m["tool"] = "bayesdiff";
  m["version"] = bayesdiff::kVersion;
  m["subcommand"] = "simulate";
  m["parameters"] = sim_parameters(cfg, engine, o.timing);
  ordered_json inputs = ordered_json::object();
  if (!o.config.empty()) inputs["config"] = file_entry(o.config);
  m["inputs"] = std::move(inputs);
  m["outputs"] = std::move(outputs);
  write_json_file(m, manifest_path_for(csv_path.string()));

  print_benchmark_rows(rows);
  if (narrower >= 0)
    std::printf("multivariate interval narrower in %d/%d replications\n",
                narrower, cfg.replications);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Bayesian differential analysis of grouped intensity data: closed-form "
      "posteriors for group means, posterior-difference sampling, "
      "multiple-imputation combination, and simulation benchmarks"};
  app.set_version_flag("--version", std::string(bayesdiff::kVersion));
  app.require_subcommand(1);

  ThreadsOpt threads;
  threads.opt = app.add_option("--threads", threads.threads,
                               "worker threads (0 = all cores); results do "
                               "not depend on it")
                    ->envname("BAYESDIFF_THREADS");

  AnalysisOpts uni_opts;
  auto* uni = app.add_subcommand(
      "univariate",
      "Peptide-wise posterior of the between-group mean difference, observed "
      "values only");
  AnalysisOptHandles uni_h = add_analysis_options(uni, uni_opts);

  AnalysisOpts mv_opts;
  auto* mv = app.add_subcommand(
      "multivariate",
      "Joint posterior of the mean-difference vector via multiple imputation");
  AnalysisOptHandles mv_h = add_analysis_options(mv, mv_opts);
  mv_h.d = mv->add_option("--d", mv_opts.d, "imputed datasets per group");
  mv_h.nu0 = mv->add_option("--nu0", mv_opts.nu0, "prior degrees of freedom");
  mv_h.sigma0 = mv->add_option("--sigma0", mv_opts.sigma0_path,
                               "prior scale matrix CSV (default identity)");
  mv_h.by_protein =
      mv->add_flag("--by-protein,!--no-by-protein", mv_opts.by_protein,
                   "block by protein (default on when a protein column exists)");
  mv_h.combine = mv->add_option("--combine", mv_opts.combine,
                                "average | mixture (per-imputation collapse)");
  mv_h.pre_imputed = mv->add_option(
      "--pre-imputed", mv_opts.pre_imputed,
      "externally completed copies of --data (one CSV per imputation)");

  SimulateOpts sim_opts;
  auto* sim = app.add_subcommand(
      "simulate", "Benchmark the engines on synthetic two-group designs");
  sim->add_option("--design-table", sim_opts.design_table,
                  "built-in design label (see docs; e.g. t2r1, t4)");
  sim->add_option("--config", sim_opts.config, "custom design JSON");
  auto* sim_reps = sim->add_option("--reps", sim_opts.reps, "replication count");
  auto* sim_seed = sim->add_option("--seed", sim_opts.seed, "RNG seed");
  auto* sim_engine =
      sim->add_option("--engine", sim_opts.engine,
                      "univariate | multivariate | both (default: both when "
                      "the design is multivariate)");
  sim->add_flag("--timing", sim_opts.timing,
                "also time full analyses at 100/1000/10000 peptides");
  sim->add_option("--out", sim_opts.out, "benchmark CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  CLI::App* active = uni->parsed() ? uni : mv->parsed() ? mv : sim;
  try {
    if (uni->parsed()) return run_univariate(uni_opts, uni_h, threads);
    if (mv->parsed()) return run_multivariate(mv_opts, mv_h, threads);
    return run_simulate(sim_opts, sim_reps, sim_seed, sim_engine, threads);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << active->help();
    return 2;
  } catch (const bayesdiff::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
