#include "bayesdiff/simulation.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "bayesdiff/errors.hpp"
#include "bayesdiff/inference.hpp"
#include "bayesdiff/threading.hpp"

namespace bayesdiff {

namespace {

constexpr uint64_t kGenBaseline = 1;
constexpr uint64_t kGenShifted = 2;
constexpr uint64_t kGenMask = 3;
constexpr uint64_t kBenchTag = 0x42454E43ull;
constexpr uint64_t kEngineUni = 9;
constexpr uint64_t kEngineMulti = 10;

double sample_variance(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(n);
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / double(n - 1);
}

void fill_gaussian_rows(Eigen::MatrixXd& out, double shift,
                        const Eigen::MatrixXd* chol, RngStream rng) {
  const Eigen::Index n = out.rows(), p = out.cols();
  if (chol == nullptr) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) out(i, j) = shift + rng.normal();
    return;
  }
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) z(j) = rng.normal();
    out.row(i) = (Eigen::VectorXd::Constant(p, shift) + (*chol) * z).transpose();
  }
}

std::vector<std::string> make_ids(int p, const char* prefix) {
  std::vector<std::string> ids;
  ids.reserve(std::size_t(p));
  char buf[32];
  for (int j = 0; j < p; ++j) {
    std::snprintf(buf, sizeof(buf), "%s%05d", prefix, j + 1);
    ids.emplace_back(buf);
  }
  return ids;
}

double welch_or_pooled(std::span<const double> a, std::span<const double> b,
                       bool pooled) {
  if (a.size() < 2 || b.size() < 2)
    throw InvalidInput("t-test needs at least 2 values per group");
  const double na = double(a.size()), nb = double(b.size());
  double ma = 0, mb = 0;
  for (double v : a) ma += v;
  for (double v : b) mb += v;
  ma /= na;
  mb /= nb;
  const double va = sample_variance(a), vb = sample_variance(b);
  if (va == 0.0 && vb == 0.0) return ma == mb ? 1.0 : 0.0;

  double t, df;
  if (pooled) {
    double sp2 = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2);
    t = (ma - mb) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    df = na + nb - 2;
  } else {
    double sa = va / na, sb = vb / nb;
    t = (ma - mb) / std::sqrt(sa + sb);
    df = (sa + sb) * (sa + sb) /
         (sa * sa / (na - 1) + sb * sb / (nb - 1));
  }
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(dist, -std::abs(t));
}

struct RepMetrics {
  double est_mean = 0;   // across peptides
  double width_mean = 0;
  double p_mean = 0;
  double sq_err_mean = 0;
  double abs_err_mean = 0;
  double cover_frac = 0;
};

PriorConfig harness_prior(const SimConfig& cfg, const GroupData& shifted,
                          const GroupData& baseline) {
  PriorConfig pc;
  pc.mu0_policy = Mu0Policy::pooled;
  pc.lambda0 = cfg.lambda0;
  pc.alpha0 = cfg.alpha0;
  pc.nu0 = cfg.nu0;
  if (cfg.fixed_beta0) {
    pc.beta0 = *cfg.fixed_beta0;
    return pc;
  }
  double acc = 0.0;
  Eigen::Index cols = 0;
  for (const GroupData* g : {&shifted, &baseline}) {
    for (Eigen::Index j = 0; j < g->p(); ++j) {
      std::vector<double> obs = g->observed(j);
      if (obs.size() >= 2) {
        acc += sample_variance(obs);
        ++cols;
      }
    }
  }
  pc.beta0 = cols > 0 ? std::max(cfg.beta0_scale * acc / double(cols), 1e-12)
                      : 1.0;
  return pc;
}

RepMetrics measure_rep(const SimConfig& cfg, Engine engine,
                       const GroupData& baseline, const GroupData& shifted,
                       const RngStream& engine_stream) {
  PriorConfig pc = harness_prior(cfg, shifted, baseline);
  DifferenceSamples diff =
      engine == Engine::univariate
          ? univariate_difference(shifted, baseline, pc, cfg.r_draws,
                                  engine_stream)
          : multivariate_difference(shifted, baseline, pc, cfg.d_imputations,
                                    cfg.r_draws, engine_stream);
  PosteriorSummary sum = summarize(diff, cfg.level, 0.0);
  if (sum.rows.empty()) throw Error("replication produced no peptides");

  std::unordered_map<std::string, Eigen::Index> col_of;
  for (std::size_t j = 0; j < shifted.peptide_ids.size(); ++j)
    col_of.emplace(shifted.peptide_ids[j], Eigen::Index(j));

  RepMetrics m;
  double p_acc = 0.0;
  for (const auto& row : sum.rows) {
    double err = row.mean - cfg.m;
    m.est_mean += row.mean;
    m.width_mean += row.hi - row.lo;
    m.sq_err_mean += err * err;
    m.abs_err_mean += std::abs(err);
    m.cover_frac += (row.lo <= cfg.m && cfg.m <= row.hi) ? 1.0 : 0.0;
    Eigen::Index col = col_of.at(row.peptide_id);
    auto obs_a = shifted.observed(col);
    auto obs_b = baseline.observed(col);
    p_acc += t_test(obs_a, obs_b);
  }
  double q = double(sum.rows.size());
  m.est_mean /= q;
  m.width_mean /= q;
  m.sq_err_mean /= q;
  m.abs_err_mean /= q;
  m.cover_frac /= q;
  m.p_mean = p_acc / q;
  return m;
}

struct MeanSd {
  double mean = 0, sd = 0;
};

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  const std::size_t n = xs.size();
  if (n == 0) return r;
  for (double v : xs) r.mean += v;
  r.mean /= double(n);
  double ss = 0;
  for (double v : xs) ss += (v - r.mean) * (v - r.mean);
  r.sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
  return r;
}

BenchmarkRow aggregate(const std::string& label,
                       const std::vector<RepMetrics>& reps) {
  std::vector<double> est, width, pval, sq, ab, cover;
  for (const auto& m : reps) {
    est.push_back(m.est_mean);
    width.push_back(m.width_mean);
    pval.push_back(m.p_mean);
    sq.push_back(m.sq_err_mean);
    ab.push_back(m.abs_err_mean);
    cover.push_back(m.cover_frac);
  }
  BenchmarkRow row;
  row.label = label;
  row.reps = int(reps.size());
  MeanSd e = mean_sd(est), w = mean_sd(width), p = mean_sd(pval), a = mean_sd(ab);
  row.mean_diff_mean = e.mean;
  row.mean_diff_sd = e.sd;
  row.width_mean = w.mean;
  row.width_sd = w.sd;
  row.p_mean = p.mean;
  row.p_sd = p.sd;
  MeanSd s = mean_sd(sq);
  row.rmse = std::sqrt(s.mean);
  row.abs_err_sd = a.sd;
  MeanSd c = mean_sd(cover);
  row.cic = 100.0 * c.mean;
  row.cic_sd = 100.0 * std::sqrt(std::max(0.0, c.mean * (1.0 - c.mean)));
  return row;
}

}  // namespace

void SimConfig::validate() const {
  if (replications < 1) throw InvalidInput("replications must be >= 1");
  if (n < 2) throw InvalidInput("n must be >= 2 for the t-test comparator");
  if (p < 1) throw InvalidInput("p must be >= 1");
  if (!(sigma2 > 0)) throw InvalidInput("sigma2 must be > 0");
  if (missing_rate < 0 || missing_rate >= 1)
    throw InvalidInput("missing_rate must lie in [0, 1)");
  if (covariance) {
    if (covariance->rows() != p || covariance->cols() != p)
      throw DimensionError("covariance must be p x p");
  }
  if (r_draws < 1 || d_imputations < 1)
    throw InvalidInput("r_draws and d_imputations must be >= 1");
}

std::pair<GroupData, GroupData> generate_groups(const SimConfig& config,
                                                const RngStream& rng) {
  config.validate();
  GroupData baseline, shifted;
  baseline.group_id = "baseline";
  shifted.group_id = "shifted";
  baseline.peptide_ids = make_ids(config.p, "p");
  shifted.peptide_ids = baseline.peptide_ids;

  baseline.values.resize(config.n, config.p);
  shifted.values.resize(config.n, config.p);
  baseline.missing = BoolMask::Constant(config.n, config.p, false);
  shifted.missing = BoolMask::Constant(config.n, config.p, false);

  fill_gaussian_rows(baseline.values, 0.0, nullptr, rng.substream(kGenBaseline));

  std::optional<Eigen::MatrixXd> chol;
  if (config.covariance) {
    Eigen::MatrixXd cov = config.sigma2 * (*config.covariance);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success)
      throw InvalidInput("design covariance must be positive-definite");
    chol = Eigen::MatrixXd(llt.matrixL());
  } else if (config.sigma2 != 1.0) {
    chol = Eigen::MatrixXd(std::sqrt(config.sigma2) *
                           Eigen::MatrixXd::Identity(config.p, config.p));
  }
  fill_gaussian_rows(shifted.values, config.m, chol ? &*chol : nullptr,
                     rng.substream(kGenShifted));

  if (config.missing_rate > 0.0) {
    RngStream mask = rng.substream(kGenMask);
    for (GroupData* g : {&baseline, &shifted}) {
      for (Eigen::Index i = 0; i < g->values.rows(); ++i)
        for (Eigen::Index j = 0; j < g->values.cols(); ++j)
          if (mask.uniform01() < config.missing_rate) {
            g->missing(i, j) = true;
            g->values(i, j) = std::numeric_limits<double>::quiet_NaN();
          }
    }
  }
  return {std::move(baseline), std::move(shifted)};
}

double t_test(std::span<const double> a, std::span<const double> b) {
  return welch_or_pooled(a, b, false);
}

double t_test_pooled(std::span<const double> a, std::span<const double> b) {
  return welch_or_pooled(a, b, true);
}

BenchmarkRow run_benchmark(const SimConfig& config, Engine engine) {
  config.validate();
  RngStream base = RngStream(config.seed).substream(kBenchTag);
  std::vector<RepMetrics> reps(std::size_t(config.replications));
  std::vector<std::string> errors(std::size_t(config.replications));
  parallel_for(std::size_t(config.replications), default_threads(),
               [&](std::size_t rep) {
                 RngStream rs = base.substream(uint64_t(rep));
                 try {
                   auto [baseline, shifted] = generate_groups(config, rs);
                   reps[rep] = measure_rep(
                       config, engine, baseline, shifted,
                       rs.substream(engine == Engine::univariate ? kEngineUni
                                                                 : kEngineMulti));
                 } catch (const std::exception& e) {
                   errors[rep] = e.what();
                 }
               });
  for (std::size_t rep = 0; rep < errors.size(); ++rep)
    if (!errors[rep].empty())
      throw Error("replication " + std::to_string(rep) +
                  " failed: " + errors[rep]);
  return aggregate(config.label, reps);
}

WidthComparison run_width_comparison(const SimConfig& config) {
  config.validate();
  RngStream base = RngStream(config.seed).substream(kBenchTag);
  const std::size_t nrep = std::size_t(config.replications);
  std::vector<RepMetrics> uni(nrep), multi(nrep);
  std::vector<std::string> errors(nrep);
  parallel_for(nrep, default_threads(), [&](std::size_t rep) {
    RngStream rs = base.substream(uint64_t(rep));
    try {
      auto [baseline, shifted] = generate_groups(config, rs);
      uni[rep] = measure_rep(config, Engine::univariate, baseline, shifted,
                             rs.substream(kEngineUni));
      multi[rep] = measure_rep(config, Engine::multivariate, baseline, shifted,
                               rs.substream(kEngineMulti));
    } catch (const std::exception& e) {
      errors[rep] = e.what();
    }
  });
  for (std::size_t rep = 0; rep < nrep; ++rep)
    if (!errors[rep].empty())
      throw Error("replication " + std::to_string(rep) +
                  " failed: " + errors[rep]);

  WidthComparison out;
  out.reps = config.replications;
  out.univariate_row = aggregate(config.label + "/univariate", uni);
  out.multivariate_row = aggregate(config.label + "/multivariate", multi);
  for (std::size_t rep = 0; rep < nrep; ++rep)
    if (multi[rep].width_mean < uni[rep].width_mean) ++out.multivariate_narrower;
  return out;
}

std::vector<TimingRow> run_timing(const std::vector<int>& peptide_counts,
                                  const std::vector<Engine>& engines,
                                  const SimConfig& base) {
  using clock = std::chrono::steady_clock;
  std::vector<TimingRow> out;
  for (Engine engine : engines) {
    for (int count : peptide_counts) {
      if (count < 1) throw InvalidInput("peptide count must be >= 1");
      SimConfig cfg = base;
      cfg.label = "timing";
      cfg.p = count;
      cfg.replications = 1;
      cfg.covariance.reset();
      auto [baseline, shifted] =
          generate_groups(cfg, RngStream(cfg.seed).substream(0x54494Dull));
      if (engine == Engine::multivariate) {
        // protein blocks of 10
        std::vector<std::string> prots(static_cast<std::size_t>(count));
        char buf[32];
        for (int j = 0; j < count; ++j) {
          std::snprintf(buf, sizeof(buf), "prot%05d", j / 10 + 1);
          prots[std::size_t(j)] = buf;
        }
        baseline.protein_ids = prots;
        shifted.protein_ids = prots;
      }
      PriorConfig pc = harness_prior(cfg, shifted, baseline);
      double runs[3];
      for (int k = 0; k < 3; ++k) {
        auto t0 = clock::now();
        DifferenceSamples diff =
            engine == Engine::univariate
                ? univariate_difference(shifted, baseline, pc, cfg.r_draws,
                                        RngStream(cfg.seed))
                : multivariate_by_protein(shifted, baseline, pc,
                                          cfg.d_imputations, cfg.r_draws,
                                          RngStream(cfg.seed));
        PosteriorSummary sum = summarize(diff, cfg.level, 0.0);
        if (sum.rows.size() != std::size_t(count))
          throw Error("timing run dropped peptides");
        runs[k] = std::chrono::duration<double>(clock::now() - t0).count();
      }
      std::sort(runs, runs + 3);
      TimingRow row;
      row.engine = engine == Engine::univariate ? "univariate" : "multivariate";
      row.peptides = count;
      row.seconds = runs[1];
      out.push_back(row);
    }
  }
  return out;
}

SimConfig make_design(const std::string& label) {
  SimConfig cfg;
  cfg.label = label;
  if (label == "t2r1") {
    cfg.m = 1;
    cfg.sigma2 = 1;
  } else if (label == "t2r2") {
    cfg.m = 5;
    cfg.sigma2 = 1;
  } else if (label == "t2r3") {
    cfg.m = 10;
    cfg.sigma2 = 1;
  } else if (label == "t2r4") {
    cfg.m = 1;
    cfg.sigma2 = 5;
  } else if (label == "t2r5") {
    cfg.m = 1;
    cfg.sigma2 = 10;
  } else if (label == "t2r6") {
    cfg.m = 1;
    cfg.sigma2 = 20;
  } else if (label == "t2null") {
    cfg.m = 0;
    cfg.sigma2 = 1;
  } else if (label == "t4") {
    cfg.m = 1;
    cfg.sigma2 = 1;
    cfg.p = 10;
    cfg.replications = 100;
    Eigen::MatrixXd cov =
        0.9 * Eigen::MatrixXd::Identity(10, 10) +
        0.1 * Eigen::MatrixXd::Ones(10, 10);
    cfg.covariance = cov;
  } else {
    std::string known;
    for (const auto& d : list_designs()) known += (known.empty() ? "" : ", ") + d;
    throw InvalidInput("unknown design '" + label + "'; available: " + known);
  }
  return cfg;
}

std::vector<std::string> list_designs() {
  return {"t2r1", "t2r2", "t2r3", "t2r4", "t2r5", "t2r6", "t2null", "t4"};
}

}  // namespace bayesdiff
