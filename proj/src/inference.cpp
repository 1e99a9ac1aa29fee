#include "bayesdiff/inference.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "bayesdiff/errors.hpp"
#include "bayesdiff/imputation.hpp"
#include "bayesdiff/threading.hpp"

namespace bayesdiff {

namespace {

constexpr uint64_t kUniTag = 0x554E4956ull;
constexpr uint64_t kMvtTag = 0x4D565420ull;
constexpr uint64_t kMixTag = 0x4D495854ull;
constexpr uint64_t kBlockTag = 0x424C4Bull;

const char* kMirageMessage =
    "input is declared imputed: the univariate engine works on observed "
    "values only, and filled-in cells would fake certainty the data never "
    "contained; rerun on the raw (masked) matrix";

// Pooled mu0 per peptide: mean of the peptide's observed values across both
// groups. Returns one value per column of `a` (matched columns in b).
double pooled_mu0(const GroupData& a, Eigen::Index col_a, const GroupData& b,
                  Eigen::Index col_b) {
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index r = 0; r < a.n(); ++r)
    if (!a.missing(r, col_a)) { sum += a.values(r, col_a); ++count; }
  for (Eigen::Index r = 0; r < b.n(); ++r)
    if (!b.missing(r, col_b)) { sum += b.values(r, col_b); ++count; }
  if (count == 0) throw NoDataError("peptide has no observed value in either group");
  return sum / double(count);
}

void check_missingness_warning(const GroupData& g,
                               std::vector<std::string>& warnings) {
  double ratio = missingness_ratio(g);
  if (ratio > kMissingnessWarnThreshold) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "group '%s' is %.0f%% missing; inferences lean heavily on "
                  "the prior and the imputation model",
                  g.group_id.c_str(), 100.0 * ratio);
    warnings.push_back(buf);
  }
}

struct MatchedPeptide {
  std::string id;
  Eigen::Index col_a, col_b;
};

// Peptides of `a` found in `b`; the rest are recorded as skipped.
std::vector<MatchedPeptide> match_peptides(
    const GroupData& a, const GroupData& b,
    std::vector<std::pair<std::string, std::string>>& skipped) {
  std::unordered_map<std::string, Eigen::Index> in_b;
  for (std::size_t j = 0; j < b.peptide_ids.size(); ++j)
    in_b.emplace(b.peptide_ids[j], Eigen::Index(j));
  std::vector<MatchedPeptide> out;
  for (std::size_t j = 0; j < a.peptide_ids.size(); ++j) {
    auto it = in_b.find(a.peptide_ids[j]);
    if (it == in_b.end()) {
      skipped.emplace_back(a.peptide_ids[j], "absent from group '" + b.group_id + "'");
      continue;
    }
    out.push_back({a.peptide_ids[j], Eigen::Index(j), it->second});
  }
  for (const auto& id : b.peptide_ids)
    if (std::find(a.peptide_ids.begin(), a.peptide_ids.end(), id) ==
        a.peptide_ids.end())
      skipped.emplace_back(id, "absent from group '" + a.group_id + "'");
  return out;
}

}  // namespace

void PriorConfig::validate() const {
  if (!(lambda0 > 0) || !(alpha0 > 0) || !(beta0 > 0))
    throw InvalidInput("prior requires lambda0, alpha0, beta0 > 0");
  if (!(nu0 > 0)) throw InvalidInput("prior requires nu0 > 0");
  if (!std::isfinite(mu0)) throw InvalidInput("prior mu0 must be finite");
}

ScaledTDist univariate_posterior(const GroupData& group, Eigen::Index col,
                                 const NIGParams& resolved_prior) {
  if (group.declared_imputed) throw InvalidInput(kMirageMessage);
  if (col < 0 || col >= group.p()) throw DimensionError("peptide column out of range");
  std::vector<double> obs = group.observed(col);
  if (obs.empty())
    throw NoDataError("peptide '" + group.peptide_ids[std::size_t(col)] +
                      "' has no observed value in group '" + group.group_id + "'");
  return nig_marginal_mean(nig_update(resolved_prior, obs));
}

ScaledTDist univariate_posterior(const GroupData& group,
                                 const std::string& peptide_id,
                                 const PriorConfig& prior) {
  prior.validate();
  auto it = std::find(group.peptide_ids.begin(), group.peptide_ids.end(), peptide_id);
  if (it == group.peptide_ids.end())
    throw InvalidInput("unknown peptide '" + peptide_id + "'");
  Eigen::Index col = it - group.peptide_ids.begin();

  NIGParams p0{prior.mu0, prior.lambda0, prior.alpha0, prior.beta0};
  if (prior.mu0_policy == Mu0Policy::pooled) {
    std::vector<double> obs = group.observed(col);
    if (obs.empty())
      throw NoDataError("peptide '" + peptide_id + "' has no observed value");
    double s = 0;
    for (double v : obs) s += v;
    p0.mu = s / double(obs.size());
  } else if (prior.mu0_vector) {
    if (prior.mu0_vector->size() != group.p())
      throw DimensionError("mu0 vector length must match peptide count");
    p0.mu = (*prior.mu0_vector)(col);
  }
  return univariate_posterior(group, col, p0);
}

DifferenceSamples univariate_difference(const GroupData& a, const GroupData& b,
                                        const PriorConfig& prior, int r_count,
                                        const RngStream& rng) {
  a.validate();
  b.validate();
  prior.validate();
  if (r_count < 1) throw InvalidInput("R must be >= 1");
  if (a.declared_imputed || b.declared_imputed) throw InvalidInput(kMirageMessage);
  if (prior.mu0_vector && prior.mu0_vector->size() != a.p())
    throw DimensionError("mu0 vector length must match peptide count");

  DifferenceSamples out;
  out.group_a = a.group_id;
  out.group_b = b.group_id;
  out.seed = rng.seed();
  out.d_used = 1;
  out.r = r_count;
  check_missingness_warning(a, out.warnings);
  check_missingness_warning(b, out.warnings);

  std::vector<MatchedPeptide> matched = match_peptides(a, b, out.skipped);

  // Drop peptides lacking observations on either side before allocating.
  std::vector<MatchedPeptide> usable;
  for (const auto& m : matched) {
    if (a.observed_count(m.col_a) == 0) {
      out.skipped.emplace_back(m.id, "no observed values in group '" + a.group_id + "'");
      continue;
    }
    if (b.observed_count(m.col_b) == 0) {
      out.skipped.emplace_back(m.id, "no observed values in group '" + b.group_id + "'");
      continue;
    }
    usable.push_back(m);
  }

  out.peptide_ids.reserve(usable.size());
  for (const auto& m : usable) out.peptide_ids.push_back(m.id);
  out.draws.resize(r_count, Eigen::Index(usable.size()));

  RngStream base = rng.substream(kUniTag);
  parallel_for(usable.size(), default_threads(), [&](std::size_t j) {
    const auto& m = usable[j];
    NIGParams p0{prior.mu0, prior.lambda0, prior.alpha0, prior.beta0};
    if (prior.mu0_policy == Mu0Policy::pooled)
      p0.mu = pooled_mu0(a, m.col_a, b, m.col_b);
    else if (prior.mu0_vector)
      p0.mu = (*prior.mu0_vector)(m.col_a);

    ScaledTDist ta = univariate_posterior(a, m.col_a, p0);
    ScaledTDist tb = univariate_posterior(b, m.col_b, p0);

    RngStream pep = base.substream(fnv1a64(m.id));
    RngStream sa = pep.substream(fnv1a64(a.group_id));
    RngStream sb = pep.substream(fnv1a64(b.group_id));
    std::vector<double> da = sample_scaled_t(ta, sa, std::size_t(r_count));
    std::vector<double> db = sample_scaled_t(tb, sb, std::size_t(r_count));
    for (int r = 0; r < r_count; ++r)
      out.draws(r, Eigen::Index(j)) = da[std::size_t(r)] - db[std::size_t(r)];
  });
  return out;
}

namespace {

// One group's combined R x P realisation matrix from its D completed copies.
Eigen::MatrixXd combine_realisations(const std::vector<Eigen::MatrixXd>& completed,
                                     const std::string& group_id,
                                     const NIWParams& prior, int r_count,
                                     const RngStream& rng, Combine combine) {
  const int d_count = int(completed.size());
  const Eigen::Index pp = completed[0].cols();
  RngStream draw_base = rng.substream(kMvtTag).substream(fnv1a64(group_id));

  if (combine == Combine::average) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(r_count, pp);
    for (int d = 0; d < d_count; ++d) {
      NIWParams post = niw_update(prior, completed[std::size_t(d)]);
      MultivariateTDist t = niw_marginal_mean(post);
      RngStream s = draw_base.substream(uint64_t(d));
      acc += sample_multivariate_t(t, s, r_count);
    }
    return acc / double(d_count);
  }

  // mixture: one imputation index per realisation
  RngStream pick = rng.substream(kMixTag).substream(fnv1a64(group_id));
  std::vector<int> sel(static_cast<std::size_t>(r_count));
  std::vector<int> counts(std::size_t(d_count), 0);
  for (int r = 0; r < r_count; ++r) {
    sel[std::size_t(r)] = int(pick.uniform_below(uint64_t(d_count)));
    ++counts[std::size_t(sel[std::size_t(r)])];
  }
  Eigen::MatrixXd out(r_count, pp);
  for (int d = 0; d < d_count; ++d) {
    if (counts[std::size_t(d)] == 0) continue;
    NIWParams post = niw_update(prior, completed[std::size_t(d)]);
    MultivariateTDist t = niw_marginal_mean(post);
    RngStream s = draw_base.substream(uint64_t(d));
    Eigen::MatrixXd block = sample_multivariate_t(t, s, counts[std::size_t(d)]);
    Eigen::Index k = 0;
    for (int r = 0; r < r_count; ++r)
      if (sel[std::size_t(r)] == d) out.row(r) = block.row(k++);
  }
  return out;
}

struct MvPrior {
  NIWParams w0;
  std::vector<NIGParams> col_priors;
};

MvPrior resolve_mv_prior(const GroupData& a, const GroupData& b,
                         const PriorConfig& prior) {
  const Eigen::Index pp = a.p();
  Eigen::VectorXd mu0(pp);
  if (prior.mu0_policy == Mu0Policy::pooled) {
    for (Eigen::Index j = 0; j < pp; ++j) mu0(j) = pooled_mu0(a, j, b, j);
  } else if (prior.mu0_vector) {
    if (prior.mu0_vector->size() != pp)
      throw DimensionError("mu0 vector length must match peptide count");
    mu0 = *prior.mu0_vector;
  } else {
    mu0.setConstant(prior.mu0);
  }

  MvPrior out;
  out.w0.mu = mu0;
  out.w0.lambda = prior.lambda0;
  out.w0.nu = prior.nu0;
  if (prior.sigma0) {
    if (prior.sigma0->rows() != pp || prior.sigma0->cols() != pp)
      throw DimensionError("sigma0 must be P x P");
    out.w0.sigma = *prior.sigma0;
  } else {
    out.w0.sigma = Eigen::MatrixXd::Identity(pp, pp);
  }
  out.w0.validate();

  out.col_priors.reserve(std::size_t(pp));
  for (Eigen::Index j = 0; j < pp; ++j)
    out.col_priors.push_back({mu0(j), prior.lambda0, prior.alpha0, prior.beta0});
  return out;
}

void check_mv_inputs(const GroupData& a, const GroupData& b,
                     const PriorConfig& prior, int r_count) {
  a.validate();
  b.validate();
  prior.validate();
  if (r_count < 1) throw InvalidInput("R must be >= 1");
  if (a.p() != b.p() ||
      !std::equal(a.peptide_ids.begin(), a.peptide_ids.end(), b.peptide_ids.begin()))
    throw InvalidInput(
        "multivariate engine needs identical peptide id sets in both groups "
        "(use the by-protein runner to intersect)");
}

void check_imputed_set(const ImputedSet& imp, const GroupData& g) {
  if (imp.d() < 1) throw InvalidInput("imputed set for group '" + g.group_id + "' is empty");
  if (imp.mask.rows() != g.n() || imp.mask.cols() != g.p() ||
      (imp.mask != g.missing).any())
    throw InvalidInput("imputed set mask does not match group '" + g.group_id + "'");
  for (const auto& m : imp.draws) {
    if (m.rows() != g.n() || m.cols() != g.p())
      throw DimensionError("imputed draw shape does not match group '" + g.group_id + "'");
    if (!m.allFinite())
      throw InvalidInput("imputed draw for group '" + g.group_id +
                         "' still contains non-finite cells");
    for (Eigen::Index c = 0; c < g.p(); ++c)
      for (Eigen::Index r = 0; r < g.n(); ++r)
        if (!g.missing(r, c) && m(r, c) != g.values(r, c))
          throw InvalidInput("imputed draw for group '" + g.group_id +
                             "' alters an observed cell of peptide '" +
                             g.peptide_ids[std::size_t(c)] + "'");
  }
}

DifferenceSamples mv_shell(const GroupData& a, const GroupData& b, int d_count,
                           int r_count, const RngStream& rng) {
  DifferenceSamples out;
  out.group_a = a.group_id;
  out.group_b = b.group_id;
  out.peptide_ids = a.peptide_ids;
  out.seed = rng.seed();
  out.d_used = d_count;
  out.r = r_count;
  check_missingness_warning(a, out.warnings);
  check_missingness_warning(b, out.warnings);
  if (a.declared_imputed || b.declared_imputed)
    out.warnings.push_back(
        "input declared imputed: treating cells as observed; posterior "
        "spread no longer reflects imputation uncertainty");
  return out;
}

}  // namespace

DifferenceSamples multivariate_difference(const GroupData& a,
                                          const GroupData& b,
                                          const PriorConfig& prior, int d_count,
                                          int r_count, const RngStream& rng,
                                          Combine combine) {
  check_mv_inputs(a, b, prior, r_count);
  if (d_count < 1) throw InvalidInput("D must be >= 1");

  DifferenceSamples out = mv_shell(a, b, d_count, r_count, rng);
  MvPrior mv = resolve_mv_prior(a, b, prior);
  ImputedSet ia = impute(a, mv.col_priors, d_count, rng);
  ImputedSet ib = impute(b, mv.col_priors, d_count, rng);
  Eigen::MatrixXd ga =
      combine_realisations(ia.draws, a.group_id, mv.w0, r_count, rng, combine);
  Eigen::MatrixXd gb =
      combine_realisations(ib.draws, b.group_id, mv.w0, r_count, rng, combine);
  out.draws = ga - gb;
  return out;
}

DifferenceSamples multivariate_difference(const GroupData& a,
                                          const GroupData& b,
                                          const ImputedSet& imputed_a,
                                          const ImputedSet& imputed_b,
                                          const PriorConfig& prior, int r_count,
                                          const RngStream& rng,
                                          Combine combine) {
  check_mv_inputs(a, b, prior, r_count);
  check_imputed_set(imputed_a, a);
  check_imputed_set(imputed_b, b);
  if (imputed_a.d() != imputed_b.d())
    throw InvalidInput("both groups need the same number of imputed draws");

  DifferenceSamples out = mv_shell(a, b, imputed_a.d(), r_count, rng);
  MvPrior mv = resolve_mv_prior(a, b, prior);
  Eigen::MatrixXd ga = combine_realisations(imputed_a.draws, a.group_id, mv.w0,
                                            r_count, rng, combine);
  Eigen::MatrixXd gb = combine_realisations(imputed_b.draws, b.group_id, mv.w0,
                                            r_count, rng, combine);
  out.draws = ga - gb;
  return out;
}

DifferenceSamples multivariate_by_protein(const GroupData& a,
                                          const GroupData& b,
                                          const PriorConfig& prior, int d_count,
                                          int r_count, const RngStream& rng,
                                          Combine combine) {
  a.validate();
  b.validate();
  if (!a.has_proteins())
    throw InvalidInput("by-protein run needs a protein label per peptide");

  DifferenceSamples out;
  out.group_a = a.group_id;
  out.group_b = b.group_id;
  out.seed = rng.seed();
  out.d_used = d_count;
  out.r = r_count;

  std::vector<MatchedPeptide> matched = match_peptides(a, b, out.skipped);

  // Blocks keyed by protein, in order of first appearance.
  std::vector<std::string> block_order;
  std::unordered_map<std::string, std::vector<MatchedPeptide>> blocks;
  for (const auto& m : matched) {
    const std::string& prot = a.protein_ids[std::size_t(m.col_a)];
    if (!blocks.count(prot)) block_order.push_back(prot);
    blocks[prot].push_back(m);
  }

  struct BlockResult {
    DifferenceSamples samples;
    std::string error;
    std::vector<std::string> ids;
  };
  std::vector<BlockResult> results(block_order.size());

  RngStream base = rng.substream(kBlockTag);
  parallel_for(block_order.size(), default_threads(), [&](std::size_t bi) {
    const std::string& prot = block_order[bi];
    const auto& members = blocks[prot];
    GroupData sa, sb;
    sa.group_id = a.group_id;
    sb.group_id = b.group_id;
    sa.declared_imputed = a.declared_imputed;
    sb.declared_imputed = b.declared_imputed;
    const Eigen::Index bp = Eigen::Index(members.size());
    sa.values.resize(a.n(), bp);
    sa.missing.resize(a.n(), bp);
    sb.values.resize(b.n(), bp);
    sb.missing.resize(b.n(), bp);
    for (Eigen::Index j = 0; j < bp; ++j) {
      const auto& m = members[std::size_t(j)];
      sa.values.col(j) = a.values.col(m.col_a);
      sa.missing.col(j) = a.missing.col(m.col_a);
      sb.values.col(j) = b.values.col(m.col_b);
      sb.missing.col(j) = b.missing.col(m.col_b);
      sa.peptide_ids.push_back(m.id);
      sb.peptide_ids.push_back(m.id);
    }
    PriorConfig block_prior = prior;
    if (prior.sigma0) {
      Eigen::MatrixXd sub(bp, bp);
      for (Eigen::Index x = 0; x < bp; ++x)
        for (Eigen::Index y = 0; y < bp; ++y)
          sub(x, y) = (*prior.sigma0)(members[std::size_t(x)].col_a,
                                      members[std::size_t(y)].col_a);
      block_prior.sigma0 = sub;
    }
    if (prior.mu0_vector) {
      Eigen::VectorXd sub(bp);
      for (Eigen::Index x = 0; x < bp; ++x)
        sub(x) = (*prior.mu0_vector)(members[std::size_t(x)].col_a);
      block_prior.mu0_vector = sub;
    }
    results[bi].ids = sa.peptide_ids;
    try {
      results[bi].samples =
          multivariate_difference(sa, sb, block_prior, d_count, r_count,
                                  base.substream(fnv1a64(prot)), combine);
    } catch (const std::exception& e) {
      results[bi].error = e.what();
    }
  });

  // Peptide-indexed concatenation in input order of successful blocks.
  std::unordered_map<std::string, std::pair<std::size_t, Eigen::Index>> where;
  for (std::size_t bi = 0; bi < results.size(); ++bi) {
    if (!results[bi].error.empty()) {
      for (const auto& id : results[bi].ids)
        out.skipped.emplace_back(id, "block '" + block_order[bi] +
                                         "' failed: " + results[bi].error);
      continue;
    }
    for (Eigen::Index j = 0; j < Eigen::Index(results[bi].ids.size()); ++j)
      where[results[bi].ids[std::size_t(j)]] = {bi, j};
    for (const auto& w : results[bi].samples.warnings)
      out.warnings.push_back(w);
  }
  std::vector<std::pair<std::size_t, Eigen::Index>> cols;
  for (const auto& m : matched) {
    auto it = where.find(m.id);
    if (it == where.end()) continue;
    out.peptide_ids.push_back(m.id);
    cols.push_back(it->second);
  }
  out.draws.resize(r_count, Eigen::Index(cols.size()));
  for (Eigen::Index j = 0; j < Eigen::Index(cols.size()); ++j)
    out.draws.col(j) =
        results[cols[std::size_t(j)].first].samples.draws.col(cols[std::size_t(j)].second);
  return out;
}

double quantile7(std::vector<double>& scratch, double q) {
  const std::size_t n = scratch.size();
  if (n == 1) return scratch[0];
  double h = double(n - 1) * q;
  std::size_t i = std::size_t(std::floor(h));
  if (i >= n - 1) i = n - 2;
  double g = h - double(i);
  std::nth_element(scratch.begin(), scratch.begin() + long(i), scratch.end());
  double xi = scratch[i];
  if (g <= 0.0) return xi;
  double xj = *std::min_element(scratch.begin() + long(i) + 1, scratch.end());
  return xi + g * (xj - xi);
}

PosteriorSummary summarize(const DifferenceSamples& samples, double level,
                           double tau) {
  if (!(level > 0.0 && level < 1.0))
    throw InvalidInput("level must lie in (0, 1)");
  if (tau < 0.0) throw InvalidInput("tau must be >= 0");
  const Eigen::Index r = samples.draws.rows();
  if (r < 1) throw InvalidInput("no draws to summarize");

  PosteriorSummary s;
  s.level = level;
  s.tau = tau;
  if (r < 100)
    s.warnings.push_back("fewer than 100 draws; interval endpoints are noisy");

  const double ql = 0.5 * (1.0 - level);
  std::vector<double> scratch(static_cast<std::size_t>(r));
  double prob_pos_sum = 0.0;
  for (Eigen::Index j = 0; j < samples.draws.cols(); ++j) {
    PeptideSummary row;
    row.peptide_id = samples.peptide_ids[std::size_t(j)];
    double mean = 0.0;
    Eigen::Index pos = 0, exceed = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
      double v = samples.draws(i, j);
      scratch[std::size_t(i)] = v;
      mean += v;
      if (v > 0.0) ++pos;
      if (std::abs(v) > tau) ++exceed;
    }
    row.mean = mean / double(r);
    row.lo = quantile7(scratch, ql);
    row.hi = quantile7(scratch, 1.0 - ql);
    row.prob_positive = double(pos) / double(r);
    row.prob_exceeds_tau = double(exceed) / double(r);
    row.flagged = (row.lo > 0.0) || (row.hi < 0.0);
    prob_pos_sum += row.prob_positive;
    s.rows.push_back(std::move(row));
  }
  if (!s.rows.empty()) s.avg_prob_positive = prob_pos_sum / double(s.rows.size());
  return s;
}

}  // namespace bayesdiff
