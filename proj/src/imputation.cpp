#include "bayesdiff/imputation.hpp"

#include <cmath>

#include "bayesdiff/errors.hpp"

namespace bayesdiff {

namespace {
constexpr uint64_t kImputeTag = 0x494D5055ull;  // stream namespace
}

ImputedSet impute(const GroupData& group,
                  const std::vector<NIGParams>& column_priors, int d_count,
                  const RngStream& rng) {
  group.validate();
  if (d_count < 1) throw InvalidInput("impute: d_count must be >= 1");
  if (column_priors.size() != std::size_t(group.p()))
    throw DimensionError("impute: one prior per column required");

  ImputedSet set;
  set.mask = group.missing;
  set.draws.assign(d_count, group.values);

  RngStream base = rng.substream(kImputeTag).substream(fnv1a64(group.group_id));
  for (Eigen::Index col = 0; col < group.p(); ++col) {
    bool any_missing = false;
    for (Eigen::Index row = 0; row < group.n(); ++row)
      if (group.missing(row, col)) { any_missing = true; break; }
    if (!any_missing) continue;

    std::vector<double> obs = group.observed(col);
    if (obs.empty())
      throw UnimputablePeptideError("peptide '" + group.peptide_ids[col] +
                                    "' has no observed value in group '" +
                                    group.group_id + "'");
    NIGParams post = nig_update(column_priors[col], obs);
    ScaledTDist pred = nig_posterior_predictive(post);

    RngStream col_stream = base.substream(fnv1a64(group.peptide_ids[col]));
    for (int d = 0; d < d_count; ++d) {
      RngStream draw_stream = col_stream.substream(uint64_t(d));
      for (Eigen::Index row = 0; row < group.n(); ++row) {
        if (!group.missing(row, col)) continue;
        double x[1];
        sample_scaled_t(pred, draw_stream, std::span<double>(x, 1));
        set.draws[d](row, col) = x[0];
      }
    }
  }
  return set;
}

ImputedSet impute(const GroupData& group, const NIGParams& prior, int d_count,
                  const RngStream& rng) {
  std::vector<NIGParams> priors(std::size_t(group.p()), prior);
  return impute(group, priors, d_count, rng);
}

double missingness_ratio(const GroupData& group) {
  const Eigen::Index total = group.n() * group.p();
  if (total == 0) return 0.0;
  Eigen::Index miss = 0;
  for (Eigen::Index c = 0; c < group.p(); ++c)
    for (Eigen::Index r = 0; r < group.n(); ++r)
      if (group.missing(r, c)) ++miss;
  return double(miss) / double(total);
}

}  // namespace bayesdiff
