#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bayesdiff/dataset.hpp"
#include "bayesdiff/nig.hpp"
#include "bayesdiff/rng.hpp"

namespace bayesdiff {

// D completed copies of one group's matrix. Observed cells are identical
// across draws and equal to the source values; only masked cells vary.
struct ImputedSet {
  std::vector<Eigen::MatrixXd> draws;
  BoolMask mask;

  int d() const { return int(draws.size()); }
};

// Fills every missing cell, independently per draw, with a sample from the
// per-column observed-data posterior predictive: nig_update on the column's
// observed values under column_priors[p], then the predictive t with
// df 2 alpha_N, location mu_N, scale2 beta_N (lambda_N + 1)/(alpha_N lambda_N).
// Column sub-streams are derived from (group id, column id, draw id), so the
// result is independent of evaluation order.
ImputedSet impute(const GroupData& group,
                  const std::vector<NIGParams>& column_priors, int d_count,
                  const RngStream& rng);

// Same prior for every column.
ImputedSet impute(const GroupData& group, const NIGParams& prior, int d_count,
                  const RngStream& rng);

// Fraction of cells masked missing.
double missingness_ratio(const GroupData& group);

// Above this ratio downstream consumers emit a reliability warning.
inline constexpr double kMissingnessWarnThreshold = 0.5;

}  // namespace bayesdiff
