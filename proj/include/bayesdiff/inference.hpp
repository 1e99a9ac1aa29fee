#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bayesdiff/dataset.hpp"
#include "bayesdiff/imputation.hpp"
#include "bayesdiff/nig.hpp"
#include "bayesdiff/niw.hpp"
#include "bayesdiff/rng.hpp"

namespace bayesdiff {

enum class Mu0Policy { pooled, explicit_value };

// Shared hyper-prior for both compared groups. A single config is applied to
// both sides by construction, which is what makes the comparison fair; there
// is deliberately no way to pass two different priors.
struct PriorConfig {
  Mu0Policy mu0_policy = Mu0Policy::pooled;
  double mu0 = 0.0;                          // explicit scalar (broadcast)
  std::optional<Eigen::VectorXd> mu0_vector; // explicit per-peptide override
  double lambda0 = 1.0;
  double alpha0 = 1.0;
  double beta0 = 1.0;
  std::optional<Eigen::MatrixXd> sigma0;     // default: identity
  double nu0 = 10.0;

  void validate() const;
};

// How the D per-imputation realisations collapse into one draw per r:
// average takes the mean over completions (smooth, but narrows the spread as
// D grows on complete data); mixture picks one completion per realisation,
// which is the draw law the combined posterior actually defines.
enum class Combine { average, mixture };

struct DifferenceSamples {
  Eigen::MatrixXd draws;                  // R x Q, mean(a) - mean(b)
  std::vector<std::string> peptide_ids;   // length Q
  std::string group_a, group_b;
  uint64_t seed = 0;
  int d_used = 1;
  int r = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  // (peptide, why)
  std::vector<std::string> warnings;
};

struct PeptideSummary {
  std::string peptide_id;
  double mean = 0;
  double lo = 0, hi = 0;
  double prob_positive = 0;
  double prob_exceeds_tau = 0;
  bool flagged = false;
};

struct PosteriorSummary {
  double level = 0.95;
  double tau = 0.0;
  std::vector<PeptideSummary> rows;
  double avg_prob_positive = 0;  // mean over peptides
  std::vector<std::string> warnings;
};

// Marginal posterior of one peptide's mean from observed values only; missing
// rows contribute nothing (the likelihood factorises over observed cells).
// The PriorConfig overload resolves a pooled mu0 from this group alone.
ScaledTDist univariate_posterior(const GroupData& group,
                                 const std::string& peptide_id,
                                 const PriorConfig& prior);
ScaledTDist univariate_posterior(const GroupData& group, Eigen::Index col,
                                 const NIGParams& resolved_prior);

// Imputation-free engine: per shared peptide, R draws from each group's
// posterior mean marginal, returned as elementwise differences. Inputs
// declared imputed are refused: feeding filled-in values here would shrink
// the posterior with information the data never contained.
DifferenceSamples univariate_difference(const GroupData& a, const GroupData& b,
                                        const PriorConfig& prior, int r_count,
                                        const RngStream& rng);

// Imputation + multivariate engine: D completed datasets per group, one
// Gaussian-inverse-Wishart posterior per completion, R realisations combined
// per `combine`. Both groups must carry identical peptide id sets.
DifferenceSamples multivariate_difference(const GroupData& a,
                                          const GroupData& b,
                                          const PriorConfig& prior, int d_count,
                                          int r_count, const RngStream& rng,
                                          Combine combine = Combine::average);

// Same engine fed with externally completed datasets (one ImputedSet per
// group, equal draw counts, observed cells matching the source exactly);
// for users of other imputers.
DifferenceSamples multivariate_difference(const GroupData& a,
                                          const GroupData& b,
                                          const ImputedSet& imputed_a,
                                          const ImputedSet& imputed_b,
                                          const PriorConfig& prior, int r_count,
                                          const RngStream& rng,
                                          Combine combine = Combine::average);

// Partitions peptides by protein and runs multivariate_difference per block;
// work and memory scale with the sum of squared block sizes. Block failures
// are recorded and do not abort the other blocks.
DifferenceSamples multivariate_by_protein(const GroupData& a,
                                          const GroupData& b,
                                          const PriorConfig& prior, int d_count,
                                          int r_count, const RngStream& rng,
                                          Combine combine = Combine::average);

// Equal-tailed interval at `level` from empirical quantiles (type-7, linear
// interpolation), sign probabilities, and the |diff| > tau exceedance.
PosteriorSummary summarize(const DifferenceSamples& samples, double level,
                           double tau);

// Type-7 empirical quantile; reorders scratch.
double quantile7(std::vector<double>& scratch, double q);

}  // namespace bayesdiff
