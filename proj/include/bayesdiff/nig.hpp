#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bayesdiff/rng.hpp"

namespace bayesdiff {

// Normal-inverse-gamma hyper-parameters on (mean, variance) of a univariate
// Gaussian. Works both as prior (mu0, lambda0, alpha0, beta0) and posterior
// (mu_N, lambda_N, alpha_N, beta_N).
struct NIGParams {
  double mu = 0.0;      // location, intensity units
  double lambda = 1.0;  // pseudo-count
  double alpha = 1.0;   // shape
  double beta = 1.0;    // rate, squared intensity units

  // lambda, alpha, beta strictly positive; everything finite.
  void validate() const;
};

// Non-standardised Student-t: location + sqrt(scale2) * T(df).
struct ScaledTDist {
  double df;
  double location;
  double scale2;

  double pdf(double x) const;
  double mean() const { return location; }  // exists iff df > 1
  double variance() const;                  // exists iff df > 2
  void validate() const;
};

// Conjugate update. data may be empty (N = 0 returns the prior unchanged);
// any non-finite value is rejected.
NIGParams nig_update(const NIGParams& prior, std::span<const double> data);

// Marginal posterior of the mean: T(2 alpha_N, mu_N, beta_N / (alpha_N lambda_N)).
ScaledTDist nig_marginal_mean(const NIGParams& posterior);

// Law of one future observation:
// T(2 alpha_N, mu_N, beta_N (lambda_N + 1) / (alpha_N lambda_N)).
ScaledTDist nig_posterior_predictive(const NIGParams& posterior);

// x = location + sqrt(scale2) * z * sqrt(df / u), z ~ N(0,1), u ~ chi2(df).
void sample_scaled_t(const ScaledTDist& dist, RngStream& rng, std::span<double> out);
std::vector<double> sample_scaled_t(const ScaledTDist& dist, RngStream& rng,
                                    std::size_t count);

}  // namespace bayesdiff
