#pragma once

#include <Eigen/Dense>

#include "bayesdiff/nig.hpp"
#include "bayesdiff/rng.hpp"

namespace bayesdiff {

// Normal-inverse-Wishart hyper-parameters on (mean vector, covariance) of a
// P-dimensional Gaussian.
struct NIWParams {
  Eigen::VectorXd mu;    // length P
  double lambda = 1.0;   // pseudo-count
  Eigen::MatrixXd sigma; // P x P scale matrix
  double nu = 10.0;      // degrees of freedom, > P - 1

  Eigen::Index p() const { return mu.size(); }
  // lambda > 0, sigma symmetric positive-definite, nu > P - 1.
  void validate() const;
};

// Multivariate non-standardised t. Every coordinate marginal is the
// ScaledTDist with the same df and the matching location/diagonal entries.
struct MultivariateTDist {
  double df;
  Eigen::VectorXd location;
  Eigen::MatrixXd scale;

  Eigen::Index p() const { return location.size(); }
  ScaledTDist marginal(Eigen::Index i) const;
};

// sum_n (x_n - center)(x_n - center)^T, rows of data being observations.
Eigen::MatrixXd scatter_about(const Eigen::MatrixXd& data,
                              const Eigen::VectorXd& center);

// Conjugate update; data rows are complete P-vectors. N = 0 returns the
// prior unchanged.
NIWParams niw_update(const NIWParams& prior, const Eigen::MatrixXd& data);

// Marginal posterior of the mean vector:
// MVT(nu_N - P + 1, mu_N, Sigma_N / (lambda_N (nu_N - P + 1))).
MultivariateTDist niw_marginal_mean(const NIWParams& posterior);

// x = location + L z sqrt(df/u) with L L^T = scale (LLT after symmetrization,
// with up to 3 jitter retries). Returns count x P, one draw per row.
Eigen::MatrixXd sample_multivariate_t(const MultivariateTDist& dist,
                                      RngStream& rng, Eigen::Index count);

// Internal: symmetrize + jitter factorization shared by the sampler; exposed
// for tests of the repair policy.
Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& scale);

}  // namespace bayesdiff
