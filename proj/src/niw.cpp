#include "bayesdiff/niw.hpp"

#include <cmath>
#include <string>

#include "bayesdiff/errors.hpp"

namespace bayesdiff {

void NIWParams::validate() const {
  const Eigen::Index pp = mu.size();
  if (pp == 0) throw InvalidInput("NIW mu must be non-empty");
  if (!mu.allFinite()) throw InvalidInput("NIW mu must be finite");
  if (!std::isfinite(lambda) || lambda <= 0.0)
    throw InvalidInput("NIW lambda must be > 0");
  if (sigma.rows() != pp || sigma.cols() != pp)
    throw DimensionError("NIW sigma must be P x P");
  if (!sigma.allFinite()) throw InvalidInput("NIW sigma must be finite");
  double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  double diag = sigma.diagonal().cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(1.0, diag))
    throw InvalidInput("NIW sigma must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (sigma + sigma.transpose()));
  if (llt.info() != Eigen::Success)
    throw InvalidInput("NIW sigma must be positive-definite");
  if (!(nu > double(pp) - 1.0))
    throw InsufficientDofError("NIW nu must exceed P - 1 (P = " +
                               std::to_string(pp) +
                               "); raise nu0 or reduce the block size");
}

ScaledTDist MultivariateTDist::marginal(Eigen::Index i) const {
  return ScaledTDist{df, location(i), scale(i, i)};
}

Eigen::MatrixXd scatter_about(const Eigen::MatrixXd& data,
                              const Eigen::VectorXd& center) {
  if (data.cols() != center.size())
    throw DimensionError("scatter_about: center length must match columns");
  Eigen::MatrixXd centered = data.rowwise() - center.transpose();
  return centered.transpose() * centered;
}

NIWParams niw_update(const NIWParams& prior, const Eigen::MatrixXd& data) {
  prior.validate();
  const Eigen::Index n = data.rows();
  if (n == 0) return prior;
  if (data.cols() != prior.p())
    throw DimensionError("niw_update: data columns must match prior dimension");
  if (!data.allFinite())
    throw InvalidInput("niw_update: non-finite observation");

  const double nn = double(n);
  Eigen::VectorXd ybar = data.colwise().mean();

  NIWParams post;
  post.lambda = prior.lambda + nn;
  post.mu = (nn * ybar + prior.lambda * prior.mu) / post.lambda;
  post.nu = prior.nu + nn;
  Eigen::VectorXd gap = ybar - prior.mu;
  post.sigma = prior.sigma + scatter_about(data, ybar) +
               (prior.lambda * nn / post.lambda) * (gap * gap.transpose());
  return post;
}

MultivariateTDist niw_marginal_mean(const NIWParams& posterior) {
  posterior.validate();
  const double df = posterior.nu - double(posterior.p()) + 1.0;
  if (!(df > 0.0))
    throw InsufficientDofError(
        "marginal mean needs nu_N - P + 1 > 0 (got " + std::to_string(df) +
        "); raise nu0 or reduce the block size");
  MultivariateTDist t;
  t.df = df;
  t.location = posterior.mu;
  t.scale = posterior.sigma / (posterior.lambda * df);
  return t;
}

Eigen::MatrixXd robust_cholesky(const Eigen::MatrixXd& scale) {
  Eigen::MatrixXd sym = 0.5 * (scale + scale.transpose());
  double jitter = 1e-10 * sym.diagonal().mean();
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    sym.diagonal().array() += jitter;
    jitter *= 10.0;
  }
  throw FactorizationError(
      "scale matrix not positive-definite after symmetrization and jitter");
}

Eigen::MatrixXd sample_multivariate_t(const MultivariateTDist& dist,
                                      RngStream& rng, Eigen::Index count) {
  const Eigen::Index pp = dist.p();
  if (dist.scale.rows() != pp || dist.scale.cols() != pp)
    throw DimensionError("sample_multivariate_t: scale must be P x P");
  Eigen::MatrixXd l = robust_cholesky(dist.scale);
  Eigen::MatrixXd out(count, pp);
  Eigen::VectorXd z(pp);
  for (Eigen::Index r = 0; r < count; ++r) {
    for (Eigen::Index j = 0; j < pp; ++j) z(j) = rng.normal();
    double u = rng.chi2(dist.df);
    out.row(r) =
        (dist.location + std::sqrt(dist.df / u) * (l * z)).transpose();
  }
  return out;
}

}  // namespace bayesdiff
