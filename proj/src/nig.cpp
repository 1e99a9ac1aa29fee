#include "bayesdiff/nig.hpp"

#include <cmath>
#include <numbers>

#include "bayesdiff/errors.hpp"

namespace bayesdiff {

void NIGParams::validate() const {
  if (!std::isfinite(mu) || !std::isfinite(lambda) || !std::isfinite(alpha) ||
      !std::isfinite(beta))
    throw InvalidInput("NIG parameters must be finite");
  if (lambda <= 0.0) throw InvalidInput("NIG lambda must be > 0");
  if (alpha <= 0.0) throw InvalidInput("NIG alpha must be > 0");
  if (beta <= 0.0) throw InvalidInput("NIG beta must be > 0");
}

void ScaledTDist::validate() const {
  if (!(df > 0.0) || !(scale2 > 0.0) || !std::isfinite(location))
    throw InvalidInput("scaled-t requires df > 0, scale2 > 0, finite location");
}

double ScaledTDist::pdf(double x) const {
  double s = std::sqrt(scale2);
  double z = (x - location) / s;
  double lognorm = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                   0.5 * std::log(df * std::numbers::pi) - std::log(s);
  return std::exp(lognorm - 0.5 * (df + 1.0) * std::log1p(z * z / df));
}

double ScaledTDist::variance() const {
  if (df <= 2.0) throw InvalidInput("variance undefined for df <= 2");
  return df / (df - 2.0) * scale2;
}

NIGParams nig_update(const NIGParams& prior, std::span<const double> data) {
  prior.validate();
  const std::size_t n = data.size();
  if (n == 0) return prior;

  double sum = 0.0;
  for (double y : data) {
    if (!std::isfinite(y)) throw InvalidInput("non-finite observation");
    sum += y;
  }
  const double nn = double(n);
  const double ybar = sum / nn;
  double ss = 0.0;
  for (double y : data) {
    double d = y - ybar;
    ss += d * d;
  }

  NIGParams post;
  post.lambda = prior.lambda + nn;
  post.mu = (nn * ybar + prior.lambda * prior.mu) / post.lambda;
  post.alpha = prior.alpha + 0.5 * nn;
  double gap = ybar - prior.mu;
  post.beta = prior.beta + 0.5 * ss +
              (prior.lambda * nn) / (2.0 * post.lambda) * gap * gap;
  return post;
}

ScaledTDist nig_marginal_mean(const NIGParams& posterior) {
  posterior.validate();
  return ScaledTDist{2.0 * posterior.alpha, posterior.mu,
                     posterior.beta / (posterior.alpha * posterior.lambda)};
}

ScaledTDist nig_posterior_predictive(const NIGParams& posterior) {
  posterior.validate();
  return ScaledTDist{
      2.0 * posterior.alpha, posterior.mu,
      posterior.beta * (posterior.lambda + 1.0) /
          (posterior.alpha * posterior.lambda)};
}

void sample_scaled_t(const ScaledTDist& dist, RngStream& rng,
                     std::span<double> out) {
  dist.validate();
  const double s = std::sqrt(dist.scale2);
  for (double& x : out) {
    double z = rng.normal();
    double u = rng.chi2(dist.df);
    x = dist.location + s * z * std::sqrt(dist.df / u);
  }
}

std::vector<double> sample_scaled_t(const ScaledTDist& dist, RngStream& rng,
                                    std::size_t count) {
  std::vector<double> out(count);
  sample_scaled_t(dist, rng, out);
  return out;
}

}  // namespace bayesdiff
