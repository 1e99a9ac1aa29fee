#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <string>
#include <vector>

#include "bayesdiff/errors.hpp"
#include "bayesdiff/simulation.hpp"
#include "helpers.hpp"

using bayesdiff::Engine;
using bayesdiff::GroupData;
using bayesdiff::RngStream;
using bayesdiff::SimConfig;

TEST_CASE("two-sample p-values match reference implementations") {
  std::vector<double> a{1.2, 0.8, 1.5, 0.9, 1.1};
  std::vector<double> b{2.1, 2.9, 2.4, 3.0, 1.8};
  CHECK(bayesdiff::t_test(a, b) ==
        doctest::Approx(0.001995566428974348).epsilon(1e-12));
  CHECK(bayesdiff::t_test_pooled(a, b) ==
        doctest::Approx(0.0008702047947011398).epsilon(1e-12));
  CHECK(bayesdiff::t_test(b, a) == doctest::Approx(bayesdiff::t_test(a, b)));
}

TEST_CASE("degenerate variance conventions") {
  std::vector<double> c2{2.0, 2.0, 2.0};
  std::vector<double> c2b{2.0, 2.0};
  std::vector<double> c5{5.0, 5.0, 5.0};
  CHECK(bayesdiff::t_test(c2, c2b) == 1.0);
  CHECK(bayesdiff::t_test(c2, c5) == 0.0);

  std::vector<double> one{1.0};
  std::vector<double> ok{1.0, 2.0};
  CHECK_THROWS_AS(bayesdiff::t_test(one, ok), bayesdiff::InvalidInput);
  CHECK_THROWS_AS(bayesdiff::t_test(ok, one), bayesdiff::InvalidInput);
}

TEST_CASE("generated groups hit their population moments") {
  SimConfig cfg;
  cfg.m = 1.5;
  cfg.sigma2 = 4.0;
  cfg.n = 100000;
  cfg.p = 1;
  RngStream rng(501);
  auto [base, shifted] = bayesdiff::generate_groups(cfg, rng);

  REQUIRE(base.values.rows() == 100000);
  REQUIRE(shifted.values.cols() == 1);
  double mb = base.values.col(0).mean();
  double ms = shifted.values.col(0).mean();
  CHECK(std::abs(mb - 0.0) < 0.02);
  CHECK(std::abs(ms - 1.5) < 0.03);

  auto var = [](const Eigen::VectorXd& v) {
    double mu = v.mean();
    return (v.array() - mu).square().sum() / double(v.size() - 1);
  };
  CHECK(var(base.values.col(0)) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(var(shifted.values.col(0)) == doctest::Approx(4.0).epsilon(0.05));
  CHECK(base.missing.count() == 0);
  CHECK(shifted.missing.count() == 0);
}

TEST_CASE("the correlated design induces the requested covariance") {
  SimConfig cfg = bayesdiff::make_design("t4");
  cfg.n = 20000;
  RngStream rng(502);
  auto [base, shifted] = bayesdiff::generate_groups(cfg, rng);

  Eigen::MatrixXd x = shifted.values;
  Eigen::RowVectorXd mu = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mu;
  Eigen::MatrixXd cov =
      centered.transpose() * centered / double(x.rows() - 1);
  // 45 pairs checked at once; the band is ~5 sigma for n = 20000.
  for (int i = 0; i < 10; ++i) {
    CHECK(cov(i, i) == doctest::Approx(1.0).epsilon(0.05));
    for (int j = 0; j < i; ++j) CHECK(std::abs(cov(i, j) - 0.1) < 0.036);
  }
  // Baseline stays independent standard normal.
  Eigen::MatrixXd xb = base.values;
  Eigen::RowVectorXd mub = xb.colwise().mean();
  Eigen::MatrixXd cb = (xb.rowwise() - mub).transpose() *
                       (xb.rowwise() - mub) / double(xb.rows() - 1);
  CHECK(std::abs(cb(0, 1)) < 0.025);
}

TEST_CASE("MCAR masking removes about the requested fraction") {
  SimConfig cfg;
  cfg.n = 100;
  cfg.p = 50;
  cfg.missing_rate = 0.3;
  RngStream rng(503);
  auto [base, shifted] = bayesdiff::generate_groups(cfg, rng);
  double total = double(base.missing.count() + shifted.missing.count());
  double frac = total / double(2 * 100 * 50);
  CHECK(frac == doctest::Approx(0.3).epsilon(0.1));
  // Masked cells are NaN so nothing downstream can read them by accident.
  for (int i = 0; i < base.values.rows(); ++i)
    for (int j = 0; j < base.values.cols(); ++j)
      CHECK(std::isnan(base.values(i, j)) == base.missing(i, j));
}

TEST_CASE("built-in designs carry the published settings") {
  CHECK(bayesdiff::make_design("t2r1").m == 1.0);
  CHECK(bayesdiff::make_design("t2r1").sigma2 == 1.0);
  CHECK(bayesdiff::make_design("t2r3").m == 10.0);
  CHECK(bayesdiff::make_design("t2r6").sigma2 == 20.0);
  CHECK(bayesdiff::make_design("t2null").m == 0.0);

  SimConfig t4 = bayesdiff::make_design("t4");
  CHECK(t4.p == 10);
  CHECK(t4.replications == 100);
  REQUIRE(t4.covariance.has_value());
  CHECK((*t4.covariance)(0, 0) == 1.0);
  CHECK((*t4.covariance)(0, 1) == doctest::Approx(0.1).epsilon(1e-15));

  CHECK(bayesdiff::list_designs().size() == 8);
  CHECK_THROWS_WITH_AS(bayesdiff::make_design("nope"),
                       doctest::Contains("available"), bayesdiff::InvalidInput);
}

TEST_CASE("null design: intervals cover zero and the comparator stays flat") {
  SimConfig cfg = bayesdiff::make_design("t2null");
  cfg.replications = 200;
  cfg.r_draws = 2000;
  bayesdiff::BenchmarkRow row = bayesdiff::run_benchmark(cfg, Engine::univariate);
  CHECK(row.reps == 200);
  CHECK(row.label == "t2null");
  CHECK(row.cic >= 88.0);
  CHECK(row.cic <= 100.0);
  CHECK(row.p_mean > 0.4);
  CHECK(row.p_mean < 0.6);
  CHECK(std::abs(row.mean_diff_mean) < 0.2);
  CHECK(row.rmse > 0.0);
}

TEST_CASE("interval width grows along the noise ladder") {
  auto width_at = [](const std::string& label) {
    SimConfig cfg = bayesdiff::make_design(label);
    cfg.replications = 100;
    cfg.r_draws = 2000;
    return bayesdiff::run_benchmark(cfg, Engine::univariate).width_mean;
  };
  double w1 = width_at("t2r1");
  double w5 = width_at("t2r4");
  double w20 = width_at("t2r6");
  CHECK(w1 < w5);
  CHECK(w5 < w20);
}

TEST_CASE("width comparison runs both engines on the same data") {
  SimConfig cfg = bayesdiff::make_design("t4");
  cfg.replications = 10;
  cfg.r_draws = 1000;
  bayesdiff::WidthComparison wc = bayesdiff::run_width_comparison(cfg);
  CHECK(wc.reps == 10);
  CHECK(wc.univariate_row.label == "t4/univariate");
  CHECK(wc.multivariate_row.label == "t4/multivariate");
  CHECK(wc.multivariate_narrower >= 0);
  CHECK(wc.multivariate_narrower <= 10);
  CHECK(wc.univariate_row.width_mean > 0.0);
  CHECK(wc.multivariate_row.width_mean > 0.0);
}

TEST_CASE("config validation rejects unusable settings") {
  SimConfig cfg;
  cfg.n = 1;
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
  cfg = SimConfig{};
  cfg.p = 0;
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
  cfg = SimConfig{};
  cfg.replications = 0;
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
  cfg = SimConfig{};
  cfg.missing_rate = 1.5;
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
  cfg = SimConfig{};
  cfg.sigma2 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
  cfg = SimConfig{};
  cfg.covariance = Eigen::MatrixXd::Identity(3, 3);  // p = 1 mismatch
  CHECK_THROWS_AS(cfg.validate(), bayesdiff::InvalidInput);
}
