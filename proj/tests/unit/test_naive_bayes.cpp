#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mnardre/corrupt.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/naive_bayes.hpp"
#include "oracles.hpp"

using namespace mnardre;

TEST_CASE("one dimension matches a direct fit") {
  Rng rng(1);
  const auto phi1 = MissingnessFunction::per_coordinate({HalfspaceMissingness{{1.0}, 0.0, 0.8}});
  const DatasetPair data{Dataset::from_rows(oracle::normal_rows(rng, 300, 1), 0),
                         corrupt(oracle::normal_rows(rng, 300, 1, 0.5), 1, phi1, 2)};
  KliepFitConfig c;
  c.weighting = WeightingMode::mnar({}, phi1);
  const auto nb = fit_naive_bayes(data, FeatureMap::identity(1), c);
  const auto direct = fit(data, FeatureMap::identity(1), c);
  CHECK(nb.model[0].theta() == direct.model.theta());
  CHECK(nb.model[0].normalizer().has_value());
}

TEST_CASE("evaluation is a sum of per-coordinate log ratios") {
  const NaiveBayesRatioModel m({LogLinearRatioModel(FeatureMap::identity(1), Eigen::VectorXd::Constant(1, 1.0)),
                                LogLinearRatioModel(FeatureMap::identity(1), Eigen::VectorXd::Constant(1, 2.0))});
  const std::vector<double> z{3.0, 4.0};
  CHECK(m.log_ratio(z) == 11.0);
  const NaiveBayesRatioModel zero({LogLinearRatioModel(FeatureMap::identity(1), Eigen::VectorXd::Zero(1)),
                                   LogLinearRatioModel(FeatureMap::identity(1), Eigen::VectorXd::Zero(1))});
  CHECK(zero.log_ratio(z) == 0.0);
  CHECK_THROWS_WITH(m.evaluate_log_ratio(ObservedPoint({1.0, std::nullopt})),
                    doctest::Contains("naive-Bayes evaluation requires full observation"));
  CHECK(m.evaluate_log_ratio(ObservedPoint({3.0, 4.0})) == 11.0);
}

TEST_CASE("product identity and permutation symmetry") {
  Rng rng(4);
  std::vector<LogLinearRatioModel> parts;
  for (int j = 0; j < 4; ++j) {
    Eigen::VectorXd t(2);
    t << rng.normal(), -0.3 * std::abs(rng.normal());
    parts.emplace_back(FeatureMap::identity_plus_squares(1), t, std::exp(rng.normal()));
  }
  const NaiveBayesRatioModel m(parts);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  std::vector<LogLinearRatioModel> permuted;
  for (auto j : perm) permuted.push_back(parts[j]);
  const NaiveBayesRatioModel mp(permuted);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z(4), zp(4);
    for (auto& x : z) x = rng.normal();
    for (std::size_t j = 0; j < 4; ++j) zp[j] = z[perm[j]];
    double prod = 1.0;
    for (std::size_t j = 0; j < 4; ++j) {
      const std::vector<double> zj{z[j]};
      prod *= parts[j].ratio(zj) / *parts[j].normalizer();
    }
    CHECK(std::exp(m.log_ratio(z)) == doctest::Approx(prod).epsilon(1e-10));
    CHECK(std::abs(m.log_ratio(z) - mp.log_ratio(zp)) < 1e-12);
  }
}

TEST_CASE("independent coordinates: per-dimension fits agree with a joint fit") {
  Rng rng(9);
  const std::size_t n = 100000;
  Eigen::MatrixXd z0 = oracle::normal_rows(rng, n, 2);
  Eigen::MatrixXd z1 = oracle::normal_rows(rng, n, 2);
  z1.col(0).array() += 0.4;
  z1.col(1).array() -= 0.3;
  const auto phi1 = MissingnessFunction::per_coordinate(
      {HalfspaceMissingness{{1.0}, 0.0, 0.5}, HalfspaceMissingness{{-1.0}, 0.0, 0.5}});
  const DatasetPair data{Dataset::from_rows(z0, 0), corrupt(z1, 1, phi1, 3)};
  KliepFitConfig c;
  c.weighting = WeightingMode::mnar({}, phi1);
  const auto nb = fit_naive_bayes(data, FeatureMap::identity(1), c);
  const auto joint = fit(data, FeatureMap::identity(2), c);
  CHECK(nb.converged());
  CHECK(std::abs(nb.model[0].theta()(0) - joint.model.theta()(0)) < 0.03);
  CHECK(std::abs(nb.model[1].theta()(0) - joint.model.theta()(1)) < 0.03);
  CHECK(std::abs(nb.model[0].theta()(0) - 0.4) < 0.05);
  CHECK(std::abs(nb.model[1].theta()(0) + 0.3) < 0.05);
}

TEST_CASE("a joint mechanism cannot be split per coordinate") {
  const auto phi1 = MissingnessFunction::joint(HalfspaceMissingness{{1.0, 1.0}, 0.0, 0.5});
  CHECK_THROWS_AS(project_mode(WeightingMode::mnar({}, phi1), 0), DomainError);
}

TEST_CASE("per-dimension errors name the coordinate") {
  const DatasetPair data{Dataset({ObservedPoint({1.0, std::nullopt}), ObservedPoint({2.0, std::nullopt})}, 0),
                         Dataset({ObservedPoint({1.0, 2.0})}, 1)};
  const auto phi0 = MissingnessFunction::per_coordinate({ZeroMissingness{}, ConstantMissingness{0.5}});
  KliepFitConfig c;
  c.weighting = WeightingMode::mnar(phi0, {});
  CHECK_THROWS_WITH(fit_naive_bayes(data, FeatureMap::identity(1), c), doctest::Contains("dimension 1"));
}
