#include <cmath>
#include <vector>

#include "doctest.h"
#include "mnardre/corrupt.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/kliep.hpp"
#include "oracles.hpp"

using namespace mnardre;

namespace {

DatasetPair gaussian_pair(std::uint64_t seed, std::size_t n, std::size_t d, double shift) {
  Rng rng(seed);
  const auto z0 = oracle::normal_rows(rng, n, d);
  const auto z1 = oracle::normal_rows(rng, n, d, shift);
  return {Dataset::from_rows(z0, 0), Dataset::from_rows(z1, 1)};
}

std::vector<WeightingMode> all_modes(const MissingnessFunction& phi0, const MissingnessFunction& phi1) {
  return {WeightingMode::fully_observed(), WeightingMode::mnar(phi0, phi1), WeightingMode::complete_case()};
}

}  // namespace

TEST_CASE("theta = 0 gives zero loss and the mean feature difference") {
  const auto data = gaussian_pair(1, 50, 3, 0.4);
  const auto fmap = FeatureMap::identity_plus_squares(3);
  const auto v = sample_objective(Eigen::VectorXd::Zero(6), data, fmap, WeightingMode::fully_observed());
  CHECK(v.loss == 0.0);
  Eigen::VectorXd m0 = Eigen::VectorXd::Zero(6), m1 = Eigen::VectorXd::Zero(6);
  for (const auto& p : data.class0.points()) m0 += fmap(p.values());
  for (const auto& p : data.class1.points()) m1 += fmap(p.values());
  const Eigen::VectorXd want = m0 / 50.0 - m1 / 50.0;
  CHECK((v.gradient - want).norm() < 1e-12);
}

TEST_CASE("mode collapse on clean data is bit-exact") {
  const auto data = gaussian_pair(2, 80, 2, 0.5);
  const auto fmap = FeatureMap::identity_plus_squares(2);
  Eigen::VectorXd theta(4);
  theta << 0.3, -0.2, 0.05, -0.1;
  const auto full = sample_objective(theta, data, fmap, WeightingMode::fully_observed());
  const auto mnar = sample_objective(theta, data, fmap, WeightingMode::mnar({}, {}));
  const auto cc = sample_objective(theta, data, fmap, WeightingMode::complete_case());
  CHECK(full.loss == mnar.loss);
  CHECK(full.loss == cc.loss);
  CHECK(full.gradient == mnar.gradient);
  CHECK(full.gradient == cc.gradient);

  KliepFitConfig c;
  const auto a = fit(data, fmap, c);
  c.weighting = WeightingMode::mnar({}, {});
  const auto b = fit(data, fmap, c);
  c.weighting = WeightingMode::complete_case();
  const auto d = fit(data, fmap, c);
  CHECK(a.model.theta() == b.model.theta());
  CHECK(a.model.theta() == d.model.theta());
}

TEST_CASE("gradients match central finite differences") {
  const auto phi1 = MissingnessFunction::joint(HalfspaceMissingness{{1.0, 1.0}, 0.0, 0.5});
  const auto phi0 = MissingnessFunction::joint(HalfspaceMissingness{{1.0, -1.0}, 0.5, 0.3});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto latent = gaussian_pair(10 + seed, 60, 2, 0.3);
    Eigen::MatrixXd r0(60, 2), r1(60, 2);
    for (int i = 0; i < 60; ++i) {
      r0.row(i) = Eigen::Map<const Eigen::RowVectorXd>(latent.class0[i].values().data(), 2);
      r1.row(i) = Eigen::Map<const Eigen::RowVectorXd>(latent.class1[i].values().data(), 2);
    }
    const DatasetPair mixed{corrupt(r0, 0, phi0, seed), corrupt(r1, 1, phi1, seed + 100)};
    Rng rng(seed);
    Eigen::VectorXd theta(5);
    for (int i = 0; i < 5; ++i) theta(i) = 0.5 * rng.normal();
    const auto fmap = FeatureMap::custom(2, 5, [](std::span<const double> z, std::span<double> out) {
      out[0] = z[0];
      out[1] = z[1];
      out[2] = z[0] * z[1];
      out[3] = std::sin(z[0]);
      out[4] = z[1] * z[1];
    });
    for (const auto& mode : all_modes(phi0, phi1)) {
      const DatasetPair& use = mode.kind == WeightingKind::FullyObserved ? latent : mixed;
      const auto v = sample_objective(theta, use, fmap, mode);
      const auto fd = oracle::finite_gradient(
          [&](const Eigen::VectorXd& t) { return sample_objective(t, use, fmap, mode).loss; }, theta);
      CHECK(oracle::max_relative_error(v.gradient, fd) < 1e-5);
    }
  }
}

TEST_CASE("objective is convex along random chords in every mode") {
  const auto phi1 = MissingnessFunction::joint(HalfspaceMissingness{{1.0}, 0.0, 0.7});
  Rng rng(21);
  const auto z1 = oracle::normal_rows(rng, 70, 1, 0.6);
  const auto z0 = oracle::normal_rows(rng, 70, 1);
  const DatasetPair data{Dataset::from_rows(z0, 0), corrupt(z1, 1, phi1, 4)};
  const DatasetPair clean{Dataset::from_rows(z0, 0), Dataset::from_rows(z1, 1)};
  const auto fmap = FeatureMap::identity_plus_squares(1);
  for (const auto& mode : all_modes({}, phi1)) {
    const DatasetPair& use = mode.kind == WeightingKind::FullyObserved ? clean : data;
    const auto prepared = prepare(use, fmap, mode);
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXd a(2), b(2);
      a << rng.normal(), 0.3 * rng.normal();
      b << rng.normal(), 0.3 * rng.normal();
      const double lam = rng.uniform();
      const double mid = kliep_objective(lam * a + (1 - lam) * b, prepared).loss;
      const double chord = lam * kliep_objective(a, prepared).loss + (1 - lam) * kliep_objective(b, prepared).loss;
      CHECK(mid <= chord + 1e-9);
    }
  }
}

TEST_CASE("one-dimensional Gaussian shift recovers theta = mu") {
  const auto data = gaussian_pair(31, 100000, 1, 0.5);
  const auto r = fit(data, FeatureMap::identity(1), {});
  CHECK(r.converged);
  CHECK(std::abs(r.model.theta()(0) - 0.5) < 0.05);

  const double n_hat = normalizing_constant(r.model, data.class0, nullptr);
  double sq = 0.0;
  for (const auto& p : data.class0.points()) sq += std::pow(r.model.ratio(p.values()) - n_hat, 2);
  const double se = std::sqrt(sq / 99999.0 / 100000.0);
  const double th = r.model.theta()(0);
  CHECK(std::abs(n_hat - std::exp(th * th / 2)) < 3 * se);
}

TEST_CASE("identical classes give theta near zero") {
  const auto data = gaussian_pair(32, 100000, 1, 0.0);
  const auto r = fit(data, FeatureMap::identity(1), {});
  CHECK(r.model.theta().norm() <= 0.05);
}

TEST_CASE("translating both classes leaves theta unchanged") {
  auto data = gaussian_pair(33, 100000, 2, 0.3);
  const auto shift = [](const Dataset& d) {
    std::vector<ObservedPoint> pts;
    for (const auto& p : d.points()) {
      auto v = p.values();
      v[0] += 1.5;
      v[1] -= 0.75;
      pts.push_back(ObservedPoint::observed(v));
    }
    return Dataset(std::move(pts), d.label());
  };
  const DatasetPair moved{shift(data.class0), shift(data.class1)};
  const auto a = fit(data, FeatureMap::identity(2), {});
  const auto b = fit(moved, FeatureMap::identity(2), {});
  CHECK((a.model.theta() - b.model.theta()).norm() < 1e-6);
}

TEST_CASE("normalizing constant") {
  const auto data = gaussian_pair(34, 40, 2, 0.2);
  const LogLinearRatioModel zero(FeatureMap::identity(2), Eigen::VectorXd::Zero(2));
  CHECK(normalizing_constant(zero, data.class0, nullptr) == 1.0);

  const Dataset part({ObservedPoint({1.0}), ObservedPoint({std::nullopt}), ObservedPoint({2.0})}, 0);
  const auto phi = MissingnessFunction::joint(ConstantMissingness{0.5});
  const LogLinearRatioModel flat(FeatureMap::identity(1), Eigen::VectorXd::Zero(1));
  CHECK(normalizing_constant(flat, part, &phi) == doctest::Approx(4.0 / 3.0));

  const Dataset gone({ObservedPoint({std::nullopt}), ObservedPoint({std::nullopt})}, 0);
  CHECK_THROWS_AS(normalizing_constant(flat, gone, &phi), DataError);
}

TEST_CASE("normalizing constant is unbiased by enumeration") {
  const oracle::DiscreteLaw law{{-0.5, 1.0}, {0.35, 0.65}, {0.1, 0.6}};
  const auto phi = oracle::tabulated(law);
  const LogLinearRatioModel model(FeatureMap::identity(1), Eigen::VectorXd::Constant(1, 0.8));
  const double truth = 0.35 * std::exp(-0.4) + 0.65 * std::exp(0.8);
  double expectation = 0.0;
  oracle::enumerate_samples(law, 4, [&](const std::vector<oracle::Outcome>& sample, double p) {
    std::vector<ObservedPoint> pts;
    for (const auto& o : sample)
      pts.push_back(o.missing ? ObservedPoint::all_missing(1) : ObservedPoint({law.atoms[o.atom]}));
    bool any = false;
    for (const auto& o : sample) any = any || !o.missing;
    if (!any) return;  // every weight zero: contributes 0 to the estimator
    expectation += p * normalizing_constant(model, Dataset(std::move(pts), 0), &phi);
  });
  CHECK(std::abs(expectation - truth) < 1e-12);
}

TEST_CASE("degenerate class-0 sum is reported") {
  const DatasetPair data{Dataset({ObservedPoint({std::nullopt})}, 0), Dataset({ObservedPoint({1.0})}, 1)};
  const auto phi = MissingnessFunction::joint(ConstantMissingness{0.5});
  CHECK_THROWS_WITH(sample_objective(Eigen::VectorXd::Zero(1), data, FeatureMap::identity(1),
                                     WeightingMode::mnar(phi, {})),
                    doctest::Contains("degenerate class-0 weighted sum"));
}

TEST_CASE("huge scores do not overflow") {
  const DatasetPair data{Dataset({ObservedPoint({800.0}), ObservedPoint({-3.0})}, 0),
                         Dataset({ObservedPoint({1.0})}, 1)};
  const auto v = sample_objective(Eigen::VectorXd::Constant(1, 2.0), data, FeatureMap::identity(1),
                                  WeightingMode::fully_observed());
  CHECK(std::isfinite(v.loss));
  CHECK(v.gradient.allFinite());
}

TEST_CASE("constant class-0 features warn") {
  const auto before = warning_count();
  const auto prev = set_warning_handler({});
  const DatasetPair data{Dataset({ObservedPoint({1.0}), ObservedPoint({1.0})}, 0),
                         Dataset({ObservedPoint({1.0}), ObservedPoint({2.0})}, 1)};
  KliepFitConfig c;
  c.optimizer.max_iters = 5;
  (void)fit(data, FeatureMap::identity(1), c);
  set_warning_handler(prev);
  CHECK(warning_count() > before);
}
