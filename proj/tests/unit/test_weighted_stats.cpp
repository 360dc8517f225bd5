#include <cmath>
#include <vector>

#include "doctest.h"
#include "mnardre/diagnostics.hpp"
#include "mnardre/weighted_stats.hpp"
#include "oracles.hpp"

using namespace mnardre;

TEST_CASE("importance weights") {
  const MissingnessEntry half = ConstantMissingness{0.5};
  CHECK(importance_weight(std::nullopt, half) == 0.0);
  CHECK(importance_weight(1.3, ZeroMissingness{}) == 1.0);
  CHECK(importance_weight(1.3, half) == 2.0);
  CHECK(importance_weight(1.3, ConstantMissingness{0.9999}) == doctest::Approx(1.0 / kPhiFloor));

  const auto joint = MissingnessFunction::joint(ConstantMissingness{0.75});
  CHECK(point_weight(ObservedPoint({1.0, 2.0}), joint) == 4.0);
  CHECK(point_weight(ObservedPoint::all_missing(2), joint) == 0.0);
  CHECK_THROWS_AS(point_weight(ObservedPoint({1.0, std::nullopt}), joint), DomainError);

  const auto per = MissingnessFunction::per_coordinate({ConstantMissingness{0.5}, ConstantMissingness{0.5}});
  CHECK(point_weight(ObservedPoint({1.0, 2.0}), per) == 4.0);
  CHECK(point_weight(ObservedPoint({1.0, std::nullopt}), per) == 0.0);
}

TEST_CASE("weighted mean divides by the full sample size") {
  const std::vector<double> v{1, 2, 3}, ones{1, 1, 1};
  CHECK(weighted_mean(v, ones) == 2.0);
  const std::vector<double> w{2, 0, 1};
  CHECK(weighted_mean(v, w) == doctest::Approx(5.0 / 3.0));
  WeightedSample s{Eigen::MatrixXd(3, 2), Eigen::VectorXd(3)};
  s.values << 1, 10, 2, 20, 3, 30;
  s.weights << 0, 2, 1;
  const Eigen::VectorXd m = weighted_mean(s);
  CHECK(m(0) == doctest::Approx(7.0 / 3.0));
  CHECK(m(1) == doctest::Approx(70.0 / 3.0));
}

TEST_CASE("zero missingness reproduces the plain mean bit for bit") {
  Rng rng(3);
  std::vector<double> v(1001), ones(1001, 1.0);
  for (auto& x : v) x = rng.normal() * 1e3;
  CHECK(weighted_mean(v, ones) == plain_mean(v));
  CHECK(weighted_mean(v, ones, Summation::Pairwise) == plain_mean(v, Summation::Pairwise));
}

// E[Z] under the law on the three outcomes {Z=0}, {Z=1 observed}, {Z=1 missing}.
TEST_CASE("two-atom unbiasedness by enumeration") {
  const oracle::DiscreteLaw law{{0.0, 1.0}, {0.5, 0.5}, {0.0, 0.5}};
  const auto phi = oracle::tabulated(law).entries()[0];
  double expectation = 0.0;
  for (const auto& o : oracle::outcomes(law)) {
    const std::optional<double> x = o.missing ? std::nullopt : std::optional(law.atoms[o.atom]);
    const std::vector<double> value{x.value_or(0.0)}, weight{importance_weight(x, phi)};
    expectation += o.prob * weighted_mean(value, weight);
  }
  CHECK(std::abs(expectation - 0.5) < 1e-15);
}

TEST_CASE("exhaustive enumeration: weighted mean is unbiased for E[g(Z)]") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::DiscreteLaw law;
    const std::size_t k = 2 + rng.uniform_index(5);  // up to 6 atoms
    double total = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      law.atoms.push_back(std::round(rng.normal() * 100.0) / 10.0 + static_cast<double>(a) * 1e-3);
      law.probs.push_back(0.05 + rng.uniform());
      law.phi.push_back(0.9 * rng.uniform());
      total += law.probs.back();
    }
    for (auto& p : law.probs) p /= total;
    const auto phi = oracle::tabulated(law).entries()[0];
    const auto g = [](double z) { return z * z - 3.0 * z; };
    double truth = 0.0;
    for (std::size_t a = 0; a < k; ++a) truth += law.probs[a] * g(law.atoms[a]);

    const std::size_t n = k <= 3 ? 4 : 3;
    double expectation = 0.0;
    oracle::enumerate_samples(law, n, [&](const std::vector<oracle::Outcome>& sample, double p) {
      std::vector<double> values, weights;
      for (const auto& o : sample) {
        const std::optional<double> x = o.missing ? std::nullopt : std::optional(law.atoms[o.atom]);
        values.push_back(x ? g(*x) : 0.0);
        weights.push_back(importance_weight(x, phi));
      }
      expectation += p * weighted_mean(values, weights);
    });
    double scale = 1.0;
    for (double a : law.atoms) scale = std::max(scale, std::abs(g(a)));
    CHECK(std::abs(expectation - truth) < 1e-12 * scale);
  }
}

TEST_CASE("raising phi uniformly never lowers the second moment") {
  const std::vector<double> atoms{-1.0, 0.5, 2.0}, probs{0.3, 0.5, 0.2};
  double previous = 0.0;
  for (double lift : {0.0, 0.1, 0.2, 0.4, 0.6}) {
    const oracle::DiscreteLaw law{atoms, probs, {0.1 + lift, 0.2 + lift, 0.05 + lift}};
    const auto phi = oracle::tabulated(law).entries()[0];
    double second = 0.0;
    oracle::enumerate_samples(law, 2, [&](const std::vector<oracle::Outcome>& sample, double p) {
      std::vector<double> values, weights;
      for (const auto& o : sample) {
        const std::optional<double> x = o.missing ? std::nullopt : std::optional(atoms[o.atom]);
        values.push_back(x.value_or(0.0));
        weights.push_back(importance_weight(x, phi));
      }
      const double m = weighted_mean(values, weights);
      second += p * m * m;
    });
    CHECK(second >= previous);
    previous = second;
  }
}

TEST_CASE("Monte Carlo estimate of the two-atom example") {
  Rng rng(99);
  const std::size_t n = 100000;
  std::vector<double> values(n), weights(n);
  const MissingnessEntry phi = HalfspaceMissingness{{1.0}, 0.5, 0.5};
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const std::vector<double> zv{z};
    const bool missing = rng.uniform() < evaluate_missingness(phi, zv);
    const std::optional<double> x = missing ? std::nullopt : std::optional(z);
    values[i] = x.value_or(0.0);
    weights[i] = importance_weight(x, phi);
  }
  double sq = 0.0;
  const double mean = weighted_mean(values, weights);
  for (std::size_t i = 0; i < n; ++i) sq += std::pow(values[i] * weights[i] - mean, 2);
  const double se = std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n));
  CHECK(std::abs(mean - 0.5) < 3.0 * se);
}
