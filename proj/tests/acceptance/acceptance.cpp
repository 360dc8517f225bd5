// Acceptance run: one PASS/FAIL line per criterion with the measured values.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "mnardre/corrupt.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/experiments.hpp"
#include "mnardre/fdiv.hpp"
#include "mnardre/kliep.hpp"
#include "mnardre/np_classifier.hpp"
#include "mnardre/weighted_stats.hpp"
#include "oracles.hpp"

using namespace mnardre;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

int failures = 0;

void criterion(const std::string& id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += fmt(" (over the %.0f s budget)", budget_s);
  }
  failures += !o.pass;
  std::cout << id << ' ' << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << fmt("  [%.1f s]", secs) << std::endl;
}

const MsdRow& msd_row(const MsdResult& r, std::size_t n, Estimator e) {
  for (const auto& row : r.rows) {
    if (row.n == n && row.estimator == e) return row;
  }
  throw std::runtime_error("missing msd row");
}

const PowerRow& power_row(const PowerResult& r, std::size_t n, double rho, Estimator e) {
  for (const auto& row : r.rows) {
    if (row.n == n && row.rho == rho && row.estimator == e) return row;
  }
  throw std::runtime_error("missing power row");
}

Outcome ac1() {
  auto spec = default_spec(Scenario::Gauss5D);
  spec.sizes = {100, 500, 1000, 1500};
  spec.reps = 100;
  spec.seed = 101;
  spec.estimators = {Estimator::MKliep, Estimator::CcKliep};
  const auto res = run_msd_experiment(spec);
  const double cc = msd_row(res, 1500, Estimator::CcKliep).msd;
  const double m = msd_row(res, 1500, Estimator::MKliep).msd;
  return {cc >= 0.04 && cc <= 0.16 && m < 0.5 * cc,
          fmt("n=1500: CC-KLIEP msd=%.4f (want [0.04, 0.16]), M-KLIEP msd=%.4f (want < %.4f)", cc, m, 0.5 * cc)};
}

Outcome ac2() {
  auto spec = default_spec(Scenario::Gauss5D);
  spec.sizes = {500, 1000, 2000, 4000, 8000};
  spec.reps = 100;
  spec.seed = 202;
  spec.estimators = {Estimator::MKliep};
  const auto res = run_msd_experiment(spec);
  std::vector<double> x, y;
  std::string pts;
  for (auto n : spec.sizes) {
    const auto& row = msd_row(res, n, Estimator::MKliep);
    x.push_back(std::log(row.m_eff));
    y.push_back(std::log(row.median_distance));
    pts += fmt(" %.0f:%.4f", row.m_eff, row.median_distance);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope + 0.5) <= 0.15, fmt("slope=%.3f (want -0.5 +/- 0.15); m_eff:median", slope) + pts};
}

Outcome ac3() {
  auto spec = default_spec(Scenario::Mixture2D);
  spec.sizes = {500};
  spec.reps = 500;
  spec.seed = 303;
  spec.alpha = 0.1;
  spec.delta = 0.1;
  spec.test_draws = 100000;
  spec.estimators = {Estimator::MKliep, Estimator::TrueRatio};
  const auto res = run_power_experiment(spec);
  const double bound = 0.1 + 3.0 * std::sqrt(0.1 * 0.9 / 500.0);
  const auto& m = power_row(res, 500, 0.0, Estimator::MKliep);
  const auto& t = power_row(res, 500, 0.0, Estimator::TrueRatio);
  return {m.type1_violation_rate <= bound && t.type1_violation_rate <= bound,
          fmt("violation rate M-KLIEP=%.3f TrueRatio=%.3f (want <= %.3f); mean Type I %.4f / %.4f",
              m.type1_violation_rate, t.type1_violation_rate, bound, m.mean_type1, t.mean_type1)};
}

Outcome ac4() {
  auto spec = default_spec(Scenario::Mixture2D);
  spec.sizes = {1500};
  spec.reps = 100;
  spec.seed = 404;
  spec.test_draws = 100000;
  spec.estimators = {Estimator::TrueRatio, Estimator::MKliep, Estimator::CcKliep};
  const auto res = run_power_experiment(spec);
  const auto tm = paired_power_difference(res, 1500, 0.0, Estimator::TrueRatio, Estimator::MKliep, 0.95);
  const auto mc = paired_power_difference(res, 1500, 0.0, Estimator::MKliep, Estimator::CcKliep, 0.95);
  const double pt = power_row(res, 1500, 0.0, Estimator::TrueRatio).mean_power;
  const double pm = power_row(res, 1500, 0.0, Estimator::MKliep).mean_power;
  const double pc = power_row(res, 1500, 0.0, Estimator::CcKliep).mean_power;
  return {tm.lower() > 0.0 && mc.lower() > 0.0,
          fmt("power TrueRatio=%.4f M-KLIEP=%.4f CC-KLIEP=%.4f; paired 95%% CI TR-M [%.4f, %.4f], M-CC [%.4f, %.4f]",
              pt, pm, pc, tm.lower(), tm.upper(), mc.lower(), mc.upper())};
}

Outcome ac5() {
  auto spec = default_spec(Scenario::NaiveBayesRho);
  spec.sizes = {100};
  spec.rhos = {0.0, 0.25, 0.9};
  spec.reps = 100;
  spec.seed = 505;
  spec.alpha = 0.1;
  spec.delta = 0.1;
  spec.ci_level = 0.95;
  spec.naive_bayes = true;
  spec.estimators = {Estimator::MKliep, Estimator::TrueRatio};
  const auto res = run_power_experiment(spec);
  bool ok = true;
  std::string detail;
  for (double rho : spec.rhos) {
    const auto& m = power_row(res, 100, rho, Estimator::MKliep);
    const auto& t = power_row(res, 100, rho, Estimator::TrueRatio);
    const auto d = paired_power_difference(res, 100, rho, Estimator::TrueRatio, Estimator::MKliep, 0.95);
    const bool overlap = m.mean_power + m.ci_half_width >= t.mean_power - t.ci_half_width &&
                         t.mean_power + t.ci_half_width >= m.mean_power - m.ci_half_width;
    if (rho < 0.5) {
      ok = ok && overlap;
    } else {
      ok = ok && d.lower() > 0.0;
    }
    detail += fmt("rho=%.2f NB=%.3f+/-%.3f TR=%.3f+/-%.3f paired [%.3f, %.3f]; ", rho, m.mean_power, m.ci_half_width,
                  t.mean_power, t.ci_half_width, d.lower(), d.upper());
  }
  return {ok, detail + "want overlap at 0 and 0.25, paired gap > 0 at 0.9"};
}

Outcome ac6() {
  auto spec = default_spec(Scenario::Mixture2D);
  spec.sizes = {500};
  spec.reps = 100;
  spec.seed = 9;
  spec.test_draws = 100000;
  spec.missingness = MissingnessPreset::PerDimLogistic;
  spec.queries = 10;
  spec.estimators = {Estimator::MKliep, Estimator::MKliepLearnedPhi};
  const auto res = run_power_experiment(spec);
  const double known = power_row(res, 500, 0.0, Estimator::MKliep).mean_power;
  const double learned = power_row(res, 500, 0.0, Estimator::MKliepLearnedPhi).mean_power;
  return {learned >= known - 0.05, fmt("power learned=%.4f known=%.4f (want learned >= %.4f)", learned, known,
                                       known - 0.05)};
}

// ---------------------------------------------------------------------------
// AC7: property and oracle checks, each written against an independent
// reference.

using Check = std::pair<std::string, std::function<bool()>>;

bool enumeration_unbiased() {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    oracle::DiscreteLaw law;
    double total = 0;
    for (std::size_t a = 0; a < 3; ++a) {
      law.atoms.push_back(static_cast<double>(a) + 0.5 * rng.normal());
      law.probs.push_back(0.1 + rng.uniform());
      law.phi.push_back(0.8 * rng.uniform());
      total += law.probs.back();
    }
    for (auto& p : law.probs) p /= total;
    const auto phi = oracle::tabulated(law).entries()[0];
    double truth = 0;
    for (std::size_t a = 0; a < 3; ++a) truth += law.probs[a] * std::exp(law.atoms[a]);
    double expectation = 0;
    oracle::enumerate_samples(law, 4, [&](const std::vector<oracle::Outcome>& s, double p) {
      std::vector<double> v, w;
      for (const auto& o : s) {
        const std::optional<double> x = o.missing ? std::nullopt : std::optional(law.atoms[o.atom]);
        v.push_back(x ? std::exp(*x) : 0.0);
        w.push_back(importance_weight(x, phi));
      }
      expectation += p * weighted_mean(v, w);
    });
    if (std::abs(expectation - truth) > 1e-12 * std::max(1.0, truth)) return false;
  }
  return true;
}

DatasetPair gradient_data(std::uint64_t seed, const MissingnessFunction& phi0, const MissingnessFunction& phi1) {
  Rng rng(seed);
  const auto r0 = oracle::normal_rows(rng, 80, 2);
  const auto r1 = oracle::normal_rows(rng, 70, 2, 0.5);
  return {corrupt(r0, 0, phi0, seed), corrupt(r1, 1, phi1, seed + 100)};
}

bool gradients_match() {
  const auto phi0 = MissingnessFunction::joint(HalfspaceMissingness{{1.0, -1.0}, 0.0, 0.5});
  const auto phi1 = MissingnessFunction::joint(ConstantMissingness{0.3});
  const auto fmap = FeatureMap::identity_plus_squares(2);
  const std::vector<WeightingMode> modes{WeightingMode::mnar(phi0, phi1), WeightingMode::complete_case()};
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto data = gradient_data(seed, phi0, phi1);
    Rng rng(seed * 7);
    Eigen::VectorXd theta(4);
    for (Eigen::Index i = 0; i < 4; ++i) theta(i) = 0.3 * rng.normal();
    for (const auto& mode : modes) {
      const auto prepared = prepare(data, fmap, mode);
      const auto k = [&](const Eigen::VectorXd& t) { return kliep_objective(t, prepared).loss; };
      if (oracle::max_relative_error(kliep_objective(theta, prepared).gradient, oracle::finite_gradient(k, theta)) >
          1e-5)
        return false;
      for (const auto& div : {DivergenceSpec::kl(), DivergenceSpec::js()}) {
        const auto f = [&](const Eigen::VectorXd& t) { return fdiv_objective(t, prepared, div).loss; };
        if (oracle::max_relative_error(fdiv_objective(theta, prepared, div).gradient,
                                       oracle::finite_gradient(f, theta)) > 1e-5)
          return false;
      }
    }
  }
  return true;
}

bool convex_chords() {
  const auto phi1 = MissingnessFunction::joint(ConstantMissingness{0.3});
  const auto data = gradient_data(5, MissingnessFunction::none(), phi1);
  const auto prepared = prepare(data, FeatureMap::identity(2), WeightingMode::mnar(MissingnessFunction::none(), phi1));
  Rng rng(55);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
    const double t = rng.uniform();
    const double lhs = kliep_objective(t * a + (1 - t) * b, prepared).loss;
    const double rhs = t * kliep_objective(a, prepared).loss + (1 - t) * kliep_objective(b, prepared).loss;
    if (lhs - rhs > 1e-9) return false;
  }
  return true;
}

bool binomial_exact() {
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const std::vector<std::pair<int, int>> alphas{{1, 20}, {1, 10}, {1, 5}};
  const std::vector<std::pair<int, int>> deltas{{1, 20}, {1, 10}};
  for (std::size_t n = 1; n <= 50; ++n) {
    for (auto [an, ad] : alphas) {
      const cpp_rational p(ad - an, ad);  // 1 - alpha
      std::vector<cpp_rational> pmf(n + 1);
      cpp_int choose = 1;
      for (std::size_t k = 0; k <= n; ++k) {
        cpp_rational term(choose);
        for (std::size_t j = 0; j < k; ++j) term *= p;
        for (std::size_t j = k; j < n; ++j) term *= (1 - p);
        pmf[k] = term;
        choose = choose * (n - k) / (k + 1);
      }
      for (auto [dn, dd] : deltas) {
        const cpp_rational delta(dn, dd);
        std::optional<std::size_t> want;
        cpp_rational tail = 0;
        for (std::size_t i = n; i >= 1; --i) {
          tail += pmf[i];
          if (tail <= delta) want = i;
          else break;
        }
        const auto got = binomial_order_index(n, static_cast<double>(an) / ad, static_cast<double>(dn) / dd);
        if (got != want) return false;
      }
    }
  }
  return true;
}

bool hand_fixture() {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<double> s{0.5, 1.5, 2.5, -inf}, w{2, 1, 1, 0};
  const auto r = threshold_missing(s, w, 0.4, 0.1);
  return r.threshold == 2.5 && r.index == 4;
}

bool mode_collapse() {
  Rng rng(8);
  const DatasetPair clean{Dataset::from_rows(oracle::normal_rows(rng, 60, 2), 0),
                          Dataset::from_rows(oracle::normal_rows(rng, 50, 2, 0.4), 1)};
  const auto fmap = FeatureMap::identity(2);
  KliepFitConfig full;
  auto mnar0 = full;
  mnar0.weighting = WeightingMode::mnar(MissingnessFunction::none(), MissingnessFunction::none());
  auto cc = full;
  cc.weighting = WeightingMode::complete_case();
  const auto a = fit(clean, fmap, full).model.theta();
  return a == fit(clean, fmap, mnar0).model.theta() && a == fit(clean, fmap, cc).model.theta();
}

bool monotone_invariance() {
  Rng rng(9);
  const auto calib = Dataset::from_rows(oracle::normal_rows(rng, 300, 1), 0);
  const LogLinearRatioModel m(FeatureMap::identity(1), Eigen::VectorXd::Constant(1, 1.0));
  const RatioScorer base(m);
  const auto shifted = RatioScorer::analytic(
      [](std::span<const double> z) { return 2.0 * z[0] + 7.0; }, "affine");
  CalibrationConfig c;
  c.method = ThresholdMethod::Binomial;
  const auto a = calibrate(base, calib, MissingnessFunction::none(), c);
  const auto b = calibrate(shifted, calib, MissingnessFunction::none(), c);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> z{rng.normal() * 2.0};
    if (a.classify(std::span<const double>(z)) != b.classify(std::span<const double>(z))) return false;
  }
  return true;
}

bool byte_identical() {
  auto spec = default_spec(Scenario::Mixture2D);
  spec.sizes = {100};
  spec.reps = 4;
  spec.test_draws = 2000;
  std::ostringstream x, y;
  write_power_csv(x, run_power_experiment(spec), spec);
  write_power_csv(y, run_power_experiment(spec), spec);
  return x.str() == y.str();
}

Outcome ac7() {
  const std::vector<Check> checks{{"enumeration", enumeration_unbiased}, {"gradients", gradients_match},
                                  {"convexity", convex_chords},         {"binomial-exact", binomial_exact},
                                  {"hand-fixture", hand_fixture},       {"mode-collapse", mode_collapse},
                                  {"monotone", monotone_invariance},    {"reruns", byte_identical}};
  bool ok = true;
  std::string detail;
  for (const auto& [name, fn] : checks) {
    const bool r = fn();
    ok = ok && r;
    detail += name + (r ? "=ok " : "=FAILED ");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  set_warning_handler([](std::string_view) {});
  criterion("AC1", 300, ac1);
  criterion("AC2", 600, ac2);
  criterion("AC3", 900, ac3);
  criterion("AC4", 600, ac4);
  criterion("AC5", 600, ac5);
  criterion("AC6", 600, ac6);
  criterion("AC7", 300, ac7);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
