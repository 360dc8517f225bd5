#pragma once

// Variational f-divergence density ratio estimation over the log-linear
// family, fully observed or with inverse-probability weights:
//
//   maximise (1/n1) sum w1 f'(r(x1)) - (1/n0) sum w0 f*(f'(r(x0))).
//
// The composition f* o f' is evaluated in closed form: r for KL and
// log((1 + r) / 2) for JS.

#include <string_view>

#include "mnardre/kliep.hpp"

namespace mnardre {

enum class DivergenceKind { KL, JS };

struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::KL;

  static DivergenceSpec kl() { return {DivergenceKind::KL}; }
  static DivergenceSpec js() { return {DivergenceKind::JS}; }

  std::string_view name() const { return kind == DivergenceKind::KL ? "KL" : "JS"; }

  /// f'(t): 1 + log t (KL), log(2t / (1 + t)) (JS).
  double fprime(double t) const;
  /// Convex conjugate f*(t): exp(t - 1) (KL), -log(2 - exp(t)) on t < log 2 (JS).
  double fstar(double t) const;
  bool in_fstar_domain(double t) const;
};

ObjectiveValue fdiv_objective(const Eigen::VectorXd& theta, const PreparedPair& prepared,
                              const DivergenceSpec& spec);
ObjectiveValue fdiv_objective(const Eigen::VectorXd& theta, const DatasetPair& data, const FeatureMap& fmap,
                              const DivergenceSpec& spec, const WeightingMode& mode);

FitResult fdiv_fit(const DatasetPair& data, const FeatureMap& fmap, const DivergenceSpec& spec,
                   const KliepFitConfig& config);
FitResult fdiv_fit_prepared(const PreparedPair& prepared, const FeatureMap& fmap, const DivergenceSpec& spec,
                            const KliepFitConfig& config);

}  // namespace mnardre
