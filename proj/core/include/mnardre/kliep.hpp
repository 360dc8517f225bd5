#pragma once

// KLIEP-family density ratio estimation under the log-linear model
// r_theta(z) = exp(theta' f(z)):
//
//   FullyObserved : plain KLIEP on complete data.
//   Mnar          : both empirical expectations replaced by inverse-probability
//                   weighted ones (M-KLIEP); divisors are n1 and n0.
//   CompleteCase  : plain KLIEP on the observed rows only (CC-KLIEP); divisors
//                   are the observed counts. Biased under MNAR.

#include <optional>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"
#include "mnardre/optimizer.hpp"
#include "mnardre/weighted_stats.hpp"

namespace mnardre {

enum class WeightingKind { FullyObserved, Mnar, CompleteCase };

struct WeightingMode {
  WeightingKind kind = WeightingKind::FullyObserved;
  MissingnessFunction phi0;
  MissingnessFunction phi1;

  static WeightingMode fully_observed() { return {}; }
  static WeightingMode mnar(MissingnessFunction phi0, MissingnessFunction phi1) {
    return {WeightingKind::Mnar, std::move(phi0), std::move(phi1)};
  }
  static WeightingMode complete_case() { return {WeightingKind::CompleteCase, {}, {}}; }
};

struct KliepFitConfig {
  WeightingMode weighting;
  OptimizerConfig optimizer;
  std::optional<Eigen::VectorXd> theta_init;  // zero when unset
};

/// Feature-mapped, weighted class samples ready for objective evaluation.
struct PreparedPair {
  WeightedSample class0;
  WeightedSample class1;
  Eigen::VectorXd class1_mean;  // (1/n1) sum_i w_i f(x_i)
};

WeightedSample prepare_class(const Dataset& data, const FeatureMap& fmap, WeightingKind kind,
                             const MissingnessFunction& phi);
PreparedPair prepare(const DatasetPair& data, const FeatureMap& fmap, const WeightingMode& mode);

/// Negated sample objective
///   -[ (1/n1) sum w1 theta'f(x1) - log( (1/n0) sum w0 exp(theta'f(x0)) ) ]
/// and its gradient. The class-0 term is a max-shifted weighted log-sum-exp.
ObjectiveValue kliep_objective(const Eigen::VectorXd& theta, const PreparedPair& prepared);
ObjectiveValue sample_objective(const Eigen::VectorXd& theta, const DatasetPair& data,
                                const FeatureMap& fmap, const WeightingMode& mode);

struct FitResult {
  LogLinearRatioModel model;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double loss = 0.0;
};

/// Fits theta by gradient descent on the negated objective. The returned
/// model has no normalizer; NotConverged is reported through `converged`.
FitResult fit(const DatasetPair& data, const FeatureMap& fmap, const KliepFitConfig& config);
FitResult fit_prepared(const PreparedPair& prepared, const FeatureMap& fmap, const KliepFitConfig& config);

/// (1/n0) sum_i w_i r_theta(x_i) over the class-0 sample, with importance
/// weights when phi0 is given and unit weights otherwise.
double normalizing_constant(const LogLinearRatioModel& model, const Dataset& class0,
                            const MissingnessFunction* phi0);
/// Same, with weights and divisor chosen by the weighting mode.
double normalizing_constant(const LogLinearRatioModel& model, const Dataset& class0,
                            const WeightingMode& mode);

/// Warns when the weighted class-0 feature covariance is (near) singular.
void check_feature_variance(const WeightedSample& class0);

}  // namespace mnardre
