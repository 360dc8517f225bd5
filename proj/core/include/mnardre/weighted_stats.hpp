#pragma once

// Inverse-probability weighted estimates of expectations from samples with
// missing-not-at-random observations:
//
//   E[g(Z)] = E[ 1{X observed} / (1 - phi(X)) * g(X) ].
//
// Estimators divide by the total sample size n, missing points included.

#include <cstddef>
#include <optional>
#include <span>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"

namespace mnardre {

enum class Summation { Naive, Pairwise };

/// Values (one row per sample point) with non-negative weights. Points that
/// were missing carry weight 0 and a zero row; the divisor is values.rows().
struct WeightedSample {
  Eigen::MatrixXd values;
  Eigen::VectorXd weights;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// 0 for a missing coordinate, 1 / (1 - phi(x)) otherwise.
double importance_weight(const std::optional<double>& x, const MissingnessEntry& phi);

/// Weight of a whole point: 0 unless fully observed, else 1 / P(observed | z).
/// A joint mechanism never produces partially missing points, so those are
/// rejected with DomainError.
double point_weight(const ObservedPoint& x, const MissingnessFunction& phi);

/// (1/n) sum_i w_i v_i in index order (or pairwise), n = number of rows.
Eigen::VectorXd weighted_mean(const WeightedSample& sample, Summation order = Summation::Naive);
double weighted_mean(std::span<const double> values, std::span<const double> weights,
                     Summation order = Summation::Naive);

/// Plain index-order mean, used to compare against the phi = 0 case.
double plain_mean(std::span<const double> values, Summation order = Summation::Naive);

}  // namespace mnardre
