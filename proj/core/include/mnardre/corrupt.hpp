#pragma once

// Inducing missing-not-at-random missingness in complete data.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"

namespace mnardre {

/// Applies phi to every row: under a joint mechanism the whole point goes
/// missing with probability phi(z); per coordinate, coordinate j goes missing
/// with probability phi_j(z_j). One uniform is consumed per point (joint) or
/// per coordinate, whatever the probability, so streams stay aligned.
Dataset corrupt(const Eigen::MatrixXd& rows, int class_label, const MissingnessFunction& phi, std::uint64_t seed);

/// Same on a dataset that may already contain missing marks; those stay
/// missing and are not re-drawn. A joint mechanism needs fully observed input.
Dataset corrupt(const Dataset& data, const MissingnessFunction& phi, std::uint64_t seed);

/// phi_j(z) = 1 / (1 + exp(tau_j (a0_j + a1_j z))) with a0_j = -mean_j / sd_j and
/// a1_j = 1 / sd_j.
MissingnessFunction standardized_logistic(std::span<const double> means, std::span<const double> sds,
                                          std::span<const int> taus);

/// Per-feature standardized logistic with moments estimated from `rows` and
/// the given orientations.
MissingnessFunction standardized_logistic(const Eigen::MatrixXd& rows, std::span<const int> taus);

/// Uniform random orientations in {-1, 1}.
std::vector<int> random_orientations(std::size_t d, std::uint64_t seed);

/// Intercept a0 for which the mean of 1 / (1 + exp(tau (a0 + a1 z))) over
/// `column` equals `target`. Throws DomainError for targets outside
/// (0, 1 - kPhiFloor).
double solve_intercept_for_proportion(std::span<const double> column, double slope, int tau, double target);

/// Mean logistic missingness probability over a column.
double expected_missing_fraction(std::span<const double> column, const LogisticMissingness& phi);

}  // namespace mnardre
