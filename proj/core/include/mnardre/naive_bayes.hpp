#pragma once

// Density ratio estimation under coordinate-wise independence: one
// one-dimensional log-linear model per coordinate, combined by product
// (sum of log ratios). Each coordinate is fit on its own projection with its
// own missingness functions.

#include <span>
#include <vector>

#include "mnardre/kliep.hpp"

namespace mnardre {

class NaiveBayesRatioModel {
 public:
  explicit NaiveBayesRatioModel(std::vector<LogLinearRatioModel> per_dim);

  std::size_t dim() const { return per_dim_.size(); }
  const LogLinearRatioModel& operator[](std::size_t j) const { return per_dim_[j]; }
  const std::vector<LogLinearRatioModel>& per_dim() const { return per_dim_; }

  /// sum_j theta_j' f(z_j) - sum_j log N_j (normalizers included when set).
  double log_ratio(std::span<const double> z) const;
  /// Throws DomainError ("naive-Bayes evaluation requires full observation")
  /// when any coordinate is missing.
  double evaluate_log_ratio(const ObservedPoint& z) const;

 private:
  std::vector<LogLinearRatioModel> per_dim_;
};

struct NaiveBayesFitResult {
  NaiveBayesRatioModel model;
  std::vector<FitResult> per_dim;

  bool converged() const;
};

/// Runs `fit` on every coordinate projection with the coordinate's
/// missingness functions, then attaches per-coordinate normalizers (left
/// unset, with a warning, when the sum under- or overflows). The
/// weighting mode's functions must be per-coordinate (or zero).
NaiveBayesFitResult fit_naive_bayes(const DatasetPair& data, const FeatureMap& fmap_1d,
                                    const KliepFitConfig& config);

/// Coordinate-j view of a weighting mode.
WeightingMode project_mode(const WeightingMode& mode, std::size_t j);

}  // namespace mnardre
