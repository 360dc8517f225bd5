#pragma once

// Learning a per-coordinate logistic missingness function. The true values of
// a few missing entries are queried; a logistic regression of the missing
// indicator on z is fit to the observed entries plus the queried ones, and
// the intercept is shifted by -log(m / n1) to undo the under-sampling of
// missing entries.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mnardre/core_model.hpp"

namespace mnardre {

struct QueryBudgetPlan {
  /// Queries per coordinate; a single entry is broadcast to every coordinate.
  std::vector<std::size_t> queries;

  static QueryBudgetPlan uniform(std::size_t m_q) { return {{m_q}}; }
  std::size_t for_coordinate(std::size_t j) const;
};

/// Observed entries plus the queried missing entries of one coordinate.
struct QuerySubsample {
  std::vector<double> values;
  std::vector<int> labels;           // 1 = entry was missing
  std::vector<std::size_t> indices;  // ascending row indices into the column
  std::size_t n = 0;                 // column length
  std::size_t n_missing = 0;         // n1
  std::size_t n_queried = 0;         // m
};

/// Selects m_q missing entries uniformly without replacement and reveals
/// their latent values. Throws DomainError when m_q exceeds the missing count.
QuerySubsample simulate_query(std::span<const std::optional<double>> column, std::span<const double> latent,
                              std::size_t m_q, std::uint64_t seed);

struct LogisticFit {
  double intercept = 0.0;
  double slope = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separated = false;
};

/// Maximum likelihood for P(y = 1 | z) = 1 / (1 + exp(-(b0 + b1 z))) by Newton
/// iteration with a 1e-8 ridge on the Hessian. Coefficients are capped at 30
/// in absolute value. Non-overlapping label classes, or hitting the cap, flag
/// the fit as separated.
LogisticFit fit_logistic(std::span<const double> z, std::span<const int> y);

inline constexpr double kLogisticCap = 30.0;

struct AdjustedLogisticFit {
  double intercept_raw = 0.0;
  double slope = 0.0;
  double intercept_corrected = 0.0;
  std::size_t n = 0;
  std::size_t n_missing = 0;
  std::size_t n_queried = 0;
  int iterations = 0;
  bool converged = false;
  bool separated = false;

  /// phi(z) = 1 / (1 + exp(-(intercept_corrected + slope z))).
  MissingnessEntry phi() const;
};

AdjustedLogisticFit fit_adjusted_logistic(const QuerySubsample& subsample);

struct LearnedMissingness {
  MissingnessFunction phi;
  std::vector<std::optional<AdjustedLogisticFit>> fits;  // empty for columns without missing entries
};

/// Learns one logistic entry per coordinate of a corrupted dataset whose
/// latent (uncorrupted) values are known. Coordinates with no missing entries
/// get the zero function. Each coordinate draws its queries from the stream
/// (seed, j).
LearnedMissingness learn_missingness(const Dataset& corrupted, const Eigen::MatrixXd& latent,
                                     const QueryBudgetPlan& plan, std::uint64_t seed);

}  // namespace mnardre
