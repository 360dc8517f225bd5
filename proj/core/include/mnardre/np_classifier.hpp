#pragma once

// Neyman-Pearson classification with high-probability Type I error control.
//
// Two threshold rules are provided:
//   MissingWeighted : class-0 calibration sample may contain missing points;
//                     scores are ranked with inverse-probability weights and a
//                     margin sqrt(16 log(1/delta) / m_eff0) is subtracted from
//                     alpha.
//   Binomial        : the classical umbrella rule on a fully observed class-0
//                     calibration sample; the order statistic index is the
//                     smallest i with P(Binomial(n0, 1 - alpha) >= i) <= delta.
//
// classify(z) = 1 iff g(r(z)) > threshold. Ties go to class 0.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"
#include "mnardre/naive_bayes.hpp"

namespace mnardre {

enum class ScoreTransform { Identity, Log };
enum class ThresholdMethod { MissingWeighted, Binomial };

inline constexpr double kMarginConstant = 16.0;

/// sqrt(constant * log(1/delta) / m_eff0); delta must lie in (0, 1/2].
double delta_margin(double m_eff0, double delta, double constant = kMarginConstant);

struct ThresholdResult {
  double threshold = 0.0;
  std::size_t index = 0;  // 1-based order statistic i*, 0 when none exists
  double margin = 0.0;    // Delta (MissingWeighted only)
  std::size_t calibration_size = 0;
  bool degenerate = false;   // no admissible index: threshold is +inf
  bool all_missing = false;  // every calibration point missing: threshold is -inf
  bool non_paper = false;    // margin constant or margin overridden
};

/// Weighted rule with an explicit margin. Scores of missing points must be
/// -inf with weight 0. Ties in score are ordered by weight so the result does
/// not depend on the input order.
ThresholdResult threshold_missing(std::span<const double> scores, std::span<const double> weights,
                                  double alpha, double margin);

/// Weighted rule with the margin computed from (delta, m_eff0).
ThresholdResult threshold_missing(std::span<const double> scores, std::span<const double> weights,
                                  double alpha, double delta, double m_eff0,
                                  double margin_constant = kMarginConstant);

/// P(W >= i) for W ~ Binomial(n, p), by log-space pmf recursion.
double binomial_upper_tail(std::size_t n, double p, std::size_t i);

/// Smallest i in [1, n0] with P(Binomial(n0, 1 - alpha) >= i) <= delta.
std::optional<std::size_t> binomial_order_index(std::size_t n0, double alpha, double delta);

ThresholdResult threshold_binomial(std::span<const double> scores, double alpha, double delta);

/// A density ratio estimate exposed through its log ratio.
class RatioScorer {
 public:
  using Analytic = std::function<double(std::span<const double>)>;
  struct AnalyticSource {
    Analytic log_ratio;
    std::string name;
  };
  using Source = std::variant<LogLinearRatioModel, NaiveBayesRatioModel, AnalyticSource>;

  RatioScorer(LogLinearRatioModel model) : source_(std::move(model)) {}  // NOLINT(implicit)
  RatioScorer(NaiveBayesRatioModel model) : source_(std::move(model)) {}  // NOLINT(implicit)
  static RatioScorer analytic(Analytic log_ratio, std::string name);

  double log_ratio(std::span<const double> z) const;
  std::size_t input_dim() const;
  const Source& source() const { return source_; }

 private:
  explicit RatioScorer(Source s) : source_(std::move(s)) {}
  Source source_;
};

double apply_transform(ScoreTransform g, double log_ratio);

struct CalibrationConfig {
  double alpha = 0.1;
  double delta = 0.1;
  ThresholdMethod method = ThresholdMethod::MissingWeighted;
  ScoreTransform transform = ScoreTransform::Log;
  double margin_constant = kMarginConstant;
  std::optional<double> margin_override;  // explicit Delta; marks the result non-standard
  std::optional<double> phi0_sup;         // overrides phi0.sup_norm() in m_eff0
};

class NpClassifier {
 public:
  NpClassifier(RatioScorer scorer, ScoreTransform transform, ThresholdResult threshold, double alpha,
               double delta, ThresholdMethod method);

  double score(std::span<const double> z) const;
  int classify(std::span<const double> z) const;
  /// Requires a fully observed point.
  int classify(const ObservedPoint& z) const;

  const RatioScorer& scorer() const { return scorer_; }
  ScoreTransform transform() const { return transform_; }
  const ThresholdResult& threshold_info() const { return threshold_; }
  double threshold() const { return threshold_.threshold; }
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  ThresholdMethod method() const { return method_; }

 private:
  RatioScorer scorer_;
  ScoreTransform transform_;
  ThresholdResult threshold_;
  double alpha_;
  double delta_;
  ThresholdMethod method_;
};

/// Scores g(r(x)) of a calibration sample; points not fully observed get -inf.
std::vector<double> calibration_scores(const RatioScorer& scorer, ScoreTransform g, const Dataset& calib);

/// Builds a classifier from a fresh class-0 calibration sample.
NpClassifier calibrate(const RatioScorer& scorer, const Dataset& calib0, const MissingnessFunction& phi0,
                       const CalibrationConfig& config);

struct ErrorEstimate {
  double type1 = 0.0;
  double power = 0.0;
};

/// Empirical fraction classified 1 on fully observed class-0 / class-1 tests.
ErrorEstimate estimate_errors(const NpClassifier& clf, const Dataset& test0, const Dataset& test1);
/// Fraction of rows classified 1.
double positive_rate(const NpClassifier& clf, const Eigen::MatrixXd& rows);

}  // namespace mnardre
