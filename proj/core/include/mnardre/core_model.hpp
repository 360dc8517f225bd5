#pragma once

// Domain types shared by every estimator: observations with missing marks,
// datasets, feature maps, log-linear ratio models and missingness functions.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mnardre {

/// Floor on 1 - phi. Missingness probabilities are clamped to 1 - kPhiFloor,
/// which caps every importance weight at 1 / kPhiFloor.
inline constexpr double kPhiFloor = 1e-3;

/// A d-dimensional record whose coordinates are either a finite real value
/// or the missing mark (std::nullopt).
class ObservedPoint {
 public:
  using Coord = std::optional<double>;

  explicit ObservedPoint(std::vector<Coord> coords);

  static ObservedPoint observed(std::span<const double> values);
  static ObservedPoint all_missing(std::size_t dim);

  std::size_t dim() const { return coords_.size(); }
  const Coord& operator[](std::size_t j) const { return coords_[j]; }
  const std::vector<Coord>& coords() const { return coords_; }

  bool is_missing(std::size_t j) const { return !coords_[j].has_value(); }
  bool fully_observed() const;
  bool fully_missing() const;

  /// Values of a fully observed point; throws DomainError otherwise.
  std::vector<double> values() const;

  friend bool operator==(const ObservedPoint&, const ObservedPoint&) = default;

 private:
  std::vector<Coord> coords_;
};

/// Non-empty collection of points of uniform dimension from one class.
/// Class 0 is the error-controlled class.
class Dataset {
 public:
  Dataset(std::vector<ObservedPoint> points, int class_label);

  /// Fully observed dataset from the rows of `rows`.
  static Dataset from_rows(const Eigen::MatrixXd& rows, int class_label);

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return points_.front().dim(); }
  int label() const { return label_; }
  const std::vector<ObservedPoint>& points() const { return points_; }
  const ObservedPoint& operator[](std::size_t i) const { return points_[i]; }

  /// Number of fully observed points.
  std::size_t observed_count() const;
  bool has_missing() const;

  /// One-dimensional dataset made of coordinate j of every point.
  Dataset project(std::size_t j) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<ObservedPoint> points_;
  int label_;
};

struct DatasetPair {
  Dataset class0;
  Dataset class1;
};

/// Feature map f used by the log-linear form r(z) = exp(theta' f(z)).
class FeatureMap {
 public:
  enum class Kind { Identity, IdentityPlusSquares, Custom };
  using CustomFn = std::function<void(std::span<const double>, std::span<double>)>;

  static FeatureMap identity(std::size_t input_dim);
  /// f(z) = (z, z^2) with the squares stacked after the raw coordinates.
  static FeatureMap identity_plus_squares(std::size_t input_dim);
  /// Tabulated basis. The output dimension is declared up front so that
  /// parameter lengths can be validated at model construction.
  static FeatureMap custom(std::size_t input_dim, std::size_t output_dim, CustomFn fn,
                           std::string name = "custom");

  Kind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  const std::string& name() const { return name_; }

  /// Writes f(z) into out; throws NumericError when an output is not finite.
  void apply(std::span<const double> z, std::span<double> out) const;
  Eigen::VectorXd operator()(std::span<const double> z) const;

  /// Map for a single input coordinate of the same kind (naive-Bayes use).
  FeatureMap one_dimensional() const;

 private:
  FeatureMap(Kind kind, std::size_t in, std::size_t out, CustomFn fn, std::string name);

  Kind kind_;
  std::size_t input_dim_;
  std::size_t output_dim_;
  CustomFn custom_;
  std::string name_;
};

/// r_theta(z) = exp(theta' f(z)) with an optional normalizer N so that
/// r_theta / N integrates to one against the class-0 density.
class LogLinearRatioModel {
 public:
  LogLinearRatioModel(FeatureMap feature_map, Eigen::VectorXd theta,
                      std::optional<double> normalizer = std::nullopt);

  const FeatureMap& feature_map() const { return feature_map_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  std::optional<double> normalizer() const { return normalizer_; }
  std::size_t input_dim() const { return feature_map_.input_dim(); }

  /// theta' f(z), i.e. log r_theta(z).
  double linear_score(std::span<const double> z) const;
  double ratio(std::span<const double> z) const;
  /// log(r_theta(z) / N); throws DomainError when no normalizer is set.
  double log_normalized_ratio(std::span<const double> z) const;

  /// Refuses points with any missing coordinate.
  double linear_score(const ObservedPoint& x) const;

  LogLinearRatioModel with_normalizer(double normalizer) const;
  LogLinearRatioModel with_theta(Eigen::VectorXd theta) const;

 private:
  FeatureMap feature_map_;
  Eigen::VectorXd theta_;
  std::optional<double> normalizer_;
};

// Missingness entries. Each maps a true value z to P(missing | z).

struct ZeroMissingness {};

struct ConstantMissingness {
  double prob = 0.0;
};

/// phi(z) = 1 / (1 + exp(sign * (intercept + slope * z))), scalar input.
struct LogisticMissingness {
  double intercept = 0.0;
  double slope = 0.0;
  int sign = 1;
};

/// phi(z) = prob * 1{direction' z > level}.
struct HalfspaceMissingness {
  std::vector<double> direction;
  double level = 0.0;
  double prob = 0.0;
};

/// User supplied lookup with a declared supremum (used for m_eff).
struct TabulatedMissingness {
  std::function<double(std::span<const double>)> lookup;
  double declared_sup = 0.0;
  std::string name = "tabulated";
};

using MissingnessEntry = std::variant<ZeroMissingness, ConstantMissingness, LogisticMissingness,
                                      HalfspaceMissingness, TabulatedMissingness>;

/// Entry value at z, clamped to [0, 1 - kPhiFloor].
double evaluate_missingness(const MissingnessEntry& entry, std::span<const double> z);
/// Supremum of the entry over all finite inputs (clamped like evaluations).
double missingness_sup(const MissingnessEntry& entry);
void validate_missingness(const MissingnessEntry& entry);

/// Missingness mechanism of one class.
///
/// Joint scope: one entry evaluated on the whole point; the point is either
/// entirely observed or entirely missing. PerCoordinate scope: entry j is
/// evaluated on coordinate j and coordinates go missing independently.
class MissingnessFunction {
 public:
  enum class Scope { Joint, PerCoordinate };

  MissingnessFunction();  // no missingness
  static MissingnessFunction none() { return {}; }
  static MissingnessFunction joint(MissingnessEntry entry);
  static MissingnessFunction per_coordinate(std::vector<MissingnessEntry> entries);

  Scope scope() const { return scope_; }
  const std::vector<MissingnessEntry>& entries() const { return entries_; }
  bool is_zero() const;

  /// Joint scope only: P(point missing | z).
  double joint_probability(std::span<const double> z) const;
  /// PerCoordinate scope (or a Joint function of a scalar): P(coord j missing | z_j).
  double coordinate_probability(std::size_t j, double zj) const;
  /// P(point fully observed | z), never below kPhiFloor.
  double observe_probability(std::span<const double> z) const;

  /// ||phi||_inf of the probability that the point is not fully observed.
  double sup_norm() const;

  /// The one-dimensional mechanism acting on coordinate j.
  MissingnessFunction coordinate(std::size_t j) const;

 private:
  Scope scope_;
  std::vector<MissingnessEntry> entries_;
};

/// n (1 - phi_sup); the two-class m_eff is the minimum over classes.
double effective_sample_size(double n, double phi_sup);
double effective_sample_size(std::size_t n0, const MissingnessFunction& phi0, std::size_t n1,
                             const MissingnessFunction& phi1);

}  // namespace mnardre
