#include "mnardre/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

// ---------------------------------------------------------------------------
// ObservedPoint / Dataset

ObservedPoint::ObservedPoint(std::vector<Coord> coords) : coords_(std::move(coords)) {
  if (coords_.empty()) throw DomainError("observed point must have dimension >= 1");
  for (const auto& c : coords_) {
    if (c && !std::isfinite(*c)) throw DomainError("observed point contains a non-finite value");
  }
}

ObservedPoint ObservedPoint::observed(std::span<const double> values) {
  std::vector<Coord> c(values.begin(), values.end());
  return ObservedPoint(std::move(c));
}

ObservedPoint ObservedPoint::all_missing(std::size_t dim) {
  return ObservedPoint(std::vector<Coord>(dim, std::nullopt));
}

bool ObservedPoint::fully_observed() const {
  return std::all_of(coords_.begin(), coords_.end(), [](const Coord& c) { return c.has_value(); });
}

bool ObservedPoint::fully_missing() const {
  return std::none_of(coords_.begin(), coords_.end(), [](const Coord& c) { return c.has_value(); });
}

std::vector<double> ObservedPoint::values() const {
  std::vector<double> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) {
    if (!c) throw DomainError("point has missing coordinates");
    out.push_back(*c);
  }
  return out;
}

Dataset::Dataset(std::vector<ObservedPoint> points, int class_label)
    : points_(std::move(points)), label_(class_label) {
  if (points_.empty()) throw DataError("dataset must be non-empty");
  if (label_ != 0 && label_ != 1) throw DomainError("class label must be 0 or 1");
  const std::size_t d = points_.front().dim();
  for (const auto& p : points_) {
    if (p.dim() != d) throw DataError("dataset points must share one dimension");
  }
}

Dataset Dataset::from_rows(const Eigen::MatrixXd& rows, int class_label) {
  std::vector<ObservedPoint> pts;
  pts.reserve(static_cast<std::size_t>(rows.rows()));
  std::vector<double> buf(static_cast<std::size_t>(rows.cols()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) buf[static_cast<std::size_t>(j)] = rows(i, j);
    pts.push_back(ObservedPoint::observed(buf));
  }
  return Dataset(std::move(pts), class_label);
}

std::size_t Dataset::observed_count() const {
  return static_cast<std::size_t>(std::count_if(points_.begin(), points_.end(),
                                                [](const ObservedPoint& p) { return p.fully_observed(); }));
}

bool Dataset::has_missing() const { return observed_count() != points_.size(); }

Dataset Dataset::project(std::size_t j) const {
  if (j >= dim()) throw DomainError("projection index out of range");
  std::vector<ObservedPoint> pts;
  pts.reserve(points_.size());
  for (const auto& p : points_) pts.emplace_back(std::vector<ObservedPoint::Coord>{p[j]});
  return Dataset(std::move(pts), label_);
}

// ---------------------------------------------------------------------------
// FeatureMap

FeatureMap::FeatureMap(Kind kind, std::size_t in, std::size_t out, CustomFn fn, std::string name)
    : kind_(kind), input_dim_(in), output_dim_(out), custom_(std::move(fn)), name_(std::move(name)) {
  if (in == 0 || out == 0) throw DomainError("feature map dimensions must be positive");
}

FeatureMap FeatureMap::identity(std::size_t input_dim) {
  return FeatureMap(Kind::Identity, input_dim, input_dim, {}, "identity");
}

FeatureMap FeatureMap::identity_plus_squares(std::size_t input_dim) {
  return FeatureMap(Kind::IdentityPlusSquares, input_dim, 2 * input_dim, {}, "identity_squares");
}

FeatureMap FeatureMap::custom(std::size_t input_dim, std::size_t output_dim, CustomFn fn,
                              std::string name) {
  if (!fn) throw DomainError("custom feature map needs a callable");
  return FeatureMap(Kind::Custom, input_dim, output_dim, std::move(fn), std::move(name));
}

void FeatureMap::apply(std::span<const double> z, std::span<double> out) const {
  if (z.size() != input_dim_) throw DomainError("feature map input has the wrong dimension");
  if (out.size() != output_dim_) throw DomainError("feature map output has the wrong dimension");
  switch (kind_) {
    case Kind::Identity:
      std::copy(z.begin(), z.end(), out.begin());
      break;
    case Kind::IdentityPlusSquares:
      for (std::size_t j = 0; j < input_dim_; ++j) {
        out[j] = z[j];
        out[input_dim_ + j] = z[j] * z[j];
      }
      break;
    case Kind::Custom:
      custom_(z, out);
      break;
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw NumericError("feature map produced a non-finite value");
  }
}

Eigen::VectorXd FeatureMap::operator()(std::span<const double> z) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(output_dim_));
  apply(z, std::span<double>(out.data(), output_dim_));
  return out;
}

FeatureMap FeatureMap::one_dimensional() const {
  switch (kind_) {
    case Kind::Identity:
      return identity(1);
    case Kind::IdentityPlusSquares:
      return identity_plus_squares(1);
    case Kind::Custom:
      if (input_dim_ == 1) return *this;
      break;
  }
  throw DomainError("custom feature map '" + name_ + "' has no one-dimensional form");
}

// ---------------------------------------------------------------------------
// LogLinearRatioModel

LogLinearRatioModel::LogLinearRatioModel(FeatureMap feature_map, Eigen::VectorXd theta,
                                         std::optional<double> normalizer)
    : feature_map_(std::move(feature_map)), theta_(std::move(theta)), normalizer_(normalizer) {
  if (static_cast<std::size_t>(theta_.size()) != feature_map_.output_dim())
    throw DomainError("theta length " + std::to_string(theta_.size()) +
                      " does not match feature dimension " +
                      std::to_string(feature_map_.output_dim()));
  if (!theta_.allFinite()) throw DomainError("theta must be finite");
  if (normalizer_ && !(*normalizer_ > 0.0 && std::isfinite(*normalizer_)))
    throw DomainError("normalizer must be positive and finite");
}

double LogLinearRatioModel::linear_score(std::span<const double> z) const {
  const std::size_t k = feature_map_.output_dim();
  double buf_small[16];
  std::vector<double> buf_large;
  std::span<double> out;
  if (k <= 16) {
    out = std::span<double>(buf_small, k);
  } else {
    buf_large.resize(k);
    out = buf_large;
  }
  feature_map_.apply(z, out);
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += theta_[static_cast<Eigen::Index>(i)] * out[i];
  return s;
}

double LogLinearRatioModel::ratio(std::span<const double> z) const { return std::exp(linear_score(z)); }

double LogLinearRatioModel::log_normalized_ratio(std::span<const double> z) const {
  if (!normalizer_) throw DomainError("model normalizer is unset");
  return linear_score(z) - std::log(*normalizer_);
}

double LogLinearRatioModel::linear_score(const ObservedPoint& x) const {
  if (!x.fully_observed())
    throw DomainError("ratio model cannot be evaluated at a point with missing coordinates");
  const auto v = x.values();
  return linear_score(std::span<const double>(v));
}

LogLinearRatioModel LogLinearRatioModel::with_normalizer(double normalizer) const {
  return LogLinearRatioModel(feature_map_, theta_, normalizer);
}

LogLinearRatioModel LogLinearRatioModel::with_theta(Eigen::VectorXd theta) const {
  return LogLinearRatioModel(feature_map_, std::move(theta), std::nullopt);
}

// ---------------------------------------------------------------------------
// Missingness

namespace {

double clamp_probability(double p) {
  if (!(p >= 0.0)) {
    if (std::isnan(p)) throw NumericError("missingness function returned NaN");
    return 0.0;
  }
  constexpr double cap = 1.0 - kPhiFloor;
  if (p > cap) {
    note_phi_clamp();
    if (phi_clamp_count() == 1)
      warn("missingness probability clamped to 1 - 1e-3 (further clamps are counted silently)");
    return cap;
  }
  return p;
}

double logistic_value(const LogisticMissingness& m, double z) {
  const double t = static_cast<double>(m.sign) * (m.intercept + m.slope * z);
  // 1 / (1 + e^t) evaluated without overflow.
  if (t >= 0.0) {
    const double e = std::exp(-t);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(t));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

void validate_missingness(const MissingnessEntry& entry) {
  std::visit(Overloaded{
                 [](const ZeroMissingness&) {},
                 [](const ConstantMissingness& m) {
                   if (!(m.prob >= 0.0 && m.prob < 1.0))
                     throw DomainError("missingness probability must be bounded away from 1");
                 },
                 [](const LogisticMissingness& m) {
                   if (m.sign != 1 && m.sign != -1) throw DomainError("logistic sign must be +1 or -1");
                   if (!std::isfinite(m.intercept) || !std::isfinite(m.slope))
                     throw DomainError("logistic coefficients must be finite");
                 },
                 [](const HalfspaceMissingness& m) {
                   if (!(m.prob >= 0.0 && m.prob < 1.0))
                     throw DomainError("missingness probability must be bounded away from 1");
                   if (m.direction.empty()) throw DomainError("halfspace direction must be non-empty");
                   if (!std::isfinite(m.level)) throw DomainError("halfspace level must be finite");
                 },
                 [](const TabulatedMissingness& m) {
                   if (!m.lookup) throw DomainError("tabulated missingness needs a callable");
                   if (!(m.declared_sup >= 0.0 && m.declared_sup < 1.0))
                     throw DomainError("missingness probability must be bounded away from 1");
                 },
             },
             entry);
}

double evaluate_missingness(const MissingnessEntry& entry, std::span<const double> z) {
  return std::visit(
      Overloaded{
          [](const ZeroMissingness&) { return 0.0; },
          [](const ConstantMissingness& m) { return clamp_probability(m.prob); },
          [&](const LogisticMissingness& m) {
            if (z.size() != 1) throw DomainError("logistic missingness takes a scalar input");
            return clamp_probability(logistic_value(m, z[0]));
          },
          [&](const HalfspaceMissingness& m) {
            if (z.size() != m.direction.size())
              throw DomainError("halfspace direction does not match the input dimension");
            double s = 0.0;
            for (std::size_t j = 0; j < z.size(); ++j) s += m.direction[j] * z[j];
            return s > m.level ? clamp_probability(m.prob) : 0.0;
          },
          [&](const TabulatedMissingness& m) { return clamp_probability(m.lookup(z)); },
      },
      entry);
}

double missingness_sup(const MissingnessEntry& entry) {
  constexpr double cap = 1.0 - kPhiFloor;
  return std::visit(Overloaded{
                        [](const ZeroMissingness&) { return 0.0; },
                        [&](const ConstantMissingness& m) { return std::min(m.prob, cap); },
                        [&](const LogisticMissingness& m) {
                          if (m.slope == 0.0) return std::min(logistic_value(m, 0.0), cap);
                          return cap;
                        },
                        [&](const HalfspaceMissingness& m) {
                          const bool all_zero = std::all_of(m.direction.begin(), m.direction.end(),
                                                            [](double a) { return a == 0.0; });
                          if (all_zero && !(0.0 > m.level)) return 0.0;
                          return std::min(m.prob, cap);
                        },
                        [&](const TabulatedMissingness& m) { return std::min(m.declared_sup, cap); },
                    },
                    entry);
}

MissingnessFunction::MissingnessFunction()
    : scope_(Scope::Joint), entries_{MissingnessEntry{ZeroMissingness{}}} {}

MissingnessFunction MissingnessFunction::joint(MissingnessEntry entry) {
  validate_missingness(entry);
  MissingnessFunction f;
  f.entries_ = {std::move(entry)};
  return f;
}

MissingnessFunction MissingnessFunction::per_coordinate(std::vector<MissingnessEntry> entries) {
  if (entries.empty()) throw DomainError("per-coordinate missingness needs at least one entry");
  for (const auto& e : entries) validate_missingness(e);
  MissingnessFunction f;
  f.scope_ = Scope::PerCoordinate;
  f.entries_ = std::move(entries);
  return f;
}

bool MissingnessFunction::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const MissingnessEntry& e) { return missingness_sup(e) == 0.0; });
}

double MissingnessFunction::joint_probability(std::span<const double> z) const {
  if (scope_ != Scope::Joint) throw DomainError("joint probability requested from a per-coordinate function");
  return evaluate_missingness(entries_.front(), z);
}

double MissingnessFunction::coordinate_probability(std::size_t j, double zj) const {
  const double z[1] = {zj};
  if (scope_ == Scope::Joint) {
    if (std::holds_alternative<ZeroMissingness>(entries_.front())) return 0.0;
    return evaluate_missingness(entries_.front(), z);
  }
  if (j >= entries_.size()) throw DomainError("coordinate index exceeds missingness dimension");
  return evaluate_missingness(entries_[j], z);
}

double MissingnessFunction::observe_probability(std::span<const double> z) const {
  if (scope_ == Scope::Joint) return 1.0 - evaluate_missingness(entries_.front(), z);
  if (z.size() != entries_.size())
    throw DomainError("per-coordinate missingness dimension does not match the point");
  double q = 1.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    q *= 1.0 - evaluate_missingness(entries_[j], z.subspan(j, 1));
  }
  if (q < kPhiFloor) {
    note_phi_clamp();
    return kPhiFloor;
  }
  return q;
}

double MissingnessFunction::sup_norm() const {
  if (scope_ == Scope::Joint) return missingness_sup(entries_.front());
  double q = 1.0;
  for (const auto& e : entries_) q *= 1.0 - missingness_sup(e);
  return std::min(1.0 - q, 1.0 - kPhiFloor);
}

MissingnessFunction MissingnessFunction::coordinate(std::size_t j) const {
  if (scope_ == Scope::PerCoordinate) {
    if (j >= entries_.size()) throw DomainError("coordinate index exceeds missingness dimension");
    return joint(entries_[j]);
  }
  if (is_zero()) return none();
  throw DomainError("a joint missingness function cannot be split into coordinates");
}

double effective_sample_size(double n, double phi_sup) {
  if (!(n > 0.0)) throw DomainError("sample size must be positive");
  if (!(phi_sup >= 0.0)) throw DomainError("missingness supremum must be non-negative");
  if (!(phi_sup < 1.0)) throw DomainError("missingness probability must be bounded away from 1");
  return n * (1.0 - phi_sup);
}

double effective_sample_size(std::size_t n0, const MissingnessFunction& phi0, std::size_t n1,
                             const MissingnessFunction& phi1) {
  return std::min(effective_sample_size(static_cast<double>(n0), phi0.sup_norm()),
                  effective_sample_size(static_cast<double>(n1), phi1.sup_norm()));
}

}  // namespace mnardre
