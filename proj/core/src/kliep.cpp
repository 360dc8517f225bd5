#include "mnardre/kliep.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

WeightedSample prepare_class(const Dataset& data, const FeatureMap& fmap, WeightingKind kind,
                             const MissingnessFunction& phi) {
  if (data.dim() != fmap.input_dim())
    throw DataError("data dimension " + std::to_string(data.dim()) +
                    " does not match feature map input dimension " + std::to_string(fmap.input_dim()));
  const auto k = static_cast<Eigen::Index>(fmap.output_dim());
  WeightedSample out;
  std::size_t rows = data.size();
  if (kind == WeightingKind::CompleteCase) rows = data.observed_count();
  if (kind == WeightingKind::FullyObserved && data.has_missing())
    throw DataError("fully observed weighting given data with missing values");
  out.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), k);
  out.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows));
  Eigen::VectorXd buf(k);
  Eigen::Index r = 0;
  for (const auto& p : data.points()) {
    if (!p.fully_observed()) {
      if (kind == WeightingKind::CompleteCase) continue;
      out.weights[r] = point_weight(p, phi);  // 0, or DomainError for partial joint
      ++r;
      continue;
    }
    const auto v = p.values();
    fmap.apply(v, std::span<double>(buf.data(), static_cast<std::size_t>(k)));
    out.values.row(r) = buf.transpose();
    out.weights[r] = kind == WeightingKind::Mnar ? point_weight(p, phi) : 1.0;
    ++r;
  }
  return out;
}

PreparedPair prepare(const DatasetPair& data, const FeatureMap& fmap, const WeightingMode& mode) {
  if (data.class0.dim() != data.class1.dim()) throw DataError("class datasets differ in dimension");
  PreparedPair p;
  p.class0 = prepare_class(data.class0, fmap, mode.kind, mode.phi0);
  p.class1 = prepare_class(data.class1, fmap, mode.kind, mode.phi1);
  if (p.class1.size() == 0 || !(p.class1.weights.maxCoeff() > 0.0))
    throw DataError("degenerate class-1 weighted sum: no observed class-1 points");
  if (p.class0.size() == 0 || !(p.class0.weights.maxCoeff() > 0.0))
    throw DataError("degenerate class-0 weighted sum");
  p.class1_mean = weighted_mean(p.class1);
  return p;
}

ObjectiveValue kliep_objective(const Eigen::VectorXd& theta, const PreparedPair& prepared) {
  const WeightedSample& c0 = prepared.class0;
  const Eigen::VectorXd s = c0.values * theta;
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (c0.weights[i] > 0.0 && s[i] > m) m = s[i];
  }
  if (!std::isfinite(m)) throw DataError("degenerate class-0 weighted sum");
  Eigen::VectorXd t(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    t[i] = c0.weights[i] > 0.0 ? c0.weights[i] * std::exp(s[i] - m) : 0.0;
  }
  const double total = t.sum();
  const double lse = m + std::log(total) - std::log(static_cast<double>(c0.size()));
  ObjectiveValue out;
  out.loss = -(theta.dot(prepared.class1_mean) - lse);
  out.gradient = -(prepared.class1_mean - c0.values.transpose() * t / total);
  return out;
}

ObjectiveValue sample_objective(const Eigen::VectorXd& theta, const DatasetPair& data,
                                const FeatureMap& fmap, const WeightingMode& mode) {
  if (static_cast<std::size_t>(theta.size()) != fmap.output_dim())
    throw DomainError("theta length does not match the feature dimension");
  return kliep_objective(theta, prepare(data, fmap, mode));
}

void check_feature_variance(const WeightedSample& class0) {
  const double wsum = class0.weights.sum();
  if (!(wsum > 0.0)) return;
  const Eigen::VectorXd mean = class0.values.transpose() * class0.weights / wsum;
  const Eigen::MatrixXd centered = class0.values.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * class0.weights.asDiagonal() * centered / wsum;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  if (!(eig.eigenvalues().minCoeff() > 1e-12 * std::max(1.0, top)))
    warn("class-0 feature covariance is degenerate; theta is not identifiable in some direction");
}

FitResult fit_prepared(const PreparedPair& prepared, const FeatureMap& fmap, const KliepFitConfig& config) {
  const auto k = static_cast<Eigen::Index>(fmap.output_dim());
  Eigen::VectorXd init = config.theta_init.value_or(Eigen::VectorXd::Zero(k));
  if (init.size() != k) throw DomainError("theta_init length does not match the feature dimension");
  check_feature_variance(prepared.class0);
  const auto res = minimize([&](const Eigen::VectorXd& th) { return kliep_objective(th, prepared); },
                            std::move(init), config.optimizer);
  return FitResult{LogLinearRatioModel(fmap, res.argmin), res.converged, res.iterations,
                   res.gradient_norm, res.loss};
}

FitResult fit(const DatasetPair& data, const FeatureMap& fmap, const KliepFitConfig& config) {
  return fit_prepared(prepare(data, fmap, config.weighting), fmap, config);
}

double normalizing_constant(const LogLinearRatioModel& model, const Dataset& class0,
                            const MissingnessFunction* phi0) {
  return normalizing_constant(model, class0,
                              phi0 ? WeightingMode::mnar(*phi0, MissingnessFunction::none())
                                   : WeightingMode::fully_observed());
}

double normalizing_constant(const LogLinearRatioModel& model, const Dataset& class0,
                            const WeightingMode& mode) {
  double sum = 0.0;
  std::size_t divisor = 0;
  bool any_weight = false;
  for (const auto& p : class0.points()) {
    if (mode.kind == WeightingKind::FullyObserved) {
      sum += model.ratio(p.values());
      ++divisor;
      any_weight = true;
      continue;
    }
    if (!p.fully_observed()) {
      if (mode.kind == WeightingKind::Mnar) {
        ++divisor;
        (void)point_weight(p, mode.phi0);  // rejects partial points under a joint mechanism
      }
      continue;
    }
    const auto v = p.values();
    const double w = mode.kind == WeightingKind::Mnar ? point_weight(p, mode.phi0) : 1.0;
    sum += w * model.ratio(v);
    ++divisor;
    any_weight = any_weight || w > 0.0;
  }
  if (divisor == 0 || !any_weight) throw DataError("normalizing constant: all class-0 weights are zero");
  if (!(sum > 0.0)) throw NumericError("normalizing constant underflowed");
  if (!std::isfinite(sum)) throw NumericError("normalizing constant overflowed");
  return sum / static_cast<double>(divisor);
}

}  // namespace mnardre
