#include "mnardre/fdiv.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mnardre/diagnostics.hpp"

namespace mnardre {
namespace {

// log(1 + e^x) without overflow.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// 1 / (1 + e^-x)
double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

[[noreturn]] void domain_violation(const DivergenceSpec& spec) {
  throw NumericError(std::string(spec.name()) + " divergence: argument outside the domain of f*");
}

}  // namespace

double DivergenceSpec::fprime(double t) const {
  if (!(t > 0.0)) throw DomainError("f' is defined on positive ratios only");
  if (kind == DivergenceKind::KL) return 1.0 + std::log(t);
  return std::log(2.0 * t / (1.0 + t));
}

bool DivergenceSpec::in_fstar_domain(double t) const {
  if (kind == DivergenceKind::KL) return std::isfinite(t);
  return t < std::numbers::ln2;
}

double DivergenceSpec::fstar(double t) const {
  if (!in_fstar_domain(t)) domain_violation(*this);
  if (kind == DivergenceKind::KL) return std::exp(t - 1.0);
  return -std::log(2.0 - std::exp(t));
}

ObjectiveValue fdiv_objective(const Eigen::VectorXd& theta, const PreparedPair& prepared,
                              const DivergenceSpec& spec) {
  const WeightedSample& c0 = prepared.class0;
  const WeightedSample& c1 = prepared.class1;
  const Eigen::VectorXd s1 = c1.values * theta;
  const Eigen::VectorXd s0 = c0.values * theta;
  const auto n1 = static_cast<double>(c1.size());
  const auto n0 = static_cast<double>(c0.size());

  // Per-point values and d/ds of the two integrands.
  Eigen::VectorXd d1(s1.size()), d0(s0.size());
  double term1 = 0.0, term0 = 0.0;
  if (spec.kind == DivergenceKind::KL) {
    // f'(r) = 1 + s, f*(f'(r)) = r = e^s
    for (Eigen::Index i = 0; i < s1.size(); ++i) {
      term1 += c1.weights[i] * (1.0 + s1[i]);
      d1[i] = c1.weights[i];
    }
    for (Eigen::Index i = 0; i < s0.size(); ++i) {
      if (c0.weights[i] == 0.0) {
        d0[i] = 0.0;
        continue;
      }
      const double r = std::exp(s0[i]);
      if (!std::isfinite(r)) domain_violation(spec);
      term0 += c0.weights[i] * r;
      d0[i] = c0.weights[i] * r;
    }
  } else {
    // f'(r) = log 2 - softplus(-s) < log 2, f*(f'(r)) = softplus(s) - log 2
    for (Eigen::Index i = 0; i < s1.size(); ++i) {
      if (c1.weights[i] == 0.0) {
        d1[i] = 0.0;
        continue;
      }
      const double sp = softplus(-s1[i]);
      term1 += c1.weights[i] * (std::numbers::ln2 - sp);
      d1[i] = c1.weights[i] * sigmoid(-s1[i]);
    }
    for (Eigen::Index i = 0; i < s0.size(); ++i) {
      if (c0.weights[i] == 0.0) {
        d0[i] = 0.0;
        continue;
      }
      if (!(softplus(-s0[i]) > 0.0)) domain_violation(spec);  // f'(r) reached log 2
      term0 += c0.weights[i] * (softplus(s0[i]) - std::numbers::ln2);
      d0[i] = c0.weights[i] * sigmoid(s0[i]);
    }
  }
  ObjectiveValue out;
  out.loss = -(term1 / n1 - term0 / n0);
  out.gradient = -(c1.values.transpose() * d1 / n1 - c0.values.transpose() * d0 / n0);
  if (!std::isfinite(out.loss)) domain_violation(spec);
  return out;
}

ObjectiveValue fdiv_objective(const Eigen::VectorXd& theta, const DatasetPair& data, const FeatureMap& fmap,
                              const DivergenceSpec& spec, const WeightingMode& mode) {
  if (static_cast<std::size_t>(theta.size()) != fmap.output_dim())
    throw DomainError("theta length does not match the feature dimension");
  return fdiv_objective(theta, prepare(data, fmap, mode), spec);
}

FitResult fdiv_fit_prepared(const PreparedPair& prepared, const FeatureMap& fmap, const DivergenceSpec& spec,
                            const KliepFitConfig& config) {
  const auto k = static_cast<Eigen::Index>(fmap.output_dim());
  Eigen::VectorXd init = config.theta_init.value_or(Eigen::VectorXd::Zero(k));
  if (init.size() != k) throw DomainError("theta_init length does not match the feature dimension");
  check_feature_variance(prepared.class0);
  // Overflowing trial steps are rejected by the line search rather than
  // aborting the fit.
  const auto objective = [&](const Eigen::VectorXd& th) {
    try {
      return fdiv_objective(th, prepared, spec);
    } catch (const NumericError&) {
      return ObjectiveValue{std::numeric_limits<double>::infinity(), Eigen::VectorXd::Zero(k)};
    }
  };
  const auto first = fdiv_objective(init, prepared, spec);  // errors at the start are real
  (void)first;
  const auto res = minimize(objective, std::move(init), config.optimizer);
  return FitResult{LogLinearRatioModel(fmap, res.argmin), res.converged, res.iterations,
                   res.gradient_norm, res.loss};
}

FitResult fdiv_fit(const DatasetPair& data, const FeatureMap& fmap, const DivergenceSpec& spec,
                   const KliepFitConfig& config) {
  return fdiv_fit_prepared(prepare(data, fmap, config.weighting), fmap, spec, config);
}

}  // namespace mnardre
