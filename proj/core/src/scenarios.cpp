#include "mnardre/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mnardre/corrupt.hpp"
#include "mnardre/diagnostics.hpp"

namespace mnardre {

namespace {

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components) {
  std::erase_if(components, [](const GaussianComponent& c) { return c.weight == 0.0; });
  if (components.empty()) throw DomainError("mixture needs at least one component with positive weight");
  const auto d = components.front().mean.size();
  if (d == 0) throw DomainError("mixture dimension must be positive");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0 && std::isfinite(c.weight))) throw DomainError("mixture weights must be positive");
    if (c.mean.size() != d || c.cov.rows() != d || c.cov.cols() != d)
      throw DomainError("mixture components differ in dimension");
    total += c.weight;
  }
  for (auto& c : components) {
    c.weight /= total;
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    if (llt.info() != Eigen::Success) throw DomainError("mixture covariance is not positive definite");
    Factor f;
    f.chol = llt.matrixL();
    const double log_det = 2.0 * f.chol.diagonal().array().log().sum();
    f.log_norm = std::log(c.weight) - 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) - 0.5 * log_det;
    factors_.push_back(std::move(f));
  }
  components_ = std::move(components);
}

GaussianMixture GaussianMixture::single(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  return GaussianMixture({GaussianComponent{1.0, std::move(mean), std::move(cov)}});
}

Eigen::MatrixXd GaussianMixture::sample(Rng& rng, std::size_t n) const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd e(d);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    std::size_t k = 0;
    if (components_.size() > 1) {
      const double u = rng.uniform();
      double acc = 0.0;
      for (k = 0; k + 1 < components_.size(); ++k) {
        acc += components_[k].weight;
        if (u < acc) break;
      }
    }
    for (Eigen::Index j = 0; j < d; ++j) e[j] = rng.normal();
    out.row(i) = (components_[k].mean + factors_[k].chol * e).transpose();
  }
  return out;
}

double GaussianMixture::log_density(std::span<const double> z) const {
  if (z.size() != dim()) throw DomainError("point dimension does not match the mixture");
  const Eigen::Map<const Eigen::VectorXd> x(z.data(), static_cast<Eigen::Index>(z.size()));
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const Eigen::VectorXd u = factors_[k].chol.triangularView<Eigen::Lower>().solve(x - components_[k].mean);
    terms.push_back(factors_[k].log_norm - 0.5 * u.squaredNorm());
  }
  return log_sum_exp(terms);
}

Eigen::VectorXd GaussianMixture::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim()));
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

Eigen::MatrixXd GaussianMixture::covariance() const {
  const Eigen::VectorXd m = mean();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m.size(), m.size());
  for (const auto& c : components_) {
    const Eigen::VectorXd dm = c.mean - m;
    s += c.weight * (c.cov + dm * dm.transpose());
  }
  return s;
}

double GaussianMixture::log_mgf(const Eigen::VectorXd& theta) const {
  std::vector<double> terms;
  for (const auto& c : components_)
    terms.push_back(std::log(c.weight) + theta.dot(c.mean) + 0.5 * theta.dot(c.cov * theta));
  return log_sum_exp(terms);
}

Eigen::VectorXd GaussianMixture::log_mgf_gradient(const Eigen::VectorXd& theta) const {
  std::vector<double> terms;
  for (const auto& c : components_)
    terms.push_back(std::log(c.weight) + theta.dot(c.mean) + 0.5 * theta.dot(c.cov * theta));
  const double lse = log_sum_exp(terms);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(theta.size());
  for (std::size_t k = 0; k < components_.size(); ++k)
    g += std::exp(terms[k] - lse) * (components_[k].mean + components_[k].cov * theta);
  return g;
}

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Gauss5D: return "gauss5d";
    case Scenario::Mixture2D: return "mixture2d";
    case Scenario::NaiveBayesRho: return "naive-bayes-rho";
    case Scenario::DiffVar: return "diffvar";
    case Scenario::VaryMisspec: return "vary-misspec";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : {Scenario::Gauss5D, Scenario::Mixture2D, Scenario::NaiveBayesRho, Scenario::DiffVar,
                 Scenario::VaryMisspec}) {
    if (scenario_name(s) == name) return s;
  }
  throw DomainError("unknown scenario '" + std::string(name) + "'");
}

std::string_view preset_name(MissingnessPreset p) {
  return p == MissingnessPreset::Default ? "default" : "per-dim-logistic";
}

MissingnessPreset parse_preset(std::string_view name) {
  if (name == "default") return MissingnessPreset::Default;
  if (name == "per-dim-logistic") return MissingnessPreset::PerDimLogistic;
  throw DomainError("unknown missingness preset '" + std::string(name) + "'");
}

double ScenarioModel::log_ratio(std::span<const double> z) const { return p1.log_density(z) - p0.log_density(z); }

ScenarioModel make_model(Scenario scenario, double rho, MissingnessPreset preset, int corrupted_class,
                         std::span<const int> taus) {
  if (corrupted_class != 0 && corrupted_class != 1) throw DomainError("corrupted class must be 0 or 1");
  using Eigen::MatrixXd;
  using Eigen::Vector2d;
  using Eigen::VectorXd;
  const auto halfspace = [](std::vector<double> a, double level, double p) {
    return MissingnessEntry(HalfspaceMissingness{std::move(a), level, p});
  };
  const MatrixXd I2 = MatrixXd::Identity(2, 2);

  std::optional<GaussianMixture> p0, p1;
  MissingnessFunction mech;
  switch (scenario) {
    case Scenario::Gauss5D:
      p0 = GaussianMixture::single(VectorXd::Zero(5), MatrixXd::Identity(5, 5));
      p1 = GaussianMixture::single(VectorXd::Constant(5, 0.1), MatrixXd::Identity(5, 5));
      mech = MissingnessFunction::joint(halfspace(std::vector<double>(5, 1.0), 0.0, 0.5));
      break;
    case Scenario::Mixture2D:
      p1 = GaussianMixture({{0.5, Vector2d(0, 0), I2}, {0.5, Vector2d(-1, 4), I2}});
      p0 = GaussianMixture({{0.5, Vector2d(1, 0), I2}, {0.5, Vector2d(0, 4), I2}});
      mech = MissingnessFunction::joint(halfspace({0.0, 1.0}, 2.0, 0.9));
      break;
    case Scenario::NaiveBayesRho: {
      if (!(rho > -1.0 && rho < 1.0)) throw DomainError("correlation rho must lie in (-1, 1)");
      MatrixXd s(2, 2);
      s << 1, rho, rho, 1;
      p1 = GaussianMixture::single(Vector2d(0, 0), s);
      p0 = GaussianMixture::single(Vector2d(1, 2), s);
      mech = MissingnessFunction::per_coordinate({halfspace({1.0}, 0.0, 0.8), halfspace({-1.0}, 0.0, 0.8)});
      break;
    }
    case Scenario::DiffVar: {
      MatrixXd s0(2, 2);
      s0 << 1, 0, 0, 2;
      p1 = GaussianMixture::single(Vector2d(0, 0), I2);
      p0 = GaussianMixture::single(Vector2d(1, 1), s0);
      mech = MissingnessFunction::joint(halfspace({1.0, 0.0}, 0.0, 0.8));
      break;
    }
    case Scenario::VaryMisspec:
      if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("mixing weight rho must lie in [0, 1]");
      p1 = GaussianMixture({{1.0 - rho, Vector2d(0, 0), I2}, {rho, Vector2d(2, 0), I2}});
      p0 = GaussianMixture::single(Vector2d(1, 0), I2);
      mech = MissingnessFunction::joint(halfspace({1.0, 0.0}, 0.0, 0.8));
      break;
  }

  if (preset == MissingnessPreset::PerDimLogistic) {
    const GaussianMixture& target = corrupted_class == 1 ? *p1 : *p0;
    if (taus.size() != target.dim()) throw DomainError("per-dim-logistic needs one orientation per coordinate");
    const VectorXd m = target.mean();
    const VectorXd sd = target.covariance().diagonal().array().sqrt();
    mech = standardized_logistic(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())),
                                 std::span<const double>(sd.data(), static_cast<std::size_t>(sd.size())), taus);
  }

  ScenarioModel model{scenario, rho, std::move(*p0), std::move(*p1), {}, {}};
  (corrupted_class == 1 ? model.phi1 : model.phi0) = std::move(mech);
  return model;
}

ScenarioDraw generate(const ScenarioModel& model, std::size_t n0, std::size_t n1, std::uint64_t seed) {
  if (n0 == 0 || n1 == 0) throw DomainError("sample sizes must be positive");
  Rng r0 = Rng::derive(seed, {0});
  Rng r1 = Rng::derive(seed, {1});
  Eigen::MatrixXd l0 = model.p0.sample(r0, n0);
  Eigen::MatrixXd l1 = model.p1.sample(r1, n1);
  DatasetPair latent{Dataset::from_rows(l0, 0), Dataset::from_rows(l1, 1)};
  DatasetPair corrupted{corrupt(latent.class0, model.phi0, mix_seed(seed, 2)),
                        corrupt(latent.class1, model.phi1, mix_seed(seed, 3))};
  return {std::move(l0), std::move(l1), std::move(latent), std::move(corrupted)};
}

Eigen::VectorXd population_theta(const ScenarioModel& model) {
  // Newton with backtracking on L(theta) = log M0(theta) - theta' mu1 (convex).
  const Eigen::VectorXd mu1 = model.p1.mean();
  const auto loss = [&](const Eigen::VectorXd& t) { return model.p0.log_mgf(t) - t.dot(mu1); };
  const auto hessian = [&](const Eigen::VectorXd& t) {
    const Eigen::VectorXd g = model.p0.log_mgf_gradient(t);
    std::vector<double> terms;
    for (const auto& c : model.p0.components())
      terms.push_back(std::log(c.weight) + t.dot(c.mean) + 0.5 * t.dot(c.cov * t));
    const double lse = log_sum_exp(terms);
    Eigen::MatrixXd h = -g * g.transpose();
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const auto& c = model.p0.components()[k];
      const Eigen::VectorXd m = c.mean + c.cov * t;
      h += std::exp(terms[k] - lse) * (c.cov + m * m.transpose());
    }
    return h;
  };
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dim()));
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd grad = model.p0.log_mgf_gradient(theta) - mu1;
    if (grad.norm() < 1e-13) return theta;
    const Eigen::VectorXd step = hessian(theta).ldlt().solve(grad);
    double t = 1.0;
    const double l0 = loss(theta);
    while (t > 1e-12 && !(loss(theta - t * step) <= l0 - 1e-4 * t * grad.dot(step))) t *= 0.5;
    if (t <= 1e-12) break;
    theta -= t * step;
  }
  const Eigen::VectorXd grad = model.p0.log_mgf_gradient(theta) - mu1;
  if (grad.norm() > 1e-9) throw NumericError("population parameter search did not converge");
  return theta;
}

}  // namespace mnardre
