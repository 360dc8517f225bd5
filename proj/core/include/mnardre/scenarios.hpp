#pragma once

// Synthetic two-class generators with known densities and known missingness.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"
#include "mnardre/rng.hpp"

namespace mnardre {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Finite Gaussian mixture with exact density, moments and log moment
/// generating function.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<GaussianComponent> components);
  static GaussianMixture single(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t dim() const { return static_cast<std::size_t>(components_.front().mean.size()); }
  const std::vector<GaussianComponent>& components() const { return components_; }

  /// n draws, one per row.
  Eigen::MatrixXd sample(Rng& rng, std::size_t n) const;
  double log_density(std::span<const double> z) const;

  Eigen::VectorXd mean() const;
  Eigen::MatrixXd covariance() const;

  /// log E[exp(theta' Z)] and its gradient.
  double log_mgf(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd log_mgf_gradient(const Eigen::VectorXd& theta) const;

 private:
  struct Factor {
    Eigen::MatrixXd chol;      // lower Cholesky factor
    double log_norm = 0.0;     // log(weight) - d/2 log(2 pi) - 1/2 log det
  };
  std::vector<GaussianComponent> components_;
  std::vector<Factor> factors_;
};

enum class Scenario { Gauss5D, Mixture2D, NaiveBayesRho, DiffVar, VaryMisspec };
enum class MissingnessPreset { Default, PerDimLogistic };

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);
std::string_view preset_name(MissingnessPreset p);
MissingnessPreset parse_preset(std::string_view name);

/// Population description of one scenario instance.
struct ScenarioModel {
  Scenario scenario = Scenario::Gauss5D;
  double rho = 0.0;
  GaussianMixture p0;
  GaussianMixture p1;
  MissingnessFunction phi0;
  MissingnessFunction phi1;

  std::size_t dim() const { return p0.dim(); }
  /// log p1(z) - log p0(z).
  double log_ratio(std::span<const double> z) const;
};

/// Scenario densities with the preset's missingness applied to
/// `corrupted_class`. `rho` is the correlation (NaiveBayesRho) or the mixing
/// weight (VaryMisspec) and is ignored elsewhere. PerDimLogistic needs one
/// orientation per coordinate.
ScenarioModel make_model(Scenario scenario, double rho = 0.0, MissingnessPreset preset = MissingnessPreset::Default,
                         int corrupted_class = 1, std::span<const int> taus = {});

struct ScenarioDraw {
  Eigen::MatrixXd latent0;
  Eigen::MatrixXd latent1;
  DatasetPair latent;
  DatasetPair corrupted;
};

/// n0 / n1 latent draws and their corrupted versions; deterministic per seed.
ScenarioDraw generate(const ScenarioModel& model, std::size_t n0, std::size_t n1, std::uint64_t seed);

/// Maximiser of theta' E1[Z] - log E0[exp(theta' Z)] for the identity
/// feature map, computed from the exact mixture moment generating function.
Eigen::VectorXd population_theta(const ScenarioModel& model);

}  // namespace mnardre
