#pragma once

// Replicated synthetic experiments: parameter recovery (mean squared
// distance to the population parameter) and Neyman-Pearson power.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mnardre/np_classifier.hpp"
#include "mnardre/optimizer.hpp"
#include "mnardre/scenarios.hpp"

namespace mnardre {

enum class Estimator { MKliep, CcKliep, KliepOracleData, TrueRatio, MKliepLearnedPhi };

std::string_view estimator_name(Estimator e);
Estimator parse_estimator(std::string_view name);

enum class Features { Identity, IdentityPlusSquares };

struct ScenarioSpec {
  Scenario scenario = Scenario::Gauss5D;
  std::vector<std::size_t> sizes{100};  // n per class
  std::vector<double> rhos{0.0};        // NaiveBayesRho / VaryMisspec only
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::vector<Estimator> estimators{Estimator::MKliep, Estimator::CcKliep};
  int corrupted_class = 1;
  MissingnessPreset missingness = MissingnessPreset::Default;
  std::size_t queries = 10;  // per coordinate, MKliepLearnedPhi only
  bool naive_bayes = false;
  Features features = Features::Identity;
  OptimizerConfig optimizer;

  // power experiments
  double alpha = 0.1;
  double delta = 0.1;
  std::optional<std::size_t> calibration_size;  // defaults to n
  std::size_t test_draws = 100000;
  std::optional<ThresholdMethod> calibration_method;  // chosen from phi0 when unset

  double ci_level = 0.99;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const;
  /// Stable textual form of every field that affects results (threads excluded).
  std::string canonical() const;
};

/// Defaults matching the scenario's reference study.
ScenarioSpec default_spec(Scenario scenario);

struct MsdReplicate {
  std::size_t n = 0;
  std::size_t rep = 0;
  Estimator estimator = Estimator::MKliep;
  double sq_distance = 0.0;
  bool converged = false;
  bool failed = false;
};

struct MsdRow {
  std::size_t n = 0;
  Estimator estimator = Estimator::MKliep;
  double msd = 0.0;
  double ci_half_width = 0.0;
  double median_distance = 0.0;
  double m_eff = 0.0;
  std::size_t completed = 0;
  std::size_t failures = 0;
  std::size_t not_converged = 0;
};

struct MsdResult {
  Eigen::VectorXd theta_tilde;
  std::vector<MsdRow> rows;
  std::vector<MsdReplicate> replicates;
};

MsdResult run_msd_experiment(const ScenarioSpec& spec);

struct PowerReplicate {
  std::size_t n = 0;
  double rho = 0.0;
  std::size_t rep = 0;
  Estimator estimator = Estimator::MKliep;
  double power = 0.0;
  double type1 = 0.0;
  double threshold = 0.0;
  bool degenerate = false;
  bool converged = false;
  bool failed = false;
};

struct PowerRow {
  std::size_t n = 0;
  double rho = 0.0;
  Estimator estimator = Estimator::MKliep;
  double mean_power = 0.0;
  double ci_half_width = 0.0;
  double mean_type1 = 0.0;
  double type1_violation_rate = 0.0;
  std::size_t completed = 0;
  std::size_t failures = 0;
  std::size_t not_converged = 0;
  std::size_t degenerate = 0;
};

struct PowerResult {
  std::vector<PowerRow> rows;
  std::vector<PowerReplicate> replicates;
};

PowerResult run_power_experiment(const ScenarioSpec& spec);

struct DifferenceSummary {
  double mean = 0.0;
  double ci_half_width = 0.0;
  std::size_t count = 0;

  double lower() const { return mean - ci_half_width; }
  double upper() const { return mean + ci_half_width; }
};

/// Mean of power(a) - power(b) over replications where both succeeded, with a
/// normal-approximation interval at `level`.
DifferenceSummary paired_power_difference(const PowerResult& result, std::size_t n, double rho, Estimator a,
                                          Estimator b, double level);

/// Two-sided standard normal quantile for a central interval of `level`.
double normal_critical_value(double level);

/// Mean and normal-approximation half width.
DifferenceSummary mean_interval(const std::vector<double>& values, double level);

void write_msd_csv(std::ostream& out, const MsdResult& result, const ScenarioSpec& spec);
void write_power_csv(std::ostream& out, const PowerResult& result, const ScenarioSpec& spec);
void write_power_replicates_csv(std::ostream& out, const PowerResult& result, const ScenarioSpec& spec);

/// One training draw at spec.sizes.front(): the points with their missing
/// marks, and the decisions of every estimator's classifier on a regular
/// grid, in long format.
void write_boundary_plot_data(std::ostream& out, const ScenarioSpec& spec, std::size_t grid = 60);

}  // namespace mnardre
