#pragma once

#include <functional>

#include <Eigen/Dense>

namespace mnardre {

/// Loss and gradient of a smooth objective at one parameter value.
struct ObjectiveValue {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Armijo backtracking: accept step t when
/// loss(theta - t g) <= loss(theta) - armijo_c * t * |g|^2. When the two
/// losses agree to within rounding, a step is accepted if it shrinks |g|.
struct StepRule {
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo_c = 1e-4;
  int max_backtracks = 60;
};

struct OptimizerConfig {
  int max_iters = 10000;
  double grad_tol = 1e-8;
  StepRule step;

  void validate() const;
};

struct OptimizeResult {
  Eigen::VectorXd argmin;
  double loss = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

/// Deterministic full-batch gradient descent with backtracking line search.
/// Stops at |gradient| <= grad_tol; otherwise returns the best iterate with
/// converged = false.
OptimizeResult minimize(const Objective& objective, Eigen::VectorXd init, const OptimizerConfig& config);

}  // namespace mnardre
