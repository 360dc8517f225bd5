#include "mnardre/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

void OptimizerConfig::validate() const {
  if (max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(grad_tol > 0.0)) throw DomainError("grad_tol must be positive");
  if (!(step.initial_step > 0.0)) throw DomainError("initial step must be positive");
  if (!(step.shrink > 0.0 && step.shrink < 1.0)) throw DomainError("step shrink must lie in (0, 1)");
  if (!(step.armijo_c > 0.0 && step.armijo_c < 1.0)) throw DomainError("Armijo constant must lie in (0, 1)");
  if (step.max_backtracks < 1) throw DomainError("max_backtracks must be at least 1");
}

OptimizeResult minimize(const Objective& objective, Eigen::VectorXd init, const OptimizerConfig& config) {
  config.validate();
  OptimizeResult res;
  res.argmin = std::move(init);
  ObjectiveValue cur = objective(res.argmin);
  if (!std::isfinite(cur.loss) || !cur.gradient.allFinite())
    throw NumericError("objective is not finite at the initial point");

  for (int it = 0; it < config.max_iters; ++it) {
    const double gnorm2 = cur.gradient.squaredNorm();
    res.iterations = it;
    if (std::sqrt(gnorm2) <= config.grad_tol) {
      res.converged = true;
      break;
    }
    double t = config.step.initial_step;
    bool accepted = false;
    Eigen::VectorXd trial;
    ObjectiveValue next;
    for (int b = 0; b < config.step.max_backtracks; ++b) {
      trial = res.argmin - t * cur.gradient;
      next = objective(trial);
      if (std::isfinite(next.loss) && next.gradient.allFinite()) {
        // Near the optimum the loss change drops below rounding noise and the
        // Armijo test cannot tell steps apart; fall back to gradient decrease.
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(cur.loss));
        const bool ok = std::abs(next.loss - cur.loss) <= noise
                            ? next.gradient.squaredNorm() < gnorm2
                            : next.loss <= cur.loss - config.step.armijo_c * t * gnorm2;
        if (ok) {
          accepted = true;
          break;
        }
      }
      t *= config.step.shrink;
    }
    if (!accepted) break;  // no descent possible at floating-point resolution
    res.argmin = std::move(trial);
    cur = std::move(next);
    res.iterations = it + 1;
  }
  res.loss = cur.loss;
  res.gradient_norm = cur.gradient.norm();
  if (!res.converged && res.gradient_norm <= config.grad_tol) res.converged = true;
  return res;
}

}  // namespace mnardre
