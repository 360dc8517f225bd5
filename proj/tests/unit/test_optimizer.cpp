#include <cmath>

#include "doctest.h"
#include "mnardre/diagnostics.hpp"
#include "mnardre/optimizer.hpp"

using namespace mnardre;

TEST_CASE("gradient descent finds the minimum of a convex quadratic") {
  Eigen::MatrixXd a(2, 2);
  a << 3, 1, 1, 2;
  const Eigen::VectorXd b = Eigen::Vector2d(1, -1);
  const Objective f = [&](const Eigen::VectorXd& x) {
    return ObjectiveValue{0.5 * x.dot(a * x) - b.dot(x), a * x - b};
  };
  const auto r = minimize(f, Eigen::VectorXd::Zero(2), {});
  CHECK(r.converged);
  const Eigen::VectorXd want = a.ldlt().solve(b);
  CHECK((r.argmin - want).norm() < 1e-8);
  CHECK(r.gradient_norm <= 1e-8);
}

TEST_CASE("iteration cap reports non-convergence with the last iterate") {
  const Objective f = [](const Eigen::VectorXd& x) {
    return ObjectiveValue{0.5 * 1e-4 * x.squaredNorm(), 1e-4 * x};
  };
  OptimizerConfig c;
  c.max_iters = 3;
  const auto r = minimize(f, Eigen::VectorXd::Constant(1, 10.0), c);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.argmin(0) < 10.0);
}

TEST_CASE("config validation") {
  OptimizerConfig c;
  c.max_iters = 0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.grad_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = {};
  c.step.shrink = 1.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("non-finite start is a numeric error") {
  const Objective f = [](const Eigen::VectorXd& x) {
    return ObjectiveValue{std::log(x(0)), Eigen::VectorXd::Constant(1, 1.0 / x(0))};
  };
  CHECK_THROWS_AS(minimize(f, Eigen::VectorXd::Constant(1, -1.0), {}), NumericError);
}
