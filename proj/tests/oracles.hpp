#pragma once

// Reference computations used by the tests. Each one is written without
// calling the library routine it checks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mnardre/core_model.hpp"
#include "mnardre/rng.hpp"

namespace oracle {

// Central differences of a scalar function.
inline Eigen::VectorXd finite_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                       const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a(i) += h;
    b(i) -= h;
    g(i) = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

inline double max_relative_error(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < got.size(); ++i) {
    const double scale = std::max(1.0, std::abs(want(i)));
    worst = std::max(worst, std::abs(got(i) - want(i)) / scale);
  }
  return worst;
}

// Discrete law of Z with a tabulated missingness probability per atom.
struct DiscreteLaw {
  std::vector<double> atoms;
  std::vector<double> probs;
  std::vector<double> phi;  // P(missing | Z = atom)
};

// One outcome of a single draw: atom k, either observed or missing.
struct Outcome {
  std::size_t atom;
  bool missing;
  double prob;
};

inline std::vector<Outcome> outcomes(const DiscreteLaw& law) {
  std::vector<Outcome> out;
  for (std::size_t k = 0; k < law.atoms.size(); ++k) {
    out.push_back({k, false, law.probs[k] * (1.0 - law.phi[k])});
    out.push_back({k, true, law.probs[k] * law.phi[k]});
  }
  return out;
}

// Calls visit(per-draw outcomes, probability) for every sample of size n.
inline void enumerate_samples(const DiscreteLaw& law, std::size_t n,
                              const std::function<void(const std::vector<Outcome>&, double)>& visit) {
  const auto single = outcomes(law);
  std::vector<std::size_t> idx(n, 0);
  std::vector<Outcome> sample(n, single[0]);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      sample[i] = single[idx[i]];
      p *= single[idx[i]].prob;
    }
    visit(sample, p);
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == single.size()) idx[pos++] = 0;
    if (pos == n) break;
  }
}

inline mnardre::MissingnessFunction tabulated(const DiscreteLaw& law) {
  mnardre::TabulatedMissingness t;
  t.declared_sup = 0.0;
  for (double p : law.phi) t.declared_sup = std::max(t.declared_sup, p);
  t.lookup = [law](std::span<const double> z) {
    for (std::size_t k = 0; k < law.atoms.size(); ++k) {
      if (law.atoms[k] == z[0]) return law.phi[k];
    }
    return 0.0;
  };
  return mnardre::MissingnessFunction::joint(t);
}

// Logistic maximum likelihood by Newton's method in long double with an
// explicit 2x2 inverse and no ridge.
struct Logit {
  double b0 = 0.0;
  double b1 = 0.0;
};

inline Logit logistic_mle(const std::vector<double>& z, const std::vector<int>& y) {
  long double b0 = 0, b1 = 0;
  for (int it = 0; it < 200; ++it) {
    long double g0 = 0, g1 = 0, h00 = 0, h01 = 0, h11 = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const long double eta = b0 + b1 * z[i];
      const long double p = 1.0L / (1.0L + std::exp(-eta));
      const long double r = y[i] - p;
      g0 += r;
      g1 += r * z[i];
      const long double w = p * (1.0L - p);
      h00 += w;
      h01 += w * z[i];
      h11 += w * z[i] * z[i];
    }
    const long double det = h00 * h11 - h01 * h01;
    const long double d0 = (h11 * g0 - h01 * g1) / det;
    const long double d1 = (-h01 * g0 + h00 * g1) / det;
    b0 += d0;
    b1 += d1;
    if (std::abs(static_cast<double>(d0)) + std::abs(static_cast<double>(d1)) < 1e-15) break;
  }
  return {static_cast<double>(b0), static_cast<double>(b1)};
}

inline Eigen::MatrixXd normal_rows(mnardre::Rng& rng, std::size_t n, std::size_t d, double shift = 0.0,
                                   double scale = 1.0) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = shift + scale * rng.normal();
  }
  return m;
}

}  // namespace oracle
