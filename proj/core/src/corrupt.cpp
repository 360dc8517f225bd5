#include "mnardre/corrupt.hpp"

#include <cmath>
#include <string>

#include "mnardre/diagnostics.hpp"
#include "mnardre/rng.hpp"

namespace mnardre {

namespace {

void check_scope(const MissingnessFunction& phi, std::size_t d) {
  if (phi.scope() == MissingnessFunction::Scope::PerCoordinate && phi.entries().size() != d)
    throw DomainError("missingness has " + std::to_string(phi.entries().size()) + " coordinates, data has " +
                      std::to_string(d));
}

}  // namespace

Dataset corrupt(const Eigen::MatrixXd& rows, int class_label, const MissingnessFunction& phi, std::uint64_t seed) {
  return corrupt(Dataset::from_rows(rows, class_label), phi, seed);
}

Dataset corrupt(const Dataset& data, const MissingnessFunction& phi, std::uint64_t seed) {
  const std::size_t d = data.dim();
  check_scope(phi, d);
  Rng rng(seed);
  std::vector<ObservedPoint> out;
  out.reserve(data.size());
  std::vector<double> z(d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data[i];
    std::vector<ObservedPoint::Coord> coords = p.coords();
    if (phi.scope() == MissingnessFunction::Scope::Joint) {
      const double u = rng.uniform();
      if (phi.is_zero()) {
        out.emplace_back(std::move(coords));
        continue;
      }
      if (!p.fully_observed())
        throw DataError("row " + std::to_string(i + 1) + ": joint missingness needs a fully observed point");
      for (std::size_t j = 0; j < d; ++j) z[j] = *coords[j];
      if (u < phi.joint_probability(z)) out.push_back(ObservedPoint::all_missing(d));
      else out.emplace_back(std::move(coords));
    } else {
      for (std::size_t j = 0; j < d; ++j) {
        const double u = rng.uniform();
        if (coords[j] && u < phi.coordinate_probability(j, *coords[j])) coords[j].reset();
      }
      out.emplace_back(std::move(coords));
    }
  }
  return Dataset(std::move(out), data.label());
}

MissingnessFunction standardized_logistic(std::span<const double> means, std::span<const double> sds,
                                          std::span<const int> taus) {
  if (means.size() != sds.size() || means.size() != taus.size())
    throw DomainError("means, scales and orientations differ in length");
  std::vector<MissingnessEntry> entries;
  for (std::size_t j = 0; j < means.size(); ++j) {
    if (!(sds[j] > 0.0 && std::isfinite(sds[j])))
      throw DomainError("feature " + std::to_string(j) + " has zero or non-finite spread");
    if (taus[j] != 1 && taus[j] != -1) throw DomainError("orientation must be -1 or 1");
    entries.emplace_back(LogisticMissingness{-means[j] / sds[j], 1.0 / sds[j], taus[j]});
  }
  return MissingnessFunction::per_coordinate(std::move(entries));
}

MissingnessFunction standardized_logistic(const Eigen::MatrixXd& rows, std::span<const int> taus) {
  if (rows.rows() < 2) throw DataError("need at least two rows to estimate feature moments");
  const Eigen::VectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean.transpose();
  const Eigen::VectorXd sd =
      (centered.array().square().colwise().sum() / static_cast<double>(rows.rows() - 1)).sqrt().matrix();
  return standardized_logistic(std::span<const double>(mean.data(), static_cast<std::size_t>(mean.size())),
                               std::span<const double>(sd.data(), static_cast<std::size_t>(sd.size())), taus);
}

std::vector<int> random_orientations(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(d);
  for (auto& t : out) t = rng.bernoulli(0.5) ? 1 : -1;
  return out;
}

double expected_missing_fraction(std::span<const double> column, const LogisticMissingness& phi) {
  if (column.empty()) throw DataError("column is empty");
  double s = 0.0;
  for (double z : column) s += evaluate_missingness(phi, std::span<const double>(&z, 1));
  return s / static_cast<double>(column.size());
}

double solve_intercept_for_proportion(std::span<const double> column, double slope, int tau, double target) {
  if (!(target > 0.0 && target < 1.0 - kPhiFloor))
    throw DomainError("target missing proportion " + std::to_string(target) + " is not attainable");
  if (tau != 1 && tau != -1) throw DomainError("orientation must be -1 or 1");
  if (column.empty()) throw DataError("column is empty");
  // the raw (unclamped) mean is monotone in a0: decreasing for tau = 1
  const auto mean_at = [&](double a0) {
    double s = 0.0;
    for (double z : column) {
      const double e = tau * (a0 + slope * z);
      s += e >= 0 ? std::exp(-e) / (1.0 + std::exp(-e)) : 1.0 / (1.0 + std::exp(e));
    }
    return s / static_cast<double>(column.size());
  };
  const auto excess = [&](double a0) { return tau * (mean_at(a0) - target); };  // decreasing in a0
  double lo = -1.0, hi = 1.0;
  for (int k = 0; k < 200 && excess(lo) < 0; ++k) lo *= 2;
  for (int k = 0; k < 200 && excess(hi) > 0; ++k) hi *= 2;
  if (excess(lo) < 0 || excess(hi) > 0) throw NumericError("could not bracket the missingness intercept");
  for (int k = 0; k < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++k) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0 ? lo : hi) = mid;
  }
  const double a0 = 0.5 * (lo + hi);
  const double got = expected_missing_fraction(column, LogisticMissingness{a0, slope, tau});
  if (std::abs(got - target) > 0.005)
    throw NumericError("missing proportion " + std::to_string(target) + " not reached (got " + std::to_string(got) + ")");
  return a0;
}

}  // namespace mnardre
