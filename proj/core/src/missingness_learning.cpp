#include "mnardre/missingness_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mnardre/diagnostics.hpp"
#include "mnardre/rng.hpp"

namespace mnardre {

std::size_t QueryBudgetPlan::for_coordinate(std::size_t j) const {
  if (queries.empty()) return 0;
  if (queries.size() == 1) return queries.front();
  if (j >= queries.size()) throw DomainError("query plan has no entry for coordinate " + std::to_string(j));
  return queries[j];
}

QuerySubsample simulate_query(std::span<const std::optional<double>> column, std::span<const double> latent,
                              std::size_t m_q, std::uint64_t seed) {
  if (column.size() != latent.size()) throw DataError("column and latent values differ in length");
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (!column[i]) missing.push_back(i);
  }
  if (m_q > missing.size())
    throw DomainError("query budget " + std::to_string(m_q) + " exceeds the " + std::to_string(missing.size()) +
                      " missing entries");

  // partial Fisher-Yates over the missing indices
  Rng rng(seed);
  for (std::size_t k = 0; k < m_q; ++k) {
    const std::size_t pick = k + rng.uniform_index(missing.size() - k);
    std::swap(missing[k], missing[pick]);
  }
  std::vector<char> queried(column.size(), 0);
  for (std::size_t k = 0; k < m_q; ++k) queried[missing[k]] = 1;

  QuerySubsample out;
  out.n = column.size();
  out.n_missing = missing.size();
  out.n_queried = m_q;
  for (std::size_t i = 0; i < column.size(); ++i) {
    if (column[i]) {
      out.indices.push_back(i);
      out.values.push_back(*column[i]);
      out.labels.push_back(0);
    } else if (queried[i]) {
      if (!std::isfinite(latent[i])) throw DataError("latent value at row " + std::to_string(i) + " is not finite");
      out.indices.push_back(i);
      out.values.push_back(latent[i]);
      out.labels.push_back(1);
    }
  }
  return out;
}

LogisticFit fit_logistic(std::span<const double> z, std::span<const int> y) {
  if (z.size() != y.size()) throw DataError("logistic regression inputs differ in length");
  if (z.empty()) throw DataError("logistic regression needs data");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw DataError("logistic regression labels must be 0 or 1");
  }
  if (!has0 || !has1) throw DataError("logistic regression needs both label values");

  // In one dimension (quasi-)separation means the label classes do not overlap.
  double lo[2] = {INFINITY, INFINITY}, hi[2] = {-INFINITY, -INFINITY};
  for (std::size_t i = 0; i < z.size(); ++i) {
    lo[y[i]] = std::min(lo[y[i]], z[i]);
    hi[y[i]] = std::max(hi[y[i]], z[i]);
  }
  const bool separable = hi[0] <= lo[1] || hi[1] <= lo[0];

  Eigen::Vector2d beta = Eigen::Vector2d::Zero();
  LogisticFit fit;
  constexpr int kMaxIter = 100;
  constexpr double kTol = 1e-10;
  constexpr double kRidge = 1e-8;
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    Eigen::Matrix2d hess = Eigen::Matrix2d::Zero();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double eta = beta[0] + beta[1] * z[i];
      const double p = eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
      const double r = static_cast<double>(y[i]) - p;
      const double w = p * (1.0 - p);
      grad[0] += r;
      grad[1] += r * z[i];
      hess(0, 0) += w;
      hess(0, 1) += w * z[i];
      hess(1, 1) += w * z[i] * z[i];
    }
    hess(1, 0) = hess(0, 1);
    hess.diagonal().array() += kRidge;
    const Eigen::Vector2d step = hess.ldlt().solve(grad);
    if (!step.allFinite()) throw NumericError("logistic regression Newton step is not finite");
    beta += step;
    fit.iterations = it;
    if (beta.cwiseAbs().maxCoeff() > kLogisticCap) {
      beta = beta.cwiseMax(-kLogisticCap).cwiseMin(kLogisticCap);
      fit.separated = true;
      break;
    }
    if (step.cwiseAbs().maxCoeff() < kTol) {
      fit.converged = true;
      break;
    }
  }
  if (separable) {
    fit.separated = true;
    fit.converged = false;
  }
  fit.intercept = beta[0];
  fit.slope = beta[1];
  return fit;
}

MissingnessEntry AdjustedLogisticFit::phi() const {
  return LogisticMissingness{intercept_corrected, slope, -1};
}

AdjustedLogisticFit fit_adjusted_logistic(const QuerySubsample& s) {
  if (s.n_missing > 0 && s.n_queried == 0)
    throw DomainError("at least one missing entry must be queried");
  if (s.n_queried > s.n_missing) throw DomainError("queried count exceeds missing count");
  const LogisticFit raw = fit_logistic(s.values, s.labels);
  AdjustedLogisticFit out;
  out.intercept_raw = raw.intercept;
  out.slope = raw.slope;
  out.intercept_corrected =
      raw.intercept - std::log(static_cast<double>(s.n_queried) / static_cast<double>(s.n_missing));
  out.n = s.n;
  out.n_missing = s.n_missing;
  out.n_queried = s.n_queried;
  out.iterations = raw.iterations;
  out.converged = raw.converged;
  out.separated = raw.separated;
  if (out.separated) warn("logistic missingness fit hit the coefficient cap (separated data)");
  return out;
}

LearnedMissingness learn_missingness(const Dataset& corrupted, const Eigen::MatrixXd& latent,
                                     const QueryBudgetPlan& plan, std::uint64_t seed) {
  const std::size_t d = corrupted.dim();
  if (static_cast<std::size_t>(latent.rows()) != corrupted.size() || static_cast<std::size_t>(latent.cols()) != d)
    throw DataError("latent matrix does not match the corrupted dataset");
  LearnedMissingness out;
  std::vector<MissingnessEntry> entries;
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<std::optional<double>> column;
    column.reserve(corrupted.size());
    for (const auto& p : corrupted.points()) column.push_back(p[j]);
    const Eigen::VectorXd lat = latent.col(static_cast<Eigen::Index>(j));
    const bool any_missing = std::any_of(column.begin(), column.end(), [](const auto& c) { return !c; });
    if (!any_missing) {
      entries.emplace_back(ZeroMissingness{});
      out.fits.emplace_back(std::nullopt);
      continue;
    }
    const auto sub = simulate_query(column, std::span<const double>(lat.data(), static_cast<std::size_t>(lat.size())),
                                    plan.for_coordinate(j), mix_seed(seed, j));
    const auto fit = fit_adjusted_logistic(sub);
    entries.push_back(fit.phi());
    out.fits.emplace_back(fit);
  }
  out.phi = MissingnessFunction::per_coordinate(std::move(entries));
  return out;
}

}  // namespace mnardre
