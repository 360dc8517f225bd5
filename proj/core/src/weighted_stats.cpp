#include "mnardre/weighted_stats.hpp"

#include <vector>

#include "mnardre/diagnostics.hpp"

namespace mnardre {
namespace {

template <class F>
double pairwise_sum(std::size_t lo, std::size_t hi, const F& term) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

template <class F>
double ordered_sum(std::size_t n, Summation order, const F& term) {
  if (order == Summation::Pairwise) return pairwise_sum(0, n, term);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += term(i);
  return s;
}

}  // namespace

double importance_weight(const std::optional<double>& x, const MissingnessEntry& phi) {
  if (!x) return 0.0;
  const double z[1] = {*x};
  return 1.0 / (1.0 - evaluate_missingness(phi, z));
}

double point_weight(const ObservedPoint& x, const MissingnessFunction& phi) {
  if (x.fully_observed()) {
    const auto v = x.values();
    return 1.0 / phi.observe_probability(v);
  }
  if (phi.scope() == MissingnessFunction::Scope::Joint && !x.fully_missing() && !phi.is_zero())
    throw DomainError("partially missing point under a joint missingness mechanism");
  return 0.0;
}

Eigen::VectorXd weighted_mean(const WeightedSample& sample, Summation order) {
  const std::size_t n = sample.size();
  if (n == 0) throw DataError("weighted mean of an empty sample");
  if (static_cast<std::size_t>(sample.weights.size()) != n)
    throw DataError("weights and values differ in length");
  Eigen::VectorXd out(sample.values.cols());
  for (Eigen::Index c = 0; c < sample.values.cols(); ++c) {
    out[c] = ordered_sum(n, order, [&](std::size_t i) {
               const auto r = static_cast<Eigen::Index>(i);
               return sample.weights[r] * sample.values(r, c);
             }) /
             static_cast<double>(n);
  }
  return out;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights, Summation order) {
  if (values.empty()) throw DataError("weighted mean of an empty sample");
  if (values.size() != weights.size()) throw DataError("weights and values differ in length");
  return ordered_sum(values.size(), order, [&](std::size_t i) { return weights[i] * values[i]; }) /
         static_cast<double>(values.size());
}

double plain_mean(std::span<const double> values, Summation order) {
  if (values.empty()) throw DataError("mean of an empty sample");
  return ordered_sum(values.size(), order, [&](std::size_t i) { return values[i]; }) /
         static_cast<double>(values.size());
}

}  // namespace mnardre
