#include "mnardre/np_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mnardre/diagnostics.hpp"
#include "mnardre/weighted_stats.hpp"

namespace mnardre {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
}

}  // namespace

double delta_margin(double m_eff0, double delta, double constant) {
  if (!(m_eff0 > 0.0)) throw DomainError("effective sample size must be positive");
  if (!(delta > 0.0 && delta <= 0.5)) throw DomainError("delta must lie in (0, 1/2]");
  if (!(constant > 0.0)) throw DomainError("margin constant must be positive");
  return std::sqrt(constant * std::log(1.0 / delta) / m_eff0);
}

ThresholdResult threshold_missing(std::span<const double> scores, std::span<const double> weights,
                                  double alpha, double margin) {
  check_alpha(alpha);
  if (!(margin >= 0.0 && std::isfinite(margin))) throw DomainError("margin must be finite and non-negative");
  if (scores.size() != weights.size()) throw DataError("scores and weights differ in length");
  if (scores.empty()) throw DataError("calibration sample is empty");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw DataError("calibration score is NaN");
    if (!(weights[i] >= 0.0 && std::isfinite(weights[i]))) throw DataError("calibration weight must be finite and >= 0");
  }
  const std::size_t n0 = scores.size();
  std::vector<std::size_t> order(n0);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return weights[a] < weights[b];
  });

  // tail[i] = sum_{j >= i} w_(j), 0-based
  std::vector<double> tail(n0 + 1, 0.0);
  for (std::size_t k = n0; k-- > 0;) tail[k] = tail[k + 1] + weights[order[k]];

  ThresholdResult res;
  res.margin = margin;
  res.calibration_size = n0;
  const double target = alpha - margin;
  const auto dn = static_cast<double>(n0);
  for (std::size_t k = 0; k < n0; ++k) {
    if (tail[k] / dn <= target) {
      res.index = k + 1;
      res.threshold = scores[order[k]];
      break;
    }
  }
  if (res.index == 0) {
    res.degenerate = true;
    res.threshold = kInf;
    return res;
  }
  if (res.threshold == -kInf) {
    const bool none_observed = std::all_of(weights.begin(), weights.end(), [](double w) { return w == 0.0; });
    res.all_missing = none_observed;
    warn(none_observed ? "every calibration point is missing; threshold is -inf and the classifier labels "
                         "every point 1"
                       : "calibration threshold is -inf; the classifier labels every point 1");
  }
  return res;
}

ThresholdResult threshold_missing(std::span<const double> scores, std::span<const double> weights,
                                  double alpha, double delta, double m_eff0, double margin_constant) {
  const double margin = delta_margin(m_eff0, delta, margin_constant);
  ThresholdResult res = threshold_missing(scores, weights, alpha, margin);
  res.non_paper = margin_constant != kMarginConstant;
  return res;
}

double binomial_upper_tail(std::size_t n, double p, std::size_t i) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binomial probability must lie in [0, 1]");
  if (i == 0) return 1.0;
  if (i > n) return 0.0;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  // log pmf by recursion from k = n downwards; the upper tail is summed from
  // its smallest terms.
  const double log_odds = std::log((1.0 - p) / p);
  double lp = static_cast<double>(n) * std::log(p);  // log P(W = n)
  double tail = 0.0;
  for (std::size_t k = n;; --k) {
    tail += std::exp(lp);
    if (k == i) break;
    // P(W = k-1) / P(W = k) = k / (n - k + 1) * (1 - p) / p
    lp += std::log(static_cast<double>(k)) - std::log(static_cast<double>(n - k + 1)) + log_odds;
  }
  return std::min(tail, 1.0);
}

std::optional<std::size_t> binomial_order_index(std::size_t n0, double alpha, double delta) {
  check_alpha(alpha);
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (n0 == 0) throw DataError("calibration sample is empty");
  const double p = 1.0 - alpha;
  const double log_odds = std::log((1.0 - p) / p);
  // tails[k] = P(W >= k) for k = n0..1, built from the top.
  std::vector<double> tails(n0 + 2, 0.0);
  double lp = static_cast<double>(n0) * std::log(p);
  for (std::size_t k = n0; k >= 1; --k) {
    tails[k] = tails[k + 1] + std::exp(lp);
    lp += std::log(static_cast<double>(k)) - std::log(static_cast<double>(n0 - k + 1)) + log_odds;
  }
  for (std::size_t i = 1; i <= n0; ++i) {
    if (tails[i] <= delta) return i;
  }
  return std::nullopt;
}

ThresholdResult threshold_binomial(std::span<const double> scores, double alpha, double delta) {
  if (scores.empty()) throw DataError("calibration sample is empty");
  for (double s : scores) {
    if (std::isnan(s)) throw DataError("calibration score is NaN");
  }
  ThresholdResult res;
  res.calibration_size = scores.size();
  const auto idx = binomial_order_index(scores.size(), alpha, delta);
  if (!idx) {
    res.degenerate = true;
    res.threshold = kInf;
    return res;
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(*idx - 1), sorted.end());
  res.index = *idx;
  res.threshold = sorted[*idx - 1];
  return res;
}

// ---------------------------------------------------------------------------

RatioScorer RatioScorer::analytic(Analytic log_ratio, std::string name) {
  if (!log_ratio) throw DomainError("analytic scorer needs a callable");
  return RatioScorer(Source(AnalyticSource{std::move(log_ratio), std::move(name)}));
}

double RatioScorer::log_ratio(std::span<const double> z) const {
  if (const auto* m = std::get_if<LogLinearRatioModel>(&source_)) {
    double s = m->linear_score(z);
    if (m->normalizer()) s -= std::log(*m->normalizer());
    return s;
  }
  if (const auto* nb = std::get_if<NaiveBayesRatioModel>(&source_)) return nb->log_ratio(z);
  return std::get<AnalyticSource>(source_).log_ratio(z);
}

std::size_t RatioScorer::input_dim() const {
  if (const auto* m = std::get_if<LogLinearRatioModel>(&source_)) return m->input_dim();
  if (const auto* nb = std::get_if<NaiveBayesRatioModel>(&source_)) return nb->dim();
  return 0;  // unknown for analytic scorers
}

double apply_transform(ScoreTransform g, double log_ratio) {
  return g == ScoreTransform::Log ? log_ratio : std::exp(log_ratio);
}

NpClassifier::NpClassifier(RatioScorer scorer, ScoreTransform transform, ThresholdResult threshold,
                           double alpha, double delta, ThresholdMethod method)
    : scorer_(std::move(scorer)),
      transform_(transform),
      threshold_(threshold),
      alpha_(alpha),
      delta_(delta),
      method_(method) {
  check_alpha(alpha_);
  if (!(delta_ > 0.0 && delta_ < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (std::isnan(threshold_.threshold)) throw DomainError("threshold is NaN");
}

double NpClassifier::score(std::span<const double> z) const {
  return apply_transform(transform_, scorer_.log_ratio(z));
}

int NpClassifier::classify(std::span<const double> z) const {
  if (threshold_.threshold == kInf) return 0;
  if (threshold_.threshold == -kInf) return 1;
  return score(z) > threshold_.threshold ? 1 : 0;
}

int NpClassifier::classify(const ObservedPoint& z) const {
  if (!z.fully_observed()) throw DomainError("classification requires a fully observed point");
  const auto v = z.values();
  return classify(std::span<const double>(v));
}

std::vector<double> calibration_scores(const RatioScorer& scorer, ScoreTransform g, const Dataset& calib) {
  std::vector<double> out;
  out.reserve(calib.size());
  for (const auto& p : calib.points()) {
    if (!p.fully_observed()) {
      out.push_back(-kInf);
      continue;
    }
    const auto v = p.values();
    out.push_back(apply_transform(g, scorer.log_ratio(v)));
  }
  return out;
}

NpClassifier calibrate(const RatioScorer& scorer, const Dataset& calib0, const MissingnessFunction& phi0,
                       const CalibrationConfig& config) {
  if (calib0.label() != 0) warn("calibration sample is not labelled class 0");
  const auto scores = calibration_scores(scorer, config.transform, calib0);
  ThresholdResult thr;
  if (config.method == ThresholdMethod::Binomial) {
    if (calib0.has_missing())
      throw DataError("binomial threshold rule needs a fully observed calibration sample");
    thr = threshold_binomial(scores, config.alpha, config.delta);
  } else {
    std::vector<double> weights;
    weights.reserve(calib0.size());
    for (const auto& p : calib0.points()) weights.push_back(point_weight(p, phi0));
    const double sup = config.phi0_sup.value_or(phi0.sup_norm());
    const double m_eff0 = effective_sample_size(static_cast<double>(calib0.size()), sup);
    if (config.margin_override) {
      thr = threshold_missing(scores, weights, config.alpha, *config.margin_override);
      thr.non_paper = true;
    } else {
      thr = threshold_missing(scores, weights, config.alpha, config.delta, m_eff0, config.margin_constant);
    }
  }
  return NpClassifier(scorer, config.transform, thr, config.alpha, config.delta, config.method);
}

double positive_rate(const NpClassifier& clf, const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw DataError("test set is empty");
  const auto d = static_cast<std::size_t>(rows.cols());
  std::vector<double> buf(d);
  std::size_t positives = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) buf[j] = rows(i, static_cast<Eigen::Index>(j));
    positives += static_cast<std::size_t>(clf.classify(std::span<const double>(buf)));
  }
  return static_cast<double>(positives) / static_cast<double>(rows.rows());
}

ErrorEstimate estimate_errors(const NpClassifier& clf, const Dataset& test0, const Dataset& test1) {
  const auto rate = [&](const Dataset& test) {
    if (test.size() == 0) throw DataError("test set is empty");
    std::size_t positives = 0;
    for (const auto& p : test.points()) positives += static_cast<std::size_t>(clf.classify(p));
    return static_cast<double>(positives) / static_cast<double>(test.size());
  };
  return {rate(test0), rate(test1)};
}

}  // namespace mnardre
