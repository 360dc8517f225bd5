#include "mnardre/naive_bayes.hpp"

#include <cmath>
#include <string>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

NaiveBayesRatioModel::NaiveBayesRatioModel(std::vector<LogLinearRatioModel> per_dim)
    : per_dim_(std::move(per_dim)) {
  if (per_dim_.empty()) throw DomainError("naive-Bayes model needs at least one dimension");
  for (const auto& m : per_dim_) {
    if (m.input_dim() != 1) throw DomainError("naive-Bayes sub-models must be one-dimensional");
  }
}

double NaiveBayesRatioModel::log_ratio(std::span<const double> z) const {
  if (z.size() != per_dim_.size()) throw DomainError("point dimension does not match the naive-Bayes model");
  double s = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    s += per_dim_[j].linear_score(z.subspan(j, 1));
    if (per_dim_[j].normalizer()) s -= std::log(*per_dim_[j].normalizer());
  }
  return s;
}

double NaiveBayesRatioModel::evaluate_log_ratio(const ObservedPoint& z) const {
  if (!z.fully_observed()) throw DomainError("naive-Bayes evaluation requires full observation");
  const auto v = z.values();
  return log_ratio(v);
}

bool NaiveBayesFitResult::converged() const {
  for (const auto& r : per_dim) {
    if (!r.converged) return false;
  }
  return true;
}

WeightingMode project_mode(const WeightingMode& mode, std::size_t j) {
  if (mode.kind != WeightingKind::Mnar) return {mode.kind, {}, {}};
  return WeightingMode::mnar(mode.phi0.coordinate(j), mode.phi1.coordinate(j));
}

NaiveBayesFitResult fit_naive_bayes(const DatasetPair& data, const FeatureMap& fmap_1d,
                                    const KliepFitConfig& config) {
  if (fmap_1d.input_dim() != 1) throw DomainError("naive-Bayes needs a one-dimensional feature map");
  if (data.class0.dim() != data.class1.dim()) throw DataError("class datasets differ in dimension");
  const std::size_t d = data.class0.dim();
  std::vector<LogLinearRatioModel> models;
  std::vector<FitResult> fits;
  models.reserve(d);
  fits.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    const std::string tag = "dimension " + std::to_string(j) + ": ";
    try {
      DatasetPair proj{data.class0.project(j), data.class1.project(j)};
      KliepFitConfig cfg = config;
      cfg.weighting = project_mode(config.weighting, j);
      if (config.theta_init) cfg.theta_init.reset();
      FitResult r = fit(proj, fmap_1d, cfg);
      try {
        r.model = r.model.with_normalizer(normalizing_constant(r.model, proj.class0, cfg.weighting));
      } catch (const NumericError& e) {
        warn(tag + e.what() + "; normalizer left unset");
      }
      models.push_back(r.model);
      fits.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError(tag + e.what());
    } catch (const DomainError& e) {
      throw DomainError(tag + e.what());
    } catch (const NumericError& e) {
      throw NumericError(tag + e.what());
    }
  }
  return {NaiveBayesRatioModel(std::move(models)), std::move(fits)};
}

}  // namespace mnardre
