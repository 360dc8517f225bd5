#include "rwe.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "mnardre/corrupt.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/missingness_learning.hpp"
#include "mnardre/naive_bayes.hpp"
#include "mnardre/preprocess.hpp"
#include "mnardre/rng.hpp"

namespace mnardre::cli {

namespace {

constexpr Estimator kReported[] = {Estimator::MKliepLearnedPhi, Estimator::MKliep, Estimator::CcKliep,
                                   Estimator::KliepOracleData};

std::vector<std::size_t> shuffled(std::vector<std::size_t> v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
  return v;
}

Eigen::MatrixXd to_matrix(const Dataset& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.dim()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto v = d[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }
  return m;
}

}  // namespace

void RealDataSpec::validate(const LabeledData& data) const {
  if (train0 == 0 || train1 == 0 || calib0 == 0 || test1 == 0)
    throw DomainError("train0, train1, calib0, test1: split sizes must be positive");
  if (data.labels.empty()) throw DataError("real-data experiment needs a label column");
  if (train0 + calib0 > data.count(0))
    throw DomainError("train0 + calib0 exceeds the " + std::to_string(data.count(0)) + " class-0 rows");
  if (train1 + test1 > data.count(1))
    throw DomainError("train1 + test1 exceeds the " + std::to_string(data.count(1)) + " class-1 rows");
  if (reps == 0) throw DomainError("reps: must be positive");
  if (queries == 0) throw DomainError("queries: must be positive");
  if (corrupted_class != 0 && corrupted_class != 1) throw DomainError("corrupted-class: must be 0 or 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha: must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta: must lie in (0, 1)");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci-level: must lie in (0, 1)");
}

std::string RealDataSpec::canonical() const {
  std::ostringstream s;
  s << "preset=paper-rwe;train0=" << train0 << ";train1=" << train1 << ";calib0=" << calib0 << ";test1=" << test1
    << ";reps=" << reps << ";seed=" << seed << ";queries=" << queries << ";corrupted_class=" << corrupted_class
    << ";alpha=" << format_double(alpha) << ";delta=" << format_double(delta)
    << ";ci_level=" << format_double(ci_level);
  return s.str();
}

PowerResult run_real_data_experiment(const LabeledData& data, const RealDataSpec& spec) {
  spec.validate(data);
  std::vector<std::size_t> rows0, rows1;
  for (std::size_t i = 0; i < data.size(); ++i) (data.labels[i] == 0 ? rows0 : rows1).push_back(i);
  const std::size_t k = std::size(kReported);
  PowerResult result;
  result.replicates.resize(spec.reps * k);

  for (std::size_t rep = 0; rep < spec.reps; ++rep) {
    const std::uint64_t rs = mix_seed(spec.seed, rep);
    Rng rng(mix_seed(rs, 0));
    const auto s0 = shuffled(rows0, rng);
    const auto s1 = shuffled(rows1, rng);
    std::vector<std::size_t> train_rows(s0.begin(), s0.begin() + static_cast<std::ptrdiff_t>(spec.train0));
    train_rows.insert(train_rows.end(), s1.begin(), s1.begin() + static_cast<std::ptrdiff_t>(spec.train1));
    const std::vector<std::size_t> calib_rows(s0.begin() + static_cast<std::ptrdiff_t>(spec.train0),
                                              s0.begin() + static_cast<std::ptrdiff_t>(spec.train0 + spec.calib0));
    const std::vector<std::size_t> test_rows(s1.begin() + static_cast<std::ptrdiff_t>(spec.train1),
                                             s1.begin() + static_cast<std::ptrdiff_t>(spec.train1 + spec.test1));

    for (std::size_t e = 0; e < k; ++e) {
      auto& r = result.replicates[rep * k + e];
      r.n = spec.train0 + spec.train1;
      r.rep = rep;
      r.estimator = kReported[e];
      r.failed = true;
      r.power = r.type1 = r.threshold = std::numeric_limits<double>::quiet_NaN();
    }
    try {
      const auto record = fit_preprocess(data.subset(train_rows), {true, true, {}});
      const LabeledData train = record.apply(data.subset(train_rows));
      const Dataset calib = record.apply(data.subset(calib_rows)).as_dataset(0);
      const Dataset test = record.apply(data.subset(test_rows)).as_dataset(1);
      const DatasetPair latent = train.pair();
      const Dataset& target = spec.corrupted_class == 1 ? latent.class1 : latent.class0;
      const Eigen::MatrixXd target_rows = to_matrix(target);
      const auto taus = random_orientations(target.dim(), mix_seed(rs, 1));
      const MissingnessFunction phi = standardized_logistic(target_rows, taus);
      const Dataset corrupted_target = corrupt(target, phi, mix_seed(rs, 2));
      const DatasetPair corrupted = spec.corrupted_class == 1 ? DatasetPair{latent.class0, corrupted_target}
                                                              : DatasetPair{corrupted_target, latent.class1};
      const auto learned = learn_missingness(corrupted_target, target_rows, QueryBudgetPlan::uniform(spec.queries),
                                             mix_seed(rs, 3));
      const auto mode_with = [&](const MissingnessFunction& f) {
        return spec.corrupted_class == 1 ? WeightingMode::mnar({}, f) : WeightingMode::mnar(f, {});
      };
      CalibrationConfig cc;
      cc.alpha = spec.alpha;
      cc.delta = spec.delta;
      cc.method = ThresholdMethod::Binomial;  // the calibration split is never corrupted
      const FeatureMap f1 = FeatureMap::identity(1);

      for (std::size_t e = 0; e < k; ++e) {
        auto& r = result.replicates[rep * k + e];
        KliepFitConfig config;
        const DatasetPair* fit_data = &corrupted;
        switch (kReported[e]) {
          case Estimator::MKliepLearnedPhi: config.weighting = mode_with(learned.phi); break;
          case Estimator::MKliep: config.weighting = mode_with(phi); break;
          case Estimator::CcKliep: config.weighting = WeightingMode::complete_case(); break;
          default:
            config.weighting = WeightingMode::fully_observed();
            fit_data = &latent;
            break;
        }
        try {
          auto fitted = fit_naive_bayes(*fit_data, f1, config);
          r.converged = fitted.converged();
          const NpClassifier clf = calibrate(RatioScorer(std::move(fitted.model)), calib, {}, cc);
          r.threshold = clf.threshold();
          r.degenerate = clf.threshold_info().degenerate;
          std::size_t pos = 0;
          for (const auto& p : test.points()) pos += static_cast<std::size_t>(clf.classify(p));
          r.power = static_cast<double>(pos) / static_cast<double>(test.size());
          r.failed = false;
        } catch (const Error& err) {
          warn("iteration " + std::to_string(rep) + ", " + std::string(estimator_name(kReported[e])) + ": " + err.what());
        }
      }
    } catch (const Error& err) {
      warn("iteration " + std::to_string(rep) + ": " + err.what());
    }
  }

  for (std::size_t e = 0; e < k; ++e) {
    PowerRow row;
    row.n = spec.train0 + spec.train1;
    row.estimator = kReported[e];
    std::vector<double> power;
    for (std::size_t rep = 0; rep < spec.reps; ++rep) {
      const auto& r = result.replicates[rep * k + e];
      if (r.failed) {
        ++row.failures;
        continue;
      }
      if (!r.converged) ++row.not_converged;
      if (r.degenerate) ++row.degenerate;
      power.push_back(r.power);
    }
    const auto s = mean_interval(power, spec.ci_level);
    row.mean_power = s.mean;
    row.ci_half_width = s.ci_half_width;
    row.completed = power.size();
    row.mean_type1 = std::numeric_limits<double>::quiet_NaN();  // no class-0 test split
    row.type1_violation_rate = std::numeric_limits<double>::quiet_NaN();
    result.rows.push_back(row);
  }
  return result;
}

}  // namespace mnardre::cli
