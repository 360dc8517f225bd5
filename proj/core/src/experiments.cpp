#include "mnardre/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "mnardre/corrupt.hpp"
#include "mnardre/csv_io.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/kliep.hpp"
#include "mnardre/missingness_learning.hpp"
#include "mnardre/naive_bayes.hpp"
#include "mnardre/serialization.hpp"

namespace mnardre {

namespace {

constexpr Estimator kAllEstimators[] = {Estimator::MKliep, Estimator::CcKliep, Estimator::KliepOracleData,
                                         Estimator::TrueRatio, Estimator::MKliepLearnedPhi};

template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next.store(count);
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::uint64_t replication_seed(std::uint64_t seed, std::size_t n, double rho, std::size_t rep) {
  return mix_seed(mix_seed(mix_seed(seed, n), std::bit_cast<std::uint64_t>(rho)), rep);
}

bool mechanism_is_per_coordinate(const ScenarioSpec& spec) {
  return spec.missingness == MissingnessPreset::PerDimLogistic || spec.scenario == Scenario::NaiveBayesRho;
}

FeatureMap feature_map(Features f, std::size_t d) {
  return f == Features::Identity ? FeatureMap::identity(d) : FeatureMap::identity_plus_squares(d);
}

std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

struct Fitted {
  std::optional<RatioScorer> scorer;
  Eigen::VectorXd theta;
  bool converged = true;
};

ScenarioModel model_for(const ScenarioSpec& spec, double rho, std::uint64_t rep_seed) {
  std::vector<int> taus;
  if (spec.missingness == MissingnessPreset::PerDimLogistic) {
    const std::size_t d = make_model(spec.scenario, rho).dim();
    taus = random_orientations(d, mix_seed(rep_seed, 11));
  }
  return make_model(spec.scenario, rho, spec.missingness, spec.corrupted_class, taus);
}

Fitted fit_estimator(Estimator e, const ScenarioModel& model, const ScenarioDraw& draw, const ScenarioSpec& spec,
                     std::uint64_t rep_seed) {
  Fitted out;
  if (e == Estimator::TrueRatio) {
    out.scorer = RatioScorer::analytic([model](std::span<const double> z) { return model.log_ratio(z); },
                                       "true-ratio");
    return out;
  }
  KliepFitConfig config;
  config.optimizer = spec.optimizer;
  const DatasetPair* data = &draw.corrupted;
  switch (e) {
    case Estimator::MKliep:
      config.weighting = WeightingMode::mnar(model.phi0, model.phi1);
      break;
    case Estimator::CcKliep:
      config.weighting = WeightingMode::complete_case();
      break;
    case Estimator::KliepOracleData:
      config.weighting = WeightingMode::fully_observed();
      data = &draw.latent;
      break;
    case Estimator::MKliepLearnedPhi: {
      const bool c1 = spec.corrupted_class == 1;
      const auto learned = learn_missingness(c1 ? draw.corrupted.class1 : draw.corrupted.class0,
                                             c1 ? draw.latent1 : draw.latent0, QueryBudgetPlan::uniform(spec.queries),
                                             mix_seed(rep_seed, 7));
      config.weighting = c1 ? WeightingMode::mnar(model.phi0, learned.phi) : WeightingMode::mnar(learned.phi, model.phi1);
      break;
    }
    case Estimator::TrueRatio:
      break;
  }
  const std::size_t d = model.dim();
  if (spec.naive_bayes) {
    auto res = fit_naive_bayes(*data, feature_map(spec.features, 1), config);
    out.converged = res.converged();
    std::vector<double> th;
    for (const auto& m : res.model.per_dim()) th.insert(th.end(), m.theta().begin(), m.theta().end());
    out.theta = Eigen::Map<Eigen::VectorXd>(th.data(), static_cast<Eigen::Index>(th.size()));
    out.scorer = RatioScorer(std::move(res.model));
  } else {
    auto res = fit(*data, feature_map(spec.features, d), config);
    out.converged = res.converged;
    out.theta = res.model.theta();
    out.scorer = RatioScorer(std::move(res.model));
  }
  return out;
}

struct PowerDraws {
  ScenarioModel model;
  ScenarioDraw draw;
  Dataset calibration;
  Eigen::MatrixXd test0;
  Eigen::MatrixXd test1;
};

PowerDraws power_draws(const ScenarioSpec& spec, std::size_t n, double rho, std::uint64_t rep_seed) {
  ScenarioModel model = model_for(spec, rho, rep_seed);
  ScenarioDraw draw = generate(model, n, n, mix_seed(rep_seed, 1));
  Rng rc = Rng::derive(rep_seed, {2});
  const Eigen::MatrixXd calib_latent = model.p0.sample(rc, spec.calibration_size.value_or(n));
  Dataset calibration = corrupt(calib_latent, 0, model.phi0, mix_seed(rep_seed, 3));
  Rng t0 = Rng::derive(rep_seed, {4});
  Rng t1 = Rng::derive(rep_seed, {5});
  Eigen::MatrixXd test0 = model.p0.sample(t0, spec.test_draws);
  Eigen::MatrixXd test1 = model.p1.sample(t1, spec.test_draws);
  return {std::move(model), std::move(draw), std::move(calibration), std::move(test0), std::move(test1)};
}

CalibrationConfig calibration_config(const ScenarioSpec& spec, const ScenarioModel& model) {
  CalibrationConfig c;
  c.alpha = spec.alpha;
  c.delta = spec.delta;
  c.method = spec.calibration_method.value_or(model.phi0.is_zero() ? ThresholdMethod::Binomial
                                                                   : ThresholdMethod::MissingWeighted);
  return c;
}

void write_header_comment(std::ostream& out, const ScenarioSpec& spec) {
  out << "# config_hash=" << hex64(config_hash(spec.canonical())) << " seed=" << spec.seed << '\n';
}

std::string fmt(double x) { return std::isnan(x) ? "nan" : format_double(x); }

}  // namespace

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::MKliep: return "m-kliep";
    case Estimator::CcKliep: return "cc-kliep";
    case Estimator::KliepOracleData: return "kliep-oracle-data";
    case Estimator::TrueRatio: return "true-ratio";
    case Estimator::MKliepLearnedPhi: return "m-kliep-learned-phi";
  }
  return "?";
}

Estimator parse_estimator(std::string_view name) {
  for (auto e : kAllEstimators) {
    if (estimator_name(e) == name) return e;
  }
  throw DomainError("unknown estimator '" + std::string(name) + "'");
}

void ScenarioSpec::validate() const {
  if (sizes.empty()) throw DomainError("sizes: at least one sample size is required");
  for (auto n : sizes) {
    if (n < 2) throw DomainError("sizes: each sample size must be at least 2");
  }
  if (rhos.empty()) throw DomainError("rhos: at least one value is required");
  for (double r : rhos) make_model(scenario, r);  // range check
  if (reps == 0) throw DomainError("reps: must be positive");
  if (estimators.empty()) throw DomainError("estimators: at least one estimator is required");
  if (std::set<Estimator>(estimators.begin(), estimators.end()).size() != estimators.size())
    throw DomainError("estimators: duplicates");
  if (corrupted_class != 0 && corrupted_class != 1) throw DomainError("corrupted_class: must be 0 or 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha: must lie in (0, 1)");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta: must lie in (0, 1)");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw DomainError("ci_level: must lie in (0, 1)");
  if (test_draws == 0) throw DomainError("test_draws: must be positive");
  if (calibration_size && *calibration_size == 0) throw DomainError("calibration_size: must be positive");
  optimizer.validate();
  const bool learned = std::find(estimators.begin(), estimators.end(), Estimator::MKliepLearnedPhi) != estimators.end();
  if (learned && queries == 0) throw DomainError("queries: learning phi needs at least one query per coordinate");
  if ((learned || naive_bayes) && !mechanism_is_per_coordinate(*this))
    throw DomainError("missingness: learned phi and naive-Bayes fits need per-coordinate missingness");
}

std::string ScenarioSpec::canonical() const {
  std::ostringstream s;
  s << "scenario=" << scenario_name(scenario) << ";sizes=" << join_sizes(sizes) << ";rhos=" << join_doubles(rhos)
    << ";reps=" << reps << ";seed=" << seed << ";estimators=";
  for (std::size_t i = 0; i < estimators.size(); ++i) s << (i ? " " : "") << estimator_name(estimators[i]);
  s << ";corrupted_class=" << corrupted_class << ";missingness=" << preset_name(missingness)
    << ";queries=" << queries << ";naive_bayes=" << naive_bayes
    << ";features=" << (features == Features::Identity ? "identity" : "identity_plus_squares")
    << ";max_iters=" << optimizer.max_iters << ";grad_tol=" << format_double(optimizer.grad_tol)
    << ";step=" << format_double(optimizer.step.initial_step) << "," << format_double(optimizer.step.shrink) << ","
    << format_double(optimizer.step.armijo_c) << "," << optimizer.step.max_backtracks
    << ";alpha=" << format_double(alpha) << ";delta=" << format_double(delta)
    << ";calibration_size=" << (calibration_size ? std::to_string(*calibration_size) : "n")
    << ";test_draws=" << test_draws << ";calibration_method="
    << (calibration_method ? (*calibration_method == ThresholdMethod::Binomial ? "binomial" : "missing_weighted")
                           : "auto")
    << ";ci_level=" << format_double(ci_level);
  return s.str();
}

ScenarioSpec default_spec(Scenario scenario) {
  ScenarioSpec s;
  s.scenario = scenario;
  switch (scenario) {
    case Scenario::Gauss5D:
      s.sizes = {100, 500, 1000, 1500};
      s.estimators = {Estimator::MKliep, Estimator::CcKliep, Estimator::KliepOracleData};
      break;
    case Scenario::Mixture2D:
      s.sizes = {100, 500, 1000, 1500};
      s.estimators = {Estimator::MKliep, Estimator::CcKliep, Estimator::TrueRatio};
      break;
    case Scenario::NaiveBayesRho:
      s.rhos = {0.0, 0.25, 0.5, 0.75, 0.9};
      s.naive_bayes = true;
      s.estimators = {Estimator::MKliep, Estimator::CcKliep, Estimator::TrueRatio};
      s.ci_level = 0.95;
      break;
    case Scenario::DiffVar:
      s.sizes = {100, 500, 1000, 1500};
      s.estimators = {Estimator::MKliep, Estimator::CcKliep, Estimator::TrueRatio};
      s.ci_level = 0.95;
      break;
    case Scenario::VaryMisspec:
      s.rhos = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
      s.estimators = {Estimator::MKliep, Estimator::CcKliep, Estimator::TrueRatio};
      s.ci_level = 0.95;
      break;
  }
  return s;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

DifferenceSummary mean_interval(const std::vector<double>& values, double level) {
  DifferenceSummary s;
  s.count = values.size();
  if (values.empty()) {
    s.mean = s.ci_half_width = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    s.ci_half_width = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  s.ci_half_width = normal_critical_value(level) * sd / std::sqrt(static_cast<double>(values.size()));
  return s;
}

MsdResult run_msd_experiment(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.features != Features::Identity) throw DomainError("features: parameter recovery uses the identity map");
  if (spec.naive_bayes) throw DomainError("naive_bayes: parameter recovery uses joint fits");
  if (std::find(spec.estimators.begin(), spec.estimators.end(), Estimator::TrueRatio) != spec.estimators.end())
    throw DomainError("estimators: true-ratio has no parameter to recover");
  const double rho = spec.rhos.front();

  MsdResult result;
  result.theta_tilde = population_theta(make_model(spec.scenario, rho));
  const std::size_t k = spec.estimators.size();
  const std::size_t tasks = spec.sizes.size() * spec.reps;
  result.replicates.resize(tasks * k);

  parallel_for(tasks, spec.threads, [&](std::size_t t) {
    const std::size_t n = spec.sizes[t / spec.reps];
    const std::size_t rep = t % spec.reps;
    const std::uint64_t rs = replication_seed(spec.seed, n, rho, rep);
    const ScenarioModel model = model_for(spec, rho, rs);
    const ScenarioDraw draw = generate(model, n, n, mix_seed(rs, 1));
    for (std::size_t e = 0; e < k; ++e) {
      MsdReplicate& r = result.replicates[t * k + e];
      r.n = n;
      r.rep = rep;
      r.estimator = spec.estimators[e];
      try {
        const Fitted f = fit_estimator(r.estimator, model, draw, spec, rs);
        r.sq_distance = (f.theta - result.theta_tilde).squaredNorm();
        r.converged = f.converged;
      } catch (const Error&) {
        r.failed = true;
        r.sq_distance = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });

  const ScenarioModel base = make_model(spec.scenario, rho, MissingnessPreset::Default, spec.corrupted_class);
  for (std::size_t ni = 0; ni < spec.sizes.size(); ++ni) {
    for (std::size_t e = 0; e < k; ++e) {
      MsdRow row;
      row.n = spec.sizes[ni];
      row.estimator = spec.estimators[e];
      row.m_eff = spec.missingness == MissingnessPreset::Default
                      ? effective_sample_size(row.n, base.phi0, row.n, base.phi1)
                      : std::numeric_limits<double>::quiet_NaN();
      std::vector<double> sq, dist;
      for (std::size_t rep = 0; rep < spec.reps; ++rep) {
        const auto& r = result.replicates[(ni * spec.reps + rep) * k + e];
        if (r.failed) {
          ++row.failures;
          continue;
        }
        if (!r.converged) ++row.not_converged;
        sq.push_back(r.sq_distance);
        dist.push_back(std::sqrt(r.sq_distance));
      }
      const auto s = mean_interval(sq, spec.ci_level);
      row.msd = s.mean;
      row.ci_half_width = s.ci_half_width;
      row.completed = sq.size();
      if (!dist.empty()) {
        std::sort(dist.begin(), dist.end());
        const std::size_t m = dist.size();
        row.median_distance = m % 2 ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
      } else {
        row.median_distance = std::numeric_limits<double>::quiet_NaN();
      }
      result.rows.push_back(row);
    }
  }
  return result;
}

PowerResult run_power_experiment(const ScenarioSpec& spec) {
  spec.validate();
  const std::size_t k = spec.estimators.size();
  const std::size_t cells = spec.sizes.size() * spec.rhos.size();
  const std::size_t tasks = cells * spec.reps;
  PowerResult result;
  result.replicates.resize(tasks * k);

  parallel_for(tasks, spec.threads, [&](std::size_t t) {
    const std::size_t cell = t / spec.reps;
    const std::size_t rep = t % spec.reps;
    const std::size_t n = spec.sizes[cell / spec.rhos.size()];
    const double rho = spec.rhos[cell % spec.rhos.size()];
    const std::uint64_t rs = replication_seed(spec.seed, n, rho, rep);
    const PowerDraws pd = power_draws(spec, n, rho, rs);
    const CalibrationConfig cc = calibration_config(spec, pd.model);
    for (std::size_t e = 0; e < k; ++e) {
      PowerReplicate& r = result.replicates[t * k + e];
      r.n = n;
      r.rho = rho;
      r.rep = rep;
      r.estimator = spec.estimators[e];
      try {
        const Fitted f = fit_estimator(r.estimator, pd.model, pd.draw, spec, rs);
        const NpClassifier clf = calibrate(*f.scorer, pd.calibration, pd.model.phi0, cc);
        r.threshold = clf.threshold();
        r.degenerate = clf.threshold_info().degenerate;
        r.power = positive_rate(clf, pd.test1);
        r.type1 = positive_rate(clf, pd.test0);
        r.converged = f.converged;
      } catch (const Error&) {
        r.failed = true;
        r.power = r.type1 = r.threshold = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });

  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t e = 0; e < k; ++e) {
      PowerRow row;
      row.n = spec.sizes[cell / spec.rhos.size()];
      row.rho = spec.rhos[cell % spec.rhos.size()];
      row.estimator = spec.estimators[e];
      std::vector<double> power;
      double type1_sum = 0.0;
      std::size_t violations = 0;
      for (std::size_t rep = 0; rep < spec.reps; ++rep) {
        const auto& r = result.replicates[(cell * spec.reps + rep) * k + e];
        if (r.failed) {
          ++row.failures;
          continue;
        }
        if (!r.converged) ++row.not_converged;
        if (r.degenerate) ++row.degenerate;
        power.push_back(r.power);
        type1_sum += r.type1;
        if (r.type1 > spec.alpha) ++violations;
      }
      const auto s = mean_interval(power, spec.ci_level);
      row.mean_power = s.mean;
      row.ci_half_width = s.ci_half_width;
      row.completed = power.size();
      const double c = static_cast<double>(power.size());
      row.mean_type1 = power.empty() ? std::numeric_limits<double>::quiet_NaN() : type1_sum / c;
      row.type1_violation_rate =
          power.empty() ? std::numeric_limits<double>::quiet_NaN() : static_cast<double>(violations) / c;
      result.rows.push_back(row);
    }
  }
  return result;
}

DifferenceSummary paired_power_difference(const PowerResult& result, std::size_t n, double rho, Estimator a,
                                          Estimator b, double level) {
  std::map<std::size_t, double> pa, pb;
  for (const auto& r : result.replicates) {
    if (r.n != n || r.rho != rho || r.failed) continue;
    if (r.estimator == a) pa[r.rep] = r.power;
    if (r.estimator == b) pb[r.rep] = r.power;
  }
  std::vector<double> diff;
  for (const auto& [rep, p] : pa) {
    if (const auto it = pb.find(rep); it != pb.end()) diff.push_back(p - it->second);
  }
  return mean_interval(diff, level);
}

void write_msd_csv(std::ostream& out, const MsdResult& result, const ScenarioSpec& spec) {
  write_header_comment(out, spec);
  out << "n,estimator,m_eff,msd,ci_half_width,median_distance,completed,failures,not_converged\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << estimator_name(r.estimator) << ',' << fmt(r.m_eff) << ',' << fmt(r.msd) << ','
        << fmt(r.ci_half_width) << ',' << fmt(r.median_distance) << ',' << r.completed << ',' << r.failures << ','
        << r.not_converged << '\n';
  }
}

void write_power_csv(std::ostream& out, const PowerResult& result, const ScenarioSpec& spec) {
  write_header_comment(out, spec);
  out << "n,rho,estimator,mean_power,ci_half_width,mean_type1,type1_violation_rate,completed,failures,"
         "not_converged,degenerate\n";
  for (const auto& r : result.rows) {
    out << r.n << ',' << fmt(r.rho) << ',' << estimator_name(r.estimator) << ',' << fmt(r.mean_power) << ','
        << fmt(r.ci_half_width) << ',' << fmt(r.mean_type1) << ',' << fmt(r.type1_violation_rate) << ','
        << r.completed << ',' << r.failures << ',' << r.not_converged << ',' << r.degenerate << '\n';
  }
}

void write_power_replicates_csv(std::ostream& out, const PowerResult& result, const ScenarioSpec& spec) {
  write_header_comment(out, spec);
  out << "n,rho,rep,estimator,power,type1,threshold,degenerate,converged,failed\n";
  for (const auto& r : result.replicates) {
    out << r.n << ',' << fmt(r.rho) << ',' << r.rep << ',' << estimator_name(r.estimator) << ',' << fmt(r.power)
        << ',' << fmt(r.type1) << ',' << fmt(r.threshold) << ',' << r.degenerate << ',' << r.converged << ','
        << r.failed << '\n';
  }
}

void write_boundary_plot_data(std::ostream& out, const ScenarioSpec& spec, std::size_t grid) {
  spec.validate();
  if (grid < 2) throw DomainError("grid: need at least two points per axis");
  const std::size_t n = spec.sizes.front();
  const double rho = spec.rhos.front();
  const std::uint64_t rs = replication_seed(spec.seed, n, rho, 0);
  ScenarioSpec one = spec;
  one.test_draws = 1;
  const PowerDraws pd = power_draws(one, n, rho, rs);
  if (pd.model.dim() != 2) throw DomainError("boundary plot data needs a two-dimensional scenario");
  const CalibrationConfig cc = calibration_config(spec, pd.model);

  write_header_comment(out, spec);
  out << "kind,class,x1,x2,missing,estimator,decision\n";
  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-lo[0], -lo[1]};
  for (int c = 0; c < 2; ++c) {
    const Eigen::MatrixXd& lat = c ? pd.draw.latent1 : pd.draw.latent0;
    const Dataset& cor = c ? pd.draw.corrupted.class1 : pd.draw.corrupted.class0;
    for (Eigen::Index i = 0; i < lat.rows(); ++i) {
      for (int j = 0; j < 2; ++j) {
        lo[j] = std::min(lo[j], lat(i, j));
        hi[j] = std::max(hi[j], lat(i, j));
      }
      out << "point," << c << ',' << format_double(lat(i, 0)) << ',' << format_double(lat(i, 1)) << ','
          << (cor[static_cast<std::size_t>(i)].fully_observed() ? 0 : 1) << ",,\n";
    }
  }
  for (auto e : spec.estimators) {
    std::optional<NpClassifier> clf;
    try {
      const Fitted f = fit_estimator(e, pd.model, pd.draw, spec, rs);
      clf.emplace(calibrate(*f.scorer, pd.calibration, pd.model.phi0, cc));
    } catch (const Error& err) {
      warn(std::string(estimator_name(e)) + ": " + err.what());
      continue;
    }
    for (std::size_t a = 0; a < grid; ++a) {
      for (std::size_t b = 0; b < grid; ++b) {
        const double z[2] = {lo[0] - 0.5 + (hi[0] - lo[0] + 1.0) * static_cast<double>(a) / static_cast<double>(grid - 1),
                             lo[1] - 0.5 + (hi[1] - lo[1] + 1.0) * static_cast<double>(b) / static_cast<double>(grid - 1)};
        out << "grid,," << format_double(z[0]) << ',' << format_double(z[1]) << ",," << estimator_name(e) << ','
            << clf->classify(std::span<const double>(z, 2)) << '\n';
      }
    }
  }
}

}  // namespace mnardre
