#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "mnardre/corrupt.hpp"
#include "mnardre/csv_io.hpp"
#include "mnardre/diagnostics.hpp"
#include "mnardre/experiments.hpp"
#include "mnardre/fdiv.hpp"
#include "mnardre/kliep.hpp"
#include "mnardre/missingness_learning.hpp"
#include "mnardre/naive_bayes.hpp"
#include "mnardre/preprocess.hpp"
#include "mnardre/rng.hpp"
#include "mnardre/serialization.hpp"
#include "rwe.hpp"

namespace mnardre::cli {

namespace {

// A --strict run hit a non-converged fit.
struct StrictFailure : Error {
  using Error::Error;
};

class Canon {
 public:
  template <class T>
  Canon& add(std::string_view key, const T& value) {
    std::ostringstream s;
    if constexpr (std::is_floating_point_v<T>) s << format_double(value);
    else s << value;
    text_ += std::string(key) + "=" + s.str() + ";";
    return *this;
  }
  template <class T>
  Canon& add(std::string_view key, const std::vector<T>& values) {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::ostringstream s;
      if constexpr (std::is_floating_point_v<T>) s << format_double(values[i]);
      else s << values[i];
      joined += (i ? " " : "") + s.str();
    }
    return add(key, joined);
  }
  const std::string& str() const { return text_; }

 private:
  std::string text_;
};

std::string comment_line(const std::string& canonical, std::optional<std::uint64_t> seed) {
  return "# config_hash=" + hex64(config_hash(canonical)) + " seed=" + (seed ? std::to_string(*seed) : "none") + "\n";
}

void with_output(const std::string& path, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(out);
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write '" + path + "'");
  body(file);
  file.flush();
  if (!file) throw DataError("failed writing '" + path + "'");
}

CsvOptions csv_options(const std::string& token, const std::string& label, bool require_label) {
  CsvOptions o;
  o.missing_token = token;
  o.label_column = label;
  o.require_label = require_label;
  return o;
}

void add_csv_flags(CLI::App* sub, std::string& token, std::string& label) {
  sub->add_option("--missing-token", token, "Token marking a missing value")->capture_default_str();
  sub->add_option("--label-column", label, "Name of the 0/1 label column")->capture_default_str();
}

ThresholdMethod parse_method(const std::string& s) {
  if (s == "binomial") return ThresholdMethod::Binomial;
  if (s == "missing-weighted") return ThresholdMethod::MissingWeighted;
  throw DomainError("--method: unknown value '" + s + "'");
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string data, out = "-", estimator = "m-kliep", phi0 = "zero", phi1 = "zero", features = "identity";
  std::string divergence = "kliep", missing_token = "NA", label_column = "label";
  bool naive_bayes = false;
  int max_iters = 10000;
  double grad_tol = 1e-8;
};

void cmd_fit(const FitArgs& a, bool strict, std::ostream& out) {
  if (a.naive_bayes && a.divergence != "kliep") throw DomainError("--naive-bayes: only with --divergence kliep");
  const MissingnessFunction phi0 = parse_missingness(a.phi0);
  const MissingnessFunction phi1 = parse_missingness(a.phi1);
  KliepFitConfig config;
  config.optimizer.max_iters = a.max_iters;
  config.optimizer.grad_tol = a.grad_tol;
  config.optimizer.validate();
  if (a.estimator == "m-kliep") config.weighting = WeightingMode::mnar(phi0, phi1);
  else if (a.estimator == "cc-kliep") config.weighting = WeightingMode::complete_case();
  else config.weighting = WeightingMode::fully_observed();

  const LabeledData data = read_csv(a.data, csv_options(a.missing_token, a.label_column, true));
  const DatasetPair pair = data.pair();
  const std::size_t d = pair.class0.dim();

  KeyValues kv;
  bool converged = true;
  if (a.naive_bayes) {
    auto res = fit_naive_bayes(pair, parse_feature_map(a.features, 1), config);
    converged = res.converged();
    kv = model_to_key_values(RatioScorer(res.model));
    for (std::size_t j = 0; j < res.per_dim.size(); ++j) {
      kv["iterations." + std::to_string(j)] = std::to_string(res.per_dim[j].iterations);
      kv["converged." + std::to_string(j)] = res.per_dim[j].converged ? "1" : "0";
    }
  } else {
    const FeatureMap fmap = parse_feature_map(a.features, d);
    FitResult res = a.divergence == "kliep"
                        ? fit(pair, fmap, config)
                        : fdiv_fit(pair, fmap, a.divergence == "kl" ? DivergenceSpec::kl() : DivergenceSpec::js(),
                                   config);
    if (a.divergence == "kliep")
      res.model = res.model.with_normalizer(normalizing_constant(res.model, pair.class0, config.weighting));
    converged = res.converged;
    kv = model_to_key_values(RatioScorer(res.model));
    kv["iterations"] = std::to_string(res.iterations);
    kv["gradient_norm"] = format_double(res.gradient_norm);
    kv["converged"] = res.converged ? "1" : "0";
  }
  if (!converged) {
    if (strict) throw StrictFailure("fit did not converge");
    warn("fit did not converge; writing the last iterate");
  }
  kv["estimator"] = a.estimator;
  kv["divergence"] = a.divergence;
  kv["phi0"] = format_missingness(phi0);
  kv["phi1"] = format_missingness(phi1);

  Canon c;
  c.add("cmd", "fit").add("data", a.data).add("estimator", a.estimator).add("phi0", a.phi0).add("phi1", a.phi1)
      .add("features", a.features).add("divergence", a.divergence).add("naive_bayes", a.naive_bayes)
      .add("max_iters", a.max_iters).add("grad_tol", a.grad_tol).add("missing_token", a.missing_token);
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), std::nullopt);
    write_key_values(o, kv);
  });
}

// ---------------------------------------------------------------------------
// np-calibrate

struct CalibrateArgs {
  std::string model, calibration, data, out = "-", method = "auto", transform = "log", phi0 = "zero";
  std::string split_out, missing_token = "NA", label_column = "label";
  std::optional<double> split, phi0_sup, margin;
  double alpha = 0.1, delta = 0.1, margin_constant = kMarginConstant;
  std::uint64_t seed = 1;
};

void cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
  if (a.calibration.empty() == a.data.empty())
    throw DomainError("np-calibrate: give either --calibration FILE or --data FILE with --split");
  if (!a.data.empty() && !a.split) throw DomainError("--split: required with --data");
  if (a.split && !(*a.split > 0.0 && *a.split <= 1.0)) throw DomainError("--split: must lie in (0, 1]");
  if (a.phi0_sup && !(*a.phi0_sup >= 0.0 && *a.phi0_sup < 1.0)) throw DomainError("--phi0-sup: must lie in [0, 1)");
  if (a.margin && !(*a.margin >= 0.0)) throw DomainError("--margin: must be non-negative");
  if (a.transform != "log" && a.transform != "identity") throw DomainError("--transform: 'log' or 'identity'");
  const MissingnessFunction phi0 = parse_missingness(a.phi0);

  const RatioScorer scorer = model_from_key_values(read_key_values(std::filesystem::path(a.model)));
  const CsvOptions opts = csv_options(a.missing_token, a.label_column, false);
  LabeledData table = read_csv(a.calibration.empty() ? a.data : a.calibration, opts);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.labels.empty() || table.labels[i] == 0) rows.push_back(i);
  }
  if (rows.empty()) throw DataError("no class-0 rows to calibrate on");
  if (a.split) {
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(*a.split * static_cast<double>(rows.size()))));
    Rng rng(a.seed);
    for (std::size_t k = 0; k < m; ++k) std::swap(rows[k], rows[k + rng.uniform_index(rows.size() - k)]);
    rows.resize(m);
    std::sort(rows.begin(), rows.end());
  }
  const Dataset calib = table.subset(rows).as_dataset(0);
  if (calib.dim() != scorer.input_dim())
    throw DataError("calibration data has " + std::to_string(calib.dim()) + " features, model expects " +
                    std::to_string(scorer.input_dim()));

  CalibrationConfig cc;
  cc.alpha = a.alpha;
  cc.delta = a.delta;
  cc.transform = a.transform == "log" ? ScoreTransform::Log : ScoreTransform::Identity;
  cc.margin_constant = a.margin_constant;
  cc.margin_override = a.margin;
  cc.phi0_sup = a.phi0_sup;
  cc.method = a.method == "auto" ? (phi0.is_zero() && !calib.has_missing() ? ThresholdMethod::Binomial
                                                                           : ThresholdMethod::MissingWeighted)
                                 : parse_method(a.method);
  const NpClassifier clf = calibrate(scorer, calib, phi0, cc);
  if (clf.threshold_info().degenerate)
    warn("no admissible order statistic; the classifier labels every point 0");

  KeyValues kv = classifier_to_key_values(clf);
  kv["phi0"] = format_missingness(phi0);
  if (a.split) {
    std::string s;
    for (std::size_t i = 0; i < rows.size(); ++i) s += (i ? " " : "") + std::to_string(rows[i]);
    kv["calibration_rows"] = s;
  }
  Canon c;
  c.add("cmd", "np-calibrate").add("model", a.model).add("calibration", a.calibration).add("data", a.data)
      .add("split", a.split ? format_double(*a.split) : "none").add("alpha", a.alpha).add("delta", a.delta)
      .add("method", a.method).add("transform", a.transform).add("phi0", a.phi0)
      .add("phi0_sup", a.phi0_sup ? format_double(*a.phi0_sup) : "none")
      .add("margin", a.margin ? format_double(*a.margin) : "none").add("margin_constant", a.margin_constant);
  const std::optional<std::uint64_t> seed = a.split ? std::optional(a.seed) : std::nullopt;
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), seed);
    write_key_values(o, kv);
  });
  if (!a.split_out.empty()) {
    with_output(a.split_out, out, [&](std::ostream& o) {
      for (auto r : rows) o << r << '\n';
    });
  }
}

// ---------------------------------------------------------------------------
// classify

struct ClassifyArgs {
  std::string classifier, data, out = "-", missing_token = "NA", label_column = "label";
};

void cmd_classify(const ClassifyArgs& a, std::ostream& out) {
  const NpClassifier clf = classifier_from_key_values(read_key_values(std::filesystem::path(a.classifier)));
  const CsvOptions opts = csv_options(a.missing_token, a.label_column, false);
  const LabeledData data = read_csv(a.data, opts);
  if (data.features.size() != clf.scorer().input_dim())
    throw DataError("data has " + std::to_string(data.features.size()) + " features, classifier expects " +
                    std::to_string(clf.scorer().input_dim()));
  std::vector<double> scores(data.size());
  std::vector<int> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.points[i].fully_observed())
      throw DataError("row " + std::to_string(i + 1) + ": classification requires a fully observed point");
    const auto v = data.points[i].values();
    scores[i] = clf.score(v);
    labels[i] = clf.classify(std::span<const double>(v));
  }
  Canon c;
  c.add("cmd", "classify").add("classifier", a.classifier).add("data", a.data);
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), std::nullopt);
    for (const auto& f : data.features) o << f << ',';
    if (!data.labels.empty()) o << a.label_column << ',';
    o << "score,prediction\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (const auto& x : data.points[i].coords()) o << format_double(*x) << ',';
      if (!data.labels.empty()) o << data.labels[i] << ',';
      o << (std::isfinite(scores[i]) ? format_double(scores[i]) : (scores[i] > 0 ? "inf" : "-inf")) << ','
        << labels[i] << '\n';
    }
  });
}

// ---------------------------------------------------------------------------
// learn-phi

struct LearnArgs {
  std::string data, latent, out = "-", missing_token = "NA", label_column = "label";
  std::vector<std::size_t> queries{10};
  std::uint64_t seed = 1;
  int cls = 1;
};

void cmd_learn(const LearnArgs& a, std::ostream& out) {
  const CsvOptions opts = csv_options(a.missing_token, a.label_column, false);
  const LabeledData data = read_csv(a.data, opts);
  const LabeledData latent = read_csv(a.latent, opts);
  if (latent.size() != data.size() || latent.features.size() != data.features.size())
    throw DataError("--latent must have the same rows and columns as --data");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.labels.empty() || data.labels[i] == a.cls) rows.push_back(i);
  }
  if (rows.empty()) throw DataError("no rows of class " + std::to_string(a.cls));
  const std::size_t d = data.features.size();
  if (a.queries.size() != 1 && a.queries.size() != d)
    throw DomainError("--queries: give one count or one per feature");
  Eigen::MatrixXd lat(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  std::vector<ObservedPoint> pts;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& lp = latent.points[rows[k]];
    for (std::size_t j = 0; j < d; ++j) {
      if (!lp[j]) throw DataError("--latent row " + std::to_string(rows[k] + 1) + " has a missing value");
      lat(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = *lp[j];
    }
    pts.push_back(data.points[rows[k]]);
  }
  const Dataset corrupted(std::move(pts), a.cls);
  const auto learned = learn_missingness(corrupted, lat, QueryBudgetPlan{a.queries}, a.seed);

  KeyValues kv;
  kv["phi"] = format_missingness(learned.phi);
  for (std::size_t j = 0; j < d; ++j) {
    const std::string s = "." + std::to_string(j);
    if (!learned.fits[j]) {
      kv["n_missing" + s] = "0";
      continue;
    }
    const auto& f = *learned.fits[j];
    kv["intercept_raw" + s] = format_double(f.intercept_raw);
    kv["slope" + s] = format_double(f.slope);
    kv["intercept_corrected" + s] = format_double(f.intercept_corrected);
    kv["n" + s] = std::to_string(f.n);
    kv["n_missing" + s] = std::to_string(f.n_missing);
    kv["n_queried" + s] = std::to_string(f.n_queried);
    kv["separated" + s] = f.separated ? "1" : "0";
    kv["converged" + s] = f.converged ? "1" : "0";
  }
  Canon c;
  c.add("cmd", "learn-phi").add("data", a.data).add("latent", a.latent).add("queries", a.queries)
      .add("class", a.cls).add("seed", a.seed);
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), a.seed);
    write_key_values(o, kv);
  });
}

// ---------------------------------------------------------------------------
// corrupt

struct CorruptArgs {
  std::string data, out = "-", phi, preset, phi_out, missing_token = "NA", label_column = "label";
  std::vector<double> target;
  std::vector<int> classes{1};
  std::uint64_t seed = 1;
};

Eigen::MatrixXd observed_matrix(const Dataset& d) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.dim()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!d[i].fully_observed())
      throw DataError("estimating feature moments needs fully observed rows; impute first");
    const auto v = d[i].values();
    for (std::size_t j = 0; j < v.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }
  return m;
}

void cmd_corrupt(const CorruptArgs& a, std::ostream& out) {
  const int modes = static_cast<int>(!a.phi.empty()) + static_cast<int>(!a.preset.empty()) +
                    static_cast<int>(!a.target.empty());
  if (modes != 1) throw DomainError("corrupt: give exactly one of --phi, --preset, --target");
  if (!a.preset.empty() && a.preset != "paper-rwe") throw DomainError("--preset: unknown preset '" + a.preset + "'");
  for (int c : a.classes) {
    if (c != 0 && c != 1) throw DomainError("--class: must be 0 or 1");
  }
  std::optional<MissingnessFunction> fixed;
  if (!a.phi.empty()) fixed = parse_missingness(a.phi);

  const CsvOptions opts = csv_options(a.missing_token, a.label_column, true);
  LabeledData data = read_csv(a.data, opts);
  const std::size_t d = data.features.size();
  if (a.target.size() > 1 && a.target.size() != d) throw DomainError("--target: give one proportion or one per feature");
  const std::vector<int> taus = random_orientations(d, mix_seed(a.seed, 1));
  KeyValues used;
  for (int c : a.classes) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == c) rows.push_back(i);
    }
    if (rows.empty()) continue;
    const Dataset sel = data.subset(rows).as_dataset(c);
    MissingnessFunction phi;
    if (fixed) {
      phi = *fixed;
    } else {
      const Eigen::MatrixXd m = observed_matrix(sel);
      if (!a.preset.empty()) {
        phi = standardized_logistic(m, taus);
      } else {
        std::vector<MissingnessEntry> entries;
        const MissingnessFunction base = standardized_logistic(m, taus);
        for (std::size_t j = 0; j < d; ++j) {
          const auto l = std::get<LogisticMissingness>(base.entries()[j]);
          const Eigen::VectorXd col = m.col(static_cast<Eigen::Index>(j));
          const double target = a.target.size() == 1 ? a.target[0] : a.target[j];
          const double a0 = solve_intercept_for_proportion(
              std::span<const double>(col.data(), static_cast<std::size_t>(col.size())), l.slope, l.sign, target);
          entries.emplace_back(LogisticMissingness{a0, l.slope, l.sign});
        }
        phi = MissingnessFunction::per_coordinate(std::move(entries));
      }
    }
    const Dataset corrupted = corrupt(sel, phi, mix_seed(a.seed, 10 + static_cast<std::uint64_t>(c)));
    for (std::size_t k = 0; k < rows.size(); ++k) data.points[rows[k]] = corrupted[k];
    used["class" + std::to_string(c)] = format_missingness(phi);
  }
  Canon c;
  c.add("cmd", "corrupt").add("data", a.data).add("phi", a.phi).add("preset", a.preset).add("target", a.target)
      .add("classes", a.classes).add("seed", a.seed);
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), a.seed);
    write_csv(o, data, opts);
  });
  if (!a.phi_out.empty()) with_output(a.phi_out, out, [&](std::ostream& o) { write_key_values(o, used); });
}

// ---------------------------------------------------------------------------
// preprocess

struct PreprocessArgs {
  std::string data, out = "-", record_out, record_in, missing_token = "NA", label_column = "label";
  std::vector<std::string> trim_lower, trim_upper;
  bool impute = false, normalize = false;
};

void cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
  const CsvOptions opts = csv_options(a.missing_token, a.label_column, false);
  const LabeledData data = read_csv(a.data, opts);
  TransformRecord rec;
  if (!a.record_in.empty()) {
    if (a.impute || a.normalize || !a.trim_lower.empty() || !a.trim_upper.empty())
      throw DomainError("--record-in: replays a record; do not combine with fitting options");
    rec = TransformRecord::from_key_values(read_key_values(std::filesystem::path(a.record_in)));
  } else {
    PreprocessOptions po;
    po.mean_impute = a.impute;
    po.normalize = a.normalize;
    const std::size_t d = data.features.size();
    const auto bounds = [&](const std::vector<std::string>& v, const char* flag) {
      std::vector<std::optional<double>> out_b(d);
      if (v.empty()) return out_b;
      if (v.size() != d) throw DomainError(std::string(flag) + ": give one bound per feature ('none' to skip)");
      for (std::size_t j = 0; j < d; ++j) {
        if (v[j] == "none") continue;
        const auto x = parse_double(v[j]);
        if (!x) throw DomainError(std::string(flag) + ": '" + v[j] + "' is not a number");
        out_b[j] = *x;
      }
      return out_b;
    };
    const auto lo = bounds(a.trim_lower, "--trim-lower");
    const auto hi = bounds(a.trim_upper, "--trim-upper");
    if (!a.trim_lower.empty() || !a.trim_upper.empty()) {
      for (std::size_t j = 0; j < d; ++j) po.trim.push_back({lo[j], hi[j]});
    }
    rec = fit_preprocess(data, po);
  }
  const LabeledData result = rec.apply(data);
  Canon c;
  c.add("cmd", "preprocess").add("data", a.data).add("record_in", a.record_in).add("impute", a.impute)
      .add("normalize", a.normalize).add("trim_lower", a.trim_lower).add("trim_upper", a.trim_upper);
  with_output(a.out, out, [&](std::ostream& o) {
    o << comment_line(c.str(), std::nullopt);
    write_csv(o, result, opts);
  });
  if (!a.record_out.empty()) with_output(a.record_out, out, [&](std::ostream& o) { write_key_values(o, rec.to_key_values()); });
}

// ---------------------------------------------------------------------------
// experiments

struct ExperimentArgs {
  std::string scenario, missingness = "default", naive_bayes = "auto", features = "identity", method = "auto";
  std::vector<std::size_t> n;
  std::vector<double> rho;
  std::vector<std::string> estimators;
  std::size_t reps = 100, queries = 10, test_draws = 100000, calibration_size = 0, grid = 60;
  std::uint64_t seed = 1;
  int corrupted_class = 1, max_iters = 10000;
  double alpha = 0.1, delta = 0.1, ci_level = 0.99, grad_tol = 1e-8;
  unsigned threads = 0;
  std::string out = "-", replicates_out;
};

void add_experiment_options(CLI::App* sub, ExperimentArgs& a, std::string default_scenario, bool plot) {
  a.scenario = std::move(default_scenario);
  sub->add_option("--scenario", a.scenario, "gauss5d | mixture2d | naive-bayes-rho | diffvar | vary-misspec")
      ->capture_default_str();
  sub->add_option("--n", a.n, "Sample size(s) per class")->delimiter(',');
  sub->add_option("--rho", a.rho, "Correlation / mixing weight value(s)")->delimiter(',');
  sub->add_option("--seed", a.seed, "Base seed")->capture_default_str();
  sub->add_option("--estimators", a.estimators,
                  "m-kliep, cc-kliep, kliep-oracle-data, true-ratio, m-kliep-learned-phi")
      ->delimiter(',');
  sub->add_option("--corrupted-class", a.corrupted_class, "Class receiving missingness")->check(CLI::IsMember({0, 1}));
  sub->add_option("--missingness", a.missingness, "default | per-dim-logistic")->capture_default_str();
  sub->add_option("--queries", a.queries, "Queries per feature for learned phi")->capture_default_str();
  sub->add_option("--naive-bayes", a.naive_bayes, "auto | true | false")
      ->check(CLI::IsMember({"auto", "true", "false"}));
  sub->add_option("--features", a.features, "identity | identity_plus_squares")
      ->check(CLI::IsMember({"identity", "identity_plus_squares"}));
  sub->add_option("--alpha", a.alpha, "Type I error level")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--delta", a.delta, "Violation probability")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--method", a.method, "auto | binomial | missing-weighted")
      ->check(CLI::IsMember({"auto", "binomial", "missing-weighted"}));
  sub->add_option("--calibration-size", a.calibration_size, "Class-0 calibration draws (default n)");
  sub->add_option("--max-iters", a.max_iters, "Gradient descent iteration cap")->check(CLI::PositiveNumber);
  sub->add_option("--grad-tol", a.grad_tol, "Gradient norm tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--out", a.out, "Output CSV ('-' for stdout)")->capture_default_str();
  if (plot) {
    sub->add_option("--grid", a.grid, "Grid points per axis")->check(CLI::Range(2, 1000));
    return;
  }
  sub->add_option("--reps", a.reps, "Replications per cell")->check(CLI::PositiveNumber);
  sub->add_option("--test-draws", a.test_draws, "Fresh test draws per class")->check(CLI::PositiveNumber);
  sub->add_option("--ci-level", a.ci_level, "Confidence level of reported intervals")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  sub->add_option("--replicates-out", a.replicates_out, "Per-replication CSV (power experiments)");
}

ScenarioSpec build_spec(const CLI::App* sub, const ExperimentArgs& a) {
  ScenarioSpec s = default_spec(parse_scenario(a.scenario));
  const auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--n")) s.sizes = a.n;
  if (given("--rho")) s.rhos = a.rho;
  if (given("--reps")) s.reps = a.reps;
  s.seed = a.seed;
  if (given("--estimators")) {
    s.estimators.clear();
    for (const auto& e : a.estimators) s.estimators.push_back(parse_estimator(e));
  }
  if (given("--corrupted-class")) s.corrupted_class = a.corrupted_class;
  s.missingness = parse_preset(a.missingness);
  s.queries = a.queries;
  if (a.naive_bayes != "auto") s.naive_bayes = a.naive_bayes == "true";
  s.features = a.features == "identity" ? Features::Identity : Features::IdentityPlusSquares;
  if (given("--alpha")) s.alpha = a.alpha;
  if (given("--delta")) s.delta = a.delta;
  if (a.method != "auto") s.calibration_method = parse_method(a.method);
  if (given("--calibration-size")) s.calibration_size = a.calibration_size;
  if (given("--test-draws")) s.test_draws = a.test_draws;
  if (given("--ci-level")) s.ci_level = a.ci_level;
  if (given("--max-iters")) s.optimizer.max_iters = a.max_iters;
  if (given("--grad-tol")) s.optimizer.grad_tol = a.grad_tol;
  s.threads = a.threads;
  s.validate();
  return s;
}

struct RealDataArgs {
  std::string data, preset, out = "-", replicates_out, missing_token = "NA", label_column = "label";
  RealDataSpec spec;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Density ratio estimation and Neyman-Pearson classification with MNAR data", "mnardre"};
  app.set_config("--config", "", "key = value configuration file; flags override it");
  app.require_subcommand(1);
  bool strict = false, quiet = false;
  app.add_flag("--strict", strict, "Treat non-converged fits as failures (exit 4)");
  app.add_flag("--quiet", quiet, "Suppress warnings");

  FitArgs fa;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a density ratio model on labelled training data");
  fit_cmd->add_option("--data", fa.data, "Training CSV with a label column")->required();
  fit_cmd->add_option("--out", fa.out, "Model file ('-' for stdout)")->capture_default_str();
  fit_cmd->add_option("--estimator", fa.estimator, "m-kliep | cc-kliep | kliep")
      ->check(CLI::IsMember({"m-kliep", "cc-kliep", "kliep"}))->capture_default_str();
  fit_cmd->add_option("--phi0", fa.phi0, "Class-0 missingness spec")->capture_default_str();
  fit_cmd->add_option("--phi1", fa.phi1, "Class-1 missingness spec")->capture_default_str();
  fit_cmd->add_option("--features", fa.features, "identity | identity_plus_squares")
      ->check(CLI::IsMember({"identity", "identity_plus_squares"}))->capture_default_str();
  fit_cmd->add_option("--divergence", fa.divergence, "kliep | kl | js")
      ->check(CLI::IsMember({"kliep", "kl", "js"}))->capture_default_str();
  fit_cmd->add_flag("--naive-bayes", fa.naive_bayes, "One model per feature");
  fit_cmd->add_option("--max-iters", fa.max_iters, "Gradient descent iteration cap")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--grad-tol", fa.grad_tol, "Gradient norm tolerance")->check(CLI::PositiveNumber);
  add_csv_flags(fit_cmd, fa.missing_token, fa.label_column);

  CalibrateArgs ca;
  auto* cal_cmd = app.add_subcommand("np-calibrate", "Choose the Neyman-Pearson threshold on class-0 data");
  cal_cmd->add_option("--model", ca.model, "Model file from 'fit'")->required();
  cal_cmd->add_option("--calibration", ca.calibration, "Class-0 calibration CSV, distinct from the training data");
  cal_cmd->add_option("--data", ca.data, "CSV to draw a calibration split from (needs --split)");
  cal_cmd->add_option("--split", ca.split, "Fraction of class-0 rows of --data used for calibration");
  cal_cmd->add_option("--split-out", ca.split_out, "Write the selected row indices here");
  cal_cmd->add_option("--seed", ca.seed, "Seed for --split")->capture_default_str();
  cal_cmd->add_option("--alpha", ca.alpha, "Type I error level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cal_cmd->add_option("--delta", ca.delta, "Violation probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cal_cmd->add_option("--method", ca.method, "auto | binomial | missing-weighted")
      ->check(CLI::IsMember({"auto", "binomial", "missing-weighted"}))->capture_default_str();
  cal_cmd->add_option("--transform", ca.transform, "Score transform: log | identity")->capture_default_str();
  cal_cmd->add_option("--phi0", ca.phi0, "Class-0 missingness spec")->capture_default_str();
  cal_cmd->add_option("--phi0-sup", ca.phi0_sup, "Override sup phi0 used in the effective sample size");
  cal_cmd->add_option("--margin", ca.margin, "Explicit margin (marks the result non-standard)");
  cal_cmd->add_option("--margin-constant", ca.margin_constant, "Constant inside the margin")
      ->check(CLI::PositiveNumber)->capture_default_str();
  cal_cmd->add_option("--out", ca.out, "Classifier file ('-' for stdout)")->capture_default_str();
  add_csv_flags(cal_cmd, ca.missing_token, ca.label_column);

  ClassifyArgs cla;
  auto* cls_cmd = app.add_subcommand("classify", "Label fully observed points with a calibrated classifier");
  cls_cmd->add_option("--classifier", cla.classifier, "Classifier file from 'np-calibrate'")->required();
  cls_cmd->add_option("--data", cla.data, "CSV of points")->required();
  cls_cmd->add_option("--out", cla.out, "Predictions CSV ('-' for stdout)")->capture_default_str();
  add_csv_flags(cls_cmd, cla.missing_token, cla.label_column);

  LearnArgs la;
  auto* learn_cmd = app.add_subcommand("learn-phi", "Learn logistic missingness from queried true values");
  learn_cmd->add_option("--data", la.data, "Corrupted CSV")->required();
  learn_cmd->add_option("--latent", la.latent, "CSV with the true values, same rows")->required();
  learn_cmd->add_option("--queries", la.queries, "Queries per feature (one value or one per feature)")
      ->delimiter(',')->capture_default_str();
  learn_cmd->add_option("--seed", la.seed, "Query selection seed")->capture_default_str();
  learn_cmd->add_option("--class", la.cls, "Class whose rows are used")->check(CLI::IsMember({0, 1}))->capture_default_str();
  learn_cmd->add_option("--out", la.out, "Output file ('-' for stdout)")->capture_default_str();
  add_csv_flags(learn_cmd, la.missing_token, la.label_column);

  CorruptArgs co;
  auto* cor_cmd = app.add_subcommand("corrupt", "Induce missingness in selected classes");
  cor_cmd->add_option("--data", co.data, "Labelled CSV")->required();
  cor_cmd->add_option("--out", co.out, "Corrupted CSV ('-' for stdout)")->capture_default_str();
  cor_cmd->add_option("--phi", co.phi, "Missingness spec");
  cor_cmd->add_option("--preset", co.preset, "paper-rwe: standardized logistic with random orientations");
  cor_cmd->add_option("--target", co.target, "Target missing proportion(s) per feature")->delimiter(',');
  cor_cmd->add_option("--class", co.classes, "Classes to corrupt")->delimiter(',')->capture_default_str();
  cor_cmd->add_option("--seed", co.seed, "Seed")->capture_default_str();
  cor_cmd->add_option("--phi-out", co.phi_out, "Write the missingness used per class here");
  add_csv_flags(cor_cmd, co.missing_token, co.label_column);

  PreprocessArgs pa;
  auto* pre_cmd = app.add_subcommand("preprocess", "Trim, mean-impute and normalize");
  pre_cmd->add_option("--data", pa.data, "Input CSV")->required();
  pre_cmd->add_option("--out", pa.out, "Output CSV ('-' for stdout)")->capture_default_str();
  pre_cmd->add_option("--record-out", pa.record_out, "Write the fitted transform here");
  pre_cmd->add_option("--record-in", pa.record_in, "Replay a transform fitted on training data");
  pre_cmd->add_flag("--impute", pa.impute, "Mean-impute missing values");
  pre_cmd->add_flag("--normalize", pa.normalize, "Center and scale each feature");
  pre_cmd->add_option("--trim-lower", pa.trim_lower, "Lower bound per feature ('none' to skip)")->delimiter(',');
  pre_cmd->add_option("--trim-upper", pa.trim_upper, "Upper bound per feature ('none' to skip)")->delimiter(',');
  add_csv_flags(pre_cmd, pa.missing_token, pa.label_column);

  auto* exp_cmd = app.add_subcommand("experiment", "Replicated synthetic and real-data experiments");
  exp_cmd->require_subcommand(1);
  ExperimentArgs msd_a, pow_a, rho_a, plot_a;
  auto* msd_cmd = exp_cmd->add_subcommand("msd", "Mean squared distance to the population parameter");
  add_experiment_options(msd_cmd, msd_a, "gauss5d", false);
  auto* pow_cmd = exp_cmd->add_subcommand("power", "Expected power and Type I control");
  add_experiment_options(pow_cmd, pow_a, "mixture2d", false);
  auto* rho_cmd = exp_cmd->add_subcommand("rho-sweep", "Power across correlation / misspecification levels");
  add_experiment_options(rho_cmd, rho_a, "naive-bayes-rho", false);
  RealDataArgs ra;
  auto* real_cmd = exp_cmd->add_subcommand("real-data", "Real-data protocol on a user-supplied CSV");
  real_cmd->add_option("--preset", ra.preset, "Protocol preset")->required()->check(CLI::IsMember({"paper-rwe"}));
  real_cmd->add_option("--data", ra.data, "Labelled CSV")->required();
  real_cmd->add_option("--train0", ra.spec.train0, "Class-0 training rows")->required();
  real_cmd->add_option("--train1", ra.spec.train1, "Class-1 training rows")->required();
  real_cmd->add_option("--calib0", ra.spec.calib0, "Class-0 calibration rows")->required();
  real_cmd->add_option("--test1", ra.spec.test1, "Class-1 test rows")->required();
  real_cmd->add_option("--reps", ra.spec.reps, "Iterations")->capture_default_str();
  real_cmd->add_option("--seed", ra.spec.seed, "Seed")->capture_default_str();
  real_cmd->add_option("--queries", ra.spec.queries, "Queries per feature")->capture_default_str();
  real_cmd->add_option("--corrupted-class", ra.spec.corrupted_class, "Class receiving missingness")
      ->check(CLI::IsMember({0, 1}))->capture_default_str();
  real_cmd->add_option("--alpha", ra.spec.alpha, "Type I error level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  real_cmd->add_option("--delta", ra.spec.delta, "Violation probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  real_cmd->add_option("--out", ra.out, "Summary CSV ('-' for stdout)")->capture_default_str();
  real_cmd->add_option("--replicates-out", ra.replicates_out, "Per-iteration CSV");
  add_csv_flags(real_cmd, ra.missing_token, ra.label_column);

  auto* plot_cmd = app.add_subcommand("emit-plot-data", "Points and classifier decision grids as tidy CSV");
  add_experiment_options(plot_cmd, plot_a, "mixture2d", true);

  std::vector<const char*> argv{"mnardre"};
  for (const auto& s : args) argv.push_back(s.c_str());

  WarningHandler previous;
  bool handler_set = false;
  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kUsage;
    }
    previous = set_warning_handler(quiet ? WarningHandler{} : WarningHandler([&err](std::string_view m) {
      err << "mnardre: warning: " << m << '\n';
    }));
    handler_set = true;

    if (*fit_cmd) cmd_fit(fa, strict, out);
    else if (*cal_cmd) cmd_calibrate(ca, out);
    else if (*cls_cmd) cmd_classify(cla, out);
    else if (*learn_cmd) cmd_learn(la, out);
    else if (*cor_cmd) cmd_corrupt(co, out);
    else if (*pre_cmd) cmd_preprocess(pa, out);
    else if (*plot_cmd) {
      const ScenarioSpec spec = build_spec(plot_cmd, plot_a);
      with_output(plot_a.out, out, [&](std::ostream& o) { write_boundary_plot_data(o, spec, plot_a.grid); });
    } else if (*real_cmd) {
      const LabeledData data = read_csv(ra.data, csv_options(ra.missing_token, ra.label_column, true));
      const PowerResult res = run_real_data_experiment(data, ra.spec);
      const std::string line = comment_line(ra.spec.canonical(), ra.spec.seed);
      with_output(ra.out, out, [&](std::ostream& o) {
        o << line << "estimator,mean_power,ci_half_width,completed,failures,not_converged,degenerate\n";
        for (const auto& r : res.rows) {
          o << estimator_name(r.estimator) << ',' << format_double(r.mean_power) << ','
            << format_double(r.ci_half_width) << ',' << r.completed << ',' << r.failures << ',' << r.not_converged
            << ',' << r.degenerate << '\n';
        }
      });
      if (!ra.replicates_out.empty()) {
        with_output(ra.replicates_out, out, [&](std::ostream& o) {
          o << line << "rep,estimator,power,threshold,converged,failed\n";
          for (const auto& r : res.replicates) {
            o << r.rep << ',' << estimator_name(r.estimator) << ',' << format_double(r.power) << ','
              << format_double(r.threshold) << ',' << r.converged << ',' << r.failed << '\n';
          }
        });
      }
    } else {
      const bool is_msd = static_cast<bool>(*msd_cmd);
      const CLI::App* sub = is_msd ? msd_cmd : (*pow_cmd ? pow_cmd : rho_cmd);
      const ExperimentArgs& ea = is_msd ? msd_a : (*pow_cmd ? pow_a : rho_a);
      const ScenarioSpec spec = build_spec(sub, ea);
      std::size_t not_converged = 0;
      if (is_msd) {
        const MsdResult res = run_msd_experiment(spec);
        for (const auto& r : res.rows) not_converged += r.not_converged;
        with_output(ea.out, out, [&](std::ostream& o) { write_msd_csv(o, res, spec); });
      } else {
        const PowerResult res = run_power_experiment(spec);
        for (const auto& r : res.rows) not_converged += r.not_converged;
        with_output(ea.out, out, [&](std::ostream& o) { write_power_csv(o, res, spec); });
        if (!ea.replicates_out.empty())
          with_output(ea.replicates_out, out, [&](std::ostream& o) { write_power_replicates_csv(o, res, spec); });
      }
      if (strict && not_converged > 0)
        throw StrictFailure(std::to_string(not_converged) + " fits did not converge");
    }
  } catch (const StrictFailure& e) {
    err << "mnardre: error: " << e.what() << '\n';
    if (handler_set) set_warning_handler(std::move(previous));
    return kNumericError;
  } catch (const DomainError& e) {
    err << "mnardre: usage error: " << e.what() << '\n';
    if (handler_set) set_warning_handler(std::move(previous));
    return kUsage;
  } catch (const DataError& e) {
    err << "mnardre: data error: " << e.what() << '\n';
    if (handler_set) set_warning_handler(std::move(previous));
    return kDataError;
  } catch (const NumericError& e) {
    err << "mnardre: numeric error: " << e.what() << '\n';
    if (handler_set) set_warning_handler(std::move(previous));
    return kNumericError;
  } catch (const std::exception& e) {
    err << "mnardre: error: " << e.what() << '\n';
    if (handler_set) set_warning_handler(std::move(previous));
    return kFailure;
  }
  set_warning_handler(std::move(previous));
  return kOk;
}

}  // namespace mnardre::cli
