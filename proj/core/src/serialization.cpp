#include "mnardre/serialization.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "mnardre/csv_io.hpp"
#include "mnardre/diagnostics.hpp"

namespace mnardre {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double number(std::string_view text, std::string_view what) {
  const auto v = parse_double(text);
  if (!v) throw DomainError(std::string(what) + ": '" + std::string(text) + "' is not a finite number");
  return *v;
}

// Like number() but accepting inf / -inf.
double extended_number(std::string_view text, std::string_view what) {
  text = trim(text);
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  return number(text, what);
}

const std::string& require(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw DataError("missing key '" + key + "'");
  return it->second;
}

std::size_t count_value(const KeyValues& kv, const std::string& key) {
  const double v = number(require(kv, key), key);
  if (v < 0 || v != std::floor(v)) throw DataError("key '" + key + "' must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

bool flag_value(const KeyValues& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) return false;
  if (it->second == "1" || it->second == "true") return true;
  if (it->second == "0" || it->second == "false") return false;
  throw DataError("key '" + key + "' must be 0 or 1");
}

std::string join_vector(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

Eigen::VectorXd parse_vector(std::string_view text, const std::string& key) {
  std::vector<double> vals;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) vals.push_back(number(tok, key));
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

MissingnessEntry parse_entry(std::string_view spec) {
  spec = trim(spec);
  if (spec == "zero" || spec == "none") return ZeroMissingness{};
  const auto open = spec.find('(');
  if (open == std::string_view::npos || spec.back() != ')')
    throw DomainError("missingness spec '" + std::string(spec) + "' is not of the form name(args)");
  const auto name = trim(spec.substr(0, open));
  const auto args = split(spec.substr(open + 1, spec.size() - open - 2), ',');
  std::vector<double> v;
  for (auto a : args) v.push_back(number(a, "missingness argument"));
  MissingnessEntry e;
  if (name == "const") {
    if (v.size() != 1) throw DomainError("const(p) takes one argument");
    e = ConstantMissingness{v[0]};
  } else if (name == "logistic") {
    if (v.size() != 3) throw DomainError("logistic(a0,a1,tau) takes three arguments");
    if (v[2] != 1.0 && v[2] != -1.0) throw DomainError("logistic orientation tau must be -1 or 1");
    e = LogisticMissingness{v[0], v[1], static_cast<int>(v[2])};
  } else if (name == "halfspace") {
    if (v.size() < 3) throw DomainError("halfspace(p,level,a1,...) needs a direction");
    e = HalfspaceMissingness{std::vector<double>(v.begin() + 2, v.end()), v[1], v[0]};
  } else {
    throw DomainError("unknown missingness function '" + std::string(name) + "'");
  }
  validate_missingness(e);
  return e;
}

std::string format_entry(const MissingnessEntry& e) {
  if (std::holds_alternative<ZeroMissingness>(e)) return "zero";
  if (const auto* c = std::get_if<ConstantMissingness>(&e)) return "const(" + format_double(c->prob) + ")";
  if (const auto* l = std::get_if<LogisticMissingness>(&e))
    return "logistic(" + format_double(l->intercept) + "," + format_double(l->slope) + "," +
           std::to_string(l->sign) + ")";
  if (const auto* h = std::get_if<HalfspaceMissingness>(&e)) {
    std::string s = "halfspace(" + format_double(h->prob) + "," + format_double(h->level);
    for (double a : h->direction) s += "," + format_double(a);
    return s + ")";
  }
  throw DomainError("tabulated missingness cannot be written as a spec");
}

void put_model(KeyValues& kv, const LogLinearRatioModel& m, const std::string& suffix) {
  kv["theta" + suffix] = join_vector(m.theta());
  if (m.normalizer()) kv["normalizer" + suffix] = format_double(*m.normalizer());
}

LogLinearRatioModel get_model(const KeyValues& kv, const FeatureMap& fmap, const std::string& suffix) {
  const auto key = "theta" + suffix;
  Eigen::VectorXd theta = parse_vector(require(kv, key), key);
  std::optional<double> norm;
  if (const auto it = kv.find("normalizer" + suffix); it != kv.end()) norm = number(it->second, it->first);
  return LogLinearRatioModel(fmap, std::move(theta), norm);
}

}  // namespace

KeyValues read_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
    v = trim(v);
    if (v.empty()) continue;
    const auto eq = v.find('=');
    if (eq == std::string_view::npos)
      throw DataError("line " + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(v.substr(0, eq));
    if (key.empty()) throw DataError("line " + std::to_string(lineno) + ": empty key");
    kv[std::string(key)] = std::string(trim(v.substr(eq + 1)));
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_key_values(in);
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
  for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

MissingnessFunction parse_missingness(std::string_view spec) {
  spec = trim(spec);
  constexpr std::string_view prefix = "coords:";
  if (spec.substr(0, prefix.size()) == prefix) {
    std::vector<MissingnessEntry> entries;
    for (auto part : split(spec.substr(prefix.size()), ';')) entries.push_back(parse_entry(part));
    return MissingnessFunction::per_coordinate(std::move(entries));
  }
  return MissingnessFunction::joint(parse_entry(spec));
}

std::string format_missingness(const MissingnessFunction& phi) {
  if (phi.scope() == MissingnessFunction::Scope::Joint) return format_entry(phi.entries().front());
  std::string s = "coords:";
  for (std::size_t j = 0; j < phi.entries().size(); ++j) s += (j ? ";" : "") + format_entry(phi.entries()[j]);
  return s;
}

std::string_view feature_map_name(const FeatureMap& fmap) {
  switch (fmap.kind()) {
    case FeatureMap::Kind::Identity: return "identity";
    case FeatureMap::Kind::IdentityPlusSquares: return "identity_plus_squares";
    case FeatureMap::Kind::Custom: break;
  }
  throw DomainError("custom feature map '" + fmap.name() + "' cannot be serialized");
}

FeatureMap parse_feature_map(std::string_view name, std::size_t input_dim) {
  if (name == "identity") return FeatureMap::identity(input_dim);
  if (name == "identity_plus_squares") return FeatureMap::identity_plus_squares(input_dim);
  throw DomainError("unknown feature map '" + std::string(name) + "'");
}

KeyValues model_to_key_values(const RatioScorer& scorer) {
  KeyValues kv;
  if (const auto* m = std::get_if<LogLinearRatioModel>(&scorer.source())) {
    kv["kind"] = "loglinear";
    kv["features"] = feature_map_name(m->feature_map());
    kv["input_dim"] = std::to_string(m->input_dim());
    put_model(kv, *m, "");
  } else if (const auto* nb = std::get_if<NaiveBayesRatioModel>(&scorer.source())) {
    kv["kind"] = "naive_bayes";
    kv["features"] = feature_map_name((*nb)[0].feature_map());
    kv["input_dim"] = std::to_string(nb->dim());
    for (std::size_t j = 0; j < nb->dim(); ++j) put_model(kv, (*nb)[j], "." + std::to_string(j));
  } else {
    throw DomainError("analytic scorers cannot be serialized");
  }
  return kv;
}

RatioScorer model_from_key_values(const KeyValues& kv) {
  const auto& kind = require(kv, "kind");
  const auto& features = require(kv, "features");
  const std::size_t d = count_value(kv, "input_dim");
  if (d == 0) throw DataError("input_dim must be positive");
  if (kind == "loglinear") return get_model(kv, parse_feature_map(features, d), "");
  if (kind == "naive_bayes") {
    const FeatureMap f1 = parse_feature_map(features, 1);
    std::vector<LogLinearRatioModel> per_dim;
    for (std::size_t j = 0; j < d; ++j) per_dim.push_back(get_model(kv, f1, "." + std::to_string(j)));
    return NaiveBayesRatioModel(std::move(per_dim));
  }
  throw DataError("unknown model kind '" + kind + "'");
}

KeyValues classifier_to_key_values(const NpClassifier& clf) {
  KeyValues kv = model_to_key_values(clf.scorer());
  const auto& t = clf.threshold_info();
  kv["threshold"] = format_double(t.threshold);
  kv["transform"] = clf.transform() == ScoreTransform::Log ? "log" : "identity";
  kv["alpha"] = format_double(clf.alpha());
  kv["delta"] = format_double(clf.delta());
  kv["method"] = clf.method() == ThresholdMethod::Binomial ? "binomial" : "missing_weighted";
  kv["order_index"] = std::to_string(t.index);
  kv["margin"] = format_double(t.margin);
  kv["calibration_size"] = std::to_string(t.calibration_size);
  kv["degenerate"] = t.degenerate ? "1" : "0";
  kv["all_missing"] = t.all_missing ? "1" : "0";
  kv["non_paper"] = t.non_paper ? "1" : "0";
  return kv;
}

NpClassifier classifier_from_key_values(const KeyValues& kv) {
  RatioScorer scorer = model_from_key_values(kv);
  ThresholdResult t;
  t.threshold = extended_number(require(kv, "threshold"), "threshold");
  t.index = count_value(kv, "order_index");
  t.margin = number(require(kv, "margin"), "margin");
  t.calibration_size = count_value(kv, "calibration_size");
  t.degenerate = flag_value(kv, "degenerate");
  t.all_missing = flag_value(kv, "all_missing");
  t.non_paper = flag_value(kv, "non_paper");
  const auto& tr = require(kv, "transform");
  if (tr != "log" && tr != "identity") throw DataError("transform must be 'log' or 'identity'");
  const auto& method = require(kv, "method");
  if (method != "binomial" && method != "missing_weighted")
    throw DataError("method must be 'binomial' or 'missing_weighted'");
  return NpClassifier(std::move(scorer), tr == "log" ? ScoreTransform::Log : ScoreTransform::Identity, t,
                      number(require(kv, "alpha"), "alpha"), number(require(kv, "delta"), "delta"),
                      method == "binomial" ? ThresholdMethod::Binomial : ThresholdMethod::MissingWeighted);
}

std::uint64_t config_hash(std::string_view canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace mnardre
