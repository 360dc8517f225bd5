#include "mnardre/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

namespace {

double trimmed(double v, const TrimBound& b) {
  if (b.lower && v < *b.lower) v = *b.lower;
  if (b.upper && v > *b.upper) v = *b.upper;
  return v;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

std::vector<double> split_numbers(const std::string& text, const std::string& key) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    const auto v = parse_double(tok);
    if (!v) throw DataError("key '" + key + "': '" + tok + "' is not a number");
    out.push_back(*v);
  }
  return out;
}

std::string bound_text(const std::optional<double>& b) { return b ? format_double(*b) : "none"; }

}  // namespace

TransformRecord fit_preprocess(const LabeledData& train, const PreprocessOptions& options) {
  const std::size_t d = train.features.size();
  if (!options.trim.empty() && options.trim.size() != d)
    throw DomainError("trim bounds given for " + std::to_string(options.trim.size()) + " columns, data has " +
                      std::to_string(d));
  for (const auto& b : options.trim) {
    if (b.lower && b.upper && *b.lower > *b.upper) throw DomainError("trim lower bound exceeds upper bound");
  }
  if (train.points.empty()) throw DataError("training data has no rows");

  TransformRecord rec;
  rec.trim = options.trim;
  LabeledData work = rec.apply(train);

  if (options.mean_impute) {
    rec.impute_means.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      std::size_t k = 0;
      for (const auto& p : work.points) {
        if (p[j]) {
          s += *p[j];
          ++k;
        }
      }
      if (k == 0) throw DataError("column '" + train.features[j] + "' has no observed values to impute from");
      rec.impute_means[j] = s / static_cast<double>(k);
    }
    work = rec.apply(train);
  }

  if (options.normalize) {
    rec.center.assign(d, 0.0);
    rec.scale.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
      std::vector<double> vals;
      for (const auto& p : work.points) {
        if (p[j]) vals.push_back(*p[j]);
      }
      if (vals.empty()) throw DataError("column '" + train.features[j] + "' has no observed values");
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double ss = 0.0;
      for (double v : vals) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(vals.size()));
      rec.center[j] = mean;
      if (sd > 0.0) {
        rec.scale[j] = sd;
      } else {
        warn("column '" + train.features[j] + "' has zero variance; left unscaled");
      }
    }
  }
  return rec;
}

LabeledData TransformRecord::apply(const LabeledData& data) const {
  const std::size_t d = data.features.size();
  if ((!trim.empty() && trim.size() != d) || (!impute_means.empty() && impute_means.size() != d) ||
      (!center.empty() && center.size() != d))
    throw DataError("transform record does not match the data's column count");
  LabeledData out;
  out.features = data.features;
  out.labels = data.labels;
  out.points.reserve(data.points.size());
  for (const auto& p : data.points) {
    std::vector<ObservedPoint::Coord> c = p.coords();
    for (std::size_t j = 0; j < d; ++j) {
      if (c[j] && !trim.empty()) c[j] = trimmed(*c[j], trim[j]);
      if (!c[j] && !impute_means.empty()) c[j] = impute_means[j];
      if (c[j] && !center.empty()) c[j] = (*c[j] - center[j]) / scale[j];
    }
    out.points.emplace_back(std::move(c));
  }
  return out;
}

KeyValues TransformRecord::to_key_values() const {
  KeyValues kv;
  if (!trim.empty()) {
    std::string lo, hi;
    for (std::size_t j = 0; j < trim.size(); ++j) {
      lo += (j ? " " : "") + bound_text(trim[j].lower);
      hi += (j ? " " : "") + bound_text(trim[j].upper);
    }
    kv["trim_lower"] = lo;
    kv["trim_upper"] = hi;
  }
  if (!impute_means.empty()) kv["impute_means"] = join(impute_means);
  if (!center.empty()) {
    kv["center"] = join(center);
    kv["scale"] = join(scale);
  }
  return kv;
}

TransformRecord TransformRecord::from_key_values(const KeyValues& kv) {
  TransformRecord rec;
  const auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (const auto* lo = get("trim_lower")) {
    const auto* hi = get("trim_upper");
    if (!hi) throw DataError("trim_lower without trim_upper");
    std::istringstream a(*lo), b(*hi);
    std::string x, y;
    while (a >> x) {
      if (!(b >> y)) throw DataError("trim bounds differ in length");
      TrimBound t;
      if (x != "none") t.lower = split_numbers(x, "trim_lower").at(0);
      if (y != "none") t.upper = split_numbers(y, "trim_upper").at(0);
      rec.trim.push_back(t);
    }
  }
  if (const auto* m = get("impute_means")) rec.impute_means = split_numbers(*m, "impute_means");
  if (const auto* c = get("center")) {
    rec.center = split_numbers(*c, "center");
    const auto* s = get("scale");
    if (!s) throw DataError("center without scale");
    rec.scale = split_numbers(*s, "scale");
    if (rec.scale.size() != rec.center.size()) throw DataError("center and scale differ in length");
    for (double v : rec.scale) {
      if (!(v > 0.0)) throw DataError("scale entries must be positive");
    }
  }
  return rec;
}

}  // namespace mnardre
