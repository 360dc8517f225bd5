#include "mnardre/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mnardre/diagnostics.hpp"

namespace mnardre {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

DataError line_error(std::size_t line, const std::string& what) {
  return DataError("line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::size_t LabeledData::count(int label) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset LabeledData::class_data(int label) const {
  if (labels.empty()) throw DataError("data has no label column");
  std::vector<ObservedPoint> pts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == label) pts.push_back(points[i]);
  }
  if (pts.empty()) throw DataError("data has no class-" + std::to_string(label) + " rows");
  return Dataset(std::move(pts), label);
}

Dataset LabeledData::as_dataset(int label) const {
  if (points.empty()) throw DataError("data has no rows");
  return Dataset(points, label);
}

LabeledData LabeledData::subset(const std::vector<std::size_t>& rows) const {
  LabeledData out;
  out.features = features;
  for (auto r : rows) {
    if (r >= points.size()) throw DomainError("row index " + std::to_string(r) + " out of range");
    out.points.push_back(points[r]);
    if (!labels.empty()) out.labels.push_back(labels[r]);
  }
  return out;
}

LabeledData read_csv(std::istream& in, const CsvOptions& options) {
  LabeledData out;
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::size_t> label_col;
  std::size_t ncols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto fields = split(view);
    if (!have_header) {
      have_header = true;
      ncols = fields.size();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (!options.label_column.empty() && fields[c] == options.label_column) {
          if (label_col) throw line_error(lineno, "label column appears twice");
          label_col = c;
        } else {
          out.features.emplace_back(fields[c]);
        }
      }
      if (options.require_label && !label_col)
        throw line_error(lineno, "no '" + options.label_column + "' column in the header");
      if (out.features.empty()) throw line_error(lineno, "no feature columns");
      continue;
    }
    if (fields.size() != ncols)
      throw line_error(lineno, "expected " + std::to_string(ncols) + " fields, found " + std::to_string(fields.size()));
    std::vector<ObservedPoint::Coord> coords;
    coords.reserve(out.features.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto f = fields[c];
      if (label_col && c == *label_col) {
        if (f == "0") out.labels.push_back(0);
        else if (f == "1") out.labels.push_back(1);
        else throw line_error(lineno, "label '" + std::string(f) + "' is not 0 or 1");
        continue;
      }
      if (f == options.missing_token || (f.empty() && options.allow_empty)) {
        coords.emplace_back(std::nullopt);
        continue;
      }
      const auto v = parse_double(f);
      if (!v) throw line_error(lineno, "field '" + std::string(f) + "' in column '" + out.features[coords.size()] +
                                           "' is not a finite number");
      coords.emplace_back(*v);
    }
    out.points.emplace_back(std::move(coords));
  }
  if (!have_header) throw DataError("CSV input is empty");
  return out;
}

LabeledData read_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, options);
}

void write_csv(std::ostream& out, const LabeledData& data, const CsvOptions& options) {
  for (std::size_t c = 0; c < data.features.size(); ++c) out << (c ? "," : "") << data.features[c];
  const bool labelled = !data.labels.empty();
  if (labelled) out << ',' << options.label_column;
  out << '\n';
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& p = data.points[i];
    if (p.dim() != data.features.size()) throw DataError("row width does not match the header");
    for (std::size_t j = 0; j < p.dim(); ++j) {
      if (j) out << ',';
      out << (p[j] ? format_double(*p[j]) : options.missing_token);
    }
    if (labelled) out << ',' << data.labels[i];
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const LabeledData& data, const CsvOptions& options) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data, options);
}

LabeledData to_labeled(const DatasetPair& pair, std::vector<std::string> features) {
  LabeledData out;
  const std::size_t d = pair.class0.dim();
  if (features.empty()) {
    for (std::size_t j = 0; j < d; ++j) features.push_back("x" + std::to_string(j + 1));
  }
  if (features.size() != d) throw DataError("feature names do not match the dimension");
  out.features = std::move(features);
  for (const auto* ds : {&pair.class0, &pair.class1}) {
    for (const auto& p : ds->points()) {
      out.points.push_back(p);
      out.labels.push_back(ds->label());
    }
  }
  return out;
}

}  // namespace mnardre
