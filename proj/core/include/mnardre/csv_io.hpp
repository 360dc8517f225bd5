#pragma once

// CSV interchange for datasets with missing marks.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mnardre/core_model.hpp"

namespace mnardre {

struct CsvOptions {
  std::string missing_token = "NA";
  bool allow_empty = true;           // an empty field is also a missing mark
  std::string label_column = "label";
  bool require_label = true;         // false: a missing label column yields no labels
};

/// Rows of a CSV file. Lines starting with '#' are comments.
struct LabeledData {
  std::vector<std::string> features;
  std::vector<ObservedPoint> points;
  std::vector<int> labels;  // empty when the file has no label column

  std::size_t size() const { return points.size(); }
  std::size_t count(int label) const;
  /// Points of one class; throws DataError when the class is absent.
  Dataset class_data(int label) const;
  DatasetPair pair() const { return {class_data(0), class_data(1)}; }
  /// All points regardless of label, tagged with `label`.
  Dataset as_dataset(int label) const;
  LabeledData subset(const std::vector<std::size_t>& rows) const;
};

/// Parse errors are DataError with the 1-based line number.
LabeledData read_csv(std::istream& in, const CsvOptions& options = {});
LabeledData read_csv(const std::filesystem::path& path, const CsvOptions& options = {});

void write_csv(std::ostream& out, const LabeledData& data, const CsvOptions& options = {});
void write_csv(const std::filesystem::path& path, const LabeledData& data, const CsvOptions& options = {});

/// Builds a labeled table from a dataset pair, class 0 rows first.
LabeledData to_labeled(const DatasetPair& pair, std::vector<std::string> features = {});

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);
/// Strict parse of a whole field; nullopt when it is not a finite number.
std::optional<double> parse_double(std::string_view text);

}  // namespace mnardre
