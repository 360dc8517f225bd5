#pragma once

// Trim -> mean-impute -> normalize, fitted on training data and replayed on
// calibration and test data.

#include <optional>
#include <vector>

#include "mnardre/csv_io.hpp"
#include "mnardre/serialization.hpp"

namespace mnardre {

struct TrimBound {
  std::optional<double> lower;
  std::optional<double> upper;
};

struct PreprocessOptions {
  bool mean_impute = false;
  bool normalize = false;
  std::vector<TrimBound> trim;  // empty, or one bound per feature
};

struct TransformRecord {
  std::vector<TrimBound> trim;
  std::vector<double> impute_means;  // empty unless imputing
  std::vector<double> center;        // empty unless normalizing
  std::vector<double> scale;

  /// Applies the recorded steps. Missing marks survive unless imputing.
  LabeledData apply(const LabeledData& data) const;

  KeyValues to_key_values() const;
  static TransformRecord from_key_values(const KeyValues& kv);
};

/// Statistics come from `train` only. A zero-variance column is left
/// unscaled (scale 1) with a warning. Scales are population standard
/// deviations.
TransformRecord fit_preprocess(const LabeledData& train, const PreprocessOptions& options);

}  // namespace mnardre
