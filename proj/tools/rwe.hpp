#pragma once

// Real-data protocol: repeated random splits of a user-supplied labelled CSV,
// mean imputation and normalisation fitted on the training split, per-feature
// standardized logistic missingness with random orientations, learned phi from
// queried entries, naive-Bayes fits, and power on held-out class-1 rows.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "mnardre/csv_io.hpp"
#include "mnardre/experiments.hpp"

namespace mnardre::cli {

struct RealDataSpec {
  std::size_t train0 = 0;
  std::size_t train1 = 0;
  std::size_t calib0 = 0;
  std::size_t test1 = 0;
  std::size_t reps = 100;
  std::uint64_t seed = 1;
  std::size_t queries = 10;
  int corrupted_class = 1;
  double alpha = 0.1;
  double delta = 0.05;
  double ci_level = 0.95;

  void validate(const LabeledData& data) const;
  std::string canonical() const;
};

/// Estimators reported: m-kliep-learned-phi, m-kliep (true phi), cc-kliep,
/// kliep-oracle-data (uncorrupted training data).
PowerResult run_real_data_experiment(const LabeledData& data, const RealDataSpec& spec);

}  // namespace mnardre::cli
