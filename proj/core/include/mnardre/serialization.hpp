#pragma once

// Plain-text key = value files for fitted models and classifiers, the
// missingness specification mini-language, and run-config hashing.
//
// Missingness specs:
//   zero | const(p) | logistic(a0,a1,tau) | halfspace(p,level,a1,...,ad)
// evaluate jointly on the whole point; "coords:" followed by one spec per
// coordinate separated by ';' gives a per-coordinate function.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "mnardre/core_model.hpp"
#include "mnardre/np_classifier.hpp"

namespace mnardre {

using KeyValues = std::map<std::string, std::string>;

/// `key = value` lines; '#' starts a comment; later keys override earlier.
KeyValues read_key_values(std::istream& in);
KeyValues read_key_values(const std::filesystem::path& path);
void write_key_values(std::ostream& out, const KeyValues& kv);

MissingnessFunction parse_missingness(std::string_view spec);
std::string format_missingness(const MissingnessFunction& phi);

std::string_view feature_map_name(const FeatureMap& fmap);
FeatureMap parse_feature_map(std::string_view name, std::size_t input_dim);

KeyValues model_to_key_values(const RatioScorer& scorer);
RatioScorer model_from_key_values(const KeyValues& kv);

KeyValues classifier_to_key_values(const NpClassifier& clf);
NpClassifier classifier_from_key_values(const KeyValues& kv);

/// 64-bit FNV-1a.
std::uint64_t config_hash(std::string_view canonical);
std::string hex64(std::uint64_t v);

}  // namespace mnardre
