#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mnardre {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded generator with platform-independent uniform and normal draws.
///
/// std::normal_distribution and std::uniform_real_distribution are
/// implementation-defined, so the transforms are done here on top of the
/// fully specified mt19937_64 output. Given the same seed every platform
/// produces the same stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Generator for the stream identified by (seed, ids...).
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Standard normal (Marsaglia polar method, spare value cached).
  double normal();

  /// Uniform integer in [0, n) without modulo bias. Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mnardre
