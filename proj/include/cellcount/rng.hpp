// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <random>

namespace cellcount {

// Seedable, splittable random stream. Child streams are keyed by
// (seed, stream index) through a splitmix64 finalizer so that workers
// with distinct indices never share state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed) ^ mix(stream + 0x632be59bd9b4e019ULL));
  }

  // Independent child stream; does not advance this stream.
  Rng child(std::uint64_t stream) const { return Rng(derive(seed_, stream)); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return engine_(); }
  bool bit() { return (engine_() >> 63) != 0; }

  // Uniform integer in [0, n). Precondition n >= 1.
  std::uint64_t below(std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(engine_);
  }

  double uniform01() {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    return d(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace cellcount
