// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "rome/types.hpp"

namespace rome {

/// splitmix64 finalizer, used for seed derivation and content hashing.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Folds (base_seed, rep, role, ...) into one stream seed. Adding a new role
/// tag never perturbs the streams derived from existing tags.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ull;
  for (std::uint64_t p : parts) h = mix64(h ^ p);
  return h;
}

/// mt19937_64 stream with explicit Box-Muller normals. The standard library
/// distributions are implementation-defined, so everything downstream draws
/// through this wrapper to keep sequences identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// uniform on (0, 1), endpoints excluded
  Real uniform() {
    return (static_cast<Real>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// uniform integer in [0, n)
  Index uniform_index(Index n) {
    const auto wide = static_cast<unsigned __int128>(engine_());
    return static_cast<Index>((wide * static_cast<std::uint64_t>(n)) >> 64);
  }

  Real normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const Real u1 = uniform();
    const Real u2 = uniform();
    const Real r = std::sqrt(-2.0 * std::log(u1));
    const Real a = 2.0 * std::numbers::pi_v<Real> * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  RowVector normal_row(Index m) {
    RowVector z(m);
    for (Index i = 0; i < m; ++i) z(i) = normal();
    return z;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  Real spare_ = 0;
};

/// FNV-1a over the raw bytes of a matrix, row-major; used to derive
/// deterministic, argument-order-independent subsample seeds.
std::uint64_t content_hash(const Matrix& values);

}  // namespace rome
