#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hee {

/// Seedable random source used everywhere in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniform and normal variates are produced by our own transforms
/// (53-bit mantissa fill, Marsaglia polar method) instead of the
/// implementation-defined std distributions, so a given seed yields the same
/// stream on every platform and standard library.
///
/// Child streams are derived with std::seed_seq, whose mixing algorithm is
/// also specified by the standard: `Rng(seed, stream)` for distinct `stream`
/// values gives statistically independent generators.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : Rng(seed, 0) {}

  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32), 0x48454531u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); never returns 0.
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  /// Standard normal variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double a, b, s;
    do {
      a = 2.0 * uniform() - 1.0;
      b = 2.0 * uniform() - 1.0;
      s = a * a + b * b;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = b * scale;
    has_spare_ = true;
    return a * scale;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the draw unbiased and platform independent.
    const std::uint64_t limit = engine_.max() - engine_.max() % n;
    std::uint64_t r;
    do {
      r = engine_();
    } while (r >= limit);
    return r % n;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent streams owned by one chain. The sampler draws interneuron
/// noise from `u`, slow-unit noise from `x` and adaptation noise from `v`,
/// each in layer order 0..L, so the schedule of one stream never depends on
/// how many draws another stream consumed.
struct ChainRng {
  ChainRng(std::uint64_t seed, std::uint64_t chain)
      : u(seed, 3 * chain + 1), x(seed, 3 * chain + 2), v(seed, 3 * chain + 3) {}

  Rng u;
  Rng x;
  Rng v;
};

}  // namespace hee
