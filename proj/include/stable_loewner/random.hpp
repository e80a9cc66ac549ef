#pragma once

#include <cstdint>
#include <random>

namespace sle {

/// Counter-based seed derivation: stream `index` of master seed `master`.
/// Uses two rounds of the splitmix64 finalizer so neighbouring indices
/// produce unrelated engine states.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded random source used by every sampler in the library.
///
/// Symmetric draws (angles, normals, signs) go through a single mirror switch:
/// a mirrored source returns the exact negation of every symmetric draw of the
/// unmirrored source with the same seed, while magnitudes (uniforms,
/// exponentials) are unchanged.  Paths built from a mirrored source are
/// therefore exact negations of the unmirrored ones.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, bool mirrored = false)
      : engine_(seed), mirrored_(mirrored) {}

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Exp(1).
  double exponential() noexcept;
  /// Uniform on (-pi/2, pi/2); symmetric draw.
  double symmetric_angle() noexcept;
  /// Standard normal (Box-Muller, cosine branch); symmetric draw.
  double normal() noexcept;
  /// +1 or -1 with equal probability; symmetric draw.
  double sign() noexcept;

  bool mirrored() const noexcept { return mirrored_; }

 private:
  double oriented(double x) const noexcept { return mirrored_ ? -x : x; }

  std::mt19937_64 engine_;
  bool mirrored_;
};

}  // namespace sle
