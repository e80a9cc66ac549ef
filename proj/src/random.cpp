#include "stable_loewner/random.hpp"

#include <cmath>
#include <numbers>

namespace sle {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

double RandomSource::uniform() noexcept {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomSource::exponential() noexcept { return -std::log(uniform()); }

double RandomSource::symmetric_angle() noexcept {
  return oriented(std::numbers::pi * (uniform() - 0.5));
}

double RandomSource::normal() noexcept {
  const double radius = std::sqrt(-2.0 * std::log(uniform()));
  const double angle = 2.0 * std::numbers::pi * uniform();
  return oriented(radius * std::cos(angle));
}

double RandomSource::sign() noexcept {
  return oriented((engine_() >> 63) != 0 ? 1.0 : -1.0);
}

}  // namespace sle
