#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace sle {

/// Execution policy injected by callers: run body(i) for every i in [0, count).
/// Library code never spawns threads itself; an empty ParallelFor runs
/// sequentially.
using ParallelFor =
    std::function<void(std::size_t count,
                       const std::function<void(std::size_t)>& body)>;

/// Evaluates kernel(i) for every index into a vector slot of its own, so the
/// result does not depend on scheduling order.
template <class Result, class Kernel>
std::vector<Result> map_indexed(std::size_t count, const ParallelFor& parallel,
                                Kernel&& kernel) {
  std::vector<Result> out(count);
  const std::function<void(std::size_t)> body = [&](std::size_t i) {
    out[i] = kernel(i);
  };
  if (parallel) {
    parallel(count, body);
  } else {
    for (std::size_t i = 0; i < count; ++i) body(i);
  }
  return out;
}

}  // namespace sle
