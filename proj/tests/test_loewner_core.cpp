#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stable_loewner/errors.hpp"
#include "stable_loewner/loewner_core.hpp"

using namespace sle;

namespace {

Driver random_driver(std::uint64_t seed, double alpha, double kappa, std::size_t n, double T = 1.0) {
  RandomSource rng(seed);
  return Driver::from_path(sample_stable_path({alpha, kappa}, T, n, rng));
}

Complex random_point(RandomSource& rng) {
  return {4.0 * rng.uniform() - 2.0, 3.0 * rng.uniform() + 0.01};
}

}  // namespace

TEST_CASE("driver pieces") {
  Driver d;
  d.breakpoints = {0.0, 0.5, 0.75};
  d.levels = {0.0, 1.0, -2.0};
  d.horizon = 1.0;
  CHECK_NOTHROW(d.validate());
  CHECK(d.value_at(0.49) == 0.0);
  CHECK(d.value_at(0.5) == 1.0);
  CHECK(d.value_at(1.0) == -2.0);
  CHECK(d.min_level(0.6) == 0.0);
  CHECK(d.min_level(1.0) == -2.0);
  CHECK(d.max_level(0.4) == 0.0);
  CHECK(d.occupation_time(-0.5, 1.5, 1.0) == doctest::Approx(0.75));
  CHECK(d.occupation_time(-0.5, 1.5, 0.6) == doctest::Approx(0.6));
  CHECK(d.negated().levels[2] == 2.0);

  Driver bad = d;
  bad.breakpoints[1] = 0.8;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  bad = d;
  bad.horizon = 0.7;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  CHECK_THROWS_AS(build_chain(d, 1.5), ParameterError);
  CHECK_THROWS_AS(MapChain({{0.0, 0.0}}), ParameterError);
}

TEST_CASE("elementary maps for W = 0") {
  RandomSource rng(1);
  for (int i = 0; i < 200; ++i) {
    const Complex z = random_point(rng);
    const double dt = rng.uniform();
    CHECK(std::abs(forward_step(z, {0.0, dt}) - oracle::zero_driver_forward(z, dt)) < 1e-12);
    CHECK(std::abs(backward_step(z, {0.0, dt}) - oracle::zero_driver_backward(z, dt)) < 1e-12);
  }
  // Real points keep their side.
  CHECK(forward_step(Complex(-1.0, 0.0), {0.0, 1.0}).real() == doctest::Approx(-std::sqrt(5.0)));
  CHECK(forward_step(Complex(1.0, 0.0), {0.0, 1.0}).real() == doctest::Approx(std::sqrt(5.0)));
  CHECK(backward_step(Complex(0.0, 0.0), {0.0, 1.0}) == Complex(0.0, 2.0));
  CHECK(backward_step(Complex(3.0, 0.0), {1.0, 1.0}) == Complex(1.0, 0.0));
}

TEST_CASE("the zero driver grows a vertical slit") {
  const Driver d = Driver::constant(0.0, 1.0);
  TraceOptions opt;
  opt.samples_per_piece = 200;
  const HullApprox hull = compute_trace(d, 1.0, opt);
  double err = 0.0;
  for (const auto& p : hull.points) err = std::max(err, std::abs(p.z - Complex(0.0, 2.0 * std::sqrt(p.t))));
  CHECK(err < 1e-6);
  CHECK(hull.capacity == 2.0);
  CHECK(hull.jumps.empty());
}

TEST_CASE("forward and inverse maps round-trip") {
  RandomSource rng(2);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MapChain chain = build_chain(random_driver(seed, 1.2, 1.0, 50), 1.0);
    for (int i = 0; i < 50; ++i) {
      const Complex z = random_point(rng);
      try {
        const Complex g = evaluate_forward(chain, z);
        CHECK(std::abs(evaluate_inverse(chain, g) - z) < 1e-9);
      } catch (const SwallowedError&) {
      }
      const Complex h = evaluate_inverse(chain, z);
      CHECK(h.imag() >= z.imag() - 1e-12);
      CHECK(std::abs(evaluate_forward(chain, h) - z) < 1e-9);
    }
  }
}

TEST_CASE("capacity far from the origin") {
  // Levels of size 1e6 with unit spread, then a spread of 1e6.
  const MapChain shifted({{1e6, 0.5}, {1e6 + 1.0, 0.25}, {1e6 - 0.5, 0.25}});
  CHECK(shifted.laurent_coefficient() == doctest::Approx(2.0).epsilon(1e-9));
  const MapChain wide({{0.0, 0.5}, {5e6, 0.5}, {-2e5, 0.5}});
  CHECK(wide.laurent_coefficient() == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("capacity") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Driver d = random_driver(seed, 0.8, 1.0, 100, 2.0);
    const MapChain chain = build_chain(d, 2.0);
    CHECK(chain.capacity() == doctest::Approx(4.0));
    CHECK(chain.laurent_coefficient() == doctest::Approx(4.0).epsilon(1e-6));
    // Composition: the hull to time T is the hull to s followed by the rest.
    const MapChain first = build_chain(d, 0.8);
    std::vector<SlitStep> rest(chain.steps().begin() + static_cast<long>(first.size()),
                               chain.steps().end());
    const MapChain second(rest);
    CHECK(first.capacity() + second.capacity() == doctest::Approx(chain.capacity()));
    const Complex z(0.3, 1.7);
    CHECK(std::abs(evaluate_forward(second, evaluate_forward(first, z)) -
                   evaluate_forward(chain, z)) < 1e-12);
  }
}

TEST_CASE("backward flow is the inverse map of the reversed driver") {
  const MapChain chain = build_chain(random_driver(5, 1.5, 1.0, 40), 1.0);
  std::vector<SlitStep> reversed(chain.steps().rbegin(), chain.steps().rend());
  const MapChain rev(reversed);
  RandomSource rng(3);
  for (int i = 0; i < 20; ++i) {
    const Complex z = random_point(rng);
    CHECK(evaluate_backward_flow(chain, z) == evaluate_inverse(rev, z));
  }
  const MapChain zero = build_chain(Driver::constant(0.0, 2.0), 2.0);
  CHECK(std::abs(evaluate_backward_flow(zero, Complex(0.5, 0.5)) -
                 oracle::zero_driver_backward(Complex(0.5, 0.5), 2.0)) < 1e-12);
}

TEST_CASE("swallowing") {
  const Driver zero = Driver::constant(0.0, 1.0);
  SUBCASE("points on the slit are hit continuously") {
    const SwallowResult r = swallow_time(zero, Complex(0.0, 1.0), 1.0);
    CHECK(r.terminal_kind == TerminalKind::continuous_hit);
    CHECK(r.T_z == doctest::Approx(0.25));
    const MapChain chain = build_chain(zero, 1.0);
    CHECK_THROWS_AS(evaluate_forward(chain, Complex(0.0, 1.0)), SwallowedError);
  }
  SUBCASE("points off the slit survive") {
    const SwallowResult r = swallow_time(zero, Complex(0.1, 1.0), 1.0);
    CHECK(!r.swallowed());
    CHECK(r.trajectory.back().t == 1.0);
    CHECK(std::abs(r.trajectory.back().g - oracle::zero_driver_forward(Complex(0.1, 1.0), 1.0)) < 1e-12);
    CHECK(!swallow_time(zero, Complex(2.0, 0.0), 1.0).swallowed());
  }
  SUBCASE("a jump onto a real point") {
    Driver d;
    d.breakpoints = {0.0, 0.25};
    d.levels = {0.0, 2.0};
    d.horizon = 1.0;
    const SwallowResult r = swallow_time(d, Complex(std::sqrt(3.0), 0.0), 1.0);
    CHECK(r.terminal_kind == TerminalKind::jump_hit);
    CHECK(r.T_z == doctest::Approx(0.25));
  }
  SUBCASE("points above the hull are never swallowed") {
    const SwallowResult r = swallow_time(zero, Complex(0.0, 2.5), 1.0);
    CHECK(!r.swallowed());
  }
  CHECK_THROWS_AS(swallow_time(zero, Complex(0.0, 0.0), 1.0), ParameterError);
  CHECK_THROWS_AS(swallow_time(zero, Complex(0.0, -1.0), 1.0), ParameterError);
}

TEST_CASE("real part clearance") {
  const Driver zero = Driver::constant(0.0, 1.0);
  CHECK(real_part_clearance(zero, Complex(0.5, 1.0), 1.0) == doctest::Approx(0.5));
  CHECK(real_part_clearance(zero, Complex(0.0, 1.0), 1.0) == 0.0);
  Driver d;
  d.breakpoints = {0.0, 0.5};
  d.levels = {0.0, 1.0};
  d.horizon = 1.0;
  const double c = real_part_clearance(d, Complex(1.0, 1.0), 1.0);
  const Complex g = oracle::zero_driver_forward(Complex(1.0, 1.0), 0.5);
  CHECK(c <= std::abs(g.real() - 1.0) + 1e-12);
}

TEST_CASE("trace of a jumping driver") {
  Driver d;
  d.breakpoints = {0.0, 0.5};
  d.levels = {0.0, 3.0};
  d.horizon = 1.0;
  TraceOptions opt;
  opt.samples_per_piece = 16;
  const HullApprox hull = compute_trace(d, 1.0, opt);
  REQUIRE(hull.jumps.size() == 1);
  const auto& jump = hull.jumps[0];
  CHECK(jump.time == 0.5);
  CHECK(jump.size == 3.0);
  const auto& before = hull.points[jump.point_index - 1];
  const auto& after = hull.points[jump.point_index];
  CHECK(before.left_limit);
  CHECK(std::abs(before.z - Complex(0.0, std::sqrt(2.0))) < 1e-6);
  // The new branch starts on the real line at g_{1/2}^{-1}(3) = sqrt(7).
  CHECK(std::abs(after.z - Complex(std::sqrt(7.0), 0.0)) < 1e-6);
  for (const auto& p : hull.points) CHECK(p.z.imag() >= 0.0);
  for (std::size_t i = 1; i < hull.points.size(); ++i) CHECK(hull.points[i].t >= hull.points[i - 1].t);
}

TEST_CASE("trace refinement meets the resolution") {
  const Driver d = random_driver(9, 1.0, 1.0, 100);
  TraceOptions opt;
  opt.samples_per_piece = 2;
  opt.resolution = 1e-3;
  const HullApprox hull = compute_trace(d, 1.0, opt);
  std::size_t next_jump = 0;
  for (std::size_t i = 1; i < hull.points.size(); ++i) {
    if (next_jump < hull.jumps.size() && hull.jumps[next_jump].point_index == i) {
      ++next_jump;
      continue;
    }
    if (hull.points[i - 1].left_limit) continue;
    CHECK(std::abs(hull.points[i].z - hull.points[i - 1].z) <= 1e-3 + hull.unresolved_gap);
  }
  CHECK_THROWS_AS(compute_trace(d, 1.0, TraceOptions{0, 0.0, 12, 1e-8}), ParameterError);
}
