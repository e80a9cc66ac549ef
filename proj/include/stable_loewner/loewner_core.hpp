#pragma once

// Chordal Loewner evolution for piecewise-constant drivers, solved exactly by
// composing elementary slit maps.

#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include "stable_loewner/stable_process.hpp"

namespace sle {

using Complex = std::complex<double>;

/// Right-continuous piecewise-constant driver: W(t) = levels[k] on
/// [breakpoints[k], breakpoints[k+1]), and levels.back() on
/// [breakpoints.back(), horizon].
struct Driver {
  std::vector<double> breakpoints;
  std::vector<double> levels;
  double horizon = 0.0;

  static Driver constant(double level, double horizon);
  /// Grid values become levels; the value at path time t_k holds on
  /// [t_k, t_{k+1}).  Large jumps are already level changes at their times.
  static Driver from_path(const LevyPath& path);

  void validate() const;
  double value_at(double t) const;
  /// Index of the piece containing t (right-continuous).
  std::size_t piece_at(double t) const;
  /// min / max of W over [0, T].
  double min_level(double T) const;
  double max_level(double T) const;
  /// Lebesgue measure of {t <= T : W_t in [lo, hi]}.
  double occupation_time(double lo, double hi, double T) const;
  Driver negated() const;
};

struct SlitStep {
  double w = 0.0;
  double dt = 0.0;
};

class MapChain {
 public:
  MapChain() = default;
  explicit MapChain(std::vector<SlitStep> steps);

  void append(const SlitStep& step);
  const std::vector<SlitStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  double total_time() const { return total_time_; }
  /// Half-plane capacity, 2 * total_time.
  double capacity() const { return 2.0 * total_time_; }
  /// (g_T(z) - z) * (z - c) at z = c + i radius (1 + spread), with c the
  /// centre of the step levels; tends to the capacity.
  double laurent_coefficient(double radius = 1e6) const;

 private:
  std::vector<SlitStep> steps_;
  double total_time_ = 0.0;
};

/// w + sqrt((z - w)^2 + 4 dt), image in the closed upper half-plane.
Complex forward_step(Complex z, const SlitStep& step);
/// w + sqrt((z - w)^2 - 4 dt), Im(result) >= Im(z).
Complex backward_step(Complex z, const SlitStep& step);

/// One step per constant piece of the driver on [0, T].
MapChain build_chain(const Driver& driver, double T);

/// Default swallowing tolerance 1e-9 (1 + |z|).
double default_swallow_tol(Complex z);

/// g_T(z).  Throws SwallowedError (carrying the step index) when z is
/// swallowed at or before total_time.
Complex evaluate_forward(const MapChain& chain, Complex z);
Complex evaluate_forward(const MapChain& chain, Complex z, double tol);
/// g_T^{-1}(z): backward steps in reverse order.  Total on the closed
/// half-plane.
Complex evaluate_inverse(const MapChain& chain, Complex z);
/// Inverse of the first `prefix` steps only.
Complex evaluate_inverse_prefix(const MapChain& chain, std::size_t prefix,
                                Complex z);
/// f_T(z) of the backward equation with the same driver: backward steps in
/// forward order.
Complex evaluate_backward_flow(const MapChain& chain, Complex z);

enum class TerminalKind { continuous_hit, jump_hit, survived };

const char* to_string(TerminalKind kind);

struct TrajectoryPoint {
  double t = 0.0;
  Complex g;  ///< g_t(z)
};

struct SwallowResult {
  double T_z = std::numeric_limits<double>::infinity();
  std::vector<TrajectoryPoint> trajectory;  ///< g_t(z) at piece boundaries
  TerminalKind terminal_kind = TerminalKind::survived;
  /// |g_{T_z}(z) - W_{T_z-}| for continuous hits, post-jump distance for
  /// jump hits.
  double terminal_distance = 0.0;

  bool swallowed() const { return terminal_kind != TerminalKind::survived; }
};

SwallowResult swallow_time(const Driver& driver, Complex z, double T,
                           double tol);
SwallowResult swallow_time(const Driver& driver, Complex z, double T);

/// min over t in [0, T] of |Re(g_t(z0) - W_t)|; zero if z0 is swallowed.
/// A value eps > 0 certifies that the ball B(z0, eps) misses K_T.
double real_part_clearance(const Driver& driver, Complex z0, double T);

struct TraceOptions {
  /// Initial samples per constant piece, uniform in sqrt(elapsed / dt).
  std::size_t samples_per_piece = 8;
  /// Bisect until consecutive points are closer than this (0 disables).
  double resolution = 0.0;
  int max_refine_depth = 12;
  double lift = 1e-8;
};

struct TracePoint {
  double t = 0.0;
  Complex z;
  /// The point is gamma(t-) at the end of a piece (not gamma(t)).
  bool left_limit = false;
};

struct TraceJump {
  std::size_t point_index = 0;  ///< first point after the level change
  double time = 0.0;
  double size = 0.0;
};

struct HullApprox {
  std::vector<TracePoint> points;
  std::vector<TraceJump> jumps;
  double horizon = 0.0;
  double capacity = 0.0;
  double lift = 0.0;
  /// Largest gap left between consecutive points of one piece when the
  /// refinement depth ran out (0 if the resolution was met everywhere).
  double unresolved_gap = 0.0;

  std::vector<Complex> positions() const;
};

/// gamma(t) = g_t^{-1}(W_t + i lift) sampled piece by piece.
HullApprox compute_trace(const Driver& driver, double T,
                         const TraceOptions& options = {});

}  // namespace sle
