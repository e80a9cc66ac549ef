#pragma once

// Symmetric alpha-stable and truncated alpha-stable driving processes.
//
// Scale convention throughout: E[exp(i theta S_t)] = exp(-t |theta|^alpha).
// A driver with speed kappa is W_t = S_{kappa t}.

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "stable_loewner/random.hpp"

namespace sle {

struct StableParams {
  double alpha = 1.0;  ///< stability index in (0, 2]
  double kappa = 1.0;  ///< time-speed multiplier

  void validate() const;
};

struct JumpRecord {
  double time = 0.0;
  double size = 0.0;
};

/// Sampled driving function.  `times` start at 0 and increase strictly;
/// values[0] = 0.  For grid-sampled stable paths `large_jumps` flags grid
/// increments with magnitude above 1 (a proxy for true large jumps); for paths
/// assembled by recombine_large_jumps it lists the inserted jumps exactly.
struct LevyPath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<JumpRecord> large_jumps;

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  double final_value() const { return values.empty() ? 0.0 : values.back(); }
  void validate() const;
  LevyPath negated() const;
};

/// Truncation of the Levy measure at |h| = 1 with Gaussian replacement of the
/// jumps below `small_jump_threshold`.
struct TruncationConfig {
  static constexpr double cutoff = 1.0;
  double alpha = 1.0;
  double small_jump_threshold = 1e-3;
  double levy_constant = 0.0;

  /// Builds a configuration with the numerically calibrated Levy constant.
  static TruncationConfig make(double alpha, double small_jump_threshold = 1e-3);

  void validate() const;
  /// sigma^2(eps) = 2 c eps^(2-alpha) / (2-alpha): variance per unit time of
  /// the jumps below the threshold.
  double small_jump_variance() const;
  /// Intensity of jumps with threshold < |h| <= 1 per unit (process) time.
  double jump_rate() const;
};

/// c_alpha making c_alpha |h|^(-1-alpha) dh the Levy measure of S, found by
/// solving int (1 - cos h) c |h|^(-1-alpha) dh = 1 with quadrature.  Results
/// are cached per alpha.  Requires 0 < alpha < 2.
double levy_constant(double alpha);

/// Intensity lambda = c_alpha * int_{|h|>1} |h|^(-1-alpha) dh of jumps above 1.
double large_jump_rate(double alpha);

/// One draw of a standard symmetric stable variable (Chambers-Mallows-Stuck).
double sample_standard_stable(double alpha, RandomSource& rng);

/// One draw of S_{t+dt} - S_t for the standard process (kappa is not applied;
/// path samplers pass the effective time kappa * dt).
double sample_stable_increment(const StableParams& params, double dt,
                               RandomSource& rng);

/// |xi| > 1 with density proportional to |h|^(-1-alpha), random sign.
double sample_large_jump(double alpha, RandomSource& rng);

/// Threshold < |h| <= 1 with density proportional to |h|^(-1-alpha).
double sample_small_jump(const TruncationConfig& trunc, RandomSource& rng);

/// S_{kappa t} on the uniform grid k * horizon / n_steps.
LevyPath sample_stable_path(const StableParams& params, double horizon,
                            std::size_t n_steps, RandomSource& rng);

struct TruncatedPathSample {
  LevyPath path;
  /// Every compound-Poisson jump inserted, at its exact time.
  std::vector<JumpRecord> poisson_jumps;
};

/// Truncated process hat S_{kappa t}: compound-Poisson jumps on
/// threshold < |h| <= 1 at exact exponential arrival times plus a Brownian
/// component of variance sigma^2(threshold) per unit process time.
TruncatedPathSample sample_truncated_components(const StableParams& params,
                                                const TruncationConfig& trunc,
                                                double horizon,
                                                std::size_t n_steps,
                                                RandomSource& rng);

LevyPath sample_truncated_path(const StableParams& params,
                               const TruncationConfig& trunc, double horizon,
                               std::size_t n_steps, RandomSource& rng);

/// Concatenates truncated segments with the large jumps xi_k inserted at
/// T_k.  Segment k covers [T_k, T_{k+1}) and its horizon must equal
/// T_{k+1} - T_k (T_0 = 0); the last segment sets the overall horizon.
LevyPath recombine_large_jumps(std::span<const LevyPath> truncated_segments,
                               std::span<const double> jump_times,
                               std::span<const double> jump_sizes);

/// S_{kappa t} assembled from truncated segments and Poisson large jumps.
LevyPath sample_stable_path_recombined(const StableParams& params,
                                       const TruncationConfig& trunc,
                                       double horizon, std::size_t n_steps,
                                       RandomSource& rng);

// ---------------------------------------------------------------------------
// Streaming drivers for Monte Carlo loops that never materialise a path.

struct StableDriverModel {
  StableParams params;
  double grid_dt = 1e-2;
};

struct TruncatedDriverModel {
  StableParams params;
  TruncationConfig truncation;
  double grid_dt = 1e-2;
};

/// W identically zero, advanced on a grid.
struct ZeroDriverModel {
  double grid_dt = 1e-2;
};

using DriverModel =
    std::variant<StableDriverModel, TruncatedDriverModel, ZeroDriverModel>;

struct DriverEvent {
  double time = 0.0;       ///< absolute time at which the increment lands
  double dt = 0.0;         ///< time since the previous event
  double increment = 0.0;  ///< driver change at `time`
  bool poisson_jump = false;
  double jump_size = 0.0;
};

/// Generates the piecewise-constant driver event by event: the driver is
/// constant on (time - dt, time) and changes by `increment` at `time`.
class DriverStream {
 public:
  DriverStream(const DriverModel& model, RandomSource& rng);
  DriverEvent next();

 private:
  DriverModel model_;
  RandomSource* rng_;
  std::size_t grid_index_ = 0;
  double time_ = 0.0;
  double next_jump_time_ = 0.0;
  double jump_rate_ = 0.0;
  double diffusion_ = 0.0;
};

// ---------------------------------------------------------------------------

/// A C^2 function for the truncated fractional Laplacian.  When
/// `second_derivative` is empty it is estimated by Richardson-extrapolated
/// central differences.
struct TestFunction {
  std::function<double(double)> value;
  std::function<double(double)> second_derivative;
};

/// int_{-1}^{1} (f(x+h) - f(x) - f'(x) h) c_alpha |h|^(-1-alpha) dh.
///
/// Evaluated as the symmetric fold int_0^1 (f(x+h) + f(x-h) - 2 f(x)) c h^(-1-alpha)
/// dh, in which the f' term cancels exactly; a second-order Taylor patch
/// covers the innermost interval where the second difference loses precision.
/// Throws NumericalError when quad_tol cannot be met.
double truncated_frac_laplacian(const TestFunction& f, double x,
                                const StableParams& params, double quad_tol);

}  // namespace sle
