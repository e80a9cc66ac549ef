#pragma once

// Backward Loewner flow seen from the driver: Z_t = f_t(z) - W_t = X + iY.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "stable_loewner/loewner_core.hpp"
#include "stable_loewner/parallel.hpp"
#include "stable_loewner/statistics.hpp"

namespace sle {

struct BackwardFlowState {
  double t = 0.0;
  double X = 0.0;
  double Y = 0.0;
  double log_deriv = 0.0;  ///< log |f_t'(z)|
};

struct TimeChangeRecord {
  double u = 0.0;
  /// First time Y reaches Y_0 e^u; +infinity if never reached.
  double gamma_u = std::numeric_limits<double>::infinity();
  double log_deriv = 0.0;  ///< log |f'| at gamma_u (when reached)
  double X = 0.0;          ///< X at gamma_u (when reached)

  bool reached() const { return gamma_u < std::numeric_limits<double>::infinity(); }
};

/// Flows over dt with the driver held constant, then applies the driver
/// increment dW to X.  dt = 0 is a pure jump.
BackwardFlowState step_backward_xy(const BackwardFlowState& state, double dW,
                                   double dt);

/// Incremental backward flow with time-change bookkeeping.  Feed it constant
/// pieces (flow) and driver jumps (jump) in time order.
class BackwardFlow {
 public:
  explicit BackwardFlow(Complex z, std::vector<double> u_levels = {});

  void flow(double dt);
  void jump(double dW);

  const BackwardFlowState& state() const { return state_; }
  const std::vector<TimeChangeRecord>& records() const { return records_; }
  bool all_reached() const { return pending_ == 0; }
  /// max over elapsed time of log |f_t'(z)|.
  double max_log_deriv() const { return max_log_deriv_; }
  double initial_height() const { return y0_; }

 private:
  BackwardFlowState state_;
  double y0_;
  std::vector<TimeChangeRecord> records_;
  std::size_t pending_ = 0;
  double max_log_deriv_ = 0.0;
};

struct BackwardFlowResult {
  BackwardFlowState final_state;
  std::vector<TimeChangeRecord> time_changes;
  /// State after every constant piece, starting with the initial state.
  std::vector<BackwardFlowState> trajectory;
  double max_log_deriv = 0.0;
};

BackwardFlowResult run_backward_flow(Complex z, const Driver& driver, double T,
                                     const std::vector<double>& u_levels = {});

enum class FlowDirection { forward, backward };

FlowDirection parse_direction(const std::string& name);
const char* to_string(FlowDirection direction);

struct RealFlowPoint {
  double t = 0.0;
  double X = 0.0;
};

struct RealFlowResult {
  std::vector<RealFlowPoint> trajectory;  ///< X at piece boundaries
  bool hit = false;
  double hit_time = std::numeric_limits<double>::infinity();
};

/// X_t = Z_t - W_t for dZ = +-2 / (Z - W) dt on the real line, solved per
/// constant piece.  Stops when |X| <= tol.
RealFlowResult real_line_flow(double x, const Driver& driver, double T,
                              FlowDirection direction, double tol = 1e-12);

struct ExitProbabilityConfig {
  double alpha = 1.0;
  double x0 = 1.0;
  double r = 0.5;
  double R = 10.0;  ///< may be +infinity
  std::size_t n_paths = 1000;
  double t_max = 100.0;
  FlowDirection direction = FlowDirection::forward;
  double grid_dt = 1e-2;

  void validate() const;
};

/// P_x(tau_r < tau_R) for the real-line flow driven by a stable process.
/// extras: supermartingale_bound (u(x)/u(r)), hit_r_fraction,
/// hit_R_fraction.
ExperimentReport exit_probability_experiment(const ExitProbabilityConfig& cfg,
                                             std::uint64_t master_seed,
                                             const ParallelFor& parallel = {});

struct HeightReachConfig {
  double alpha = 1.5;
  double kappa = 1.0;
  Complex z{0.0, 0.5};
  double u = 1.0;
  std::size_t n_paths = 2000;
  double t_max = 50.0;
  double grid_dt = 1e-2;

  void validate() const;
};

/// P_z(gamma_u < t_max) for the backward flow driven by a stable process.
ExperimentReport height_reach_experiment(const HeightReachConfig& cfg,
                                         std::uint64_t master_seed,
                                         const ParallelFor& parallel = {});

/// Censoring above this fraction attaches a warning to a report.
inline constexpr double kCensoringWarningLevel = 0.10;

}  // namespace sle
