#pragma once

// Geometry of simulated hulls and Monte Carlo checks built on the flows.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stable_loewner/flow_dynamics.hpp"
#include "stable_loewner/loewner_core.hpp"
#include "stable_loewner/parallel.hpp"
#include "stable_loewner/statistics.hpp"

namespace sle {

/// Occupied cells of the axis-aligned grid with mesh eps.
std::size_t box_count(const std::vector<Complex>& points, double eps);

struct DimensionFit {
  std::vector<double> scales;
  std::vector<std::size_t> counts;
  /// -d log N / d log eps; present only when r2 >= kMinDimensionR2.
  std::optional<double> slope;
  double raw_slope = 0.0;
  double r2 = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double kMinDimensionR2 = 0.98;

/// Box-counting slope over n_scales log-spaced eps in [eps_min, eps_max]
/// (at least 1.5 decades).  Throws FitError when every count is equal.
DimensionFit dimension_estimate(const HullApprox& hull, double eps_min,
                                double eps_max, std::size_t n_scales = 9);
DimensionFit dimension_estimate(const std::vector<Complex>& points,
                                double point_spacing, double eps_min,
                                double eps_max, std::size_t n_scales = 9);

/// Largest distance between consecutive points (a trace resolution proxy).
double max_point_spacing(const std::vector<Complex>& points);

/// Symmetric Hausdorff distance between finite point sets.
double hausdorff_distance(const std::vector<Complex>& a,
                          const std::vector<Complex>& b);

/// Hausdorff distance between a point set and the segment [p, q]: exact
/// point-to-segment distances one way, n_segment_points samples the other.
double hausdorff_to_segment(const std::vector<Complex>& points, Complex p,
                            Complex q, std::size_t n_segment_points = 1000);

enum class HullDriverKind { stable, zero };

struct RescaledHullConfig {
  double alpha = 1.0;
  std::vector<double> s_values{0.2, 0.1, 0.05};
  std::size_t n_paths = 50;
  std::size_t n_steps = 400;       ///< driver grid on [0, 1]
  double resolution = 1e-3;        ///< trace resolution (0: no refinement)
  double height_eps = 0.5;         ///< eps_h for the height-avoidance frequency
  HullDriverKind driver = HullDriverKind::stable;

  void validate() const;
};

/// For each s: (1/s) K_{s^2}, realised as the time-1 hull for the driver
/// S_{s^(2-alpha) t}.  The report is about the Hausdorff distance to [0, 2i];
/// extras carry s, the frequency of reaching height eps_h and the capacity.
std::vector<ExperimentReport> rescaled_hull_experiment(
    const RescaledHullConfig& cfg, std::uint64_t master_seed,
    const ParallelFor& parallel = {});

struct LemmaL1Certificate {
  bool range_ok = true;          ///< part (a)
  bool height_ok = true;         ///< part (b)
  bool height_applicable = false;
  double a = 0.0, b = 0.0;       ///< range of W on [0, T]
  double occupation_eps = 0.0;   ///< occupation of 10I divided by T
  double height_bound = 0.0;     ///< 4 sqrt(eps T)
  std::optional<TracePoint> offending;
  std::string message;

  bool ok() const { return range_ok && height_ok; }
};

/// Checks both parts of the confinement lemma on a computed trace.  The
/// interval I = [centre - sqrt(T)/2, centre + sqrt(T)/2].
LemmaL1Certificate check_lemma_l1(const Driver& driver, double T,
                                  const HullApprox& hull, double interval_centre,
                                  double tol = 1e-6);

struct LemmaL2Certificate {
  double clearance = 0.0;   ///< min_t |Re(g_t(z0) - W_t)|
  std::size_t probes = 0;
  std::size_t swallowed_probes = 0;
  std::optional<Complex> offending;

  bool ok() const { return swallowed_probes == 0; }
};

/// Computes the real-part clearance eps of z0 and probes points of
/// B(z0, eps) in the closed upper half-plane for survival up to T.
LemmaL2Certificate check_lemma_l2(const Driver& driver, double T, Complex z0,
                                  std::size_t n_probes, RandomSource& rng);

enum class MomentDriverKind { truncated, zero };

struct DerivativeMomentConfig {
  double alpha = 1.0;
  double kappa = 0.01;
  double beta = 1.0;
  double delta = 0.5;
  Complex z{0.2, 0.2};
  double u = 1.6094379124341003;  ///< -log 0.2
  std::size_t n_paths = 2000;
  double t_max = 1e3;
  double grid_dt = 1e-2;
  double small_jump_threshold = 1e-3;
  /// Tail check P(max_{t <= tail_T} |f_t'(z)| >= y^(rho - 1)).
  double rho = 0.5;
  double tail_T = 1.0;
  MomentDriverKind driver = MomentDriverKind::truncated;

  void validate() const;
};

/// E_z[|f~_u'(z)|^beta ; gamma_u < t_max].  extras: bound
/// (e^{-(beta-delta)u} (x^2+y^2)^{beta/2} y^{-beta}), tail_probability,
/// tail_threshold.
ExperimentReport derivative_moment_experiment(const DerivativeMomentConfig& cfg,
                                              std::uint64_t master_seed,
                                              const ParallelFor& parallel = {});

struct Region {
  double x_min = -1.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;

  void validate() const;
};

struct HoelderReport {
  double exponent = 0.0;  ///< largest gamma with a stable constant
  double constant = 0.0;  ///< fitted constant at that gamma (finest mesh)
  std::vector<double> mesh_sizes;
  std::vector<double> gamma_grid;
  /// constants[i][j]: sup |df| / |dz|^gamma_j on mesh i.
  std::vector<std::vector<double>> constants;
  std::vector<std::string> warnings;
};

/// Evaluates f_T on dyadic meshes with spacing mesh, mesh/2, mesh/4 and fits
/// sup |f(z) - f(z')| / |z - z'|^gamma over pairs at distance in
/// [h, 10 h].  The exponent is the largest gamma whose constant changes by
/// at most stability_tol (relative) between successive refinements.  Throws
/// NumericalError when the region holds fewer than 4 mesh cells per side.
HoelderReport modulus_estimate(const Driver& driver, double T,
                               const Region& region, double mesh,
                               double stability_tol = 0.01);

struct RcllOptions {
  double j_min = 0.5;           ///< jumps treated as macroscopic
  double modulus_slack = 1e3;   ///< allowed multiple of the median ratio
  double gap_min = 1e-9;        ///< a macroscopic jump must open a gap above this
  double attach_tol = 0.0;      ///< 0: derived from the trace resolution
};

struct RcllJumpCheck {
  double time = 0.0;
  double size = 0.0;
  double gap = 0.0;             ///< |gamma(t) - gamma(t-)|
  double left_limit_step = 0.0; ///< last step before the jump
  double attach_distance = 0.0; ///< distance of gamma(t) to R or earlier trace
  bool ok = false;
};

struct RcllReport {
  bool modulus_ok = true;
  double modulus_constant = 0.0;  ///< fitted C in |dgamma| <= C (sqrt dt + |dW|)
  double worst_ratio = 0.0;
  std::size_t pairs_checked = 0;
  std::vector<RcllJumpCheck> jumps;
  std::vector<std::string> failures;

  bool ok() const;
};

/// Jump structure of a trace: continuity between macroscopic jumps, and at
/// each of them a gap, a left limit and a new branch attached to R or to
/// the earlier hull.
RcllReport rcll_check(const HullApprox& hull, const Driver& driver,
                      const RcllOptions& options = {});

nlohmann::json to_json(const DimensionFit& fit);
nlohmann::json to_json(const HoelderReport& report);
nlohmann::json to_json(const RcllReport& report);

}  // namespace sle
