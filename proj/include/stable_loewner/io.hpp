#pragma once

// CSV and SVG output for paths, traces and flow trajectories.

#include <iosfwd>
#include <string>
#include <vector>

#include "stable_loewner/flow_dynamics.hpp"
#include "stable_loewner/loewner_core.hpp"
#include "stable_loewner/stable_process.hpp"

namespace sle {

/// Shortest round-trip decimal form ("%.17g"), locale independent.
std::string format_number(double x);

/// Columns t, W, is_large_jump.
void write_path_csv(std::ostream& out, const LevyPath& path);
/// Columns t, W: one row per breakpoint, plus the horizon when it lies past
/// the last breakpoint.  read_driver_csv reads it back.
void write_driver_csv(std::ostream& out, const Driver& driver);

/// Columns t, re, im, is_jump (1 on the first point after a level change).
void write_trace_csv(std::ostream& out, const HullApprox& hull);
/// Columns t, X, Y, log_deriv.
void write_trajectory_csv(std::ostream& out,
                          const std::vector<BackwardFlowState>& trajectory);

/// Reads a driver from CSV with a header and columns t, W (extra columns are
/// ignored).  The first row must be t = 0.
Driver read_driver_csv(std::istream& in);

struct SvgOptions {
  int width = 800;
  int height = 600;
  /// Start a new polyline at level changes at least this large.
  double break_jump = 0.0;
  std::string stroke = "#1f4e79";
  double stroke_width = 1.0;
};

/// One polyline per inter-jump piece of the trace, with the real axis drawn
/// for reference.
void write_hull_svg(std::ostream& out, const HullApprox& hull,
                    const SvgOptions& options = {});

}  // namespace sle
