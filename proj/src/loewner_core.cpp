#include "stable_loewner/loewner_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stable_loewner/errors.hpp"

namespace sle {

namespace {

// Root of s^2 = zeta^2 + sign * 4 dt in the closed upper half-plane.  On the
// real axis the root follows the side of zeta (zero goes right).
Complex half_plane_root(Complex zeta, double dt, bool forward) {
  const double r = 2.0 * std::sqrt(dt);
  const Complex shift = forward ? Complex(0.0, r) : Complex(r, 0.0);
  Complex s = std::sqrt((zeta - shift) * (zeta + shift));
  if (s.imag() < 0.0 || (s.imag() == 0.0 && zeta.real() < 0.0)) s = -s;
  return s;
}

// s - zeta written without cancellation.
Complex slit_displacement(Complex zeta, double dt, bool forward) {
  if (dt == 0.0) return 0.0;
  const Complex s = half_plane_root(zeta, dt, forward);
  const Complex sum = s + zeta;
  if (sum == Complex(0.0, 0.0)) return s - zeta;
  return (forward ? 4.0 * dt : -4.0 * dt) / sum;
}

// Smallest |zeta_t| for zeta_t^2 = zeta^2 + 4t, t in [0, dt].
double closest_approach(Complex zeta, double dt, double* at) {
  const Complex sq = zeta * zeta;
  const double t = std::clamp(-sq.real() / 4.0, 0.0, dt);
  if (at) *at = t;
  return std::sqrt(std::abs(Complex(sq.real() + 4.0 * t, sq.imag())));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

}  // namespace

Driver Driver::constant(double level, double horizon) {
  Driver d;
  d.breakpoints = {0.0};
  d.levels = {level};
  d.horizon = horizon;
  d.validate();
  return d;
}

Driver Driver::from_path(const LevyPath& path) {
  path.validate();
  Driver d;
  d.breakpoints = path.times;
  d.levels = path.values;
  d.horizon = path.horizon();
  return d;
}

void Driver::validate() const {
  require(!breakpoints.empty(), "Driver: no pieces");
  require(breakpoints.size() == levels.size(),
          "Driver: breakpoints/levels size mismatch");
  require(breakpoints.front() == 0.0, "Driver: first breakpoint must be 0");
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    require(breakpoints[k] > breakpoints[k - 1],
            "Driver: breakpoints must increase strictly");
  }
  for (double v : levels) require(std::isfinite(v), "Driver: non-finite level");
  require(std::isfinite(horizon) && horizon >= breakpoints.back(),
          "Driver: horizon before last breakpoint");
}

std::size_t Driver::piece_at(double t) const {
  const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return it == breakpoints.begin()
             ? 0
             : static_cast<std::size_t>(it - breakpoints.begin()) - 1;
}

double Driver::value_at(double t) const { return levels[piece_at(t)]; }

double Driver::min_level(double T) const {
  const std::size_t last = piece_at(T);
  return *std::min_element(levels.begin(), levels.begin() + last + 1);
}

double Driver::max_level(double T) const {
  const std::size_t last = piece_at(T);
  return *std::max_element(levels.begin(), levels.begin() + last + 1);
}

double Driver::occupation_time(double lo, double hi, double T) const {
  double total = 0.0;
  for (std::size_t k = 0; k < breakpoints.size() && breakpoints[k] < T; ++k) {
    const double end =
        std::min(T, k + 1 < breakpoints.size() ? breakpoints[k + 1] : horizon);
    if (levels[k] >= lo && levels[k] <= hi) total += end - breakpoints[k];
  }
  return total;
}

Driver Driver::negated() const {
  Driver d = *this;
  for (double& v : d.levels) v = -v;
  return d;
}

MapChain::MapChain(std::vector<SlitStep> steps) {
  steps_.reserve(steps.size());
  for (const auto& s : steps) append(s);
}

void MapChain::append(const SlitStep& step) {
  require(std::isfinite(step.w), "SlitStep: non-finite level");
  require(std::isfinite(step.dt) && step.dt > 0.0, "SlitStep: dt must be positive");
  steps_.push_back(step);
  total_time_ += step.dt;
}

double MapChain::laurent_coefficient(double radius) const {
  // Accumulating the displacements keeps (g - z) free of cancellation.
  if (steps_.empty()) return 0.0;
  double lo = steps_.front().w, hi = lo;
  for (const auto& s : steps_) {
    lo = std::min(lo, s.w);
    hi = std::max(hi, s.w);
  }
  const double centre = 0.5 * (lo + hi);
  const Complex z0(centre, radius * (1.0 + hi - lo));
  Complex z = z0;
  Complex moved = 0.0;
  for (const auto& s : steps_) {
    const Complex d = slit_displacement(z - s.w, s.dt, true);
    z += d;
    moved += d;
  }
  return (moved * (z0 - centre)).real();
}

Complex forward_step(Complex z, const SlitStep& step) {
  return z + slit_displacement(z - step.w, step.dt, true);
}

Complex backward_step(Complex z, const SlitStep& step) {
  return z + slit_displacement(z - step.w, step.dt, false);
}

MapChain build_chain(const Driver& driver, double T) {
  driver.validate();
  require(std::isfinite(T) && T >= 0.0, "build_chain: T must be non-negative");
  require(T <= driver.horizon * (1.0 + 1e-12),
          "build_chain: T = " + std::to_string(T) + " exceeds driver horizon " +
              std::to_string(driver.horizon));
  T = std::min(T, driver.horizon);
  MapChain chain;
  const auto& bp = driver.breakpoints;
  for (std::size_t k = 0; k < bp.size() && bp[k] < T; ++k) {
    const double end = std::min(T, k + 1 < bp.size() ? bp[k + 1] : driver.horizon);
    if (end > bp[k]) chain.append({driver.levels[k], end - bp[k]});
  }
  return chain;
}

double default_swallow_tol(Complex z) { return 1e-9 * (1.0 + std::abs(z)); }

Complex evaluate_forward(const MapChain& chain, Complex z) {
  return evaluate_forward(chain, z, default_swallow_tol(z));
}

Complex evaluate_forward(const MapChain& chain, Complex z, double tol) {
  require(z.imag() >= 0.0, "evaluate_forward: point below the real axis");
  const auto& steps = chain.steps();
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const Complex zeta = z - steps[k].w;
    if (closest_approach(zeta, steps[k].dt, nullptr) <= tol) {
      throw SwallowedError("evaluate_forward: point swallowed during step " +
                               std::to_string(k),
                           k);
    }
    z += slit_displacement(zeta, steps[k].dt, true);
  }
  return z;
}

Complex evaluate_inverse(const MapChain& chain, Complex z) {
  return evaluate_inverse_prefix(chain, chain.size(), z);
}

Complex evaluate_inverse_prefix(const MapChain& chain, std::size_t prefix,
                                Complex z) {
  const auto& steps = chain.steps();
  prefix = std::min(prefix, steps.size());
  for (std::size_t k = prefix; k-- > 0;) {
    z += slit_displacement(z - steps[k].w, steps[k].dt, false);
  }
  return z;
}

Complex evaluate_backward_flow(const MapChain& chain, Complex z) {
  for (const auto& s : chain.steps()) {
    z += slit_displacement(z - s.w, s.dt, false);
  }
  return z;
}

const char* to_string(TerminalKind kind) {
  switch (kind) {
    case TerminalKind::continuous_hit:
      return "continuous_hit";
    case TerminalKind::jump_hit:
      return "jump_hit";
    case TerminalKind::survived:
      return "survived";
  }
  return "unknown";
}

SwallowResult swallow_time(const Driver& driver, Complex z, double T) {
  return swallow_time(driver, z, T, default_swallow_tol(z));
}

SwallowResult swallow_time(const Driver& driver, Complex z, double T,
                           double tol) {
  require(z.imag() >= 0.0, "swallow_time: point below the real axis");
  require(z != Complex(0.0, 0.0), "swallow_time: z = 0 is the driver start");
  require(tol >= 0.0, "swallow_time: negative tolerance");
  const MapChain chain = build_chain(driver, T);
  const auto& steps = chain.steps();
  SwallowResult out;
  out.trajectory.push_back({0.0, z});
  double t0 = 0.0;
  Complex zeta = z - (steps.empty() ? driver.levels.front() : steps.front().w);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k > 0 && steps[k].w != steps[k - 1].w) {
      zeta -= steps[k].w - steps[k - 1].w;
      if (std::abs(zeta) <= tol) {
        out.T_z = t0;
        out.terminal_kind = TerminalKind::jump_hit;
        out.terminal_distance = std::abs(zeta);
        return out;
      }
    }
    double at = 0.0;
    const double gap = closest_approach(zeta, steps[k].dt, &at);
    if (gap <= tol) {
      out.T_z = t0 + at;
      out.terminal_kind = TerminalKind::continuous_hit;
      out.terminal_distance = gap;
      out.trajectory.push_back({out.T_z, steps[k].w + std::sqrt(zeta * zeta + 4.0 * at)});
      return out;
    }
    zeta += slit_displacement(zeta, steps[k].dt, true);
    t0 += steps[k].dt;
    out.trajectory.push_back({t0, zeta + steps[k].w});
  }
  return out;
}

double real_part_clearance(const Driver& driver, Complex z0, double T) {
  if (z0 == Complex(0.0, 0.0)) return 0.0;
  const SwallowResult sw = swallow_time(driver, z0, T);
  if (sw.swallowed()) return 0.0;
  // Within a piece |Re(g_t - w)| grows, so piece starts carry the minimum.
  const MapChain chain = build_chain(driver, T);
  const auto& steps = chain.steps();
  if (steps.empty()) return std::abs(z0.real() - driver.levels.front());
  double best = std::numeric_limits<double>::infinity();
  Complex zeta = z0 - steps.front().w;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k > 0) zeta -= steps[k].w - steps[k - 1].w;
    best = std::min(best, std::abs(zeta.real()));
    zeta += slit_displacement(zeta, steps[k].dt, true);
  }
  // W_T may differ from the last piece's level if the driver jumps at T.
  const double wT = driver.value_at(T);
  best = std::min(best, std::abs((zeta + steps.back().w - wT).real()));
  return best;
}

std::vector<Complex> HullApprox::positions() const {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.z);
  return out;
}

namespace {

struct PieceSampler {
  const MapChain& chain;
  std::size_t k;
  double t0;
  double lift;

  Complex at(double v) const {
    const SlitStep& s = chain.steps()[k];
    const Complex tip = backward_step(Complex(s.w, lift), {s.w, s.dt * v * v});
    return evaluate_inverse_prefix(chain, k, tip);
  }
  double time(double v) const { return t0 + chain.steps()[k].dt * v * v; }
};

void refine(const PieceSampler& piece, double v0, Complex p0, double v1,
            Complex p1, int depth, const TraceOptions& opt, HullApprox& hull) {
  const double gap = std::abs(p1 - p0);
  if (opt.resolution <= 0.0 || gap <= opt.resolution) return;
  if (depth >= opt.max_refine_depth) {
    hull.unresolved_gap = std::max(hull.unresolved_gap, gap);
    return;
  }
  const double vm = 0.5 * (v0 + v1);
  const Complex pm = piece.at(vm);
  refine(piece, v0, p0, vm, pm, depth + 1, opt, hull);
  hull.points.push_back({piece.time(vm), pm, false});
  refine(piece, vm, pm, v1, p1, depth + 1, opt, hull);
}

}  // namespace

HullApprox compute_trace(const Driver& driver, double T,
                         const TraceOptions& options) {
  require(options.samples_per_piece >= 1, "compute_trace: need at least one sample");
  require(options.lift > 0.0, "compute_trace: lift must be positive");
  require(options.resolution >= 0.0, "compute_trace: negative resolution");
  const MapChain chain = build_chain(driver, T);
  HullApprox hull;
  hull.horizon = T;
  hull.capacity = chain.capacity();
  hull.lift = options.lift;
  const auto& steps = chain.steps();
  const std::size_t n = options.samples_per_piece;
  // Piece boundaries taken from the driver itself (summed dt drifts by ulps).
  std::vector<double> starts;
  for (std::size_t k = 0; k < driver.breakpoints.size(); ++k) {
    const double b = driver.breakpoints[k];
    const double end = std::min(
        T, k + 1 < driver.breakpoints.size() ? driver.breakpoints[k + 1] : driver.horizon);
    if (b < T && end > b) starts.push_back(b);
  }
  starts.push_back(std::min(T, driver.horizon));
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const double t0 = starts[k];
    if (k > 0 && steps[k].w != steps[k - 1].w) {
      hull.jumps.push_back({hull.points.size(), t0, steps[k].w - steps[k - 1].w});
    }
    const PieceSampler piece{chain, k, t0, options.lift};
    double v_prev = 0.0;
    Complex p_prev = piece.at(0.0);
    hull.points.push_back({t0, p_prev, false});
    for (std::size_t j = 1; j <= n; ++j) {
      const double v = static_cast<double>(j) / static_cast<double>(n);
      const Complex p = piece.at(v);
      refine(piece, v_prev, p_prev, v, p, 0, options, hull);
      const bool end = j == n;
      hull.points.push_back(
          {end ? starts[k + 1] : piece.time(v), p, end && k + 1 < steps.size()});
      v_prev = v;
      p_prev = p;
    }
  }
  return hull;
}

}  // namespace sle
