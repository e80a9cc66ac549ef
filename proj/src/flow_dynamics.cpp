#include "stable_loewner/flow_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stable_loewner/errors.hpp"
#include "stable_loewner/random.hpp"
#include "stable_loewner/stable_process.hpp"

namespace sle {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

// log|zeta0| - log|zeta1|
double log_shrink(Complex zeta0, Complex zeta1) { return -std::log(std::abs(zeta1 / zeta0)); }

// Time s in [0, dt] at which Im sqrt(zeta^2 - 4s) (upper branch) equals h,
// for Im zeta <= h.
double time_to_height(Complex zeta, double h, double dt) {
  const Complex sq = zeta * zeta;
  const double b = sq.imag();
  const double target_re = (b * b - 4.0 * h * h * h * h) / (4.0 * h * h);
  return std::clamp((sq.real() - target_re) / 4.0, 0.0, dt);
}

void attach_censoring(ExperimentReport& report, std::size_t censored) {
  report.censoring_fraction =
      static_cast<double>(censored) / static_cast<double>(report.n);
  if (report.censoring_fraction > kCensoringWarningLevel) {
    report.warnings.push_back("censoring: " + std::to_string(censored) + " of " +
                              std::to_string(report.n) +
                              " paths reached t_max before the event");
  }
}

}  // namespace

BackwardFlowState step_backward_xy(const BackwardFlowState& state, double dW,
                                   double dt) {
  require(dt >= 0.0, "step_backward_xy: dt must be non-negative");
  if (!(state.Y > 0.0)) throw StateError("step_backward_xy: Y must be positive");
  BackwardFlowState next = state;
  if (dt > 0.0) {
    const Complex zeta(state.X, state.Y);
    const Complex moved = backward_step(zeta, {0.0, dt});
    next.X = moved.real();
    next.Y = moved.imag();
    next.log_deriv += log_shrink(zeta, moved);
    next.t += dt;
  }
  next.X -= dW;
  return next;
}

BackwardFlow::BackwardFlow(Complex z, std::vector<double> u_levels)
    : y0_(z.imag()) {
  require(z.imag() > 0.0, "BackwardFlow: start point must lie in the upper half-plane");
  state_.X = z.real();
  state_.Y = z.imag();
  records_.reserve(u_levels.size());
  for (double u : u_levels) {
    require(std::isfinite(u) && u >= 0.0, "BackwardFlow: u levels must be >= 0");
    TimeChangeRecord rec;
    rec.u = u;
    if (u == 0.0) {
      rec.gamma_u = 0.0;
      rec.X = state_.X;
    } else {
      ++pending_;
    }
    records_.push_back(rec);
  }
}

void BackwardFlow::flow(double dt) {
  require(dt >= 0.0, "BackwardFlow: dt must be non-negative");
  if (dt == 0.0) return;
  const Complex zeta(state_.X, state_.Y);
  const Complex end = backward_step(zeta, {0.0, dt});
  if (pending_ > 0) {
    for (auto& rec : records_) {
      if (rec.reached()) continue;
      const double h = y0_ * std::exp(rec.u);
      if (end.imag() < h) continue;
      const double s = time_to_height(zeta, h, dt);
      const Complex at = backward_step(zeta, {0.0, s});
      rec.gamma_u = state_.t + s;
      rec.log_deriv = state_.log_deriv + log_shrink(zeta, at);
      rec.X = at.real();
      --pending_;
    }
  }
  // log|f'| rises while Re(zeta_s^2) = Re(zeta^2) - 4s > 0, then falls.
  const double s_peak = std::clamp((zeta * zeta).real() / 4.0, 0.0, dt);
  const Complex peak = backward_step(zeta, {0.0, s_peak});
  max_log_deriv_ = std::max(max_log_deriv_, state_.log_deriv + log_shrink(zeta, peak));
  state_.log_deriv += log_shrink(zeta, end);
  state_.X = end.real();
  state_.Y = end.imag();
  state_.t += dt;
  if (!(state_.Y > 0.0)) throw StateError("BackwardFlow: height collapsed");
}

void BackwardFlow::jump(double dW) { state_.X -= dW; }

BackwardFlowResult run_backward_flow(Complex z, const Driver& driver, double T,
                                     const std::vector<double>& u_levels) {
  require(z.imag() > 0.0, "run_backward_flow: Im z must be positive");
  const MapChain chain = build_chain(driver, T);
  const auto& steps = chain.steps();
  const double w0 = driver.levels.front();
  BackwardFlow flow(z - w0, u_levels);
  BackwardFlowResult out;
  out.trajectory.push_back(flow.state());
  double level = w0;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    flow.jump(steps[k].w - level);
    level = steps[k].w;
    flow.flow(steps[k].dt);
    out.trajectory.push_back(flow.state());
  }
  flow.jump(driver.value_at(T) - level);
  out.trajectory.back() = flow.state();
  out.final_state = flow.state();
  out.time_changes = flow.records();
  out.max_log_deriv = flow.max_log_deriv();
  return out;
}

FlowDirection parse_direction(const std::string& name) {
  if (name == "forward") return FlowDirection::forward;
  if (name == "backward") return FlowDirection::backward;
  throw ParameterError("direction must be forward or backward, got " + name);
}

const char* to_string(FlowDirection direction) {
  return direction == FlowDirection::forward ? "forward" : "backward";
}

RealFlowResult real_line_flow(double x, const Driver& driver, double T,
                              FlowDirection direction, double tol) {
  require(std::isfinite(x) && x != 0.0, "real_line_flow: x must be nonzero");
  require(tol >= 0.0, "real_line_flow: negative tolerance");
  const MapChain chain = build_chain(driver, T);
  const auto& steps = chain.steps();
  const double sign4 = direction == FlowDirection::forward ? 4.0 : -4.0;
  RealFlowResult out;
  double level = driver.levels.front();
  double X = x - level;
  double t = 0.0;
  out.trajectory.push_back({0.0, X});
  const auto hit_at = [&](double when) {
    out.hit = true;
    out.hit_time = when;
    out.trajectory.push_back({when, X});
    return out;
  };
  if (std::abs(X) <= tol) return hit_at(0.0);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].w != level) {
      X -= steps[k].w - level;
      level = steps[k].w;
      if (std::abs(X) <= tol) return hit_at(t);
    }
    const double sq = X * X + sign4 * steps[k].dt;
    if (sq <= tol * tol) {
      const double when = t + (X * X - tol * tol) / 4.0;
      X = std::copysign(tol, X);
      return hit_at(when);
    }
    X = std::copysign(std::sqrt(sq), X);
    t += steps[k].dt;
    out.trajectory.push_back({t, X});
  }
  return out;
}

void ExitProbabilityConfig::validate() const {
  StableParams{alpha, 1.0}.validate();
  require(r > 0.0 && r < std::abs(x0), "exit-prob: need 0 < r < |x0|");
  require(R > std::abs(x0), "exit-prob: need |x0| < R");
  require(n_paths >= 1, "exit-prob: n_paths must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "exit-prob: t_max must be positive");
  require(std::isfinite(grid_dt) && grid_dt > 0.0, "exit-prob: grid_dt must be positive");
}

ExperimentReport exit_probability_experiment(const ExitProbabilityConfig& cfg,
                                             std::uint64_t master_seed,
                                             const ParallelFor& parallel) {
  cfg.validate();
  enum Outcome : int { kHitR = 0, kHitSmall = 1, kCensored = 2 };
  const bool forward = cfg.direction == FlowDirection::forward;
  const auto outcomes = map_indexed<int>(cfg.n_paths, parallel, [&](std::size_t i) {
    RandomSource rng(derive_seed(master_seed, i));
    DriverStream stream(StableDriverModel{{cfg.alpha, 1.0}, cfg.grid_dt}, rng);
    double X = cfg.x0;
    double t = 0.0;
    for (;;) {
      const DriverEvent ev = stream.next();
      const double dt = std::min(ev.time, cfg.t_max) - t;
      // |X| moves monotonically within a piece: outwards forward, inwards
      // backward.
      if (forward) {
        const double sq = X * X + 4.0 * dt;
        if (sq >= cfg.R * cfg.R) return int(kHitR);
        X = std::copysign(std::sqrt(sq), X);
      } else {
        const double sq = X * X - 4.0 * dt;
        if (sq <= cfg.r * cfg.r) return int(kHitSmall);
        X = std::copysign(std::sqrt(sq), X);
      }
      t += dt;
      if (ev.time >= cfg.t_max) return int(kCensored);
      X -= ev.increment;
      if (std::abs(X) <= cfg.r) return int(kHitSmall);
      if (std::abs(X) >= cfg.R) return int(kHitR);
    }
  });
  std::size_t small = 0, large = 0, censored = 0;
  for (int o : outcomes) {
    if (o == kHitSmall) ++small;
    else if (o == kHitR) ++large;
    else ++censored;
  }
  ExperimentReport report =
      proportion_report("P(tau_r < tau_R)", small, cfg.n_paths, master_seed);
  attach_censoring(report, censored);
  const double ax = std::abs(cfg.x0);
  const double bound = cfg.alpha == 1.0
                           ? std::log(ax) / std::log(cfg.r)
                           : std::pow(ax / cfg.r, cfg.alpha - 1.0);
  report.extras["supermartingale_bound"] = bound;
  report.extras["hit_r_fraction"] = report.estimate;
  report.extras["hit_R_fraction"] =
      static_cast<double>(large) / static_cast<double>(cfg.n_paths);
  report.extras["t_max"] = cfg.t_max;
  return report;
}

void HeightReachConfig::validate() const {
  StableParams{alpha, kappa}.validate();
  require(z.imag() > 0.0, "height-reach: Im z must be positive");
  require(std::isfinite(u) && u >= 0.0, "height-reach: u must be >= 0");
  require(n_paths >= 1, "height-reach: n_paths must be positive");
  require(std::isfinite(t_max) && t_max > 0.0, "height-reach: t_max must be positive");
  require(std::isfinite(grid_dt) && grid_dt > 0.0,
          "height-reach: grid_dt must be positive");
}

ExperimentReport height_reach_experiment(const HeightReachConfig& cfg,
                                         std::uint64_t master_seed,
                                         const ParallelFor& parallel) {
  cfg.validate();
  const auto reach_times = map_indexed<double>(cfg.n_paths, parallel, [&](std::size_t i) {
    RandomSource rng(derive_seed(master_seed, i));
    DriverStream stream(StableDriverModel{{cfg.alpha, cfg.kappa}, cfg.grid_dt}, rng);
    BackwardFlow flow(cfg.z, {cfg.u});
    double t = 0.0;
    while (!flow.all_reached()) {
      const DriverEvent ev = stream.next();
      const double end = std::min(ev.time, cfg.t_max);
      flow.flow(end - t);
      t = end;
      if (flow.all_reached() || t >= cfg.t_max) break;
      flow.jump(ev.increment);
    }
    return flow.records().front().gamma_u;
  });
  std::size_t reached = 0;
  std::vector<double> finite;
  for (double g : reach_times) {
    if (g < std::numeric_limits<double>::infinity()) {
      ++reached;
      finite.push_back(g);
    }
  }
  ExperimentReport report =
      proportion_report("P(gamma_u < t_max)", reached, cfg.n_paths, master_seed);
  attach_censoring(report, cfg.n_paths - reached);
  report.extras["t_max"] = cfg.t_max;
  report.extras["u"] = cfg.u;
  if (!finite.empty()) report.extras["median_gamma_u"] = median(finite);
  return report;
}

}  // namespace sle
