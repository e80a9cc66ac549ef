#include "stable_loewner/stable_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

#include "stable_loewner/errors.hpp"
#include "stable_loewner/quadrature.hpp"

namespace sle {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

double calibrate_levy_constant(double alpha) {
  // J = int_0^inf (1 - cos h) h^(-1-alpha) dh, split at 1:
  //   int_0^1 2 sin^2(h/2) h^(-1-alpha) dh + 1/alpha - int_1^inf cos(h) h^(-1-alpha) dh.
  // The oscillatory tail is integrated by parts twice so that the remaining
  // integrand decays like h^(-3-alpha).
  const auto near = integrate(
      [alpha](double h) {
        if (h == 0.0) return 0.0;
        const double s = std::sin(0.5 * h);
        return 2.0 * s * s * std::pow(h, -1.0 - alpha);
      },
      0.0, 1.0, 1e-14, 1e-11);
  const auto rest = integrate_cosine_tail(
      [alpha](double h) { return std::pow(h, -3.0 - alpha); }, 1.0, 1.0,
      1e-14);
  const double tail = -std::sin(1.0) + (1.0 + alpha) * std::cos(1.0) -
                      (1.0 + alpha) * (2.0 + alpha) * rest.value;
  const double j = near.value + 1.0 / alpha - tail;
  return 1.0 / (2.0 * j);
}

// Richardson table on D(h)/h^2 with halving steps; returns the entry whose
// neighbouring estimates agree best.
double second_derivative_estimate(const std::function<double(double)>& f,
                                  double x) {
  constexpr int kRows = 12;
  double table[kRows][kRows];
  double h = 0.1 * std::max(1.0, std::abs(x));
  const double fx = f(x);
  double best = 0.0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kRows; ++i, h *= 0.5) {
    table[i][0] = (f(x + h) + f(x - h) - 2.0 * fx) / (h * h);
    double factor = 4.0;
    for (int j = 1; j <= i; ++j, factor *= 4.0) {
      table[i][j] =
          table[i][j - 1] + (table[i][j - 1] - table[i - 1][j - 1]) / (factor - 1.0);
      const double err = std::max(std::abs(table[i][j] - table[i][j - 1]),
                                  std::abs(table[i][j] - table[i - 1][j - 1]));
      if (err < best_err) {
        best_err = err;
        best = table[i][j];
      }
    }
    if (i > 0 && std::abs(table[i][i] - table[i - 1][i - 1]) > 2.0 * best_err) {
      break;
    }
  }
  return best_err == std::numeric_limits<double>::infinity() ? table[0][0] : best;
}

}  // namespace

void StableParams::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 2.0,
          "alpha must lie in (0, 2], got " + std::to_string(alpha));
  require(finite_positive(kappa),
          "kappa must be positive, got " + std::to_string(kappa));
}

void LevyPath::validate() const {
  require(!times.empty(), "LevyPath: empty path");
  require(times.size() == values.size(), "LevyPath: times/values size mismatch");
  require(times.front() == 0.0 && values.front() == 0.0,
          "LevyPath: must start at (0, 0)");
  for (std::size_t i = 1; i < times.size(); ++i) {
    require(times[i] > times[i - 1], "LevyPath: times must increase strictly");
  }
}

LevyPath LevyPath::negated() const {
  LevyPath out = *this;
  for (double& v : out.values) v = -v;
  for (auto& j : out.large_jumps) j.size = -j.size;
  return out;
}

TruncationConfig TruncationConfig::make(double alpha,
                                        double small_jump_threshold) {
  TruncationConfig cfg;
  cfg.alpha = alpha;
  cfg.small_jump_threshold = small_jump_threshold;
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0,
          "truncation needs 0 < alpha < 2");
  cfg.levy_constant = sle::levy_constant(alpha);
  cfg.validate();
  return cfg;
}

void TruncationConfig::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0,
          "truncation needs 0 < alpha < 2");
  require(finite_positive(small_jump_threshold) && small_jump_threshold < cutoff,
          "small-jump threshold must lie in (0, 1), got " +
              std::to_string(small_jump_threshold));
  require(finite_positive(levy_constant), "levy constant must be positive");
}

double TruncationConfig::small_jump_variance() const {
  return 2.0 * levy_constant * std::pow(small_jump_threshold, 2.0 - alpha) /
         (2.0 - alpha);
}

double TruncationConfig::jump_rate() const {
  return 2.0 * levy_constant * (std::pow(small_jump_threshold, -alpha) - 1.0) /
         alpha;
}

double levy_constant(double alpha) {
  require(std::isfinite(alpha) && alpha > 0.0 && alpha < 2.0,
          "levy_constant needs 0 < alpha < 2");
  static std::mutex mutex;
  static std::map<double, double> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(alpha); it != cache.end()) return it->second;
  const double c = calibrate_levy_constant(alpha);
  cache.emplace(alpha, c);
  return c;
}

double large_jump_rate(double alpha) { return 2.0 * levy_constant(alpha) / alpha; }

double sample_standard_stable(double alpha, RandomSource& rng) {
  const double v = rng.symmetric_angle();
  if (alpha == 1.0) return std::tan(v);
  const double w = rng.exponential();
  return std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double sample_stable_increment(const StableParams& params, double dt,
                               RandomSource& rng) {
  params.validate();
  require(finite_positive(dt), "dt must be positive");
  return std::pow(dt, 1.0 / params.alpha) *
         sample_standard_stable(params.alpha, rng);
}

double sample_large_jump(double alpha, RandomSource& rng) {
  const double magnitude = std::pow(rng.uniform(), -1.0 / alpha);
  return rng.sign() * magnitude;
}

double sample_small_jump(const TruncationConfig& trunc, RandomSource& rng) {
  const double a = trunc.alpha;
  const double lo = std::pow(trunc.small_jump_threshold, -a);
  const double magnitude =
      std::min(1.0, std::pow(lo - rng.uniform() * (lo - 1.0), -1.0 / a));
  return rng.sign() * magnitude;
}

LevyPath sample_stable_path(const StableParams& params, double horizon,
                            std::size_t n_steps, RandomSource& rng) {
  params.validate();
  require(finite_positive(horizon), "horizon must be positive");
  require(n_steps >= 1, "n_steps must be at least 1");
  const double h = horizon / static_cast<double>(n_steps);
  const double scale = std::pow(params.kappa * h, 1.0 / params.alpha);
  LevyPath path;
  path.times.reserve(n_steps + 1);
  path.values.reserve(n_steps + 1);
  path.times.push_back(0.0);
  path.values.push_back(0.0);
  double value = 0.0;
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = k == n_steps ? horizon : static_cast<double>(k) * h;
    const double inc = scale * sample_standard_stable(params.alpha, rng);
    value += inc;
    path.times.push_back(t);
    path.values.push_back(value);
    if (std::abs(inc) > TruncationConfig::cutoff) path.large_jumps.push_back({t, inc});
  }
  return path;
}

TruncatedPathSample sample_truncated_components(const StableParams& params,
                                                const TruncationConfig& trunc,
                                                double horizon,
                                                std::size_t n_steps,
                                                RandomSource& rng) {
  params.validate();
  trunc.validate();
  require(params.alpha == trunc.alpha, "truncation built for a different alpha");
  require(finite_positive(horizon), "horizon must be positive");
  require(n_steps >= 1, "n_steps must be at least 1");
  const double h = horizon / static_cast<double>(n_steps);
  DriverStream stream(TruncatedDriverModel{params, trunc, h}, rng);
  TruncatedPathSample out;
  out.path.times.push_back(0.0);
  out.path.values.push_back(0.0);
  double value = 0.0;
  for (;;) {
    const DriverEvent ev = stream.next();
    // Grid times are k * h; snap the last one onto the horizon.
    const bool last = !ev.poisson_jump && ev.time >= horizon * (1.0 - 1e-12);
    if (ev.poisson_jump && ev.time >= horizon) continue;
    value += ev.increment;
    const double t = last ? horizon : ev.time;
    if (t <= out.path.times.back()) {
      // A jump landing within rounding of a grid time merges into it.
      out.path.values.back() = value;
    } else {
      out.path.times.push_back(t);
      out.path.values.push_back(value);
    }
    if (ev.poisson_jump) out.poisson_jumps.push_back({t, ev.jump_size});
    if (last) break;
  }
  return out;
}

LevyPath sample_truncated_path(const StableParams& params,
                               const TruncationConfig& trunc, double horizon,
                               std::size_t n_steps, RandomSource& rng) {
  return sample_truncated_components(params, trunc, horizon, n_steps, rng).path;
}

LevyPath recombine_large_jumps(std::span<const LevyPath> truncated_segments,
                               std::span<const double> jump_times,
                               std::span<const double> jump_sizes) {
  require(jump_times.size() == jump_sizes.size(),
          "recombine_large_jumps: jump_times and jump_sizes differ in length");
  require(truncated_segments.size() == jump_times.size() + 1,
          "recombine_large_jumps: need exactly one more segment than jumps");
  double previous = 0.0;
  for (std::size_t k = 0; k < jump_times.size(); ++k) {
    require(jump_times[k] > previous,
            "recombine_large_jumps: jump times must increase strictly from 0");
    require(std::abs(jump_sizes[k]) > TruncationConfig::cutoff,
            "recombine_large_jumps: inserted jumps must exceed 1 in magnitude");
    const double length = jump_times[k] - previous;
    const double have = truncated_segments[k].horizon();
    require(std::abs(have - length) <= 1e-9 * std::max(1.0, jump_times[k]),
            "recombine_large_jumps: segment " + std::to_string(k) +
                " does not span its inter-jump interval");
    previous = jump_times[k];
  }
  for (const auto& seg : truncated_segments) seg.validate();

  LevyPath out;
  double offset_time = 0.0;
  double base = 0.0;
  for (std::size_t k = 0; k < truncated_segments.size(); ++k) {
    const LevyPath& seg = truncated_segments[k];
    const bool last_segment = k + 1 == truncated_segments.size();
    // The final point of an inner segment is the left limit at the next jump
    // time; the recombined path takes the post-jump value there instead.
    const std::size_t count = last_segment ? seg.times.size() : seg.times.size() - 1;
    for (std::size_t i = 0; i < count; ++i) {
      out.times.push_back(offset_time + seg.times[i]);
      out.values.push_back(base + seg.values[i]);
    }
    if (!last_segment) {
      base += seg.final_value() + jump_sizes[k];
      offset_time = jump_times[k];
      out.large_jumps.push_back({jump_times[k], jump_sizes[k]});
    }
  }
  return out;
}

LevyPath sample_stable_path_recombined(const StableParams& params,
                                       const TruncationConfig& trunc,
                                       double horizon, std::size_t n_steps,
                                       RandomSource& rng) {
  params.validate();
  trunc.validate();
  require(finite_positive(horizon), "horizon must be positive");
  require(n_steps >= 1, "n_steps must be at least 1");
  const double rate = large_jump_rate(params.alpha) * params.kappa;
  std::vector<double> times;
  std::vector<double> sizes;
  for (double t = rng.exponential() / rate; t < horizon;
       t += rng.exponential() / rate) {
    times.push_back(t);
    sizes.push_back(sample_large_jump(params.alpha, rng));
  }
  std::vector<LevyPath> segments;
  double start = 0.0;
  for (std::size_t k = 0; k <= times.size(); ++k) {
    const double end = k < times.size() ? times[k] : horizon;
    const double length = end - start;
    const auto steps = static_cast<std::size_t>(std::max(
        1.0, std::ceil(static_cast<double>(n_steps) * length / horizon)));
    segments.push_back(sample_truncated_path(params, trunc, length, steps, rng));
    start = end;
  }
  return recombine_large_jumps(segments, times, sizes);
}

DriverStream::DriverStream(const DriverModel& model, RandomSource& rng)
    : model_(model), rng_(&rng) {
  std::visit([](const auto& m) { require(finite_positive(m.grid_dt), "grid_dt must be positive"); },
             model_);
  if (const auto* m = std::get_if<StableDriverModel>(&model_)) {
    m->params.validate();
  } else if (const auto* tm = std::get_if<TruncatedDriverModel>(&model_)) {
    tm->params.validate();
    tm->truncation.validate();
    require(tm->params.alpha == tm->truncation.alpha,
            "truncation built for a different alpha");
    jump_rate_ = tm->truncation.jump_rate() * tm->params.kappa;
    diffusion_ = std::sqrt(tm->truncation.small_jump_variance() * tm->params.kappa);
    next_jump_time_ = rng_->exponential() / jump_rate_;
  }
}

DriverEvent DriverStream::next() {
  DriverEvent ev;
  if (const auto* m = std::get_if<StableDriverModel>(&model_)) {
    ++grid_index_;
    ev.time = static_cast<double>(grid_index_) * m->grid_dt;
    ev.dt = ev.time - time_;
    ev.increment = std::pow(m->params.kappa * m->grid_dt, 1.0 / m->params.alpha) *
                   sample_standard_stable(m->params.alpha, *rng_);
  } else if (const auto* tm = std::get_if<TruncatedDriverModel>(&model_)) {
    const double next_grid = static_cast<double>(grid_index_ + 1) * tm->grid_dt;
    if (next_jump_time_ < next_grid) {
      ev.time = next_jump_time_;
      ev.poisson_jump = true;
      ev.jump_size = sample_small_jump(tm->truncation, *rng_);
      next_jump_time_ += rng_->exponential() / jump_rate_;
    } else {
      ev.time = next_grid;
      ++grid_index_;
    }
    ev.dt = ev.time - time_;
    ev.increment = diffusion_ * std::sqrt(ev.dt) * rng_->normal() + ev.jump_size;
  } else {
    const auto& zm = std::get<ZeroDriverModel>(model_);
    ++grid_index_;
    ev.time = static_cast<double>(grid_index_) * zm.grid_dt;
    ev.dt = ev.time - time_;
  }
  time_ = ev.time;
  return ev;
}

double truncated_frac_laplacian(const TestFunction& f, double x,
                                const StableParams& params, double quad_tol) {
  params.validate();
  require(params.alpha < 2.0, "truncated fractional Laplacian needs alpha < 2");
  require(static_cast<bool>(f.value), "test function has no value evaluator");
  require(finite_positive(quad_tol), "quad_tol must be positive");
  const double alpha = params.alpha;
  const double c = levy_constant(alpha);
  const double fx = f.value(x);
  const double f2 = f.second_derivative ? f.second_derivative(x)
                                        : second_derivative_estimate(f.value, x);
  const auto second_difference = [&](double h) {
    return f.value(x + h) + f.value(x - h) - 2.0 * fx;
  };
  // Inner cut: shrink until the quadratic model of the second difference is
  // accurate enough on [0, cut] or rounding noise takes over.
  const double eps = std::numeric_limits<double>::epsilon();
  double cut = 0.25;
  double patch_error = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 40; ++i) {
    const double d = second_difference(cut);
    const double weight = c * std::pow(cut, 2.0 - alpha) / (2.0 - alpha);
    const double model_gap = std::abs(d / (cut * cut) - f2);
    const double noise =
        8.0 * eps * (std::abs(f.value(x + cut)) + std::abs(f.value(x - cut)) +
                     2.0 * std::abs(fx)) / (cut * cut);
    patch_error = model_gap * weight;
    if (patch_error <= 0.25 * quad_tol) break;
    if (model_gap <= noise) {
      patch_error = noise * weight;
      break;
    }
    cut *= 0.25;
  }
  if (patch_error > 0.5 * quad_tol) {
    throw NumericalError(
        "truncated_frac_laplacian: second-difference model too inaccurate near 0",
        patch_error);
  }
  const double patch = f2 * c * std::pow(cut, 2.0 - alpha) / (2.0 - alpha);
  const auto outer = integrate(
      [&](double h) { return second_difference(h) * c * std::pow(h, -1.0 - alpha); },
      cut, 1.0, 0.5 * quad_tol);
  if (patch_error + outer.abs_error > quad_tol) {
    throw NumericalError("truncated_frac_laplacian: tolerance not reached",
                         patch_error + outer.abs_error);
  }
  return patch + outer.value;
}

}  // namespace sle
