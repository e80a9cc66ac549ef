#include "stable_loewner/geometry_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

#include "stable_loewner/errors.hpp"
#include "stable_loewner/random.hpp"
#include "stable_loewner/stable_process.hpp"

namespace sle {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

struct CellHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& c) const noexcept {
    const auto a = static_cast<std::uint64_t>(c.first);
    const auto b = static_cast<std::uint64_t>(c.second);
    return static_cast<std::size_t>(a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)));
  }
};

// Exact nearest-neighbour queries over a fixed point set, bucketed on a
// uniform grid that covers the set's bounding box.
class NearestGrid {
 public:
  explicit NearestGrid(const std::vector<Complex>& pts) : pts_(pts) {
    double x0 = pts[0].real(), x1 = x0, y0 = pts[0].imag(), y1 = y0;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.real());
      x1 = std::max(x1, p.real());
      y0 = std::min(y0, p.imag());
      y1 = std::max(y1, p.imag());
    }
    const double w = x1 - x0, h = y1 - y0;
    const double n = static_cast<double>(pts.size());
    double cell = std::sqrt(std::max(w * h, 0.0) / n);
    cell = std::max({cell, std::max(w, h) / n, 1e-300});
    if (w == 0.0 && h == 0.0) cell = 1.0;
    cell_ = cell;
    ox_ = x0;
    oy_ = y0;
    nx_ = static_cast<std::int64_t>(std::floor(w / cell)) + 1;
    ny_ = static_cast<std::int64_t>(std::floor(h / cell)) + 1;
    start_.assign(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
    std::vector<std::size_t> cell_of(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      cell_of[i] = index(clamp_x(cx(pts[i].real())), clamp_y(cy(pts[i].imag())));
      ++start_[cell_of[i] + 1];
    }
    for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
    order_.resize(pts.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) order_[fill[cell_of[i]]++] = i;
  }

  double nearest(Complex q) const {
    const std::int64_t qx = cx(q.real()), qy = cy(q.imag());
    const std::int64_t dx = qx < 0 ? -qx : (qx >= nx_ ? qx - nx_ + 1 : 0);
    const std::int64_t dy = qy < 0 ? -qy : (qy >= ny_ ? qy - ny_ + 1 : 0);
    const std::int64_t r0 = std::max(dx, dy);
    const std::int64_t r_max = r0 + nx_ + ny_;
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t r = r0; r <= r_max; ++r) {
      const std::int64_t xlo = std::max<std::int64_t>(qx - r, 0);
      const std::int64_t xhi = std::min<std::int64_t>(qx + r, nx_ - 1);
      for (std::int64_t ix = xlo; ix <= xhi; ++ix) {
        const bool edge = ix == qx - r || ix == qx + r;
        if (edge) {
          const std::int64_t ylo = std::max<std::int64_t>(qy - r, 0);
          const std::int64_t yhi = std::min<std::int64_t>(qy + r, ny_ - 1);
          for (std::int64_t iy = ylo; iy <= yhi; ++iy) scan(ix, iy, q, best);
        } else {
          if (qy - r >= 0 && qy - r < ny_) scan(ix, qy - r, q, best);
          if (r > 0 && qy + r >= 0 && qy + r < ny_) scan(ix, qy + r, q, best);
        }
      }
      // Cells beyond ring r are at least r cell widths away.
      if (best <= static_cast<double>(r) * cell_) break;
    }
    return best;
  }

 private:
  std::int64_t cx(double x) const { return static_cast<std::int64_t>(std::floor((x - ox_) / cell_)); }
  std::int64_t cy(double y) const { return static_cast<std::int64_t>(std::floor((y - oy_) / cell_)); }
  std::int64_t clamp_x(std::int64_t i) const { return std::clamp<std::int64_t>(i, 0, nx_ - 1); }
  std::int64_t clamp_y(std::int64_t i) const { return std::clamp<std::int64_t>(i, 0, ny_ - 1); }
  std::size_t index(std::int64_t ix, std::int64_t iy) const {
    return static_cast<std::size_t>(ix * ny_ + iy);
  }
  void scan(std::int64_t ix, std::int64_t iy, Complex q, double& best) const {
    const std::size_t c = index(ix, iy);
    for (std::size_t k = start_[c]; k < start_[c + 1]; ++k) {
      best = std::min(best, std::abs(pts_[order_[k]] - q));
    }
  }

  const std::vector<Complex>& pts_;
  double cell_ = 1.0, ox_ = 0.0, oy_ = 0.0;
  std::int64_t nx_ = 1, ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

double directed_distance(const std::vector<Complex>& from, const NearestGrid& to) {
  double worst = 0.0;
  for (const auto& p : from) worst = std::max(worst, to.nearest(p));
  return worst;
}

double segment_distance(Complex z, Complex p, Complex q) {
  const Complex d = q - p;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(z - p);
  const double t = std::clamp(((z - p) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(z - (p + t * d));
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

std::size_t box_count(const std::vector<Complex>& points, double eps) {
  require(std::isfinite(eps) && eps > 0.0, "box_count: eps must be positive");
  require(!points.empty(), "box_count: no points");
  std::unordered_set<std::pair<std::int64_t, std::int64_t>, CellHash> cells;
  cells.reserve(points.size());
  for (const auto& p : points) {
    cells.emplace(static_cast<std::int64_t>(std::floor(p.real() / eps)),
                  static_cast<std::int64_t>(std::floor(p.imag() / eps)));
  }
  return cells.size();
}

double max_point_spacing(const std::vector<Complex>& points) {
  double worst = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    worst = std::max(worst, std::abs(points[i] - points[i - 1]));
  }
  return worst;
}

DimensionFit dimension_estimate(const std::vector<Complex>& points,
                                double point_spacing, double eps_min,
                                double eps_max, std::size_t n_scales) {
  require(eps_min > 0.0 && eps_max > eps_min, "dimension: need 0 < eps_min < eps_max");
  require(std::log10(eps_max / eps_min) >= 1.5 - 1e-12,
          "dimension: eps range must span at least 1.5 decades");
  require(n_scales >= 3, "dimension: need at least 3 scales");
  DimensionFit fit;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n_scales; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n_scales - 1);
    const double eps = eps_min * std::pow(eps_max / eps_min, frac);
    const std::size_t n = box_count(points, eps);
    fit.scales.push_back(eps);
    fit.counts.push_back(n);
    x.push_back(std::log(1.0 / eps));
    y.push_back(std::log(static_cast<double>(n)));
  }
  if (std::all_of(fit.counts.begin(), fit.counts.end(),
                  [&](std::size_t c) { return c == fit.counts.front(); })) {
    throw FitError("dimension: every box count equals " +
                   std::to_string(fit.counts.front()));
  }
  const LinearFit lf = least_squares(x, y);
  fit.raw_slope = lf.slope;
  fit.r2 = lf.r2;
  if (lf.r2 >= kMinDimensionR2) fit.slope = lf.slope;
  if (point_spacing > eps_min) {
    fit.warnings.push_back("resolution: point spacing " + std::to_string(point_spacing) +
                           " exceeds eps_min " + std::to_string(eps_min));
  }
  return fit;
}

DimensionFit dimension_estimate(const HullApprox& hull, double eps_min,
                                double eps_max, std::size_t n_scales) {
  // Spacing within pieces; the gaps at driver jumps are genuine.
  double spacing = 0.0;
  std::size_t next_jump = 0;
  for (std::size_t i = 1; i < hull.points.size(); ++i) {
    while (next_jump < hull.jumps.size() && hull.jumps[next_jump].point_index < i) ++next_jump;
    const bool across = next_jump < hull.jumps.size() && hull.jumps[next_jump].point_index == i;
    if (!across) spacing = std::max(spacing, std::abs(hull.points[i].z - hull.points[i - 1].z));
  }
  return dimension_estimate(hull.positions(), spacing, eps_min, eps_max, n_scales);
}

double hausdorff_distance(const std::vector<Complex>& a,
                          const std::vector<Complex>& b) {
  require(!a.empty() && !b.empty(), "hausdorff_distance: empty point set");
  const NearestGrid ga(a), gb(b);
  return std::max(directed_distance(a, gb), directed_distance(b, ga));
}

double hausdorff_to_segment(const std::vector<Complex>& points, Complex p,
                            Complex q, std::size_t n_segment_points) {
  require(!points.empty(), "hausdorff_to_segment: empty point set");
  require(n_segment_points >= 2, "hausdorff_to_segment: need two segment points");
  double worst = 0.0;
  for (const auto& z : points) worst = std::max(worst, segment_distance(z, p, q));
  const NearestGrid grid(points);
  for (std::size_t i = 0; i < n_segment_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n_segment_points - 1);
    worst = std::max(worst, grid.nearest(p + t * (q - p)));
  }
  return worst;
}

void RescaledHullConfig::validate() const {
  StableParams{alpha, 1.0}.validate();
  require(!s_values.empty(), "hull-scaling: no s values");
  for (double s : s_values) require(std::isfinite(s) && s > 0.0, "hull-scaling: s must be positive");
  require(n_paths >= 1, "hull-scaling: n_paths must be positive");
  require(n_steps >= 1, "hull-scaling: n_steps must be positive");
  require(resolution >= 0.0, "hull-scaling: resolution must be non-negative");
  require(height_eps > 0.0, "hull-scaling: height eps must be positive");
}

std::vector<ExperimentReport> rescaled_hull_experiment(
    const RescaledHullConfig& cfg, std::uint64_t master_seed,
    const ParallelFor& parallel) {
  cfg.validate();
  struct PathResult {
    double distance = 0.0;
    bool high = false;
  };
  std::vector<ExperimentReport> reports;
  for (std::size_t level = 0; level < cfg.s_values.size(); ++level) {
    const double s = cfg.s_values[level];
    const double kappa = std::pow(s, 2.0 - cfg.alpha);
    const std::uint64_t level_seed = derive_seed(master_seed, level);
    const auto results = map_indexed<PathResult>(cfg.n_paths, parallel, [&](std::size_t i) {
      Driver driver = Driver::constant(0.0, 1.0);
      if (cfg.driver == HullDriverKind::stable) {
        RandomSource rng(derive_seed(level_seed, i));
        driver = Driver::from_path(
            sample_stable_path({cfg.alpha, kappa}, 1.0, cfg.n_steps, rng));
      }
      TraceOptions opt;
      opt.samples_per_piece = 4;
      opt.resolution = cfg.resolution;
      const HullApprox hull = compute_trace(driver, 1.0, opt);
      const auto pts = hull.positions();
      PathResult r;
      r.distance = hausdorff_to_segment(pts, 0.0, Complex(0.0, 2.0));
      r.high = std::any_of(pts.begin(), pts.end(),
                           [&](Complex z) { return z.imag() > cfg.height_eps; });
      return r;
    });
    std::vector<double> distances;
    std::size_t high = 0;
    for (const auto& r : results) {
      distances.push_back(r.distance);
      high += r.high ? 1 : 0;
    }
    ExperimentReport report = mean_report("hausdorff_to_segment", distances, level_seed);
    report.extras["s"] = s;
    report.extras["kappa"] = kappa;
    report.extras["height_eps"] = cfg.height_eps;
    report.extras["height_frequency"] =
        static_cast<double>(high) / static_cast<double>(cfg.n_paths);
    const ConfidenceInterval hi = wilson_interval(high, cfg.n_paths);
    report.extras["height_frequency_ci_low"] = hi.low;
    report.extras["height_frequency_ci_high"] = hi.high;
    report.extras["capacity"] = 2.0;
    reports.push_back(std::move(report));
  }
  return reports;
}

LemmaL1Certificate check_lemma_l1(const Driver& driver, double T,
                                  const HullApprox& hull, double interval_centre,
                                  double tol) {
  LemmaL1Certificate cert;
  cert.a = driver.min_level(T);
  cert.b = driver.max_level(T);
  for (const auto& p : hull.points) {
    if (p.z.real() < cert.a - tol || p.z.real() > cert.b + tol) {
      cert.range_ok = false;
      cert.offending = p;
      cert.message = "trace point outside [min W, max W] x R";
      return cert;
    }
  }
  const double half = 0.5 * std::sqrt(T);
  const double occ = driver.occupation_time(interval_centre - 10.0 * half,
                                            interval_centre + 10.0 * half, T);
  cert.occupation_eps = occ / T;
  cert.height_applicable = cert.occupation_eps < 1.0;
  if (!cert.height_applicable) return cert;
  cert.height_bound = 4.0 * std::sqrt(cert.occupation_eps * T);
  for (const auto& p : hull.points) {
    const bool in_strip = std::abs(p.z.real() - interval_centre) <= half;
    if (in_strip && p.z.imag() >= cert.height_bound + tol) {
      cert.height_ok = false;
      cert.offending = p;
      cert.message = "trace point above 4 sqrt(eps T) over I";
      return cert;
    }
  }
  return cert;
}

LemmaL2Certificate check_lemma_l2(const Driver& driver, double T, Complex z0,
                                  std::size_t n_probes, RandomSource& rng) {
  LemmaL2Certificate cert;
  cert.clearance = real_part_clearance(driver, z0, T);
  if (cert.clearance <= 0.0) return cert;
  // Probes stay inside 0.999 of the radius so the certified margin
  // |Re X^z| >= eps - |z - z0| is not lost to the swallowing tolerance.
  while (cert.probes < n_probes) {
    const double radius = 0.999 * cert.clearance * std::sqrt(rng.uniform());
    const double angle = 2.0 * rng.symmetric_angle();
    const Complex p = z0 + std::polar(radius, angle);
    if (p.imag() < 0.0) continue;
    ++cert.probes;
    if (swallow_time(driver, p, T).swallowed()) {
      ++cert.swallowed_probes;
      if (!cert.offending) cert.offending = p;
    }
  }
  return cert;
}

void DerivativeMomentConfig::validate() const {
  StableParams{alpha, kappa}.validate();
  require(alpha < 2.0, "deriv-moments: truncated driver needs alpha < 2");
  require(beta > 0.0 && beta < 2.0, "deriv-moments: need 0 < beta < 2");
  require(delta > 0.0, "deriv-moments: delta must be positive");
  require(z.imag() > 0.0 && z.imag() < 1.0, "deriv-moments: need 0 < Im z < 1");
  require(u > 0.0 && u <= -std::log(z.imag()) * (1.0 + 1e-12),
          "deriv-moments: need 0 < u <= -log y");
  require(n_paths >= 1, "deriv-moments: n_paths must be positive");
  require(t_max > 0.0 && grid_dt > 0.0, "deriv-moments: t_max and grid_dt must be positive");
  require(small_jump_threshold > 0.0 && small_jump_threshold < 1.0,
          "deriv-moments: small-jump threshold must lie in (0, 1)");
  require(rho > 0.0 && rho < 1.0, "deriv-moments: need 0 < rho < 1");
  require(tail_T > 0.0, "deriv-moments: tail_T must be positive");
}

ExperimentReport derivative_moment_experiment(const DerivativeMomentConfig& cfg,
                                              std::uint64_t master_seed,
                                              const ParallelFor& parallel) {
  cfg.validate();
  const double x = cfg.z.real(), y = cfg.z.imag();
  const double tail_log = (cfg.rho - 1.0) * std::log(y);
  DriverModel model = ZeroDriverModel{cfg.grid_dt};
  if (cfg.driver == MomentDriverKind::truncated) {
    model = TruncatedDriverModel{{cfg.alpha, cfg.kappa},
                                 TruncationConfig::make(cfg.alpha, cfg.small_jump_threshold),
                                 cfg.grid_dt};
  }
  struct PathResult {
    double value = 0.0;
    bool reached = false;
    bool tail = false;
  };
  const auto results = map_indexed<PathResult>(cfg.n_paths, parallel, [&](std::size_t i) {
    RandomSource rng(derive_seed(master_seed, i));
    DriverStream stream(model, rng);
    BackwardFlow flow(cfg.z, {cfg.u});
    const double tail_end = std::min(cfg.tail_T, cfg.t_max);
    double tail_max = 0.0;
    bool tail_done = false;
    double t = 0.0;
    for (;;) {
      const DriverEvent ev = stream.next();
      const double end = std::min(ev.time, cfg.t_max);
      if (!tail_done && end >= tail_end) {
        flow.flow(tail_end - t);
        tail_max = flow.max_log_deriv();
        tail_done = true;
        flow.flow(end - tail_end);
      } else {
        flow.flow(end - t);
      }
      t = end;
      if ((flow.all_reached() && tail_done) || t >= cfg.t_max) break;
      flow.jump(ev.increment);
    }
    const TimeChangeRecord& rec = flow.records().front();
    PathResult r;
    r.reached = rec.reached();
    r.value = r.reached ? std::exp(cfg.beta * rec.log_deriv) : 0.0;
    r.tail = tail_max >= tail_log;
    return r;
  });
  std::vector<double> values;
  std::size_t unreached = 0, tail = 0;
  for (const auto& r : results) {
    values.push_back(r.value);
    unreached += r.reached ? 0 : 1;
    tail += r.tail ? 1 : 0;
  }
  ExperimentReport report =
      mean_report("E[|f_u'(z)|^beta; gamma_u < t_max]", values, master_seed);
  attach_censoring(report, unreached);
  report.extras["bound"] = std::exp(-(cfg.beta - cfg.delta) * cfg.u) *
                           std::pow(x * x + y * y, cfg.beta / 2.0) * std::pow(y, -cfg.beta);
  report.extras["tail_probability"] =
      static_cast<double>(tail) / static_cast<double>(cfg.n_paths);
  report.extras["tail_threshold"] = std::pow(y, cfg.rho - 1.0);
  report.extras["u"] = cfg.u;
  return report;
}

void Region::validate() const {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
          "region: need x_min < x_max");
  require(std::isfinite(y_min) && std::isfinite(y_max) && y_max > y_min && y_min >= 0.0,
          "region: need 0 <= y_min < y_max");
}

HoelderReport modulus_estimate(const Driver& driver, double T,
                               const Region& region, double mesh,
                               double stability_tol) {
  region.validate();
  require(mesh > 0.0, "modulus: mesh must be positive");
  require(stability_tol > 0.0, "modulus: stability tolerance must be positive");
  const double width = region.x_max - region.x_min;
  const double height = region.y_max - region.y_min;
  if (width < 4.0 * mesh || height < 4.0 * mesh) {
    throw NumericalError("modulus: mesh " + std::to_string(mesh) +
                             " too coarse for the region (need 4 cells per side)",
                         mesh);
  }
  const MapChain chain = build_chain(driver, T);
  HoelderReport report;
  for (int g = 0; g <= 150; ++g) report.gamma_grid.push_back(0.01 * g);

  // Offsets (dj, dk) with distance in [1, 10] cells, one of each +- pair.
  std::vector<std::pair<int, int>> offsets;
  for (int dj = 0; dj <= 10; ++dj) {
    for (int dk = -10; dk <= 10; ++dk) {
      if (dj == 0 && dk <= 0) continue;
      const int d2 = dj * dj + dk * dk;
      if (d2 >= 1 && d2 <= 100) offsets.emplace_back(dj, dk);
    }
  }
  for (int level = 0; level < 3; ++level) {
    const double h = mesh / static_cast<double>(1 << level);
    const int nx = static_cast<int>(std::floor(width / h + 1e-9)) + 1;
    const int ny = static_cast<int>(std::floor(height / h + 1e-9)) + 1;
    std::vector<Complex> f(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < nx; ++j) {
      for (int k = 0; k < ny; ++k) {
        const Complex z(region.x_min + j * h, region.y_min + k * h);
        f[static_cast<std::size_t>(j) * ny + k] = evaluate_backward_flow(chain, z);
      }
    }
    std::vector<double> log_sup(offsets.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      const auto [dj, dk] = offsets[o];
      double sup = 0.0;
      for (int j = 0; j + dj < nx; ++j) {
        for (int k = std::max(0, -dk); k < ny && k + dk < ny; ++k) {
          const double d = std::abs(f[static_cast<std::size_t>(j + dj) * ny + (k + dk)] -
                                    f[static_cast<std::size_t>(j) * ny + k]);
          sup = std::max(sup, d);
        }
      }
      if (sup > 0.0) log_sup[o] = std::log(sup);
    }
    std::vector<double> constants;
    for (double gamma : report.gamma_grid) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < offsets.size(); ++o) {
        const double dist = h * std::hypot(offsets[o].first, offsets[o].second);
        best = std::max(best, log_sup[o] - gamma * std::log(dist));
      }
      constants.push_back(std::exp(best));
    }
    report.mesh_sizes.push_back(h);
    report.constants.push_back(std::move(constants));
  }
  const auto change = [&](std::size_t g) {
    double worst = 0.0;
    for (std::size_t i = 1; i < report.constants.size(); ++i) {
      const double a = report.constants[i - 1][g], b = report.constants[i][g];
      worst = std::max(worst, std::abs(b / a - 1.0));
    }
    return worst;
  };
  std::optional<std::size_t> chosen;
  for (std::size_t g = 0; g < report.gamma_grid.size(); ++g) {
    if (change(g) <= stability_tol) chosen = g;
  }
  if (!chosen) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < report.gamma_grid.size(); ++g) {
      if (change(g) < change(best)) best = g;
    }
    chosen = best;
    report.warnings.push_back("no exponent met the stability tolerance; reporting the most stable one (relative change " +
                              std::to_string(change(best)) + ")");
  }
  report.exponent = report.gamma_grid[*chosen];
  report.constant = report.constants.back()[*chosen];
  return report;
}

bool RcllReport::ok() const {
  if (!modulus_ok || !failures.empty()) return false;
  return std::all_of(jumps.begin(), jumps.end(), [](const RcllJumpCheck& j) { return j.ok; });
}

RcllReport rcll_check(const HullApprox& hull, const Driver& driver,
                      const RcllOptions& options) {
  driver.validate();
  RcllReport report;
  const auto& pts = hull.points;
  if (pts.size() < 2) return report;
  // Level change (if any) landing at each point index.
  std::vector<double> jump_at(pts.size(), 0.0);
  std::vector<bool> is_jump(pts.size(), false);
  for (const auto& j : hull.jumps) {
    if (j.point_index >= pts.size()) continue;
    jump_at[j.point_index] = j.size;
    is_jump[j.point_index] = true;
    const double expected = driver.value_at(j.time) - driver.value_at(std::nextafter(j.time, 0.0));
    if (std::abs(expected - j.size) > 1e-12 * (1.0 + std::abs(j.size))) {
      report.failures.push_back("jump annotation at t=" + std::to_string(j.time) +
                                " disagrees with the driver");
    }
  }
  double spacing = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!is_jump[i] && !pts[i - 1].left_limit) {
      spacing = std::max(spacing, std::abs(pts[i].z - pts[i - 1].z));
    }
  }
  const double attach_tol = options.attach_tol > 0.0 ? options.attach_tol : 2.0 * spacing + 1e-6;

  std::vector<double> ratios;
  std::vector<std::size_t> ratio_index;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const bool macro = is_jump[i] && std::abs(jump_at[i]) >= options.j_min;
    if (macro) continue;
    const double dgamma = std::abs(pts[i].z - pts[i - 1].z);
    const double sigma = std::sqrt(std::max(0.0, pts[i].t - pts[i - 1].t)) + std::abs(jump_at[i]);
    ++report.pairs_checked;
    if (sigma == 0.0) {
      if (dgamma > attach_tol) {
        report.failures.push_back("points at equal time t=" + std::to_string(pts[i].t) +
                                  " without a driver change are " + std::to_string(dgamma) + " apart");
      }
      continue;
    }
    ratios.push_back(dgamma / sigma);
    ratio_index.push_back(i);
  }
  if (!ratios.empty()) {
    report.modulus_constant = median(ratios);
    const double limit = options.modulus_slack * std::max(report.modulus_constant, 1e-300);
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      report.worst_ratio = std::max(report.worst_ratio, ratios[r]);
      if (ratios[r] > limit) {
        report.modulus_ok = false;
        report.failures.push_back("continuity modulus exceeded at t=" +
                                  std::to_string(pts[ratio_index[r]].t));
      }
    }
  }

  for (const auto& j : hull.jumps) {
    if (std::abs(j.size) < options.j_min || j.point_index == 0 || j.point_index >= pts.size()) continue;
    const std::size_t p = j.point_index;
    RcllJumpCheck check;
    check.time = j.time;
    check.size = j.size;
    check.gap = std::abs(pts[p].z - pts[p - 1].z);
    check.left_limit_step = p >= 2 ? std::abs(pts[p - 1].z - pts[p - 2].z) : 0.0;
    double attach = pts[p].z.imag();
    for (std::size_t q = 0; q < p; ++q) attach = std::min(attach, std::abs(pts[p].z - pts[q].z));
    check.attach_distance = attach;
    const bool gap_ok = check.gap > options.gap_min;
    const bool left_ok = pts[p - 1].left_limit && check.left_limit_step <= attach_tol;
    const bool attach_ok = attach <= attach_tol;
    check.ok = gap_ok && left_ok && attach_ok;
    if (!check.ok) {
      report.failures.push_back("jump at t=" + std::to_string(j.time) +
                                (gap_ok ? "" : ": no trace gap") +
                                (left_ok ? "" : ": no left limit") +
                                (attach_ok ? "" : ": new branch not attached"));
    }
    report.jumps.push_back(check);
  }
  return report;
}

nlohmann::json to_json(const DimensionFit& fit) {
  nlohmann::json j;
  j["scales"] = fit.scales;
  j["counts"] = fit.counts;
  j["slope"] = fit.slope ? nlohmann::json(*fit.slope) : nlohmann::json(nullptr);
  j["raw_slope"] = fit.raw_slope;
  j["r2"] = fit.r2;
  j["warnings"] = fit.warnings;
  return j;
}

nlohmann::json to_json(const HoelderReport& report) {
  nlohmann::json j;
  j["exponent"] = report.exponent;
  j["constant"] = report.constant;
  j["mesh_sizes"] = report.mesh_sizes;
  j["warnings"] = report.warnings;
  return j;
}

nlohmann::json to_json(const RcllReport& report) {
  nlohmann::json j;
  j["ok"] = report.ok();
  j["modulus_ok"] = report.modulus_ok;
  j["modulus_constant"] = report.modulus_constant;
  j["worst_ratio"] = report.worst_ratio;
  j["pairs_checked"] = report.pairs_checked;
  nlohmann::json jumps = nlohmann::json::array();
  for (const auto& c : report.jumps) {
    jumps.push_back({{"time", c.time},
                     {"size", c.size},
                     {"gap", c.gap},
                     {"left_limit_step", c.left_limit_step},
                     {"attach_distance", c.attach_distance},
                     {"ok", c.ok}});
  }
  j["jumps"] = jumps;
  j["failures"] = report.failures;
  return j;
}

}  // namespace sle
