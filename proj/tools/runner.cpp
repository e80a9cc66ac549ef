#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.hpp"
#include "stable_loewner/errors.hpp"
#include "stable_loewner/flow_dynamics.hpp"
#include "stable_loewner/geometry_stats.hpp"
#include "stable_loewner/io.hpp"
#include "stable_loewner/loewner_core.hpp"
#include "stable_loewner/stable_process.hpp"
#include "worker_pool.hpp"

namespace sle::cli {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

struct Common {
  std::uint64_t seed = 1;
  std::string out = "out";
  int threads = 0;
  std::string config;
  std::string verify;
};

struct Context {
  std::uint64_t seed;
  OutputDir& out;
  const ParallelFor& parallel;
};

struct Command {
  CLI::App* app;
  std::function<json(Context&)> run;
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Drivers

struct DriverOptions {
  std::string kind = "stable";
  std::string sampler = "grid";
  double alpha = 1.0;
  double kappa = 1.0;
  double T = 1.0;
  std::size_t n_steps = 1000;
  double level = 0.0;
  double threshold = 1e-3;
  std::string file;
  CLI::Option* T_opt = nullptr;
};

void add_driver_options(CLI::App* sub, DriverOptions& d) {
  sub->add_option("--driver", d.kind, "stable, truncated, constant or custom-file")
      ->check(CLI::IsMember({"stable", "truncated", "constant", "custom-file"}));
  sub->add_option("--sampler", d.sampler, "stable driver: grid or recombined (exact large jumps)")
      ->check(CLI::IsMember({"grid", "recombined"}));
  sub->add_option("--alpha", d.alpha, "stability index");
  sub->add_option("--kappa", d.kappa, "speed: W_t = S_{kappa t}");
  d.T_opt = sub->add_option("--T", d.T, "time horizon");
  sub->add_option("--n-steps", d.n_steps, "driver grid size");
  sub->add_option("--level", d.level, "level of the constant driver");
  sub->add_option("--threshold", d.threshold, "small-jump threshold of the truncated process");
  sub->add_option("--driver-file", d.file, "CSV with columns t, W for custom-file");
}

struct BuiltDriver {
  Driver driver;
  double T = 0.0;
  std::optional<LevyPath> path;
};

BuiltDriver build_driver(const DriverOptions& o, std::uint64_t path_seed) {
  BuiltDriver b;
  b.T = o.T;
  if (o.kind == "constant") {
    if (!(o.T > 0.0)) throw ParameterError("--T must be positive");
    b.driver = Driver::constant(o.level, o.T);
    return b;
  }
  if (o.kind == "custom-file") {
    if (o.file.empty()) throw ParameterError("--driver custom-file needs --driver-file");
    std::ifstream in(o.file);
    if (!in) throw ParameterError("cannot read driver file " + o.file);
    b.driver = read_driver_csv(in);
    if (o.T_opt->count() == 0) b.T = b.driver.horizon;
    return b;
  }
  const StableParams params{o.alpha, o.kappa};
  params.validate();
  if (!(o.T > 0.0)) throw ParameterError("--T must be positive");
  if (o.n_steps < 1) throw ParameterError("--n-steps must be positive");
  RandomSource rng(path_seed);
  if (o.kind == "truncated") {
    b.path = sample_truncated_path(params, TruncationConfig::make(o.alpha, o.threshold), o.T,
                                   o.n_steps, rng);
  } else if (o.sampler == "recombined") {
    b.path = sample_stable_path_recombined(params, TruncationConfig::make(o.alpha, o.threshold),
                                           o.T, o.n_steps, rng);
  } else {
    b.path = sample_stable_path(params, o.T, o.n_steps, rng);
  }
  b.driver = Driver::from_path(*b.path);
  return b;
}

void write_driver(OutputDir& out, const BuiltDriver& b) {
  std::ostringstream csv;
  if (b.path) {
    write_path_csv(csv, *b.path);
  } else {
    write_driver_csv(csv, b.driver);
  }
  out.write("path.csv", csv.str());
}

struct TraceFlags {
  std::size_t samples_per_piece = 8;
  double resolution = 0.0;
  int max_depth = 12;
  double lift = 1e-8;
};

void add_trace_options(CLI::App* sub, TraceFlags& t) {
  sub->add_option("--samples-per-piece", t.samples_per_piece, "initial samples per constant piece");
  sub->add_option("--resolution", t.resolution, "bisect until points are this close (0: off)");
  sub->add_option("--max-depth", t.max_depth, "bisection depth limit");
  sub->add_option("--lift", t.lift, "height above the driver at which the trace is read");
}

TraceOptions trace_options(const TraceFlags& t) {
  TraceOptions o;
  o.samples_per_piece = t.samples_per_piece;
  o.resolution = t.resolution;
  o.max_refine_depth = t.max_depth;
  o.lift = t.lift;
  return o;
}

// ---------------------------------------------------------------------------
// Subcommands

Command sample_path_command(CLI::App& app) {
  auto* sub = app.add_subcommand("sample-path", "sample a driving function and write it as CSV");
  auto d = std::make_shared<DriverOptions>();
  add_driver_options(sub, *d);
  return {sub, [d](Context& ctx) {
            const BuiltDriver b = build_driver(*d, derive_seed(ctx.seed, 0));
            write_driver(ctx.out, b);
            json s{{"points", b.driver.breakpoints.size()},
                   {"horizon", b.driver.horizon},
                   {"final_value", b.driver.value_at(b.driver.horizon)},
                   {"min", b.driver.min_level(b.driver.horizon)},
                   {"max", b.driver.max_level(b.driver.horizon)}};
            if (b.path) s["large_jumps"] = b.path->large_jumps.size();
            ctx.out.write("path.json", dump(s));
            return s;
          }};
}

Command trace_command(CLI::App& app) {
  auto* sub = app.add_subcommand("trace", "compute the Loewner trace of a driver (CSV and SVG)");
  auto d = std::make_shared<DriverOptions>();
  auto t = std::make_shared<TraceFlags>();
  auto break_jump = std::make_shared<double>(0.5);
  add_driver_options(sub, *d);
  add_trace_options(sub, *t);
  sub->add_option("--break-jump", *break_jump, "SVG: start a new polyline at jumps this large");
  return {sub, [=](Context& ctx) {
            const BuiltDriver b = build_driver(*d, derive_seed(ctx.seed, 0));
            const HullApprox hull = compute_trace(b.driver, b.T, trace_options(*t));
            write_driver(ctx.out, b);
            std::ostringstream csv, svg;
            write_trace_csv(csv, hull);
            ctx.out.write("trace.csv", csv.str());
            SvgOptions so;
            so.break_jump = *break_jump;
            write_hull_svg(svg, hull, so);
            ctx.out.write("hull.svg", svg.str());
            double height = 0.0;
            for (const auto& p : hull.points) height = std::max(height, p.z.imag());
            json s{{"points", hull.points.size()},
                   {"jumps", hull.jumps.size()},
                   {"horizon", hull.horizon},
                   {"capacity", hull.capacity},
                   {"max_height", height},
                   {"unresolved_gap", hull.unresolved_gap}};
            ctx.out.write("trace.json", dump(s));
            return s;
          }};
}

Command hull_scaling_command(CLI::App& app) {
  auto* sub = app.add_subcommand("hull-scaling", "Hausdorff distance of rescaled hulls to [0, 2i]");
  auto cfg = std::make_shared<RescaledHullConfig>();
  auto driver = std::make_shared<std::string>("stable");
  sub->add_option("--alpha", cfg->alpha, "stability index");
  sub->add_option("--s", cfg->s_values, "scales s (hull K_{s^2} shrunk by 1/s)");
  sub->add_option("--n-paths", cfg->n_paths, "paths per scale");
  sub->add_option("--n-steps", cfg->n_steps, "driver grid size on [0, 1]");
  sub->add_option("--resolution", cfg->resolution, "trace resolution");
  sub->add_option("--height-eps", cfg->height_eps, "height for the avoidance frequency");
  sub->add_option("--driver", *driver, "stable or zero")->check(CLI::IsMember({"stable", "zero"}));
  return {sub, [=](Context& ctx) {
            cfg->driver = *driver == "zero" ? HullDriverKind::zero : HullDriverKind::stable;
            const auto reports = rescaled_hull_experiment(*cfg, ctx.seed, ctx.parallel);
            json all = json::array();
            std::ostringstream csv;
            csv << "s,kappa,median,mean,standard_error,height_frequency\n";
            for (const auto& r : reports) {
              all.push_back(to_json(r));
              csv << format_number(r.extras.at("s")) << ',' << format_number(r.extras.at("kappa")) << ','
                  << format_number(r.median) << ',' << format_number(r.mean) << ','
                  << format_number(r.standard_error) << ','
                  << format_number(r.extras.at("height_frequency")) << '\n';
            }
            ctx.out.write("hull_scaling.json", dump(all));
            ctx.out.write("hull_scaling.csv", csv.str());
            return all;
          }};
}

Command dimension_command(CLI::App& app) {
  auto* sub = app.add_subcommand("dimension", "box-counting dimension of simulated traces");
  auto d = std::make_shared<DriverOptions>();
  auto t = std::make_shared<TraceFlags>();
  t->resolution = 1e-4;
  auto eps_min = std::make_shared<double>(1e-3);
  auto eps_max = std::make_shared<double>(1e-1);
  auto n_scales = std::make_shared<std::size_t>(9);
  auto n_paths = std::make_shared<std::size_t>(1);
  add_driver_options(sub, *d);
  add_trace_options(sub, *t);
  sub->add_option("--eps-min", *eps_min, "smallest box size");
  sub->add_option("--eps-max", *eps_max, "largest box size");
  sub->add_option("--n-scales", *n_scales, "number of box sizes");
  sub->add_option("--n-paths", *n_paths, "independent driver paths");
  return {sub, [=](Context& ctx) {
            if (*n_paths < 1) throw ParameterError("--n-paths must be positive");
            if (!(*eps_min > 0.0 && *eps_max > *eps_min)) {
              throw ParameterError("need 0 < --eps-min < --eps-max");
            }
            const auto fits = map_indexed<DimensionFit>(*n_paths, ctx.parallel, [&](std::size_t i) {
              const BuiltDriver b = build_driver(*d, derive_seed(ctx.seed, i));
              return dimension_estimate(compute_trace(b.driver, b.T, trace_options(*t)), *eps_min,
                                        *eps_max, *n_scales);
            });
            json list = json::array();
            std::ostringstream csv;
            csv << "path,eps,count\n";
            double sum = 0.0, min_r2 = 1.0;
            std::size_t with_slope = 0;
            for (std::size_t i = 0; i < fits.size(); ++i) {
              list.push_back(to_json(fits[i]));
              min_r2 = std::min(min_r2, fits[i].r2);
              if (fits[i].slope) {
                sum += *fits[i].slope;
                ++with_slope;
              }
              for (std::size_t k = 0; k < fits[i].scales.size(); ++k) {
                csv << i << ',' << format_number(fits[i].scales[k]) << ',' << fits[i].counts[k] << '\n';
              }
            }
            json s{{"n_paths", fits.size()},
                   {"slope", with_slope ? json(sum / static_cast<double>(with_slope)) : json(nullptr)},
                   {"fits_with_slope", with_slope},
                   {"min_r2", min_r2},
                   {"fits", list}};
            ctx.out.write("dimension.json", dump(s));
            ctx.out.write("dimension.csv", csv.str());
            return s;
          }};
}

Command deriv_moments_command(CLI::App& app) {
  auto* sub = app.add_subcommand("deriv-moments", "derivative moment at the time change gamma_u");
  auto cfg = std::make_shared<DerivativeMomentConfig>();
  auto x = std::make_shared<double>(cfg->z.real());
  auto y = std::make_shared<double>(cfg->z.imag());
  auto driver = std::make_shared<std::string>("truncated");
  sub->add_option("--alpha", cfg->alpha, "stability index");
  sub->add_option("--kappa", cfg->kappa, "driver speed");
  sub->add_option("--beta", cfg->beta, "moment order");
  sub->add_option("--delta", cfg->delta, "slack in the exponent of the bound");
  sub->add_option("--z-re", *x, "Re z");
  sub->add_option("--z-im", *y, "Im z");
  sub->add_option("--u", cfg->u, "log-height level");
  sub->add_option("--n-paths", cfg->n_paths, "Monte Carlo paths");
  sub->add_option("--t-max", cfg->t_max, "censoring time");
  sub->add_option("--grid-dt", cfg->grid_dt, "driver grid step");
  sub->add_option("--threshold", cfg->small_jump_threshold, "small-jump threshold");
  sub->add_option("--rho", cfg->rho, "tail check exponent");
  sub->add_option("--tail-T", cfg->tail_T, "tail check horizon");
  sub->add_option("--driver", *driver, "truncated or zero")->check(CLI::IsMember({"truncated", "zero"}));
  return {sub, [=](Context& ctx) {
            cfg->z = Complex(*x, *y);
            cfg->driver = *driver == "zero" ? MomentDriverKind::zero : MomentDriverKind::truncated;
            const json r = to_json(derivative_moment_experiment(*cfg, ctx.seed, ctx.parallel));
            ctx.out.write("deriv_moments.json", dump(r));
            return r;
          }};
}

Command height_reach_command(CLI::App& app) {
  auto* sub = app.add_subcommand("height-reach", "probability that Im f_t(z) reaches Im z e^u");
  auto cfg = std::make_shared<HeightReachConfig>();
  auto x = std::make_shared<double>(cfg->z.real());
  auto y = std::make_shared<double>(cfg->z.imag());
  sub->add_option("--alpha", cfg->alpha, "stability index");
  sub->add_option("--kappa", cfg->kappa, "driver speed");
  sub->add_option("--z-re", *x, "Re z");
  sub->add_option("--z-im", *y, "Im z");
  sub->add_option("--u", cfg->u, "log-height level");
  sub->add_option("--n-paths", cfg->n_paths, "Monte Carlo paths");
  sub->add_option("--t-max", cfg->t_max, "censoring time");
  sub->add_option("--grid-dt", cfg->grid_dt, "driver grid step");
  return {sub, [=](Context& ctx) {
            cfg->z = Complex(*x, *y);
            const json r = to_json(height_reach_experiment(*cfg, ctx.seed, ctx.parallel));
            ctx.out.write("height_reach.json", dump(r));
            return r;
          }};
}

Command exit_prob_command(CLI::App& app) {
  auto* sub = app.add_subcommand("exit-prob", "P(tau_r < tau_R) for the real-line flow");
  auto cfg = std::make_shared<ExitProbabilityConfig>();
  auto direction = std::make_shared<std::string>("forward");
  sub->add_option("--alpha", cfg->alpha, "stability index");
  sub->add_option("--x0", cfg->x0, "start point");
  sub->add_option("--r", cfg->r, "inner radius");
  sub->add_option("--R", cfg->R, "outer radius (inf allowed)");
  sub->add_option("--n-paths", cfg->n_paths, "Monte Carlo paths");
  sub->add_option("--t-max", cfg->t_max, "censoring time");
  sub->add_option("--grid-dt", cfg->grid_dt, "driver grid step");
  sub->add_option("--direction", *direction, "forward or backward")
      ->check(CLI::IsMember({"forward", "backward"}));
  return {sub, [=](Context& ctx) {
            cfg->direction = parse_direction(*direction);
            const json r = to_json(exit_probability_experiment(*cfg, ctx.seed, ctx.parallel));
            ctx.out.write("exit_prob.json", dump(r));
            return r;
          }};
}

Command modulus_command(CLI::App& app) {
  auto* sub = app.add_subcommand("modulus", "Hoelder exponent of f_T on a region");
  auto d = std::make_shared<DriverOptions>();
  auto region = std::make_shared<Region>();
  auto mesh = std::make_shared<double>(0.05);
  auto tol = std::make_shared<double>(0.01);
  add_driver_options(sub, *d);
  sub->add_option("--x-min", region->x_min, "region");
  sub->add_option("--x-max", region->x_max, "region");
  sub->add_option("--y-min", region->y_min, "region");
  sub->add_option("--y-max", region->y_max, "region");
  sub->add_option("--mesh", *mesh, "coarsest mesh size");
  sub->add_option("--stability-tol", *tol, "allowed relative change of the constant");
  return {sub, [=](Context& ctx) {
            region->validate();
            const BuiltDriver b = build_driver(*d, derive_seed(ctx.seed, 0));
            const HoelderReport r = modulus_estimate(b.driver, b.T, *region, *mesh, *tol);
            std::ostringstream csv;
            csv << "mesh,gamma,constant\n";
            for (std::size_t i = 0; i < r.mesh_sizes.size(); ++i) {
              for (std::size_t g = 0; g < r.gamma_grid.size(); ++g) {
                csv << format_number(r.mesh_sizes[i]) << ',' << format_number(r.gamma_grid[g]) << ','
                    << format_number(r.constants[i][g]) << '\n';
              }
            }
            const json s = to_json(r);
            ctx.out.write("modulus.json", dump(s));
            ctx.out.write("modulus.csv", csv.str());
            return s;
          }};
}

Command rcll_command(CLI::App& app) {
  auto* sub = app.add_subcommand("rcll-check", "jump structure of the trace");
  auto d = std::make_shared<DriverOptions>();
  d->sampler = "recombined";
  d->n_steps = 200;
  d->threshold = 1e-2;
  auto t = std::make_shared<TraceFlags>();
  t->resolution = 1e-3;
  auto opts = std::make_shared<RcllOptions>();
  add_driver_options(sub, *d);
  add_trace_options(sub, *t);
  sub->add_option("--j-min", opts->j_min, "jumps treated as macroscopic");
  sub->add_option("--modulus-slack", opts->modulus_slack, "allowed multiple of the median ratio");
  sub->add_option("--gap-min", opts->gap_min, "smallest gap a macroscopic jump must open");
  sub->add_option("--attach-tol", opts->attach_tol, "attachment tolerance (0: from the resolution)");
  return {sub, [=](Context& ctx) {
            const BuiltDriver b = build_driver(*d, derive_seed(ctx.seed, 0));
            const HullApprox hull = compute_trace(b.driver, b.T, trace_options(*t));
            const json s = to_json(rcll_check(hull, b.driver, *opts));
            write_driver(ctx.out, b);
            std::ostringstream csv, svg;
            write_trace_csv(csv, hull);
            ctx.out.write("trace.csv", csv.str());
            SvgOptions so;
            so.break_jump = opts->j_min;
            write_hull_svg(svg, hull, so);
            ctx.out.write("hull.svg", svg.str());
            ctx.out.write("rcll.json", dump(s));
            return s;
          }};
}

Command frac_laplacian_command(CLI::App& app) {
  auto* sub = app.add_subcommand("frac-laplacian", "truncated fractional Laplacian of a test function");
  auto alpha = std::make_shared<double>(1.0);
  auto fn = std::make_shared<std::string>("power");
  auto p = std::make_shared<double>(1.5);
  auto a = std::make_shared<double>(0.5);
  auto xs = std::make_shared<std::vector<double>>(std::vector<double>{-1.0, 0.0, 1.0});
  auto tol = std::make_shared<double>(1e-8);
  auto numeric = std::make_shared<bool>(false);
  sub->add_option("--alpha", *alpha, "stability index");
  sub->add_option("--function", *fn, "power: (x^2 + a^2)^(p/2), cos or gaussian")
      ->check(CLI::IsMember({"power", "cos", "gaussian"}));
  sub->add_option("--p", *p, "power exponent");
  sub->add_option("--a", *a, "power offset");
  sub->add_option("--x", *xs, "evaluation points");
  sub->add_option("--tol", *tol, "absolute quadrature tolerance");
  sub->add_flag("--numeric-f2", *numeric, "estimate f'' by finite differences");
  return {sub, [=](Context& ctx) {
            TestFunction f;
            const double pp = *p, aa = *a;
            if (*fn == "power") {
              if (!(aa > 0.0)) throw ParameterError("--a must be positive");
              f.value = [=](double x) { return std::pow(x * x + aa * aa, pp / 2.0); };
              f.second_derivative = [=](double x) {
                const double r = x * x + aa * aa;
                return pp * std::pow(r, pp / 2.0 - 1.0) + pp * (pp - 2.0) * x * x * std::pow(r, pp / 2.0 - 2.0);
              };
            } else if (*fn == "cos") {
              f.value = [](double x) { return std::cos(x); };
              f.second_derivative = [](double x) { return -std::cos(x); };
            } else {
              f.value = [](double x) { return std::exp(-x * x); };
              f.second_derivative = [](double x) { return (4.0 * x * x - 2.0) * std::exp(-x * x); };
            }
            if (*numeric) f.second_derivative = nullptr;
            const StableParams params{*alpha, 1.0};
            json values = json::array();
            std::ostringstream csv;
            csv << "x,value\n";
            for (double x : *xs) {
              const double v = truncated_frac_laplacian(f, x, params, *tol);
              values.push_back({{"x", x}, {"value", v}});
              csv << format_number(x) << ',' << format_number(v) << '\n';
            }
            (void)ctx.seed;
            const json s{{"alpha", *alpha}, {"function", *fn}, {"values", values}};
            ctx.out.write("frac_laplacian.json", dump(s));
            ctx.out.write("frac_laplacian.csv", csv.str());
            return s;
          }};
}

// ---------------------------------------------------------------------------
// Configuration files and manifests

std::string config_value(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ParameterError("config: value of '" + key + "' must be a string, number or boolean");
}

// Values from the file fill only options not given on the command line.
void apply_config(const std::string& path, CLI::App& root, CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParameterError("config file " + path + ": " + e.what());
  }
  // A run manifest can be replayed directly.
  if (j.is_object() && j.contains("config") && j.contains("command")) {
    if (j.at("command") != sub.get_name()) {
      throw ParameterError("manifest is for '" + j.at("command").get<std::string>() + "', not '" +
                           sub.get_name() + "'");
    }
    j = j.at("config");
  }
  if (!j.is_object()) throw ParameterError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    if (name == "config" || name == "verify") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + name);
    if (!opt) opt = root.get_option_no_throw("--" + name);
    if (!opt) throw ParameterError("config: unknown key '" + key + "' for " + sub.get_name());
    if (opt->count() > 0) continue;
    if (value.is_array()) {
      for (const auto& v : value) opt->add_result(config_value(v, key));
    } else {
      opt->add_result(config_value(value, key));
    }
    opt->run_callback();
  }
}

void echo_options(const CLI::App& app, json& into) {
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (name == "help" || name == "config" || name == "verify") continue;
    std::vector<std::string> values = opt->results();
    if (opt->count() == 0) {
      std::string def = opt->get_default_str();
      if (def.empty()) continue;
      if (def.front() == '[' && def.back() == ']') def = def.substr(1, def.size() - 2);
      values.clear();
      std::stringstream parts(def);
      for (std::string v; std::getline(parts, v, ',');) values.push_back(v);
    }
    if (opt->get_expected_max() > 1) {
      into[name] = values;
    } else if (!values.empty()) {
      into[name] = values.back();
    }
  }
}

int report_error(std::ostream& err, int code, const std::string& kind, const std::string& type,
                 const std::string& message, std::optional<double> achieved = std::nullopt) {
  json e{{"error", kind}, {"type", type}, {"message", message}, {"exit_code", code}};
  if (achieved) e["achieved_error"] = *achieved;
  err << e.dump() << '\n';
  return code;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chordal Loewner evolution driven by symmetric stable processes", "stable-loewner"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(0, 1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "master seed");
  app.add_option("--out", common.out, "output directory");
  app.add_option("--threads", common.threads,
                 "worker threads (0: STABLE_LOEWNER_THREADS, else all cores)");
  app.add_option("--config", common.config, "JSON file of option values; flags override it");
  app.add_option("--verify", common.verify, "re-check the digests in DIR/manifest.json and exit");

  std::vector<Command> commands{
      sample_path_command(app),  trace_command(app),       hull_scaling_command(app),
      dimension_command(app),    deriv_moments_command(app), height_reach_command(app),
      exit_prob_command(app),    modulus_command(app),     rcll_command(app),
      frac_laplacian_command(app)};

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    return report_error(err, kExitUsage, "usage", "ParseError", e.what());
  }

  try {
    if (!common.verify.empty()) {
      const VerifyResult v = verify_manifest(common.verify);
      json r{{"checked", v.checked}, {"missing", v.missing}, {"mismatched", v.mismatched}, {"ok", v.ok()}};
      out << r.dump(2) << '\n';
      return v.ok() ? kExitOk : kExitFailure;
    }
    const Command* chosen = nullptr;
    for (const auto& c : commands) {
      if (c.app->parsed()) chosen = &c;
    }
    if (!chosen) {
      return report_error(err, kExitUsage, "usage", "ParseError",
                          "a subcommand is required (see --help)");
    }
    if (!common.config.empty()) apply_config(common.config, app, *chosen->app);

    const std::size_t threads = resolve_thread_count(common.threads);
    WorkerPool pool(threads);
    const ParallelFor parallel = pool.policy();
    OutputDir dir(common.out);
    const auto start = std::chrono::steady_clock::now();
    Context ctx{common.seed, dir, parallel};
    const json summary = chosen->run(ctx);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json config = json::object();
    echo_options(app, config);
    echo_options(*chosen->app, config);
    json manifest{{"tool", "stable-loewner"},
                  {"version", kVersion},
                  {"command", chosen->app->get_name()},
                  {"config", config},
                  {"threads", threads},
                  {"duration_seconds", seconds},
                  {"files", dir.file_list()}};
    std::ofstream(dir.path() / kManifestName, std::ios::binary) << dump(manifest);
    out << summary.dump(2) << '\n';
    return kExitOk;
  } catch (const CLI::Error& e) {
    return report_error(err, kExitUsage, "usage", "ConfigError", e.what());
  } catch (const ParameterError& e) {
    return report_error(err, kExitUsage, "usage", "ParameterError", e.what());
  } catch (const NumericalError& e) {
    return report_error(err, kExitNumerical, "numerical", "NumericalError", e.what(),
                        e.achieved_error());
  } catch (const FitError& e) {
    return report_error(err, kExitNumerical, "numerical", "FitError", e.what());
  } catch (const SwallowedError& e) {
    return report_error(err, kExitNumerical, "numerical", "SwallowedError", e.what());
  } catch (const StateError& e) {
    return report_error(err, kExitNumerical, "numerical", "StateError", e.what());
  } catch (const std::exception& e) {
    return report_error(err, kExitFailure, "failure", "Error", e.what());
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"stable-loewner"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace sle::cli
