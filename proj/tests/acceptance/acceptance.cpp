// Acceptance run: one PASS/FAIL line per criterion.  Exit status is 0 only
// when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "stable_loewner/errors.hpp"
#include "stable_loewner/flow_dynamics.hpp"
#include "stable_loewner/geometry_stats.hpp"
#include "stable_loewner/loewner_core.hpp"
#include "stable_loewner/parallel.hpp"
#include "stable_loewner/random.hpp"
#include "stable_loewner/stable_process.hpp"
#include "stable_loewner/statistics.hpp"
#include "worker_pool.hpp"

using namespace sle;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  json data;
};

using Criterion = Outcome (*)(std::uint64_t, const ParallelFor&);

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// n draws in chunks of 1000, chunk c seeded by derive_seed(seed, c).
std::vector<double> draws(std::size_t n, std::uint64_t seed, const ParallelFor& par,
                          const std::function<double(RandomSource&)>& draw) {
  constexpr std::size_t chunk = 1000;
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  const auto parts = map_indexed<std::vector<double>>(n_chunks, par, [&](std::size_t c) {
    RandomSource rng(derive_seed(seed, c));
    std::vector<double> v(std::min(chunk, n - c * chunk));
    for (auto& x : v) x = draw(rng);
    return v;
  });
  std::vector<double> out;
  out.reserve(n);
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Complex random_point(RandomSource& rng, double x_lo, double x_hi, double y_lo,
                     double y_hi) {
  return {x_lo + (x_hi - x_lo) * rng.uniform(), y_lo + (y_hi - y_lo) * rng.uniform()};
}

// ---------------------------------------------------------------------------

Outcome c1(std::uint64_t seed, const ParallelFor&) {
  TraceOptions opt;
  opt.samples_per_piece = 2000;
  opt.lift = 1e-8;
  const HullApprox hull = compute_trace(Driver::constant(0.0, 1.0), 1.0, opt);
  double trace_err = 0.0;
  for (const auto& p : hull.points)
    trace_err = std::max(trace_err, std::abs(p.z - Complex(0.0, 2.0 * std::sqrt(p.t))));

  RandomSource rng(seed);
  std::vector<MapChain> chains{build_chain(Driver::constant(0.0, 1.0), 1.0)};
  for (double alpha : {0.5, 1.0, 1.5})
    chains.push_back(build_chain(
        Driver::from_path(sample_stable_path({alpha, 1.0}, 1.0, 100, rng)), 1.0));
  double rt_err = 0.0;
  std::size_t checked = 0;
  for (int k = 0; k < 1000; ++k) {
    const Complex z = random_point(rng, -3.0, 3.0, 0.01, 3.0);
    const MapChain& chain = chains[k % chains.size()];
    const Complex w = evaluate_inverse(chain, z);
    rt_err = std::max(rt_err, std::abs(evaluate_forward(chain, w) - z) / (1.0 + std::abs(z)));
    ++checked;
  }
  Outcome o;
  o.pass = hull.points.size() > 100 && trace_err < 1e-6 && rt_err < 1e-9;
  o.detail = "zero-driver trace error " + num(trace_err) + " over " +
             std::to_string(hull.points.size()) + " points, round-trip error " +
             num(rt_err) + " on " + std::to_string(checked) + " points";
  o.data = {{"trace_error", trace_err}, {"round_trip_error", rt_err}};
  return o;
}

Outcome c2(std::uint64_t seed, const ParallelFor& par) {
  const double target = 1.0 / std::sqrt(5.0);
  const auto flow = run_backward_flow({0.0, 1.0}, Driver::constant(0.0, 1.0), 1.0);
  const double lib_err = std::abs(std::exp(flow.final_state.log_deriv) - target);
  const double quad = oracle::gauss_legendre(
      [](double t) {
        const Complex Z = oracle::zero_driver_backward({0.0, 1.0}, t);
        const double r2 = std::norm(Z);
        return 2.0 * (Z.real() * Z.real() - Z.imag() * Z.imag()) / (r2 * r2);
      },
      0.0, 1.0, 400);
  const double quad_err = std::abs(std::exp(quad) - target);

  const auto rel = map_indexed<double>(100, par, [&](std::size_t i) {
    RandomSource rng(derive_seed(seed, i));
    const double alpha = 0.4 + 1.4 * rng.uniform();
    const auto path = sample_truncated_path({alpha, 1.0}, TruncationConfig::make(alpha, 1e-2),
                                            1.0, 100, rng);
    const Driver driver = Driver::from_path(path);
    const MapChain chain = build_chain(driver, 1.0);
    const Complex z = random_point(rng, -1.0, 1.0, 0.05, 1.0);
    const double h = 1e-6 * z.imag();
    const Complex fd = (evaluate_backward_flow(chain, z + h) -
                        evaluate_backward_flow(chain, z - h)) / (2.0 * h);
    const double lib = std::exp(run_backward_flow(z, driver, 1.0).final_state.log_deriv);
    return std::abs(lib - std::abs(fd)) / std::abs(fd);
  });
  const double worst = *std::max_element(rel.begin(), rel.end());
  Outcome o;
  o.pass = lib_err < 1e-6 && quad_err < 1e-6 && worst < 1e-3;
  o.detail = "z=i error " + num(lib_err) + " (quadrature " + num(quad_err) +
             "), worst finite-difference relative error " + num(worst) + " over 100 drivers";
  o.data = {{"closed_form_error", lib_err}, {"quadrature_error", quad_err}, {"fd_relative", rel}};
  return o;
}

Outcome c3(std::uint64_t seed, const ParallelFor& par) {
  constexpr std::size_t n = 100000;
  const double crit = ks_critical_value(0.01, n);
  std::vector<double> ks;
  int passed = 0;
  for (std::uint64_t s = 0; s < 3; ++s) {
    auto x = draws(n, derive_seed(seed, s), par, [](RandomSource& rng) {
      return sample_stable_increment({1.0, 1.0}, 1.0, rng);
    });
    ks.push_back(ks_statistic(std::move(x), oracle::cauchy_cdf));
    passed += ks.back() < crit ? 1 : 0;
  }
  const auto g = draws(1000000, derive_seed(seed, 3), par, [](RandomSource& rng) {
    return sample_stable_increment({2.0, 1.0}, 1.0, rng);
  });
  const double m = mean(g);
  double var = 0.0;
  for (double x : g) var += (x - m) * (x - m);
  var /= static_cast<double>(g.size() - 1);
  Outcome o;
  o.pass = passed >= 2 && std::abs(var - 2.0) <= 0.02;
  o.detail = "Cauchy KS " + num(ks[0]) + ", " + num(ks[1]) + ", " + num(ks[2]) +
             " (critical " + num(crit) + ", " + std::to_string(passed) +
             "/3 below), alpha=2 variance " + num(var);
  o.data = {{"ks", ks}, {"critical", crit}, {"variance", var}};
  return o;
}

Outcome c4(std::uint64_t seed, const ParallelFor& par) {
  constexpr std::size_t n = 10000;
  const double crit = ks_critical_value(0.01, n, n);
  const double c = 4.0;
  Outcome o;
  o.pass = true;
  o.detail = "two-sample KS (critical " + num(crit) + "):";
  std::uint64_t stream = 0;
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto lhs = draws(n, derive_seed(seed, stream++), par, [&](RandomSource& rng) {
      return sample_stable_increment({alpha, 1.0}, c, rng);
    });
    const double scale = std::pow(c, 1.0 / alpha);
    const auto rhs = draws(n, derive_seed(seed, stream++), par, [&](RandomSource& rng) {
      return scale * sample_stable_increment({alpha, 1.0}, 1.0, rng);
    });
    const double d = ks_statistic(lhs, rhs);
    o.pass = o.pass && d < crit;
    o.detail += " alpha=" + num(alpha) + " " + num(d);
    o.data["ks"].push_back(d);
  }
  return o;
}

Outcome c5(std::uint64_t seed, const ParallelFor& par) {
  constexpr std::size_t n = 100000;
  const std::vector<std::pair<double, double>> cases{{0.5, 1e-3}, {1.0, 1e-3}, {1.5, 1e-2}};
  Outcome o;
  o.pass = true;
  o.detail = "max |ECF - oracle| over theta in [-5,5]:";
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto [alpha, eps] = cases[k];
    const TruncationConfig trunc = TruncationConfig::make(alpha, eps);
    const auto x = draws(n, derive_seed(seed, k), par, [&](RandomSource& rng) {
      return sample_truncated_path({alpha, 1.0}, trunc, 1.0, 1, rng).final_value();
    });
    double worst = 0.0;
    for (int j = -20; j <= 20; ++j) {
      const double theta = 0.25 * j;
      double re = 0.0, im = 0.0;
      for (double v : x) {
        re += std::cos(theta * v);
        im += std::sin(theta * v);
      }
      const Complex ecf(re / n, im / n);
      worst = std::max(worst, std::abs(ecf - oracle::truncated_char_function(theta, alpha)));
    }
    o.pass = o.pass && worst < 1e-2;
    o.detail += " alpha=" + num(alpha) + " " + num(worst);
    o.data["worst"].push_back(worst);
  }
  return o;
}

struct CertificateTally {
  std::size_t l1a = 0, l1b = 0, l1b_applicable = 0, l2 = 0, l2_probes = 0;
  std::size_t height = 0, capacity = 0;
  double capacity_worst = 0.0;
  double path_max = 0.0, path_end = 0.0;
};

Outcome c6(std::uint64_t seed, const ParallelFor& par) {
  constexpr std::size_t n_paths = 500;
  const auto tallies = map_indexed<CertificateTally>(n_paths, par, [&](std::size_t i) {
    RandomSource rng(derive_seed(seed, i));
    const double alpha = 0.3 + 1.4 * rng.uniform();
    const double kappa = std::exp(-1.0 + 2.5 * rng.uniform());
    const double T = 0.5 + rng.uniform();
    const auto path = sample_stable_path_recombined(
        {alpha, kappa}, TruncationConfig::make(alpha, 1e-2), T, 40, rng);
    const Driver driver = Driver::from_path(path);
    CertificateTally tally;
    tally.path_max = *std::max_element(path.values.begin(), path.values.end());
    tally.path_end = path.final_value();

    TraceOptions opt;
    opt.samples_per_piece = 4;
    const HullApprox hull = compute_trace(driver, T, opt);
    const double a = driver.min_level(T), b = driver.max_level(T);
    for (double centre : {0.5 * (a + b), a, b + 5.0, a + (b - a) * rng.uniform()}) {
      const auto cert = check_lemma_l1(driver, T, hull, centre);
      tally.l1a += cert.range_ok ? 0 : 1;
      tally.l1b += cert.height_ok ? 0 : 1;
      tally.l1b_applicable += cert.height_applicable ? 1 : 0;
    }
    for (int k = 0; k < 2; ++k) {
      const Complex z0 = random_point(rng, a - 1.0, b + 1.0, 0.01, 2.0);
      const auto cert = check_lemma_l2(driver, T, z0, 8, rng);
      tally.l2 += cert.ok() ? 0 : 1;
      tally.l2_probes += cert.probes;
    }
    for (int k = 0; k < 2; ++k) {
      const Complex z = random_point(rng, a - 1.0, b + 1.0, 0.01, 2.0);
      const auto flow = run_backward_flow(z, driver, T);
      const double y0 = z.imag();
      for (const auto& s : flow.trajectory) {
        const double bound = y0 * y0 + 4.0 * s.t;
        if (s.Y * s.Y > bound * (1.0 + 1e-12) + 1e-15) ++tally.height;
      }
    }
    const MapChain chain = build_chain(driver, T);
    const std::size_t split = 1 + static_cast<std::size_t>(rng.uniform() * (chain.size() - 1));
    const MapChain first({chain.steps().begin(), chain.steps().begin() + split});
    const MapChain second({chain.steps().begin() + split, chain.steps().end()});
    const double full = chain.laurent_coefficient();
    const double parts = first.laurent_coefficient() + second.laurent_coefficient();
    tally.capacity_worst = std::max(std::abs(parts - full), std::abs(full - 2.0 * T)) / (2.0 * T);
    tally.capacity += tally.capacity_worst > 1e-5 ? 1 : 0;
    return tally;
  });

  CertificateTally sum;
  for (const auto& t : tallies) {
    sum.l1a += t.l1a;
    sum.l1b += t.l1b;
    sum.l1b_applicable += t.l1b_applicable;
    sum.l2 += t.l2;
    sum.l2_probes += t.l2_probes;
    sum.height += t.height;
    sum.capacity += t.capacity;
    sum.capacity_worst = std::max(sum.capacity_worst, t.capacity_worst);
  }
  // Maximal inequality P(sup S > x) <= 2 P(S_T > x), with sampling slack.
  std::size_t max_failures = 0;
  json max_rows = json::array();
  for (double x : {0.5, 1.0, 2.0, 4.0}) {
    std::size_t above_max = 0, above_end = 0;
    for (const auto& t : tallies) {
      above_max += t.path_max > x ? 1 : 0;
      above_end += t.path_end > x ? 1 : 0;
    }
    const double pm = static_cast<double>(above_max) / n_paths;
    const double pe = static_cast<double>(above_end) / n_paths;
    const double slack = 3.0 * std::sqrt(pm * (1.0 - pm) / n_paths) +
                         6.0 * std::sqrt(pe * (1.0 - pe) / n_paths);
    if (pm > 2.0 * pe + slack) ++max_failures;
    max_rows.push_back({{"x", x}, {"p_max", pm}, {"p_end", pe}});
  }
  const std::size_t falsified =
      sum.l1a + sum.l1b + sum.l2 + sum.height + sum.capacity + max_failures;
  Outcome o;
  o.pass = falsified == 0;
  o.detail = "falsifications over 500 drivers: L1(a) " + std::to_string(sum.l1a) +
             ", L1(b) " + std::to_string(sum.l1b) + " (" + std::to_string(sum.l1b_applicable) +
             " applicable), L2 " + std::to_string(sum.l2) + " (" +
             std::to_string(sum.l2_probes) + " probes), height " + std::to_string(sum.height) +
             ", max inequality " + std::to_string(max_failures) + ", capacity " +
             std::to_string(sum.capacity) + " (worst relative " + num(sum.capacity_worst) + ")";
  o.data = {{"l1a", sum.l1a}, {"l1b", sum.l1b}, {"l2", sum.l2}, {"height", sum.height},
            {"capacity", sum.capacity}, {"capacity_worst", sum.capacity_worst},
            {"max_inequality", max_rows}};
  return o;
}

Outcome c7(std::uint64_t seed, const ParallelFor& par) {
  const DerivativeMomentConfig cfg;
  const ExperimentReport r = derivative_moment_experiment(cfg, seed, par);
  const double bound = r.extras.at("bound");
  Outcome o;
  o.pass = r.estimate + 2.0 * r.standard_error <= bound && r.censoring_fraction < 0.05;
  o.detail = "estimate " + num(r.estimate) + " + 2 SE " + num(2.0 * r.standard_error) +
             " vs bound " + num(bound) + ", censoring " + num(r.censoring_fraction);
  o.data = to_json(r);
  return o;
}

Outcome c8(std::uint64_t seed, const ParallelFor& par) {
  HeightReachConfig hi;
  hi.alpha = 1.5;
  HeightReachConfig lo = hi;
  lo.alpha = 0.5;
  const ExperimentReport a = height_reach_experiment(hi, derive_seed(seed, 0), par);
  const ExperimentReport b = height_reach_experiment(lo, derive_seed(seed, 1), par);
  Outcome o;
  o.pass = a.estimate >= 0.99 && b.estimate + 3.0 * b.standard_error < 1.0;
  o.detail = "alpha=1.5 reach " + num(a.estimate) + ", alpha=0.5 reach " + num(b.estimate) +
             " + 3 SE = " + num(b.estimate + 3.0 * b.standard_error);
  o.data = {to_json(a), to_json(b)};
  return o;
}

Outcome c9(std::uint64_t seed, const ParallelFor& par) {
  const auto fits = map_indexed<DimensionFit>(10, par, [&](std::size_t i) {
    RandomSource rng(derive_seed(seed, i));
    const Driver driver =
        Driver::from_path(sample_stable_path({1.0, 1.0}, 1.0, 1000, rng));
    TraceOptions opt;
    opt.samples_per_piece = 8;
    opt.resolution = 1e-4;
    return dimension_estimate(compute_trace(driver, 1.0, opt), 1e-3, 1e-1);
  });
  double slope = 0.0, min_r2 = 1.0;
  for (const auto& f : fits) {
    slope += f.raw_slope / fits.size();
    min_r2 = std::min(min_r2, f.r2);
  }
  Outcome o;
  o.pass = slope >= 0.85 && slope <= 1.25 && min_r2 >= 0.98;
  o.detail = "mean slope " + num(slope) + ", min r2 " + num(min_r2) + " over 10 paths";
  for (const auto& f : fits) o.data["fits"].push_back(to_json(f));
  return o;
}

Outcome c10(std::uint64_t seed, const ParallelFor& par) {
  RescaledHullConfig trend;
  const auto reports = rescaled_hull_experiment(trend, derive_seed(seed, 0), par);
  bool decreasing = true;
  for (std::size_t k = 1; k < reports.size(); ++k)
    decreasing = decreasing && reports[k].median < reports[k - 1].median;

  RescaledHullConfig large;
  large.s_values = {100.0};
  large.n_paths = 100;
  large.n_steps = 1600;
  large.resolution = 0.0;
  const auto big = rescaled_hull_experiment(large, derive_seed(seed, 1), par);
  const double freq = big[0].extras.at("height_frequency");
  Outcome o;
  o.pass = decreasing && freq <= 0.1;
  o.detail = "medians " + num(reports[0].median) + ", " + num(reports[1].median) + ", " +
             num(reports[2].median) + (decreasing ? " (decreasing)" : " (not decreasing)") +
             "; s=100 height frequency " + num(freq) + " (need <= 0.1)";
  for (const auto& r : reports) o.data["trend"].push_back(to_json(r));
  o.data["large"] = to_json(big[0]);
  return o;
}

struct RcllTally {
  bool ok = false;
  std::size_t injected = 0, matched = 0;
  std::string failure;
};

Outcome c11(std::uint64_t seed, const ParallelFor& par) {
  const auto tallies = map_indexed<RcllTally>(50, par, [&](std::size_t i) {
    RandomSource rng(derive_seed(seed, i));
    const double alpha = std::vector<double>{0.7, 1.0, 1.3}[i % 3];
    const auto path = sample_stable_path_recombined(
        {alpha, 2.0}, TruncationConfig::make(alpha, 1e-2), 1.0, 100, rng);
    const Driver driver = Driver::from_path(path);
    TraceOptions opt;
    opt.samples_per_piece = 8;
    opt.resolution = 1e-3;
    const RcllReport rep = rcll_check(compute_trace(driver, 1.0, opt), driver);
    RcllTally t;
    t.ok = rep.ok();
    if (!rep.failures.empty()) t.failure = rep.failures.front();
    for (const auto& jump : path.large_jumps) {
      if (std::abs(jump.size) < 0.5) continue;
      ++t.injected;
      for (const auto& c : rep.jumps)
        if (c.time == jump.time && c.ok && c.gap > 0.0) ++t.matched;
    }
    return t;
  });
  std::size_t ok = 0, injected = 0, matched = 0;
  std::string first_failure;
  for (const auto& t : tallies) {
    ok += t.ok ? 1 : 0;
    injected += t.injected;
    matched += t.matched;
    if (first_failure.empty() && !t.failure.empty()) first_failure = t.failure;
  }
  Outcome o;
  o.pass = ok == tallies.size() && matched == injected && injected > 0;
  o.detail = std::to_string(ok) + "/50 traces pass, " + std::to_string(matched) + "/" +
             std::to_string(injected) + " injected jumps with gap and left limit";
  if (!first_failure.empty()) o.detail += "; first failure: " + first_failure;
  o.data = {{"ok", ok}, {"injected", injected}, {"matched", matched}};
  return o;
}

std::set<int> parse_list(const std::string& text) {
  std::set<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    out.insert(std::stoi(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::uint64_t master = 20240601;
  std::string only, skip;
  std::size_t threads = 4;
  app.add_option("--seed", master, "master seed");
  app.add_option("--only", only, "comma-separated criteria to run");
  app.add_option("--skip", skip, "comma-separated criteria to leave out");
  app.add_option("--threads", threads, "thread count for the determinism rerun");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11};
  std::set<int> selected;
  for (int k = 1; k <= 12; ++k) selected.insert(k);
  if (!only.empty()) selected = parse_list(only);
  for (int k : parse_list(skip)) selected.erase(k);

  std::vector<std::pair<int, Outcome>> done;
  int failures = 0;
  for (int k = 1; k <= 11; ++k) {
    if (!selected.count(k)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1](derive_seed(master, k), {});
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "criterion " << k << (o.pass ? " PASS" : " FAIL") << ": " << o.detail
              << " [" << num(secs) << " s]" << std::endl;
    failures += o.pass ? 0 : 1;
    done.emplace_back(k, std::move(o));
  }

  if (selected.count(12)) {
    cli::WorkerPool pool(threads);
    std::vector<int> differing;
    for (const auto& [k, first] : done) {
      Outcome again;
      try {
        again = criteria[k - 1](derive_seed(master, k), pool.policy());
      } catch (const std::exception& e) {
        again.detail = std::string("exception: ") + e.what();
      }
      if (again.detail != first.detail || again.data.dump() != first.data.dump())
        differing.push_back(k);
    }
    const bool pass = differing.empty() && !done.empty();
    std::string detail = std::to_string(done.size()) + " criteria rerun with " +
                         std::to_string(pool.size()) + " threads, ";
    if (differing.empty()) {
      detail += "all outputs identical to the sequential run";
    } else {
      detail += "outputs differ for";
      for (int k : differing) detail += " " + std::to_string(k);
    }
    std::cout << "criterion 12 " << (pass ? "PASS" : "FAIL") << ": " << detail << std::endl;
    failures += pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
