#include "stable_loewner/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "stable_loewner/errors.hpp"

namespace sle {

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["statistic"] = report.statistic;
  j["n"] = report.n;
  j["estimate"] = report.estimate;
  j["mean"] = report.mean;
  j["median"] = report.median;
  j["standard_error"] = report.standard_error;
  j["ci95"] = {report.interval.low, report.interval.high};
  j["seed"] = report.seed;
  j["censoring_fraction"] = report.censoring_fraction;
  j["warnings"] = report.warnings;
  nlohmann::json extras = nlohmann::json::object();
  for (const auto& [key, value] : report.extras) extras[key] = value;
  j["extras"] = extras;
  return j;
}

ConfidenceInterval wilson_interval(std::size_t successes, std::size_t n,
                                   double z) {
  if (n == 0) throw ParameterError("wilson_interval: n must be positive");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // Guard the rounding at p = 0 or 1 so the interval keeps the estimate.
  return {std::min(p, std::max(0.0, centre - half)),
          std::max(p, std::min(1.0, centre + half))};
}

ExperimentReport proportion_report(std::string statistic, std::size_t successes,
                                   std::size_t n, std::uint64_t seed) {
  ExperimentReport r;
  r.statistic = std::move(statistic);
  r.n = n;
  r.seed = seed;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  r.estimate = p;
  r.mean = p;
  r.median = 2 * successes >= n ? 1.0 : 0.0;
  r.standard_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
  r.interval = wilson_interval(successes, n);
  return r;
}

ExperimentReport mean_report(std::string statistic,
                             const std::vector<double>& samples,
                             std::uint64_t seed) {
  if (samples.empty()) throw ParameterError("mean_report: no samples");
  ExperimentReport r;
  r.statistic = std::move(statistic);
  r.n = samples.size();
  r.seed = seed;
  r.mean = mean(samples);
  r.estimate = r.mean;
  r.median = median(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - r.mean) * (x - r.mean);
  const double nn = static_cast<double>(samples.size());
  const double var = samples.size() > 1 ? ss / (nn - 1.0) : 0.0;
  r.standard_error = std::sqrt(var / nn);
  r.interval = {r.mean - kNormalQuantile975 * r.standard_error,
                r.mean + kNormalQuantile975 * r.standard_error};
  return r;
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw ParameterError("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double median(std::vector<double> xs) { return quantile(std::move(xs), 0.5); }

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ParameterError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> a,
                    const std::function<double(double)>& cdf) {
  if (a.empty()) throw ParameterError("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f,
                  f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(double level, std::size_t n, std::size_t m) {
  if (!(level > 0.0 && level < 1.0) || n == 0) {
    throw ParameterError("ks_critical_value: bad level or sample size");
  }
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  const double nn = static_cast<double>(n);
  if (m == 0) return c / std::sqrt(nn);
  const double mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ParameterError("least_squares: need at least two paired values");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw FitError("least_squares: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace sle
