#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace sle {

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double x) const { return low <= x && x <= high; }
};

/// Monte Carlo summary shared by every experiment.  The interval is at the
/// 95% level and always contains the point estimate; `extras` carries
/// experiment-specific numbers (bounds, secondary statistics) in key order.
struct ExperimentReport {
  std::string statistic;
  std::size_t n = 0;
  double estimate = 0.0;
  double mean = 0.0;
  double median = 0.0;
  double standard_error = 0.0;
  ConfidenceInterval interval;
  std::uint64_t seed = 0;
  double censoring_fraction = 0.0;
  std::vector<std::string> warnings;
  std::map<std::string, double> extras;
};

nlohmann::json to_json(const ExperimentReport& report);

inline constexpr double kNormalQuantile975 = 1.959963984540054;

ConfidenceInterval wilson_interval(std::size_t successes, std::size_t n,
                                   double z = kNormalQuantile975);

/// Report for a Bernoulli frequency: estimate = successes / n, Wilson interval.
ExperimentReport proportion_report(std::string statistic, std::size_t successes,
                                   std::size_t n, std::uint64_t seed);

/// Report for a sample mean with a normal-approximation interval.
ExperimentReport mean_report(std::string statistic,
                             const std::vector<double>& samples,
                             std::uint64_t seed);

double mean(const std::vector<double>& xs);
double median(std::vector<double> xs);
double quantile(std::vector<double> xs, double q);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::vector<double> a,
                    const std::function<double(double)>& cdf);

/// Asymptotic KS critical value at significance `level` for sample sizes n and
/// m (m = 0 for the one-sample test).
double ks_critical_value(double level, std::size_t n, std::size_t m = 0);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares y = slope * x + intercept.
LinearFit least_squares(const std::vector<double>& x,
                        const std::vector<double>& y);

}  // namespace sle
