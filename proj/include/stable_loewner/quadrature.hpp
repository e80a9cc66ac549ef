#pragma once

#include <cstddef>
#include <functional>

namespace sle {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
};

/// Adaptive Gauss-Kronrod on [a, b] with extrapolation (GSL QAGS); copes with
/// integrable endpoint singularities.  Throws NumericalError when the
/// requested tolerance is not met.
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol = 0.0,
                           std::size_t limit = 2000);

/// Fourier tail integral of f(x) cos(omega x) over [a, inf) (GSL QAWF).
QuadratureResult integrate_cosine_tail(const std::function<double(double)>& f,
                                       double a, double omega, double abs_tol,
                                       std::size_t limit = 2000);

/// Classic adaptive Simpson with Richardson correction.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 40);

}  // namespace sle
