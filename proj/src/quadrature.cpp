#include "stable_loewner/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <cmath>
#include <memory>
#include <string>

#include "stable_loewner/errors.hpp"

namespace sle {

namespace {

// GSL aborts on error by default; the library reports through return codes.
struct DisableGslAbort {
  DisableGslAbort() { gsl_set_error_handler_off(); }
};
const DisableGslAbort disable_gsl_abort;

double trampoline(double x, void* params) {
  return (*static_cast<const std::function<double(double)>*>(params))(x);
}

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const {
    gsl_integration_workspace_free(w);
  }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;

struct QawoDeleter {
  void operator()(gsl_integration_qawo_table* t) const {
    gsl_integration_qawo_table_free(t);
  }
};

[[noreturn]] void fail(const char* routine, int status, double abserr) {
  throw NumericalError(std::string(routine) + " did not converge: " +
                           gsl_strerror(status) +
                           " (achieved error " + std::to_string(abserr) + ")",
                       abserr);
}

double simpson_step(const std::function<double(double)>& f, double a,
                    double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, double abs_tol, double rel_tol,
                           std::size_t limit) {
  Workspace ws(gsl_integration_workspace_alloc(limit));
  gsl_function gf{&trampoline,
                  const_cast<std::function<double(double)>*>(&f)};
  QuadratureResult out;
  const int status = gsl_integration_qags(&gf, a, b, abs_tol, rel_tol, limit,
                                          ws.get(), &out.value,
                                          &out.abs_error);
  if (status != GSL_SUCCESS) fail("qags", status, out.abs_error);
  return out;
}

QuadratureResult integrate_cosine_tail(const std::function<double(double)>& f,
                                       double a, double omega, double abs_tol,
                                       std::size_t limit) {
  Workspace ws(gsl_integration_workspace_alloc(limit));
  Workspace cycle(gsl_integration_workspace_alloc(limit));
  std::unique_ptr<gsl_integration_qawo_table, QawoDeleter> table(
      gsl_integration_qawo_table_alloc(omega, 1.0, GSL_INTEG_COSINE, 50));
  gsl_function gf{&trampoline,
                  const_cast<std::function<double(double)>*>(&f)};
  QuadratureResult out;
  const int status =
      gsl_integration_qawf(&gf, a, abs_tol, limit, ws.get(), cycle.get(),
                           table.get(), &out.value, &out.abs_error);
  if (status != GSL_SUCCESS) fail("qawf", status, out.abs_error);
  return out;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

}  // namespace sle
