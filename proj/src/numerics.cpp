// SPDX-License-Identifier: Apache-2.0

#include "relaybf/numerics.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_expint.h>

#include <cmath>
#include <memory>

#include "relaybf/errors.hpp"

namespace relaybf {

namespace {

const int kQuadLimit = 2000;

struct WorkspaceDeleter {
    void operator()(gsl_integration_workspace* w) const {
        gsl_integration_workspace_free(w);
    }
};

double call_trampoline(double x, void* params) {
    auto* f = static_cast<const std::function<double(double)>*>(params);
    return (*f)(x);
}

// GSL's default error handler aborts the process; disable it once and turn
// statuses into exceptions instead.
const int kHandlerOff = [] {
    gsl_set_error_handler_off();
    return 0;
}();

} // namespace

double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double abs_tol) {
    (void)kHandlerOff;
    std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
        gsl_integration_workspace_alloc(kQuadLimit));
    gsl_function gf;
    gf.function = &call_trampoline;
    gf.params = const_cast<std::function<double(double)>*>(&f);
    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qag(&gf, a, b, abs_tol, 0.0, kQuadLimit,
                            GSL_INTEG_GAUSS61, ws.get(), &result, &abserr);
    if (status != GSL_SUCCESS && abserr > 10.0 * abs_tol)
        throw NumericalFailureError("adaptive quadrature failed to converge");
    return result;
}

double expint_e1_scaled(double x) {
    gsl_sf_result r;
    const int status = gsl_sf_expint_E1_scaled_e(x, &r);
    if (status != GSL_SUCCESS)
        throw NumericalFailureError("expint_E1_scaled evaluation failed");
    return r.val;
}

double harmonic(int n) {
    double h = 0.0;
    for (int k = 1; k <= n; ++k) h += 1.0 / k;
    return h;
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c;
}

} // namespace relaybf
