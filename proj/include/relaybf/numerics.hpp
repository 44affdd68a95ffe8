// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace relaybf {

/// Adaptive Gauss-Kronrod integration of f over [a, b] to the given absolute
/// tolerance.  Throws NumericalFailureError if the tolerance is unreachable.
double adaptive_quad(const std::function<double(double)>& f, double a, double b,
                     double abs_tol);

/// e^x E_1(x) for x > 0, without overflow for small x.
double expint_e1_scaled(double x);

/// H_n = sum_{k=1}^n 1/k, with H_0 = 0.
double harmonic(int n);

/// Binomial coefficient as a double (exact for the small arguments used here).
double binom(int n, int k);

} // namespace relaybf
