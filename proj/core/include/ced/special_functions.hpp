#pragma once

namespace ced {

/// Digamma function psi(x) for x > 0. Shifts the argument above 6 with
/// psi(x) = psi(x + 1) - 1/x, then applies the asymptotic series.
double digamma(double x);

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

}  // namespace ced
