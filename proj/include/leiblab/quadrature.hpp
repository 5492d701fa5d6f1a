#pragma once

// Thin wrappers over Boost.Math adaptive quadrature that convert silent
// accuracy loss into QuadratureError.

#include <functional>

namespace leiblab::quad {

/// Adaptive 61-point Gauss-Kronrod on a finite interval.
double gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                     double tol = 1e-13);

/// Double-exponential rule on a finite interval; tolerates integrable
/// endpoint singularities.
double tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

/// Double-exponential rule on [a, inf).
double exp_sinh(const std::function<double(double)>& f, double a, double tol = 1e-13);

}  // namespace leiblab::quad
