#include "leiblab/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "leiblab/errors.hpp"

namespace leiblab::quad {

namespace {

void check(const char* rule, double value, double err, double l1, double tol) {
  if (!std::isfinite(value)) throw QuadratureError(std::string(rule) + ": non-finite result");
  // Error estimates from the double-exponential rules are conservative by
  // construction; allow two orders of magnitude over the request.
  if (err > 100.0 * tol * std::max(1.0, l1)) {
    throw QuadratureError(std::string(rule) + ": error estimate " + std::to_string(err) +
                          " exceeds tolerance");
  }
}

}  // namespace

double gauss_kronrod(const std::function<double(double)>& f, double a, double b, double tol) {
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 30, tol, &err, &l1);
  check("gauss_kronrod", v, err, l1, tol);
  return v;
}

double tanh_sinh(const std::function<double(double)>& f, double a, double b, double tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate(f, a, b, tol, &err, &l1);
  check("tanh_sinh", v, err, l1, tol);
  return v;
}

double exp_sinh(const std::function<double(double)>& f, double a, double tol) {
  thread_local boost::math::quadrature::exp_sinh<double> rule;
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate(f, a, std::numeric_limits<double>::infinity(), tol, &err, &l1);
  check("exp_sinh", v, err, l1, tol);
  return v;
}

}  // namespace leiblab::quad
