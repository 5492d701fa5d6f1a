#pragma once

#include <cmath>

namespace leiblab::detail {

// x^e for x >= 0 with the exponents that dominate the solver loops
// special-cased.  Selected once, applied many times.
class Power {
 public:
  explicit Power(double e) : e_(e) {
    if (e == 0.0) kind_ = Kind::zero;
    else if (e == 1.0) kind_ = Kind::one;
    else if (e == 2.0) kind_ = Kind::two;
    else if (e == 3.0) kind_ = Kind::three;
    else if (e == 0.5) kind_ = Kind::half;
    else if (e == 1.5) kind_ = Kind::three_halves;
    else kind_ = Kind::general;
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::zero: return 1.0;
      case Kind::one: return x;
      case Kind::two: return x * x;
      case Kind::three: return x * x * x;
      case Kind::half: return std::sqrt(x);
      case Kind::three_halves: return x * std::sqrt(x);
      case Kind::general: break;
    }
    return std::pow(x, e_);
  }

  double exponent() const { return e_; }

 private:
  enum class Kind { zero, one, two, three, half, three_halves, general };
  double e_;
  Kind kind_;
};

}  // namespace leiblab::detail
