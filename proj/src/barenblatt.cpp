#include "leiblab/barenblatt.hpp"

#include <algorithm>
#include <numbers>
#include <cmath>
#include <limits>
#include <string>

#include "leiblab/errors.hpp"

namespace leiblab {

namespace {

double phi(double g, double p) {
  if (p == 2.0) return g;
  return std::pow(std::fabs(g), p - 2.0) * g;
}

// Sixth-order central first derivative.
template <class F>
double d1(const F& f, double x, double h) {
  const double a = f(x + h) - f(x - h);
  const double b = f(x + 2 * h) - f(x - 2 * h);
  const double c = f(x + 3 * h) - f(x - 3 * h);
  return (45.0 * a - 9.0 * b + c) / (60.0 * h);
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::compact_support: return "compact_support";
    case Regime::gaussian_type: return "gaussian_type";
    case Regime::fat_tail: return "fat_tail";
  }
  return "unknown";
}

BarenblattProfile make_barenblatt(const Params& params, double profile_constant) {
  const double p = params.p();
  const double q = params.q();
  const double D = params.D();
  const int n = params.n();
  if (!(p > n * D)) {
    throw DomainError("Barenblatt profile needs p > nD (p=" + std::to_string(p) +
                      ", nD=" + std::to_string(n * D) + ")");
  }
  if (!(profile_constant > 0.0) || !std::isfinite(profile_constant)) {
    throw DomainError("profile constant must be positive and finite");
  }
  const double k = 1.0 / (p - n * D);
  const double kp = std::pow(k, 1.0 / (p - 1.0));
  BarenblattProfile b{params, k, profile_constant, 0.0, Regime::gaussian_type};
  if (D == 0.0) {
    b.coeff = (p - 1.0) / (p * q) * kp;
  } else {
    b.coeff = D / (p * q) * kp;
    b.regime = D < 0.0 ? Regime::compact_support : Regime::fat_tail;
  }
  return b;
}

double profile_value(const BarenblattProfile& b, double xi) {
  const double p = b.params.p();
  const double D = b.params.D();
  const double y = std::pow(xi, p / (p - 1.0));
  if (b.regime == Regime::gaussian_type) return b.profile_constant * std::exp(-b.coeff * y);
  const double base = b.profile_constant + b.coeff * y;
  if (base <= 0.0) return 0.0;
  return std::pow(base, -(p - 1.0) / D);
}

double profile_flux_gradient(const BarenblattProfile& b, double xi) {
  const double p = b.params.p();
  const double q = b.params.q();
  const double D = b.params.D();
  const double pp = p / (p - 1.0);
  const double dy = pp * std::pow(xi, pp - 1.0);
  if (b.regime == Regime::gaussian_type) {
    const double Fq = std::pow(b.profile_constant, q) * std::exp(-q * b.coeff * std::pow(xi, pp));
    return -q * b.coeff * dy * Fq;
  }
  const double base = b.profile_constant + b.coeff * std::pow(xi, pp);
  if (base <= 0.0) return 0.0;
  const double e = -q * (p - 1.0) / D;
  return e * std::pow(base, e - 1.0) * b.coeff * dy;
}

double support_radius(const BarenblattProfile& b) {
  if (b.regime != Regime::compact_support) return std::numeric_limits<double>::infinity();
  const double p = b.params.p();
  return std::pow(b.profile_constant / -b.coeff, (p - 1.0) / p);
}

double evaluate(const BarenblattProfile& b, double r, double t) {
  if (!(t > 0.0)) throw DomainError("Barenblatt evaluation needs t > 0");
  const double k = b.ss_rate;
  return std::pow(t, -b.params.n() * k) * profile_value(b, r * std::pow(t, -k));
}

double barenblatt_mass(const BarenblattProfile& b) {
  // Substituting y = |coeff| xi^{p'} / C' reduces the radial integral to a
  // Beta (D != 0) or Gamma (D == 0) function.
  const double p = b.params.p();
  const double D = b.params.D();
  const int n = b.params.n();
  const double pp = p / (p - 1.0);
  const double c = n / pp;
  const double Cp = b.profile_constant;
  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  double radial = 0.0;
  if (b.regime == Regime::gaussian_type) {
    radial = Cp * std::pow(b.coeff, -c) * std::tgamma(c) / pp;
  } else {
    const double e = (p - 1.0) / std::fabs(D);
    const double scale = std::pow(Cp / std::fabs(b.coeff), c) / pp;
    if (b.regime == Regime::compact_support) {
      radial = std::pow(Cp, e) * scale * std::beta(c, e + 1.0);
    } else {
      radial = std::pow(Cp, -e) * scale * std::beta(c, e - c);
    }
  }
  return area * radial;
}

double barenblatt_decay_constant(const BarenblattProfile& b) {
  const double p = b.params.p();
  const double rate = p * b.ss_rate;
  return profile_value(b, 0.0) / std::pow(barenblatt_mass(b), rate);
}

BarenblattResiduals residual_oracle(const BarenblattProfile& b, const RadialGrid& grid) {
  const double p = b.params.p();
  const double q = b.params.q();
  const int n = b.params.n();
  const double k = b.ss_rate;
  const double h = grid.dr();
  const double edge = support_radius(b);
  constexpr int kBand = 3;
  constexpr int kStencil = 6;  // nested sixth-order differences reach 6 cells

  auto Fq = [&](double xi) { return std::pow(profile_value(b, std::fabs(xi)), q); };
  auto uq = [&](double r, double t) {
    return std::pow(evaluate(b, std::fabs(r), t), q);
  };
  // phi(d_r u^q) at time t; odd in r.
  auto flux = [&](double r, double t) {
    return phi(d1([&](double x) { return uq(x, t); }, r, h), p);
  };

  BarenblattResiduals res{0.0, 0.0, 0.0, 0};
  for (int i = 0; i < grid.N(); ++i) {
    const double xi = grid.center(i);
    const double dist = std::fabs(xi - edge) / h;
    if (dist < kBand) {
      ++res.excluded_cells;
      continue;
    }
    if (xi > edge) continue;  // identically zero outside the support
    const double F = profile_value(b, xi);

    const double ode = phi(profile_flux_gradient(b, xi), p) + k * xi * F;
    res.ode_residual = std::max(res.ode_residual, std::fabs(ode));

    if (dist < kBand + kStencil) continue;
    const double ode_fd = phi(d1(Fq, xi, h), p) + k * xi * F;
    res.ode_residual_fd = std::max(res.ode_residual_fd, std::fabs(ode_fd));

    const double ht = 1e-3;
    const double ut = d1([&](double t) { return evaluate(b, xi, t); }, 1.0, ht);
    const double div = d1([&](double r) { return flux(r, 1.0); }, xi, h) +
                       (n - 1) / xi * flux(xi, 1.0);
    res.pde_residual = std::max(res.pde_residual, std::fabs(ut - div));
  }
  return res;
}

BarenblattProfile fit_mass_constant(const Params& params, double target_mass,
                                    const ModelGeometry& geom) {
  if (geom.kind() != WeightKind::euclidean) {
    throw DomainError("Barenblatt profiles exist on euclidean space only");
  }
  if (geom.n() != params.n()) throw DomainError("geometry dimension differs from params");
  if (!(target_mass > 0.0) || !std::isfinite(target_mass)) {
    throw DomainError("target mass must be positive and finite");
  }
  auto mass_at = [&](double logc) { return barenblatt_mass(make_barenblatt(params, std::exp(logc))); };
  double lo = std::log(1e-8);
  double hi = std::log(1e8);
  const double m_lo = mass_at(lo);
  const double m_hi = mass_at(hi);
  const bool increasing = m_hi > m_lo;
  if (target_mass < std::min(m_lo, m_hi) || target_mass > std::max(m_lo, m_hi)) {
    throw DomainError("target mass " + std::to_string(target_mass) +
                      " not bracketed by profile constants in [1e-8, 1e8]");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double m = mass_at(mid);
    if (std::fabs(m - target_mass) < 1e-12 * target_mass) return make_barenblatt(params, std::exp(mid));
    if ((m < target_mass) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const BarenblattProfile b = make_barenblatt(params, std::exp(0.5 * (lo + hi)));
  if (std::fabs(barenblatt_mass(b) - target_mass) > 1e-8 * target_mass) {
    throw DomainError("mass bisection did not converge");
  }
  return b;
}

}  // namespace leiblab
