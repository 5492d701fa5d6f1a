#include "leiblab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "leiblab/detail/power.hpp"
#include "leiblab/errors.hpp"

namespace leiblab {

RadialField::RadialField(RadialGrid grid, ModelGeometry geom, std::vector<double> values)
    : grid_(grid), geom_(std::move(geom)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(grid_.N())) {
    throw SizeMismatch("field has " + std::to_string(values_.size()) + " values for " +
                       std::to_string(grid_.N()) + " cells");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || values_[i] < 0.0) {
      throw DomainError("field value at cell " + std::to_string(i) +
                        " is negative or not finite");
    }
  }
}

RadialField RadialField::sample(const RadialGrid& grid, const ModelGeometry& geom,
                                const std::function<double(double)>& f) {
  std::vector<double> v(static_cast<std::size_t>(grid.N()));
  for (int i = 0; i < grid.N(); ++i) v[i] = f(grid.center(i));
  return RadialField(grid, geom, std::move(v));
}

RadialField RadialField::scaled(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return RadialField(grid_, geom_, std::move(v));
}

RadialField RadialField::power(double w) const {
  const detail::Power pw(w);
  std::vector<double> v(values_);
  for (double& x : v) x = pw(x);
  return RadialField(grid_, geom_, std::move(v));
}

double power_integral(const RadialField& u, double lambda) {
  const detail::Power pw(lambda);
  const auto& grid = u.grid();
  double sum = 0.0;
  for (int i = 0; i < grid.N(); ++i) {
    const double x = u[i];
    if (x > 0.0) sum += pw(x) * surface_density(u.geom(), grid.center(i));
  }
  return sum * grid.dr();
}

double lp_norm(const RadialField& u, double lambda, IndexMode mode) {
  if (!(lambda > 0.0)) throw DomainError("lp_norm: lambda must be positive");
  if (mode == IndexMode::strict && lambda < 1.0) {
    throw DomainError("lp_norm: lambda < 1 is a quasi-norm; request formal mode");
  }
  if (std::isinf(lambda)) {
    const auto v = u.values();
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  }
  const double I = power_integral(u, lambda);
  return lambda == 1.0 ? I : std::pow(I, 1.0 / lambda);
}

double grad_power_energy(const RadialField& u, double w, double p) {
  if (!(w > 0.0)) throw DomainError("grad_power_energy: w must be positive");
  const auto& grid = u.grid();
  const detail::Power pw(w);
  const detail::Power pp(p);
  const double inv = 1.0 / grid.dr();
  double sum = 0.0;
  double prev = pw(u[0]);
  for (int i = 1; i < grid.N(); ++i) {
    const double cur = pw(u[i]);
    const double g = std::fabs(cur - prev) * inv;
    if (g > 0.0) sum += pp(g) * surface_density(u.geom(), grid.face(i));
    prev = cur;
  }
  return sum * grid.dr();
}

double entropy_J(const RadialField& v, double r) {
  if (!(r > 0.0)) throw DomainError("entropy_J: r must be positive");
  const double norm = lp_norm(v, r, IndexMode::formal);
  if (!(norm > 0.0)) throw DomainError("entropy_J: field is identically zero");
  const auto& grid = v.grid();
  const double log_norm = std::log(norm);
  const double norm_r = std::pow(norm, r);
  double sum = 0.0;
  for (int i = 0; i < grid.N(); ++i) {
    const double x = v[i];
    if (x <= 0.0) continue;
    sum += (std::pow(x, r) / norm_r) * (std::log(x) - log_norm) *
           surface_density(v.geom(), grid.center(i));
  }
  return sum * grid.dr();
}

double caccioppoli_rate(const RadialField& u, double lambda, const Params& params) {
  if (!(lambda >= 1.0 + params.q())) {
    throw AdmissibilityError("caccioppoli_rate needs lambda >= 1+q (lambda=" +
                             std::to_string(lambda) + ")");
  }
  const double p = params.p();
  const double sigma = lambda - params.D();
  const double coeff = energy_constant(params) * lambda * (lambda - 1.0) * std::pow(sigma, -p);
  return -coeff * grad_power_energy(u, sigma / p, p);
}

double rayleigh_quotient(const RadialField& v, const Params& params) {
  const double p = params.p();
  const double pk = p * params.kappa();
  const double energy = grad_power_energy(v, 1.0, p);
  if (!(energy > 0.0)) throw DomainError("rayleigh_quotient: gradient energy vanishes");
  return std::pow(lp_norm(v, pk), p) / energy;
}

double estimate_sobolev_constant(const ModelGeometry& geom, const Params& params,
                                 std::span<const RadialField> family) {
  if (family.empty()) throw DomainError("estimate_sobolev_constant: empty family");
  double best = 0.0;
  for (const auto& v : family) {
    if (v.geom().n() != geom.n() || v.geom().kind() != geom.kind()) {
      throw DomainError("estimate_sobolev_constant: field lives on a different geometry");
    }
    best = std::max(best, rayleigh_quotient(v, params));
  }
  return best;
}

RadialField gaussian_field(const RadialGrid& grid, const ModelGeometry& geom, double width,
                           double height) {
  const double s = 1.0 / (2.0 * width * width);
  return RadialField::sample(grid, geom, [&](double r) { return height * std::exp(-s * r * r); });
}

RadialField talenti_field(const RadialGrid& grid, const ModelGeometry& geom, double p,
                          double scale) {
  const int n = geom.n();
  if (!(n > p)) throw DomainError("talenti_field needs n > p");
  const double e1 = p / (p - 1.0);
  const double e2 = -(n - p) / p;
  auto shape = [&](double r) { return std::pow(1.0 + std::pow(r / scale, e1), e2); };
  const double edge = shape(grid.R());
  return RadialField::sample(grid, geom,
                             [&](double r) { return std::max(0.0, shape(r) - edge); });
}

RadialField bump_field(const RadialGrid& grid, const ModelGeometry& geom, double width,
                       double height) {
  return RadialField::sample(grid, geom, [&](double r) {
    const double x = 1.0 - (r / width) * (r / width);
    return x > 0.0 ? height * x * x * x : 0.0;
  });
}

}  // namespace leiblab
