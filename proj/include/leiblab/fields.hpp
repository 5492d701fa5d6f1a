#pragma once

// Cell-averaged non-negative radial functions and the integral functionals
// built on them: L^lambda norms, gradient energies, the entropy J, the
// Caccioppoli dissipation rate and Sobolev Rayleigh quotients.

#include <functional>
#include <span>
#include <vector>

#include "leiblab/geometry.hpp"
#include "leiblab/params.hpp"

namespace leiblab {

class RadialField {
 public:
  /// Throws SizeMismatch on length mismatch, DomainError on negative or
  /// non-finite entries.
  RadialField(RadialGrid grid, ModelGeometry geom, std::vector<double> values);

  /// Samples f at the cell centres.
  static RadialField sample(const RadialGrid& grid, const ModelGeometry& geom,
                            const std::function<double(double)>& f);

  const RadialGrid& grid() const { return grid_; }
  const ModelGeometry& geom() const { return geom_; }
  std::span<const double> values() const { return values_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(values_.size()); }

  RadialField scaled(double c) const;
  /// Cellwise u^w.
  RadialField power(double w) const;

 private:
  RadialGrid grid_;
  ModelGeometry geom_;
  std::vector<double> values_;
};

/// (int u^lambda)^(1/lambda); max over cells for lambda = inf.  lambda in
/// (0,1) is a quasi-norm and needs IndexMode::formal.
double lp_norm(const RadialField& u, double lambda, IndexMode mode = IndexMode::strict);

/// int u^lambda, no root taken.
double power_integral(const RadialField& u, double lambda);

/// int |grad(u^w)|^p from face differences of the cellwise power, weighted by
/// the face densities.
double grad_power_energy(const RadialField& u, double w, double p);

/// J(r, v) = int (v^r/||v||_r^r) log(v/||v||_r), with 0 log 0 = 0.
double entropy_J(const RadialField& v, double r);

/// -c1 lambda (lambda-1) sigma^-p int |grad u^(sigma/p)|^p with sigma = lambda - D.
double caccioppoli_rate(const RadialField& u, double lambda, const Params& params);

/// ||v||_{p kappa}^p / ||grad v||_p^p.
double rayleigh_quotient(const RadialField& v, const Params& params);

/// Largest Rayleigh quotient over the family: a lower estimate of S_M.
double estimate_sobolev_constant(const ModelGeometry& geom, const Params& params,
                                 std::span<const RadialField> family);

// Test-function shapes.

/// height * exp(-r^2/(2 width^2))
RadialField gaussian_field(const RadialGrid& grid, const ModelGeometry& geom, double width = 1.0,
                           double height = 1.0);

/// (1 + (r/scale)^{p/(p-1)})^{-(n-p)/p} minus its value at R, so the field
/// vanishes at the outer boundary.  Requires n > p.
RadialField talenti_field(const RadialGrid& grid, const ModelGeometry& geom, double p,
                          double scale = 1.0);

/// height * (1 - (r/width)^2)_+^3
RadialField bump_field(const RadialGrid& grid, const ModelGeometry& geom, double width,
                       double height);

}  // namespace leiblab
