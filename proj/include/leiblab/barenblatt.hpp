#pragma once

// Self-similar (Barenblatt) solutions of d_t u = Delta_p u^q on R^n:
//
//   u(x, t) = t^{-n k} F(|x| t^{-k}),   k = 1/(p - nD),
//
// where F solves  phi((F^q)') = -k xi F,  phi(g) = |g|^{p-2} g.  Integrating
// once more gives
//
//   D != 0:  F = [C' + (D/(pq)) k^{1/(p-1)} xi^{p/(p-1)}]^{-(p-1)/D}   (cut at 0 for D < 0)
//   D == 0:  F = C' exp(-((p-1)/(pq)) k^{1/(p-1)} xi^{p/(p-1)})

#include "leiblab/geometry.hpp"
#include "leiblab/params.hpp"

namespace leiblab {

enum class Regime { compact_support, gaussian_type, fat_tail };

const char* regime_name(Regime r);

struct BarenblattProfile {
  Params params;
  double ss_rate;           ///< k = 1/(p - nD)
  double profile_constant;  ///< C'
  double coeff;             ///< (D/(pq)) k^{1/(p-1)}; for D == 0 the exponential rate
  Regime regime;
};

/// Throws DomainError unless p > nD and C' > 0.
BarenblattProfile make_barenblatt(const Params& params, double profile_constant);

double profile_value(const BarenblattProfile& b, double xi);

/// (F^q)'(xi) from the chain rule.
double profile_flux_gradient(const BarenblattProfile& b, double xi);

/// Edge of the support for D < 0, +inf otherwise.
double support_radius(const BarenblattProfile& b);

/// u(r, t).  Throws DomainError for t <= 0.
double evaluate(const BarenblattProfile& b, double r, double t);

/// Total mass on euclidean R^n (constant in time), from Beta/Gamma integrals.
double barenblatt_mass(const BarenblattProfile& b);

/// C with ||u(t)||_inf = C mass^{p/(p-nD)} t^{-n/(p-nD)}.
double barenblatt_decay_constant(const BarenblattProfile& b);

struct BarenblattResiduals {
  double ode_residual;     ///< analytic (F^q)'
  double ode_residual_fd;  ///< sixth-order differences of F^q
  double pde_residual;     ///< d_t u - Delta_p u^q at t = 1, differences in r and t
  int excluded_cells;      ///< cells dropped around the free boundary
};

/// Residuals at the grid cell centres read as xi values.  For D < 0 the
/// cells within three of the support edge are skipped, widened by the
/// stencil reach for the difference-based residuals.
BarenblattResiduals residual_oracle(const BarenblattProfile& b, const RadialGrid& grid);

/// Bisection on log C' over [1e-8, 1e8] for the requested mass.
BarenblattProfile fit_mass_constant(const Params& params, double target_mass,
                                    const ModelGeometry& geom);

}  // namespace leiblab
