#pragma once

// Conservative explicit finite-volume scheme for d_t u = Delta_p u^q on a
// radial grid.  Face fluxes
//
//   F_{i+1/2} = S(r_{i+1/2}) phi_eps((u_{i+1}^q - u_i^q)/dr),
//   phi_eps(g) = (g^2 + eps^2)^{(p-2)/2} g,
//
// vanish at r = 0 and r = R, so the discrete mass sum_i u_i S(r_i) dr is
// conserved up to rounding.

#include <span>
#include <utility>
#include <vector>

#include "leiblab/fields.hpp"
#include "leiblab/geometry.hpp"
#include "leiblab/params.hpp"

namespace leiblab {

struct SolverConfig {
  RadialGrid grid;
  ModelGeometry geom;
  Params params;
  double t0 = 0.0;
  double t_end = 1.0;
  std::vector<double> sample_times;  ///< strictly increasing, inside [t0, t_end]
  double cfl = 0.25;
  double eps_reg = 1e-12;
  double dt_min = 1e-14;
  long long max_steps = 2'000'000'000;
};

/// Throws DomainError when the invariants of SolverConfig fail.
void validate(const SolverConfig& config);

/// Log-spaced times over [t_lo, t_hi], both included, per_decade per decade.
std::vector<double> log_sample_times(double t_lo, double t_hi, int per_decade);

struct SampleDiagnostics {
  double time = 0;
  double linf = 0;
  double l1 = 0;
  double l1q = 0;  ///< L^{1+q} norm
  double l2 = 0;
  double grad_energy = 0;  ///< int |grad u^q|^p
  double mass = 0;
  double dt_mean = 0;  ///< mean step since the previous sample
  long long steps = 0;
  double clip_mass = 0;  ///< cumulative mass added by clipping negatives
};

SampleDiagnostics diagnose(const RadialField& u, const Params& params, double time);

struct Trajectory {
  std::vector<double> times;
  std::vector<RadialField> fields;
  std::vector<SampleDiagnostics> diagnostics;
  long long steps = 0;
  double clip_mass = 0;
};

/// Trajectory from externally produced samples (diagnostics filled).
Trajectory make_trajectory(std::vector<double> times, std::vector<RadialField> fields,
                           const Params& params);

std::vector<double> face_flux(const SolverConfig& config, const RadialField& u);

/// Largest step keeping the update a convex combination of neighbouring
/// values, times cfl, clamped to [dt_min, t_end - t].
double stable_dt(const SolverConfig& config, const RadialField& u, double t);

struct StepResult {
  RadialField u;
  double clip_mass;
};

StepResult step(const SolverConfig& config, const RadialField& u, double dt);

/// Time loop from t0 to t_end.  Steps are shortened to land on sample times.
/// Throws SolverError on step-cap overrun or relative mass drift above 1e-6.
Trajectory run(const SolverConfig& config, const RadialField& u0);

struct DecayFit {
  double slope;
  double stderr_;
  int samples;
};

/// Least-squares slope of log ||u(t)||_lambda against log t on the window.
DecayFit fit_decay_exponent(const Trajectory& traj, double lambda,
                            std::pair<double, double> window);

}  // namespace leiblab
