#pragma once

// Constants of the smoothing estimate and of the decay => GNI argument.
//
// Along the schedule lambda(s) = a t/(t - s) the quantity
// Psi(s) ~ log ||u(s)||_{lambda(s)} obeys  Psi' + f Psi + g = 0  with
//
//   f = -(lambda'/lambda) D/(lambda nu - D),
//   g =  (lambda'/lambda) 1/(lambda nu - D)
//        * log( (lambda/lambda') c1 (lambda-1)(lambda nu - D) / ((lambda - D)^p S) ).
//
// Its explicit solution is assembled from the closed-form integral of f and
// the integrals I1 (closed form) and I2 (quadrature).

#include <string>
#include <vector>

#include "leiblab/fields.hpp"
#include "leiblab/params.hpp"
#include "leiblab/solver.hpp"

namespace leiblab {

enum class Schedule { moser, constant };

struct MoserRun {
  Params params;
  double a;
  double t;  ///< horizon
  double S;  ///< Sobolev constant estimate
  Schedule schedule = Schedule::moser;
  double constant_lambda = 0;  ///< used with Schedule::constant
  bool zero_coefficients = false;  ///< f = g = 0 override
  /// a < 1+q: the schedule starts below the range where the differential
  /// inequality for log-norms is established.
  bool below_lemma_range = false;
};

/// Validates a nu > D, a >= 1, t > 0, S > 0.
MoserRun make_moser_run(const Params& params, double a, double t, double S);

double schedule_lambda(const MoserRun& run, double s);
double schedule_lambda_prime(const MoserRun& run, double s);

struct Coefficients {
  double f;
  double g;
};

/// Throws DomainError for s outside [0, t).
Coefficients iteration_coefficients(const MoserRun& run, double s);

/// int_0^s f, closed form log(lambda (a nu - D)/(a (lambda nu - D))).
double integral_f(const MoserRun& run, double s);

/// log(a c1 t/S) (1/(nu(a nu - D)) - 1/(nu(lambda nu - D)))
double integral_I1(const MoserRun& run, double s);

/// int_a^{Lambda} (xi nu - D)^-2 log((xi-1)(xi nu - D)/(xi (xi - D)^p)) dxi.
/// Lambda = inf uses quadrature to 1e6 and an analytic tail.
double integral_I2(const Params& params, double a, double Lambda);

double psi_solution(const MoserRun& run, double s, double psi0);

/// |Psi'(s) + f(s) Psi(s) + g(s)| with Psi' from sixth-order central
/// differences of psi_solution at step 0.01 min(s, t - s).
double psi_ode_residual(const MoserRun& run, double s, double psi0);

/// -int_a^inf D/(xi (xi nu - D)) dxi by quadrature: the s -> t limit of int_0^s f.
double integral_f_limit_quadrature(const Params& params, double a);

struct MoserConstants {
  double I1;  ///< limit of I1 at t = 1
  double I2;  ///< I2 over [a, inf)
  double C;
  double exp_C;
  bool below_lemma_range;
};

/// C = lim_{s->t} Psi(s) with Psi(0) = 0 and t = 1.
MoserConstants moser_constants(const Params& params, double a, double S);

/// exp(C): the constant of ||u(t)||_inf <= exp(C) ||u0||_a^{a nu/(a nu - D)} t^{-1/(a nu - D)}.
double decay_constant(const Params& params, double a, double S);

/// Right side of the smoothing estimate.
double sup_bound(const Params& params, double a, double exp_C, double norm_a, double t);

/// RHS - LHS of  r J(r,v) <= (r kappa S eps/(p kappa - r)) ||grad v||_p^p/||v||_r^p
///                              - (r kappa/(p kappa - r)) log eps.
double log_sobolev_check(const RadialField& v, double r, double eps, double S,
                         const Params& params);

struct LogdiffMargin {
  double s;
  double lhs;  ///< difference quotient of log ||u(s)||_{lambda(s)}
  double rhs;
  double margin;     ///< rhs - lhs
  double relative;   ///< margin / max(|lhs|, |rhs|, tiny)
};

/// Margins of the differential inequality for log ||u(s)||_{lambda(s)} at
/// interior samples; s is measured from the first sample.
std::vector<LogdiffMargin> logdiff_check(const Trajectory& traj, const MoserRun& run);

struct DecayToGniReport {
  double A;
  double B;
  double c;
  double beta;
  double t_star;
  double K;
  double K1;
  double K2;
  double margin;
};

/// K = beta^{1/(beta+1)} + beta^{-beta/(beta+1)}.
double minimum_constant(double beta);

/// Builds f(t) = A t^-beta + B t >= c from the initial sample of traj:
/// A = Cdecay^{1+q-a} (int u0^a)^zeta, B = (1+q) int |grad u0^q|^p,
/// c = int u0^{1+q}.
DecayToGniReport decay_to_gni(const Trajectory& traj, const Params& params, double a,
                              double Cdecay);
DecayToGniReport decay_to_gni(const RadialField& u0, const Params& params, double a,
                              double Cdecay);

/// K2 ||v||_s^{1-theta} ||grad v||_p^theta - ||v||_r.
double gni_check(const RadialField& v, const Params& params, double a, double K2);

}  // namespace leiblab
