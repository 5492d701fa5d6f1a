#include "leiblab/moser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "leiblab/errors.hpp"
#include "leiblab/quadrature.hpp"

namespace leiblab {

namespace {

constexpr double kXiCut = 1e6;
constexpr double kQuadTol = 1e-13;

double gap(const Params& P, double a) { return a * P.nu() - P.D(); }

void check_s(const MoserRun& run, double s) {
  if (!(s >= 0.0) || !(s < run.t)) {
    throw DomainError("schedule time s must lie in [0, t), got s=" + std::to_string(s));
  }
}

}  // namespace

MoserRun make_moser_run(const Params& params, double a, double t, double S) {
  if (!(a >= 1.0)) throw AdmissibilityError("Moser schedule needs a >= 1");
  if (!(gap(params, a) > 0.0)) throw AdmissibilityError("Moser schedule needs a nu > D");
  if (!(t > 0.0)) throw DomainError("horizon t must be positive");
  if (!(S > 0.0)) throw DomainError("Sobolev constant S must be positive");
  MoserRun run{params, a, t, S};
  run.below_lemma_range = a < 1.0 + params.q();
  return run;
}

double schedule_lambda(const MoserRun& run, double s) {
  if (run.schedule == Schedule::constant) return run.constant_lambda;
  return run.a * run.t / (run.t - s);
}

double schedule_lambda_prime(const MoserRun& run, double s) {
  if (run.schedule == Schedule::constant) return 0.0;
  const double d = run.t - s;
  return run.a * run.t / (d * d);
}

Coefficients iteration_coefficients(const MoserRun& run, double s) {
  check_s(run, s);
  if (run.zero_coefficients || run.schedule == Schedule::constant) return {0.0, 0.0};
  const Params& P = run.params;
  const double lam = schedule_lambda(run, s);
  const double dlam = schedule_lambda_prime(run, s);
  const double ratio = dlam / lam;
  const double lg = lam * P.nu() - P.D();
  const double f = -ratio * P.D() / lg;
  const double arg = (lam / dlam) * energy_constant(P) * (lam - 1.0) * lg /
                     (std::pow(lam - P.D(), P.p()) * run.S);
  const double g = ratio / lg * std::log(arg);
  return {f, g};
}

double integral_f(const MoserRun& run, double s) {
  check_s(run, s);
  if (run.zero_coefficients || run.schedule == Schedule::constant) return 0.0;
  const Params& P = run.params;
  const double lam = schedule_lambda(run, s);
  return std::log(lam * gap(P, run.a) / (run.a * (lam * P.nu() - P.D())));
}

double integral_I1(const MoserRun& run, double s) {
  check_s(run, s);
  const Params& P = run.params;
  const double nu = P.nu();
  const double lam = schedule_lambda(run, s);
  const double L = std::log(run.a * energy_constant(P) * run.t / run.S);
  return L * (1.0 / (nu * gap(P, run.a)) - 1.0 / (nu * (lam * nu - P.D())));
}

double integral_I2(const Params& P, double a, double Lambda) {
  const double nu = P.nu();
  const double D = P.D();
  const double p = P.p();
  if (!(a >= 1.0) || !(a * nu > D)) throw AdmissibilityError("I2 needs a >= 1 and a nu > D");
  if (!(Lambda > a)) return 0.0;
  auto h = [&](double xi) {
    const double lg = xi * nu - D;
    return std::log((xi - 1.0) * lg / (xi * std::pow(xi - D, p))) / (lg * lg);
  };
  const double top = std::min(Lambda, kXiCut);
  double sum = 0.0;
  // The first panel absorbs the logarithmic endpoint singularity at a = 1.
  double lo = a;
  double hi = std::min(top, a + 1.0);
  sum += quad::tanh_sinh(h, lo, hi, kQuadTol);
  while (hi < top) {
    lo = hi;
    hi = std::min(top, 4.0 * lo);
    sum += quad::gauss_kronrod(h, lo, hi, kQuadTol);
  }
  if (Lambda > kXiCut) {
    if (std::isinf(Lambda)) {
      const double X = kXiCut;
      sum += (std::log(nu) / X + (1.0 - p) * (std::log(X) + 1.0) / X) / (nu * nu);
    } else {
      sum += quad::gauss_kronrod(h, kXiCut, Lambda, kQuadTol);
    }
  }
  if (!std::isfinite(sum)) throw QuadratureError("I2 diverged");
  return sum;
}

double psi_solution(const MoserRun& run, double s, double psi0) {
  check_s(run, s);
  if (run.zero_coefficients || run.schedule == Schedule::constant) return psi0;
  const Params& P = run.params;
  const double lam = schedule_lambda(run, s);
  const double decay = std::exp(-integral_f(run, s));
  const double I = integral_I1(run, s) + integral_I2(P, run.a, lam);
  return decay * (psi0 - gap(P, run.a) / run.a * I);
}

double psi_ode_residual(const MoserRun& run, double s, double psi0) {
  check_s(run, s);
  const double h = 0.01 * std::min(s, run.t - s);
  if (!(h > 0.0)) throw DomainError("psi_ode_residual needs 0 < s < t");
  auto P = [&](double x) { return psi_solution(run, x, psi0); };
  const double d = (45.0 * (P(s + h) - P(s - h)) - 9.0 * (P(s + 2 * h) - P(s - 2 * h)) +
                    (P(s + 3 * h) - P(s - 3 * h))) /
                   (60.0 * h);
  const Coefficients c = iteration_coefficients(run, s);
  return std::fabs(d + c.f * P(s) + c.g);
}

double integral_f_limit_quadrature(const Params& params, double a) {
  const double nu = params.nu();
  const double D = params.D();
  if (!(a * nu > D) || !(a > 0.0)) throw AdmissibilityError("f limit needs a > 0 and a nu > D");
  if (D == 0.0) return 0.0;
  auto h = [&](double xi) { return -D / (xi * (xi * nu - D)); };
  return quad::exp_sinh(h, a, kQuadTol);
}

MoserConstants moser_constants(const Params& params, double a, double S) {
  const MoserRun run = make_moser_run(params, a, 1.0, S);
  const double nu = params.nu();
  const double g = gap(params, a);
  MoserConstants mc{};
  mc.I1 = std::log(a * energy_constant(params) / S) / (nu * g);
  mc.I2 = integral_I2(params, a, kInfinity);
  // lim exp(-int f) = a nu/(a nu - D); Psi(0) = 0.
  const double decay = a * nu / g;
  mc.C = decay * (0.0 - g / a * (mc.I1 + mc.I2));
  mc.exp_C = std::exp(mc.C);
  mc.below_lemma_range = run.below_lemma_range;
  return mc;
}

double decay_constant(const Params& params, double a, double S) {
  return moser_constants(params, a, S).exp_C;
}

double sup_bound(const Params& params, double a, double exp_C, double norm_a, double t) {
  const double g = gap(params, a);
  return exp_C * std::pow(norm_a, a * params.nu() / g) * std::pow(t, -1.0 / g);
}

double log_sobolev_check(const RadialField& v, double r, double eps, double S,
                         const Params& params) {
  const double p = params.p();
  const double kappa = params.kappa();
  const double pk = p * kappa;
  if (!(r > 0.0) || !(r < pk)) {
    throw DomainError("log-Sobolev check needs 0 < r < p kappa (r=" + std::to_string(r) + ")");
  }
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const double factor = r * kappa / (pk - r);
  const double energy = grad_power_energy(v, 1.0, p);
  const double norm = lp_norm(v, r, IndexMode::formal);
  const double rhs = factor * S * eps * energy / std::pow(norm, p) - factor * std::log(eps);
  return rhs - r * entropy_J(v, r);
}

std::vector<LogdiffMargin> logdiff_check(const Trajectory& traj, const MoserRun& run) {
  const Params& P = run.params;
  const double s0 = traj.times.empty() ? 0.0 : traj.times.front();
  std::vector<double> s, G;
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const double sj = traj.times[j] - s0;
    if (sj >= run.t) break;
    const double lam = schedule_lambda(run, sj);
    s.push_back(sj);
    G.push_back(std::log(power_integral(traj.fields[j], lam)) / lam);
    idx.push_back(j);
  }
  if (s.size() < 20) {
    throw DomainError("logdiff_check needs at least 20 samples inside the horizon, found " +
                      std::to_string(s.size()));
  }
  std::vector<LogdiffMargin> out;
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double h1 = s[k] - s[k - 1];
    const double h2 = s[k + 1] - s[k];
    const double lhs = -h2 / (h1 * (h1 + h2)) * G[k - 1] + (h2 - h1) / (h1 * h2) * G[k] +
                       h1 / (h2 * (h1 + h2)) * G[k + 1];
    const RadialField& u = traj.fields[idx[k]];
    const double lam = schedule_lambda(run, s[k]);
    const double dlam = schedule_lambda_prime(run, s[k]);
    const double sigma = lam - P.D();
    double rhs = -energy_constant(P) * (lam - 1.0) * std::pow(sigma, -P.p()) *
                 grad_power_energy(u, sigma / P.p(), P.p()) / power_integral(u, lam);
    if (dlam != 0.0) rhs += dlam / lam * entropy_J(u, lam);
    LogdiffMargin m{s[k], lhs, rhs, rhs - lhs, 0.0};
    const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
    m.relative = m.margin / scale;
    out.push_back(m);
  }
  return out;
}

double minimum_constant(double beta) {
  return std::pow(beta, 1.0 / (beta + 1.0)) + std::pow(beta, -beta / (beta + 1.0));
}

DecayToGniReport decay_to_gni(const RadialField& u0, const Params& params, double a,
                              double Cdecay) {
  const ExponentReport rep = sobolev_chain_exponents(params, a);
  const double q = params.q();
  const double p = params.p();
  const double beta = rep.beta_chain;
  DecayToGniReport r{};
  r.beta = beta;
  const double Cpow = std::pow(Cdecay, 1.0 + q - a);
  r.A = Cpow * std::pow(power_integral(u0, a), rep.zeta);
  r.B = (1.0 + q) * grad_power_energy(u0, q, p);
  r.c = power_integral(u0, 1.0 + q);
  if (!(r.B > 0.0)) throw DomainError("decay_to_gni: initial gradient energy vanishes");
  r.t_star = std::pow(r.A * beta / r.B, 1.0 / (beta + 1.0));
  r.K = minimum_constant(beta);
  r.margin = r.K * std::pow(r.A, 1.0 / (beta + 1.0)) * std::pow(r.B, beta / (beta + 1.0)) - r.c;
  r.K1 = r.K * std::pow(Cpow, 1.0 / (beta + 1.0)) * std::pow(1.0 + q, beta / (beta + 1.0));
  r.K2 = std::pow(r.K1, q / (1.0 + q));
  return r;
}

DecayToGniReport decay_to_gni(const Trajectory& traj, const Params& params, double a,
                              double Cdecay) {
  if (traj.fields.empty()) throw DomainError("decay_to_gni: empty trajectory");
  return decay_to_gni(traj.fields.front(), params, a, Cdecay);
}

double gni_check(const RadialField& v, const Params& params, double a, double K2) {
  const ExponentReport rep = sobolev_chain_exponents(params, a);
  const double p = params.p();
  const double grad = std::pow(grad_power_energy(v, 1.0, p), 1.0 / p);
  const double vs = lp_norm(v, rep.s_gni, IndexMode::formal);
  const double vr = lp_norm(v, rep.r_gni, IndexMode::formal);
  return K2 * std::pow(vs, 1.0 - rep.theta) * std::pow(grad, rep.theta) - vr;
}

}  // namespace leiblab
