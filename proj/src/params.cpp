#include "leiblab/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "leiblab/errors.hpp"

namespace leiblab {

namespace {

constexpr double kChainTolerance = 1e-12;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

void require_admissible(const Admissibility& adm) {
  if (!adm) throw AdmissibilityError(adm.reason);
}

double scaled_gap(long double lhs, long double rhs, std::initializer_list<long double> terms) {
  long double scale = std::max(std::fabs(lhs), std::fabs(rhs));
  for (long double t : terms) scale = std::max(scale, std::fabs(t));
  if (scale == 0) return 0.0;
  return static_cast<double>(std::fabs(lhs - rhs) / scale);
}

}  // namespace

Params::Params(double p, double q, int n, std::optional<double> kappa)
    : p_(p), q_(q), n_(n), D_(1.0 - q * (p - 1.0)), kappa_(kappa) {
  if (kappa_) nu_ = (*kappa_ - 1.0) / *kappa_;
}

double Params::kappa() const {
  if (!kappa_) {
    throw DomainError("Sobolev index kappa is undefined for n=" + std::to_string(n_) +
                      " <= p=" + fmt(p_) + "; supply kappa explicitly");
  }
  return *kappa_;
}

double Params::nu() const {
  kappa();
  return nu_;
}

Params derive_params(double p, double q, int n, std::optional<double> kappa) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1 (got " + fmt(p) + ")");
  if (!(q > 0.0)) throw DomainError("q must be positive (got " + fmt(q) + ")");
  if (n < 1) throw DomainError("dimension n must be at least 1");
  if (kappa) {
    if (!(*kappa > 1.0)) throw DomainError("kappa must exceed 1 (got " + fmt(*kappa) + ")");
  } else {
    if (!(n > p)) {
      throw DomainError("default kappa = n/(n-p) requires n > p (n=" + std::to_string(n) +
                        ", p=" + fmt(p) + ")");
    }
    kappa = n / (n - p);
  }
  return Params(p, q, n, kappa);
}

Params pde_params(double p, double q, int n) {
  if (n > p) return derive_params(p, q, n);
  if (!(p > 1.0)) throw DomainError("p must exceed 1 (got " + fmt(p) + ")");
  if (!(q > 0.0)) throw DomainError("q must be positive (got " + fmt(q) + ")");
  if (n < 1) throw DomainError("dimension n must be at least 1");
  return Params(p, q, n, std::nullopt);
}

Admissibility admissible(const Params& params, double a, double lambda, IndexMode mode) {
  if (mode == IndexMode::strict && !(a >= 1.0)) {
    return {false, "a >= 1 violated (a=" + fmt(a) + ")"};
  }
  if (!(a > 0.0)) return {false, "a > 0 violated (a=" + fmt(a) + ")"};
  const double nu = params.nu();
  if (!(a * nu > params.D())) {
    return {false, "a > D/nu violated (a=" + fmt(a) + ", D/nu=" + fmt(params.D() / nu) + ")"};
  }
  if (std::isfinite(lambda)) {
    if (!(lambda >= 1.0 + params.q())) {
      return {false, "lambda >= 1+q violated (lambda=" + fmt(lambda) + ")"};
    }
    if (!(lambda > a)) {
      return {false, "lambda > a violated (lambda=" + fmt(lambda) + ", a=" + fmt(a) + ")"};
    }
  } else if (!(lambda > 0)) {
    return {false, "lambda must be positive or +infinity"};
  }
  return {};
}

Admissibility decay_condition(const Params& params) {
  if (params.p() > params.n() * params.D()) return {};
  return {false, "p > nD violated (p=" + fmt(params.p()) + ", nD=" +
                     fmt(params.n() * params.D()) + ")"};
}

DecayExponents sup_decay_exponents(const Params& params, double a) {
  require_admissible(admissible(params, a, kInfinity));
  const long double nu = params.nu();
  const long double gap = a * nu - params.D();
  return {static_cast<double>(1.0L / gap), static_cast<double>(a * nu / gap)};
}

ExponentReport interp_exponents(const Params& params, double a, double lambda) {
  require_admissible(admissible(params, a, lambda));
  if (!std::isfinite(lambda)) throw AdmissibilityError("interp_exponents needs a finite lambda");
  const long double nu = params.nu();
  const long double D = params.D();
  const long double la = lambda;
  const long double gap = a * nu - D;
  ExponentReport rep;
  rep.a = a;
  rep.lambda = lambda;
  rep.alpha = static_cast<double>((la - a) / (la * gap));
  rep.gamma = static_cast<double>((a / la) * (la * nu - D) / gap);
  return rep;
}

ExponentReport sobolev_chain_exponents(const Params& params, double a, IndexMode mode) {
  const double q = params.q();
  if (mode == IndexMode::strict && !(a >= 1.0)) {
    throw AdmissibilityError("a >= 1 violated (a=" + fmt(a) + "); use formal mode for a < 1");
  }
  if (!(a * params.nu() > params.D())) {
    throw AdmissibilityError("a > D/nu violated (a=" + fmt(a) +
                             ", D/nu=" + fmt(params.D() / params.nu()) + ")");
  }
  if (!(a < 1.0 + q)) throw AdmissibilityError("a < 1+q violated (a=" + fmt(a) + ")");

  const long double P = params.p();
  const long double Q = q;
  const long double A = a;
  const long double nu = params.nu();
  const long double D = params.D();
  const long double lam = 1.0L + Q;
  const long double gap = A * nu - D;

  const long double alpha = (lam - A) / (lam * gap);
  const long double gamma = (A / lam) * (lam * nu - D) / gap;
  const long double beta = alpha * (1.0L + Q);
  const long double zeta = gamma * (1.0L + Q) / A;
  const long double theta = beta * Q * P / ((1.0L + Q) * (beta + 1.0L));
  const long double r = (1.0L + Q) / Q;
  const long double s = A / Q;
  const long double omega = theta / (1.0L / r - (1.0L - theta) / s);

  ExponentReport rep;
  rep.a = a;
  rep.lambda = static_cast<double>(lam);
  rep.alpha = static_cast<double>(alpha);
  rep.gamma = static_cast<double>(gamma);
  rep.beta_chain = static_cast<double>(beta);
  rep.zeta = static_cast<double>(zeta);
  rep.theta = static_cast<double>(theta);
  rep.r_gni = static_cast<double>(r);
  rep.s_gni = static_cast<double>(s);
  rep.omega = static_cast<double>(omega);

  const ChainResiduals res = chain_residuals(params, rep);
  if (res.energy_identity > kChainTolerance || res.omega_relation > kChainTolerance ||
      res.omega_value > kChainTolerance || res.beta_relation > kChainTolerance) {
    throw std::logic_error("exponent chain identities failed for p=" + fmt(params.p()) +
                           " q=" + fmt(q) + " a=" + fmt(a));
  }
  return rep;
}

ChainResiduals chain_residuals(const Params& params, const ExponentReport& rep) {
  const long double p = params.p();
  const long double q = params.q();
  const long double D = params.D();
  const long double beta = rep.beta_chain;
  const long double zeta = rep.zeta;
  const long double theta = rep.theta;
  const long double a = rep.a;

  ChainResiduals res{};
  const long double lhs = (1 + q) * (beta + 1);
  const long double mid = beta * q * p;
  res.energy_identity = scaled_gap(lhs - mid, zeta * a, {lhs, mid});

  const long double inv_r = 1.0L / rep.r_gni;
  const long double tail = (1.0L - theta) / rep.s_gni;
  res.omega_relation = scaled_gap(theta / rep.omega, inv_r - tail, {inv_r, tail});

  const long double pk = p * static_cast<long double>(params.kappa());
  res.omega_value = scaled_gap(rep.omega, pk, {});

  // Product form a zeta - (1+q) = beta D; for D != 0 this is beta = (a zeta - (1+q))/D.
  res.beta_relation = scaled_gap(a * zeta - (1 + q), beta * D, {a * zeta, 1 + q});
  return res;
}

double energy_constant(const Params& params) {
  return std::pow(params.p(), params.p()) * std::pow(params.q(), params.p() - 1.0);
}

}  // namespace leiblab
