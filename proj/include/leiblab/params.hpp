#pragma once

// Exponent algebra for the Leibenson equation  d_t u = Delta_p u^q.
//
// Params holds (p, q, n, kappa) together with the derived regime parameter
// D = 1 - q(p-1) and nu = (kappa-1)/kappa.  Everything else here is pure
// arithmetic on those numbers: decay rates of the sup-norm smoothing
// estimate, interpolated L^lambda rates, and the exponent chain that turns a
// decay estimate back into a Gagliardo-Nirenberg / Sobolev inequality.

#include <limits>
#include <optional>
#include <string>

namespace leiblab {

class Params {
 public:
  double p() const { return p_; }
  double q() const { return q_; }
  int n() const { return n_; }
  double D() const { return D_; }

  /// Sobolev index.  Throws DomainError when none was supplied and n <= p.
  double kappa() const;
  double nu() const;
  bool has_sobolev_index() const { return kappa_.has_value(); }

  friend Params derive_params(double p, double q, int n, std::optional<double> kappa);
  friend Params pde_params(double p, double q, int n);

 private:
  Params(double p, double q, int n, std::optional<double> kappa);

  double p_;
  double q_;
  int n_;
  double D_;
  std::optional<double> kappa_;
  double nu_ = std::numeric_limits<double>::quiet_NaN();
};

/// Full parameter set.  Without kappa the euclidean Sobolev index n/(n-p)
/// is used, which requires n > p.
Params derive_params(double p, double q, int n, std::optional<double> kappa = std::nullopt);

/// Parameters for the dynamics alone (solver, Barenblatt profiles).  kappa
/// defaults to n/(n-p) when n > p and is left unset otherwise.
Params pde_params(double p, double q, int n);

/// a < 1 is quasi-norm bookkeeping only; it must be requested explicitly.
enum class IndexMode { strict, formal };

struct DecayExponents {
  double time_rate;   ///< 1/(a nu - D)
  double mass_power;  ///< a nu/(a nu - D)
};

struct ExponentReport {
  double a = 0;
  double lambda = 0;
  double alpha = 0;
  double gamma = 0;
  double beta_chain = 0;
  double zeta = 0;
  double theta = 0;
  double r_gni = 0;
  double s_gni = 0;
  double omega = 0;
};

struct Admissibility {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Checks a >= 1 (strict mode), a nu > D and, for finite lambda,
/// lambda >= 1+q and lambda > a.  The reason names the first violation.
Admissibility admissible(const Params& params, double a, double lambda,
                         IndexMode mode = IndexMode::strict);

/// The euclidean decay condition p > nD.  Kept separate from admissible():
/// for a = 1 and kappa = n/(n-p) the two coincide.
Admissibility decay_condition(const Params& params);

DecayExponents sup_decay_exponents(const Params& params, double a);

/// alpha and gamma of the interpolated bound ||u(t)||_lambda <= C ||u0||_a^gamma t^-alpha.
ExponentReport interp_exponents(const Params& params, double a, double lambda);

/// Exponents of the decay => GNI => Sobolev chain (lambda = 1+q).  Verifies
/// the chain identities and throws std::logic_error if they fail.
ExponentReport sobolev_chain_exponents(const Params& params, double a,
                                       IndexMode mode = IndexMode::strict);

/// Residuals of the identities carried by an ExponentReport, each scaled by
/// the magnitude of the terms involved.
struct ChainResiduals {
  double energy_identity;  ///< (1+q)(beta+1) - beta q p  vs  zeta a
  double omega_relation;   ///< theta/omega  vs  1/r - (1-theta)/s
  double omega_value;      ///< omega  vs  p kappa
  double beta_relation;    ///< a zeta - (1+q)  vs  beta D
};

ChainResiduals chain_residuals(const Params& params, const ExponentReport& report);

/// c1 = p^p q^(p-1): the constant of the smooth-solution energy identity
///   d/dt int u^lambda = -c1 lambda (lambda-1) sigma^-p int |grad u^(sigma/p)|^p.
double energy_constant(const Params& params);

}  // namespace leiblab
