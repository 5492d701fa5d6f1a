#include "leiblab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "leiblab/detail/power.hpp"
#include "leiblab/errors.hpp"

namespace leiblab {

namespace {

constexpr double kMassDrift = 1e-6;

// Scratch state for repeated steps on one grid.
class Stepper {
 public:
  explicit Stepper(const SolverConfig& c)
      : c_(c),
        N_(c.grid.N()),
        dr_(c.grid.dr()),
        p_(c.params.p()),
        q_(c.params.q()),
        eps2_(c.eps_reg * c.eps_reg),
        wq_(c.params.q()),
        wq1_(c.params.q() - 1.0),
        wp_(0.5 * (c.params.p() - 2.0)),
        Sc_(static_cast<std::size_t>(N_)),
        Sf_(face_densities(c.geom, c.grid)),
        geo_(static_cast<std::size_t>(N_)),
        w_(static_cast<std::size_t>(N_)),
        F_(static_cast<std::size_t>(N_) + 1, 0.0),
        a_(static_cast<std::size_t>(N_) + 1, 0.0) {
    for (int i = 0; i < N_; ++i) {
      Sc_[i] = surface_density(c.geom, c.grid.center(i));
      geo_[i] = std::max(1.0, (Sf_[i] + Sf_[i + 1]) / (4.0 * Sc_[i]));
    }
  }

  // Fills F_ and a_ (per-face diffusivity bound) for the faces that can
  // carry flux; returns the last cell that may change.
  int fluxes(std::span<const double> u) {
    int hi = N_ - 1;
    while (hi >= 0 && u[hi] == 0.0) --hi;
    if (hi < 0) {
      active_ = -1;
      return -1;
    }
    const int last_face = std::min(hi + 1, N_ - 1);
    const int last_cell = std::min(hi + 1, N_ - 1);
    for (int i = 0; i <= last_cell; ++i) w_[i] = wq_(u[i]);
    double umax = 0.0;
    for (int i = 0; i <= hi; ++i) umax = std::max(umax, u[i]);
    const double floor = 1e-30 * umax;
    const double pfac = std::max(1.0, p_ - 1.0);
    const double inv = 1.0 / dr_;
    for (int f = 1; f <= last_face; ++f) {
      const double ul = u[f - 1], ur = u[f];
      const double g = (w_[f] - w_[f - 1]) * inv;
      const double c = (p_ == 2.0) ? 1.0 : wp_(g * g + eps2_);
      F_[f] = Sf_[f] * c * g;
      if (ul == 0.0 && ur == 0.0) {
        a_[f] = 0.0;
        continue;
      }
      double secant;
      if (q_ == 1.0) {
        secant = 1.0;
      } else if (ul != ur) {
        secant = (w_[f] - w_[f - 1]) / (ur - ul);
      } else {
        secant = q_ * wq1_(std::max(0.5 * (ul + ur), floor));
      }
      a_[f] = pfac * c * secant;
    }
    for (int f = last_face + 1; f <= N_; ++f) {
      F_[f] = 0.0;
      a_[f] = 0.0;
    }
    F_[0] = 0.0;
    a_[0] = 0.0;
    F_[N_] = 0.0;
    a_[N_] = 0.0;
    active_ = last_cell;
    return last_cell;
  }

  // Requires fluxes() on the same state.
  double stable(double t) const {
    double dmax = 0.0;
    for (int i = 0; i <= active_; ++i) {
      dmax = std::max(dmax, std::max(a_[i], a_[i + 1]) * geo_[i]);
    }
    double dt = dmax > 0.0 ? c_.cfl * dr_ * dr_ / dmax : std::numeric_limits<double>::infinity();
    dt = std::max(dt, c_.dt_min);
    return std::min(dt, c_.t_end - t);
  }

  // Applies the update from the current fluxes; returns the clipped mass.
  double apply(std::span<double> u, double dt) const {
    const double k = dt / dr_;
    double clipped = 0.0;
    for (int i = 0; i <= active_; ++i) {
      double v = u[i] + k * (F_[i + 1] - F_[i]) / Sc_[i];
      if (v < 0.0) {
        clipped -= v * Sc_[i] * dr_;
        v = 0.0;
      }
      u[i] = v;
    }
    return clipped;
  }

  std::span<const double> flux() const { return F_; }

 private:
  const SolverConfig& c_;
  int N_;
  double dr_;
  double p_;
  double q_;
  double eps2_;
  detail::Power wq_;
  detail::Power wq1_;
  detail::Power wp_;
  std::vector<double> Sc_;
  std::vector<double> Sf_;
  std::vector<double> geo_;
  std::vector<double> w_;
  std::vector<double> F_;
  std::vector<double> a_;
  int active_ = -1;
};

double discrete_mass(std::span<const double> u, const SolverConfig& c) {
  double m = 0.0;
  for (int i = 0; i < c.grid.N(); ++i) m += u[i] * surface_density(c.geom, c.grid.center(i));
  return m * c.grid.dr();
}

void check_field(const SolverConfig& config, const RadialField& u) {
  if (u.grid().N() != config.grid.N() || u.grid().R() != config.grid.R()) {
    throw SizeMismatch("field grid differs from solver grid");
  }
}

}  // namespace

void validate(const SolverConfig& c) {
  if (!(c.t0 < c.t_end)) throw DomainError("solver needs t0 < t_end");
  if (!(c.cfl > 0.0 && c.cfl < 1.0)) throw DomainError("cfl must lie in (0, 1)");
  if (!(c.eps_reg >= 0.0)) throw DomainError("eps_reg must be non-negative");
  if (!(c.dt_min > 0.0)) throw DomainError("dt_min must be positive");
  if (c.max_steps < 1) throw DomainError("max_steps must be positive");
  if (c.geom.n() != c.params.n()) throw DomainError("geometry dimension differs from params");
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : c.sample_times) {
    if (!(t > prev)) throw DomainError("sample times must be strictly increasing");
    if (t < c.t0 || t > c.t_end) throw DomainError("sample time outside [t0, t_end]");
    prev = t;
  }
}

std::vector<double> log_sample_times(double t_lo, double t_hi, int per_decade) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw DomainError("log samples need 0 < t_lo < t_hi");
  if (per_decade < 1) throw DomainError("samples per decade must be positive");
  const double span = std::log10(t_hi / t_lo);
  const int m = std::max(1, static_cast<int>(std::ceil(span * per_decade - 1e-9)));
  std::vector<double> ts(static_cast<std::size_t>(m) + 1);
  for (int j = 0; j <= m; ++j) ts[j] = t_lo * std::pow(10.0, span * j / m);
  ts.front() = t_lo;
  ts.back() = t_hi;
  return ts;
}

SampleDiagnostics diagnose(const RadialField& u, const Params& params, double time) {
  SampleDiagnostics d;
  d.time = time;
  d.linf = lp_norm(u, kInfinity);
  d.l1 = lp_norm(u, 1.0);
  d.l1q = lp_norm(u, 1.0 + params.q());
  d.l2 = lp_norm(u, 2.0);
  d.grad_energy = grad_power_energy(u, params.q(), params.p());
  d.mass = d.l1;
  return d;
}

Trajectory make_trajectory(std::vector<double> times, std::vector<RadialField> fields,
                           const Params& params) {
  if (times.size() != fields.size()) throw SizeMismatch("times and fields differ in length");
  Trajectory tr;
  tr.times = std::move(times);
  tr.fields = std::move(fields);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    if (j > 0 && !(tr.times[j] > tr.times[j - 1])) {
      throw DomainError("trajectory times must be strictly increasing");
    }
    tr.diagnostics.push_back(diagnose(tr.fields[j], params, tr.times[j]));
  }
  return tr;
}

std::vector<double> face_flux(const SolverConfig& config, const RadialField& u) {
  check_field(config, u);
  Stepper s(config);
  s.fluxes(u.values());
  return {s.flux().begin(), s.flux().end()};
}

double stable_dt(const SolverConfig& config, const RadialField& u, double t) {
  check_field(config, u);
  Stepper s(config);
  s.fluxes(u.values());
  return s.stable(t);
}

StepResult step(const SolverConfig& config, const RadialField& u, double dt) {
  check_field(config, u);
  Stepper s(config);
  std::vector<double> v(u.values().begin(), u.values().end());
  s.fluxes(v);
  const double clipped = s.apply(v, dt);
  return {RadialField(u.grid(), u.geom(), std::move(v)), clipped};
}

Trajectory run(const SolverConfig& config, const RadialField& u0) {
  validate(config);
  check_field(config, u0);
  Stepper stepper(config);
  std::vector<double> u(u0.values().begin(), u0.values().end());
  const double mass0 = discrete_mass(u, config);

  Trajectory tr;
  double t = config.t0;
  long long steps = 0;
  long long steps_at_sample = 0;
  double dt_sum = 0.0;
  double clip = 0.0;

  auto record = [&](double time) {
    RadialField f(config.grid, config.geom, u);
    SampleDiagnostics d = diagnose(f, config.params, time);
    const long long k = steps - steps_at_sample;
    d.dt_mean = k > 0 ? dt_sum / static_cast<double>(k) : 0.0;
    d.steps = steps;
    d.clip_mass = clip;
    if (mass0 > 0.0 && std::fabs(d.mass - mass0 - clip) > kMassDrift * mass0) {
      throw SolverError("mass drift " + std::to_string((d.mass - mass0) / mass0) +
                        " at t=" + std::to_string(time));
    }
    tr.times.push_back(time);
    tr.fields.push_back(std::move(f));
    tr.diagnostics.push_back(d);
    steps_at_sample = steps;
    dt_sum = 0.0;
  };

  std::size_t next = 0;
  while (next < config.sample_times.size() && config.sample_times[next] <= t) {
    record(config.sample_times[next]);
    ++next;
  }

  while (t < config.t_end) {
    if (steps >= config.max_steps) {
      throw SolverError("step cap " + std::to_string(config.max_steps) + " reached at t=" +
                        std::to_string(t));
    }
    stepper.fluxes(u);
    double dt = stepper.stable(t);
    double t_new = t + dt;
    bool hit = false;
    if (next < config.sample_times.size() && t_new >= config.sample_times[next]) {
      t_new = config.sample_times[next];
      dt = t_new - t;
      hit = true;
    }
    if (t_new >= config.t_end) t_new = config.t_end;
    clip += stepper.apply(u, dt);
    t = t_new;
    ++steps;
    dt_sum += dt;
    if (hit) {
      record(config.sample_times[next]);
      ++next;
    }
  }
  tr.steps = steps;
  tr.clip_mass = clip;
  return tr;
}

DecayFit fit_decay_exponent(const Trajectory& traj, double lambda,
                            std::pair<double, double> window) {
  std::vector<double> x, y;
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const double t = traj.times[j];
    if (t < window.first || t > window.second || !(t > 0.0)) continue;
    const double norm = lp_norm(traj.fields[j], lambda, IndexMode::formal);
    if (!(norm > 0.0)) continue;
    x.push_back(std::log(t));
    y.push_back(std::log(norm));
  }
  const int m = static_cast<int>(x.size());
  if (m < 10) {
    throw DomainError("decay fit needs at least 10 samples in the window, found " +
                      std::to_string(m));
  }
  double xm = 0, ym = 0;
  for (int j = 0; j < m; ++j) {
    xm += x[j];
    ym += y[j];
  }
  xm /= m;
  ym /= m;
  double sxx = 0, sxy = 0;
  for (int j = 0; j < m; ++j) {
    sxx += (x[j] - xm) * (x[j] - xm);
    sxy += (x[j] - xm) * (y[j] - ym);
  }
  const double slope = sxy / sxx;
  double rss = 0;
  for (int j = 0; j < m; ++j) {
    const double e = y[j] - ym - slope * (x[j] - xm);
    rss += e * e;
  }
  const double se = std::sqrt(rss / (m - 2) / sxx);
  return {slope, se, m};
}

}  // namespace leiblab
