#include <cmath>
#include <numbers>

#include "doctest.h"
#include "leiblab/barenblatt.hpp"
#include "leiblab/errors.hpp"
#include "leiblab/solver.hpp"

using namespace leiblab;
using doctest::Approx;
constexpr double pi = std::numbers::pi;

namespace {

SolverConfig config(const Params& P, double R, int N, double t0, double t_end,
                    std::vector<double> samples = {}) {
  SolverConfig c{RadialGrid(R, N), ModelGeometry::euclidean(P.n()), P, t0, t_end, std::move(samples)};
  return c;
}

double l1_distance(const RadialField& u, const std::function<double(double)>& f) {
  std::vector<double> d(u.size());
  for (int i = 0; i < u.size(); ++i) d[i] = std::fabs(u[i] - f(u.grid().center(i)));
  return integrate(u.geom(), u.grid(), d);
}

double heat_kernel_1d(double r, double t) {
  return std::exp(-r * r / (4 * t)) / std::sqrt(4 * pi * t);
}

}  // namespace

TEST_CASE("face_flux") {
  const Params heat = derive_params(2, 1, 3);
  SolverConfig c = config(heat, 5.0, 50, 0, 1);
  c.eps_reg = 0.0;
  const auto G = ModelGeometry::euclidean(3);
  const RadialField one = RadialField::sample(c.grid, G, [](double) { return 2.0; });
  for (double F : face_flux(c, one)) CHECK(F == 0.0);

  const RadialField u = RadialField::sample(c.grid, G, [](double r) { return std::exp(-r * r); });
  const auto F = face_flux(c, u);
  REQUIRE(F.size() == 51);
  CHECK(F.front() == 0.0);
  CHECK(F.back() == 0.0);
  for (int f = 1; f < 50; ++f) {
    const double g = (u[f] - u[f - 1]) / c.grid.dr();
    CHECK(F[f] == Approx(surface_density(G, c.grid.face(f)) * g).epsilon(1e-14));
  }

  for (double p : {1.5, 2.0, 3.0}) {
    for (double q : {0.5, 1.0, 2.0}) {
      SolverConfig cp = config(pde_params(p, q, 3), 5.0, 50, 0, 1);
      const auto Fp = face_flux(cp, u);
      for (int f = 1; f < 50; ++f) {
        // u decreasing outward: flux points outward (negative gradient of u^q)
        if (u[f] < u[f - 1]) CHECK(Fp[f] < 0.0);
      }
    }
  }
}

TEST_CASE("stable_dt") {
  const Params heat = derive_params(2, 1, 3);
  const SolverConfig c = config(heat, 5.0, 100, 0, 10);
  const RadialField u = RadialField::sample(c.grid, c.geom, [](double r) { return std::exp(-r * r); });
  CHECK(stable_dt(c, u, 0) == Approx(c.cfl * c.grid.dr() * c.grid.dr()).epsilon(1e-12));
  const SolverConfig c2 = config(heat, 5.0, 200, 0, 10);
  const RadialField u2 = RadialField::sample(c2.grid, c2.geom, [](double r) { return std::exp(-r * r); });
  CHECK(stable_dt(c2, u2, 0) == Approx(stable_dt(c, u, 0) / 4).epsilon(1e-12));
  const RadialField zero = RadialField::sample(c.grid, c.geom, [](double) { return 0.0; });
  CHECK(stable_dt(c, zero, 3.0) == Approx(7.0));
  CHECK(stable_dt(c, u, 9.9999) == Approx(1e-4).epsilon(1e-6));
}

TEST_CASE("step: conservation, constants, decrease of the maximum") {
  for (auto [p, q] : {std::pair{2.0, 1.0}, {2.0, 2.0}, {3.0, 1.0}, {2.0, 0.5}, {1.6, 1.4}}) {
    const Params P = pde_params(p, q, 3);
    const SolverConfig c = config(P, 4.0, 400, 0, 1);
    const RadialField u = RadialField::sample(c.grid, c.geom, [](double r) {
      return r < 2 ? std::pow(1 - r * r / 4, 3) : 0.0;
    });
    const double dt = stable_dt(c, u, 0);
    const StepResult s = step(c, u, dt);
    CHECK(std::fabs(lp_norm(s.u, 1) - lp_norm(u, 1) - s.clip_mass) <= 1e-14 * lp_norm(u, 1));
    CHECK(lp_norm(s.u, kInfinity) < lp_norm(u, kInfinity));
    const RadialField k = RadialField::sample(c.grid, c.geom, [](double) { return 0.3; });
    const StepResult sk = step(c, k, stable_dt(c, k, 0));
    for (int i = 0; i < k.size(); ++i) CHECK(sk.u[i] == Approx(0.3).epsilon(1e-15));
  }
}

TEST_CASE("step: a heat step follows the exact kernel on a coarse grid") {
  const Params heat = derive_params(2, 1, 1, 2.0);
  const SolverConfig c = config(heat, 20.0, 200, 0, 10);
  const RadialField u = RadialField::sample(c.grid, c.geom, [](double r) { return heat_kernel_1d(r, 1.0); });
  const double dt = stable_dt(c, u, 0);
  const StepResult s = step(c, u, dt);
  const double err = l1_distance(s.u, [&](double r) { return heat_kernel_1d(r, 1.0 + dt); });
  const double change = l1_distance(u, [&](double r) { return heat_kernel_1d(r, 1.0 + dt); });
  CHECK(err < 0.05 * change);
}

TEST_CASE("run: heat n=1 from a Gaussian against the kernel") {
  const Params heat = derive_params(2, 1, 1, 2.0);
  const SolverConfig c = config(heat, 20.0, 2000, 1.0, 2.0, {1.0, 2.0});
  const RadialField u0 = RadialField::sample(c.grid, c.geom, [](double r) { return heat_kernel_1d(r, 1.0); });
  const Trajectory tr = run(c, u0);
  REQUIRE(tr.times.size() == 2);
  CHECK(tr.times.back() == 2.0);
  CHECK(l1_distance(tr.fields.back(), [](double r) { return heat_kernel_1d(r, 2.0); }) < 1e-3);
}

namespace {

double pme_error(int N) {
  const Params P = pde_params(2, 2, 1);
  const auto b = make_barenblatt(P, 1.0);
  const SolverConfig c = config(P, 8.0, N, 1.0, 4.0, {1.0, 4.0});
  const RadialField u0 = RadialField::sample(c.grid, c.geom, [&](double r) { return evaluate(b, r, 1.0); });
  const Trajectory tr = run(c, u0);
  return l1_distance(tr.fields.back(), [&](double r) { return evaluate(b, r, 4.0); }) /
         barenblatt_mass(b);
}

}  // namespace

TEST_CASE("run: porous medium Barenblatt n=1, self-similarity and refinement") {
  const double e1 = pme_error(1000);
  const double e2 = pme_error(2000);
  CHECK(e2 <= 0.02);
  CHECK(e2 <= 0.5 * e1);
}

TEST_CASE("run: monotone norms, conservation and small clipping") {
  for (auto [p, q] : {std::pair{2.0, 1.0}, {2.0, 2.0}, {3.0, 1.0}, {2.0, 0.5}}) {
    const Params P = pde_params(p, q, 3);
    const SolverConfig c = config(P, 6.0, 300, 0.0, 1.0, log_sample_times(1e-3, 1.0, 16));
    const RadialField u0 = RadialField::sample(c.grid, c.geom, [](double r) {
      return r < 2 ? std::pow(1 - r * r / 4, 3) : 0.0;
    });
    const Trajectory tr = run(c, u0);
    const double m0 = lp_norm(u0, 1);
    for (std::size_t j = 1; j < tr.times.size(); ++j) {
      const auto& a = tr.diagnostics[j - 1];
      const auto& d = tr.diagnostics[j];
      CHECK(d.linf <= a.linf + 1e-10);
      CHECK(d.l1 <= a.l1 + 1e-10);
      CHECK(d.l1q <= a.l1q + 1e-10);
      CHECK(d.l2 <= a.l2 + 1e-10);
      CHECK(d.grad_energy <= a.grad_energy * (1 + 1e-6));
      CHECK(std::fabs(d.mass - m0) <= 1e-12 * m0 + d.clip_mass);
    }
    CHECK(tr.clip_mass <= 1e-8 * m0);
  }
}

TEST_CASE("run: regularization insensitivity") {
  const Params P = pde_params(3, 1, 2);
  SolverConfig c = config(P, 3.0, 300, 0.0, 1.0, {0.0, 1.0});
  const RadialField u0 = RadialField::sample(c.grid, c.geom, [](double r) {
    return r < 1 ? std::pow(1 - r * r, 3) : 0.0;
  });
  const double a = lp_norm(run(c, u0).fields.back(), kInfinity);
  c.eps_reg = 1e-10;
  const double b = lp_norm(run(c, u0).fields.back(), kInfinity);
  CHECK(a == Approx(b).epsilon(1e-8));
}

TEST_CASE("run: errors") {
  const Params P = derive_params(2, 1, 3);
  SolverConfig c = config(P, 1.0, 100, 0.0, 1.0);
  const RadialField u0 = RadialField::sample(c.grid, c.geom, [](double) { return 1.0; });
  c.max_steps = 10;
  CHECK_THROWS_AS(run(c, u0), SolverError);
  c.max_steps = 100;
  c.cfl = 1.5;
  CHECK_THROWS_AS(run(c, u0), DomainError);
  c.cfl = 0.25;
  c.sample_times = {0.5, 0.2};
  CHECK_THROWS_AS(run(c, u0), DomainError);
  c.sample_times = {};
  c.t_end = 0.0;
  CHECK_THROWS_AS(run(c, u0), DomainError);
  const SolverConfig other = config(P, 2.0, 100, 0.0, 1.0);
  CHECK_THROWS_AS(run(other, u0), SizeMismatch);
}

TEST_CASE("fit_decay_exponent on exact Barenblatt samples") {
  for (auto [p, q, n] : {std::tuple{2.0, 1.0, 3}, {2.0, 2.0, 3}, {2.0, 0.5, 3}, {3.0, 1.0, 2}}) {
    const Params P = pde_params(p, q, n);
    const auto b = make_barenblatt(P, 1.0);
    const RadialGrid g(10.0, 200);
    const auto geom = ModelGeometry::euclidean(n);
    std::vector<double> ts = log_sample_times(1.0, 10.0, 16);
    std::vector<RadialField> fs;
    // the first cell centre sits off the origin, so sample with r scaled
    // along t^{k}: the maximum cell then carries exactly t^{-nk} F(xi_0).
    for (double t : ts) {
      fs.push_back(RadialField::sample(g, geom, [&](double r) {
        return std::pow(t, -n * b.ss_rate) * profile_value(b, r * 1e-3);
      }));
    }
    const Trajectory tr = make_trajectory(ts, fs, P);
    const DecayFit fit = fit_decay_exponent(tr, kInfinity, {1.0, 10.0});
    CHECK(fit.slope == Approx(-n / (p - n * P.D())).epsilon(1e-10));
    CHECK(fit.samples == static_cast<int>(ts.size()));
    CHECK_THROWS_AS(fit_decay_exponent(tr, kInfinity, {1.0, 1.2}), DomainError);
  }
}

TEST_CASE("heat n=3: fitted slopes for lambda = inf and lambda = 2") {
  const Params heat = derive_params(2, 1, 3);
  std::vector<double> ts{0.0};
  for (double t : log_sample_times(1.0, 100.0, 32)) ts.push_back(t);
  const SolverConfig c = config(heat, 100.0, 2000, 0.0, 100.0, ts);
  const RadialField u0 = RadialField::sample(c.grid, c.geom, [](double r) {
    return r < 1 ? std::pow(1 - r * r, 3) : 0.0;
  });
  const Trajectory tr = run(c, u0);
  CHECK(std::fabs(fit_decay_exponent(tr, kInfinity, {10, 100}).slope + 1.5) <= 0.05);
  CHECK(std::fabs(fit_decay_exponent(tr, 2.0, {10, 100}).slope + 0.75) <= 0.05);
}

TEST_CASE("log_sample_times") {
  const auto ts = log_sample_times(1.0, 100.0, 32);
  CHECK(ts.size() == 65);
  CHECK(ts.front() == 1.0);
  CHECK(ts.back() == 100.0);
  for (std::size_t j = 1; j < ts.size(); ++j) CHECK(ts[j] > ts[j - 1]);
  CHECK_THROWS_AS(log_sample_times(0.0, 1.0, 4), DomainError);
}
