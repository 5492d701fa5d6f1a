// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include "json.hpp"
#include "leiblab/barenblatt.hpp"
#include "leiblab/experiment.hpp"
#include "leiblab/moser.hpp"
#include "oracles.hpp"

using namespace leiblab;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = LEIBLAB_ACCEPTANCE_CONFIGS;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [violated]";
    }
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

struct Case {
  ExperimentConfig cfg;
  SimulationSetup setup;
  Trajectory traj;
  double seconds = 0;
};

std::map<std::string, Case>& cache() {
  static std::map<std::string, Case> c;
  return c;
}

const Case& simulated(const std::string& name) {
  auto& c = cache();
  if (auto it = c.find(name); it != c.end()) return it->second;
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig cfg = load_config(kConfigs / (name + ".json"));
  SimulationSetup setup = prepare_simulation(cfg);
  Trajectory tr = run(setup.solver, setup.u0);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c.emplace(name, Case{cfg, std::move(setup), std::move(tr), secs}).first->second;
}

Params params_of(const Case& c) { return config_params(c.cfg.params); }

double talenti_S(const Params& P) {
  return sobolev_lower_estimate(P, "euclidean", SobolevBlock{}) * SobolevBlock{}.slack;
}

/// Mass fraction in the outermost 1% of the domain at the final sample.
double edge_fraction(const RadialField& u) {
  const int N = u.size();
  double edge = 0;
  const auto w = cell_measures(u.geom(), u.grid());
  for (int i = N - std::max(1, N / 100); i < N; ++i) edge += u[i] * w[i];
  return edge / lp_norm(u, 1.0);
}

Outcome decay_case(const std::string& name, double target, double tol, double budget) {
  Outcome o;
  const Case& c = simulated(name);
  const auto window = c.cfg.fit.window.value_or(default_window(c.cfg.time));
  const DecayFit fit = fit_decay_exponent(c.traj, kInfinity, window);
  const double rel = std::fabs(fit.slope - target) / std::fabs(target);
  o.require(rel <= tol, name + ": slope " + fmt("%.5f", fit.slope) + " vs " + fmt("%.5f", target) +
                            " (rel " + fmt("%.2e", rel) + " <= " + fmt("%.2f", tol) + ")");
  o.require(c.seconds <= budget, fmt("%.1f s", c.seconds) + " <= " + fmt("%.0f s", budget));
  return o;
}

Outcome criterion1() {
  Outcome o = decay_case("c1_heat_n1", -0.5, 0.03, 120);
  const Outcome b = decay_case("c1_heat_n3", -1.5, 0.03, 120);
  o.pass = o.pass && b.pass;
  o.detail += "; " + b.detail;
  return o;
}

Outcome criterion2() {
  const Params P = pde_params(2, 2, 3);
  return decay_case("c2_pme", -3.0 / (P.p() - 3 * P.D()), 0.05, 300);
}

Outcome criterion3() {
  // D = 1 - q(p-1) = -1 and p - nD = 5.
  const Params P = pde_params(3, 1, 2);
  Outcome o = decay_case("c3_plaplace", -2.0 / (P.p() - 2 * P.D()), 0.05, 300);
  o.detail += "; D=" + fmt("%g", P.D());
  return o;
}

Outcome criterion4() {
  const Params P = pde_params(2, 0.5, 3);
  return decay_case("c4_fast", -3.0 / (P.p() - 3 * P.D()), 0.10, 600);
}

Outcome criterion5() {
  Outcome o;
  for (const char* name : {"c5_pme_n1", "c5_heat_n3", "c5_fat_tail"}) {
    const Case& c = simulated(name);
    const BarenblattProfile& b = *c.setup.profile;
    const RadialGrid g(c.cfg.grid.R, 4000);
    const BarenblattResiduals res = residual_oracle(b, g);
    const RadialField& u = c.traj.fields.back();
    const double t = c.traj.times.back();
    std::vector<double> diff(u.size());
    for (int i = 0; i < u.size(); ++i) {
      diff[i] = std::fabs(u[i] - evaluate(b, u.grid().center(i), t));
    }
    // closed-form value integrated independently of the solver grid
    const int n = b.params.n();
    const double edge = std::isinf(support_radius(b)) ? u.grid().R() : support_radius(b) * std::pow(t, b.ss_rate);
    const double ref = oracle::radial_integral(n, [&](double r) { return evaluate(b, r, t); }, edge);
    const double l1 = integrate(u.geom(), u.grid(), diff) / ref;
    o.require(res.ode_residual <= 1e-8, std::string(name) + " (" + regime_name(b.regime) +
                                            "): ode residual " + fmt("%.1e", res.ode_residual));
    o.require(l1 <= 0.02, "L1 rel error at t=4 " + fmt("%.2e", l1));
  }
  return o;
}

std::vector<std::string> trajectory_names() {
  return {"c1_heat_n1", "c1_heat_n3", "c2_pme",    "c3_plaplace",
          "c4_fast",    "c5_pme_n1",  "c5_heat_n3", "c5_fat_tail"};
}

Outcome criterion6() {
  Outcome o;
  for (const auto& name : trajectory_names()) {
    const Case& c = simulated(name);
    double worst_norm = -INFINITY, worst_grad = -INFINITY;
    const auto& d = c.traj.diagnostics;
    for (std::size_t j = 1; j < d.size(); ++j) {
      for (auto get : {&SampleDiagnostics::l1, &SampleDiagnostics::l1q, &SampleDiagnostics::l2,
                       &SampleDiagnostics::linf}) {
        worst_norm = std::max(worst_norm, d[j].*get - d[j - 1].*get);
      }
      worst_grad = std::max(worst_grad, (d[j].grad_energy - d[j - 1].grad_energy) / d[j - 1].grad_energy);
    }
    o.require(worst_norm <= 1e-10 && worst_grad <= 1e-6,
              name + ": max norm increase " + fmt("%.1e", worst_norm) + ", grad " + fmt("%.1e", worst_grad));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (const char* name : {"c2_pme", "c3_plaplace"}) {
    const Case& c = simulated(name);
    const Params P = params_of(c);
    const double lam = 1.0 + P.q();
    const auto& ts = c.traj.times;
    const double t_first = c.cfg.time.t_first.value_or(0.0);
    double worst = 0;
    int points = 0;
    for (std::size_t j = 1; j + 1 < ts.size(); ++j) {
      if (ts[j - 1] < t_first) continue;
      const double h1 = ts[j] - ts[j - 1], h2 = ts[j + 1] - ts[j];
      const double a = power_integral(c.traj.fields[j - 1], lam);
      const double b = power_integral(c.traj.fields[j], lam);
      const double e = power_integral(c.traj.fields[j + 1], lam);
      const double fd = -h2 / (h1 * (h1 + h2)) * a + (h2 - h1) / (h1 * h2) * b + h1 / (h2 * (h1 + h2)) * e;
      const double rate = caccioppoli_rate(c.traj.fields[j], lam, P);
      worst = std::max(worst, std::fabs(fd - rate) / std::fabs(rate));
      ++points;
    }
    o.require(worst <= 0.02, std::string(name) + ": max rel mismatch " + fmt("%.2e", worst) +
                                 " over " + std::to_string(points) + " samples");
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::verify_identities;
  cfg.seed = 8;
  const fs::path out = fs::temp_directory_path() / "leiblab_acceptance_c8";
  fs::remove_all(out);
  run_experiment(cfg, out);
  std::ifstream in(out / "verify.json");
  const nlohmann::json r = nlohmann::json::parse(in);
  double worst = 0;
  for (const auto& [k, v] : r["worst"].items()) worst = std::max(worst, v.get<double>());
  o.require(r["passed"] == 1000 && r["failed"] == 0 && worst <= 1e-12,
            std::to_string(r["passed"].get<int>()) + "/1000 tuples, worst residual " + fmt("%.1e", worst));
  const ExponentReport w = sobolev_chain_exponents(derive_params(2, 2, 3), 1.0);
  const double dt = std::fabs(w.theta - 8.0 / 11.0), dw = std::fabs(w.omega - 6.0);
  o.require(dt <= 4e-16 && dw <= 4e-15, "theta-8/11 " + fmt("%.1e", dt) + ", omega-6 " + fmt("%.1e", dw));
  return o;
}

Outcome criterion9() {
  Outcome o;
  std::string skipped;
  for (const auto& name : {"c1_heat_n1", "c1_heat_n3", "c2_pme", "c3_plaplace", "c4_fast"}) {
    const Case& c = simulated(name);
    const Params P = params_of(c);
    if (!P.has_sobolev_index()) {
      skipped += std::string(skipped.empty() ? "" : ", ") + name;
      continue;
    }
    const double a = 1.0;
    const double S = talenti_S(P);
    double worst_res = 0;
    for (double t : {1.0, 10.0}) {
      const MoserRun run = make_moser_run(P, a, t, S);
      for (double f : {0.1, 0.5, 0.9}) worst_res = std::max(worst_res, psi_ode_residual(run, f * t, 0.0));
    }
    const double limit = std::log((a * P.nu() - P.D()) / (a * P.nu()));
    const double lim_err = std::fabs(integral_f_limit_quadrature(P, a) - limit);
    const double eC = decay_constant(P, a, S);
    const double norm_a = lp_norm(c.traj.fields.front(), a);
    double worst_margin = INFINITY;
    int checked = 0;
    for (std::size_t j = 0; j < c.traj.times.size(); ++j) {
      const double tau = c.traj.times[j] - c.traj.times.front();
      if (!(tau > 0)) continue;
      const double bound = sup_bound(P, a, eC, norm_a, tau);
      worst_margin = std::min(worst_margin, (bound - c.traj.diagnostics[j].linf) / bound);
      ++checked;
    }
    o.require(worst_res <= 1e-8 && lim_err <= 1e-6 && worst_margin >= 0,
              std::string(name) + ": psi residual " + fmt("%.1e", worst_res) + ", f-limit err " +
                  fmt("%.1e", lim_err) + ", min bound margin " + fmt("%.3f", worst_margin) + " over " +
                  std::to_string(checked) + " samples (S=" + fmt("%.5f", S) + ")");
  }
  o.detail += "; not applicable (n <= p, no euclidean Sobolev index): " + skipped;
  return o;
}

Outcome criterion10() {
  Outcome o;
  const Params P = derive_params(2, 2, 3);
  const double S = talenti_S(P);
  const ModelGeometry e3 = ModelGeometry::euclidean(3);
  const RadialGrid g(1000.0, 20000);
  const std::pair<const char*, RadialField> fields[] = {{"gaussian", gaussian_field(g, e3)},
                                                        {"talenti", talenti_field(g, e3, 2.0)}};
  double worst = INFINITY;
  for (const auto& [label, v] : fields) {
    for (double r : {1.0, 2.0, 1.0 + P.q()}) {
      for (int j = 0; j < 13; ++j) {
        const double eps = std::pow(10.0, -3.0 + 0.5 * j);
        worst = std::min(worst, log_sobolev_check(v, r, eps, S, P));
      }
    }
  }
  o.require(worst >= 0, "min margin " + fmt("%.4e", worst) + " over 2 fields x 3 r x 13 eps");
  return o;
}

Outcome criterion11() {
  Outcome o;
  for (const char* name : {"c2_pme", "c4_fast"}) {
    const Case& c = simulated(name);
    const Params P = params_of(c);
    const double eC = decay_constant(P, 1.0, talenti_S(P));
    const DecayToGniReport r = decay_to_gni(c.traj, P, 1.0, eC);
    const double closed = r.K * std::pow(r.A, 1 / (r.beta + 1)) * std::pow(r.B, r.beta / (r.beta + 1));
    const double scan = oracle::scan_minimum(r.A, r.B, r.beta, r.t_star * 1e-3, r.t_star * 1e3, 200000);
    const double agree = std::fabs(scan - closed) / closed;
    o.require(r.margin >= 0 && agree <= 1e-3, std::string(name) + ": margin " + fmt("%.4e", r.margin) +
                                                  ", scan vs closed form " + fmt("%.1e", agree));
  }
  const Params P = derive_params(2, 2, 3);
  const double eC = decay_constant(P, 1.0, talenti_S(P));
  const ModelGeometry e3 = ModelGeometry::euclidean(3);
  const RadialGrid g(10.0, 2000);
  double worst = INFINITY;
  for (double mass : {0.1, 0.5, 1.0, 5.0, 20.0}) {
    const BarenblattProfile b = fit_mass_constant(P, mass, e3);
    const RadialField u0 = RadialField::sample(g, e3, [&](double x) { return evaluate(b, x, 1.0); });
    const DecayToGniReport r = decay_to_gni(u0, P, 1.0, eC);
    worst = std::min(worst, gni_check(u0.power(P.q()), P, 1.0, r.K2));
  }
  o.require(worst >= 0, "gni_check min margin over 5 Barenblatt masses " + fmt("%.4e", worst));
  return o;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = ss.str();
  }
  return files;
}

Outcome criterion12() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / "leiblab_acceptance_c12";
  fs::remove_all(base);
  for (const char* name : {"c2_pme", "c5_fat_tail", "c12_sweep"}) {
    const ExperimentConfig cfg = load_config(kConfigs / (std::string(name) + ".json"));
    const fs::path a = base / name / "a", b = base / name / "b";
    run_experiment(cfg, a, 1);
    run_experiment(cfg, b, cfg.kind == ExperimentKind::sweep ? 4 : 1);
    const auto ta = tree(a), tb = tree(b);
    o.require(ta == tb && !ta.empty(), std::string(name) + ": " + std::to_string(ta.size()) +
                                           " files byte-identical" +
                                           (cfg.kind == ExperimentKind::sweep ? " (jobs 1 vs 4)" : ""));
  }
  return o;
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},   {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7},   {8, criterion8},
      {9, criterion9}, {10, criterion10}, {11, criterion11}, {12, criterion12}};
  int failed = 0;
  for (const auto& [id, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  for (const auto& [name, c] : cache()) {
    std::printf("note %s: %lld steps, clip mass %.2e, mass fraction in outer 1%% of domain %.2e\n",
                name.c_str(), c.traj.steps, c.traj.clip_mass, edge_fraction(c.traj.fields.back()));
  }
  return failed == 0 ? 0 : 1;
}
