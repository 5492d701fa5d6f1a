#include "leiblab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "leiblab/fields.hpp"
#include "leiblab/io.hpp"
#include "leiblab/moser.hpp"
#include "leiblab/quadrature.hpp"

namespace leiblab {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------- parsing

class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(loc() + " must be an object", loc());
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& item : j_.items()) {
      bool ok = false;
      for (const char* k : keys) ok = ok || item.key() == k;
      if (!ok) {
        throw ConfigError("unknown key '" + item.key() + "' at " + at(item.key()), at(item.key()));
      }
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& raw(const char* key) const { return j_.at(key); }
  std::string at(const std::string& key) const { return where_ + "/" + key; }
  std::string loc() const { return where_.empty() ? "/" : where_; }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    out = as_number(j_.at(key), at(key));
  }
  void optional_number(const char* key, std::optional<double>& out) const {
    if (has(key)) out = as_number(j_.at(key), at(key));
  }
  template <class Int>
  void integer(const char* key, Int& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ConfigError(at(key) + " must be an integer", at(key));
    out = v.get<Int>();
  }
  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(at(key) + " must be a string", at(key));
    out = v.get<std::string>();
  }
  void numbers(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    out.clear();
    if (v.is_number()) {
      out.push_back(v.get<double>());
      return;
    }
    if (!v.is_array()) throw ConfigError(at(key) + " must be a number or array", at(key));
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], at(key) + "/" + std::to_string(i)));
    }
  }

  static double as_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return kInfinity;
    }
    throw ConfigError(where + " must be a number", where);
  }

 private:
  const json& j_;
  std::string where_;
};

void read_params(const Reader& r, ParamsBlock& b) {
  r.allow({"p", "q", "n", "kappa", "a", "lambda"});
  r.number("p", b.p);
  r.number("q", b.q);
  r.integer("n", b.n);
  r.optional_number("kappa", b.kappa);
  r.number("a", b.a);
  r.numbers("lambda", b.lambdas);
}

void read_grid(const Reader& r, GridBlock& b) {
  r.allow({"R", "N"});
  r.number("R", b.R);
  r.integer("N", b.N);
}

void read_time(const Reader& r, TimeBlock& b) {
  r.allow({"t0", "t_end", "samples", "per_decade", "t_first"});
  r.number("t0", b.t0);
  r.number("t_end", b.t_end);
  r.numbers("samples", b.samples);
  r.integer("per_decade", b.per_decade);
  r.optional_number("t_first", b.t_first);
}

void read_solver(const Reader& r, SolverBlock& b) {
  r.allow({"cfl", "eps_reg", "dt_min", "max_steps"});
  r.number("cfl", b.cfl);
  r.number("eps_reg", b.eps_reg);
  r.number("dt_min", b.dt_min);
  r.integer("max_steps", b.max_steps);
}

void read_initial(const Reader& r, InitialBlock& b) {
  r.allow({"kind", "mass", "width", "profile_constant"});
  r.string("kind", b.kind);
  r.number("mass", b.mass);
  r.number("width", b.width);
  r.optional_number("profile_constant", b.profile_constant);
}

void read_fit(const Reader& r, FitBlock& b) {
  r.allow({"lambda", "window", "tolerance"});
  r.number("lambda", b.lambda);
  r.number("tolerance", b.tolerance);
  if (r.has("window")) {
    std::vector<double> w;
    r.numbers("window", w);
    if (w.size() != 2) throw ConfigError(r.at("window") + " must be [t_lo, t_hi]", r.at("window"));
    b.window = std::make_pair(w[0], w[1]);
  }
}

void read_sobolev(const Reader& r, SobolevBlock& b) {
  r.allow({"R", "N", "scales", "slack"});
  r.number("R", b.R);
  r.integer("N", b.N);
  r.numbers("scales", b.scales);
  r.number("slack", b.slack);
}

template <class F>
void wrap(const std::string& where, F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what(), where);
  }
}

void validate_case(const ParamsBlock& params, const GridBlock& grid, const TimeBlock& time,
                   const InitialBlock& initial, const FitBlock& fit, const std::string& geometry,
                   const std::string& where) {
  wrap(where + "/params", [&] {
    const Params P = config_params(params);
    if (!(params.a > 0.0)) throw DomainError("a must be positive");
    (void)P;
  });
  wrap(where + "/grid", [&] { RadialGrid g(grid.R, grid.N); });
  wrap(where + "/time", [&] {
    if (!(time.t0 >= 0.0)) throw DomainError("t0 must be non-negative");
    if (!(time.t_end > time.t0)) throw DomainError("t_end must exceed t0");
    if (time.per_decade < 1) throw DomainError("per_decade must be positive");
  });
  wrap(where + "/initial", [&] {
    if (initial.kind != "bump" && initial.kind != "gaussian" && initial.kind != "barenblatt") {
      throw DomainError("initial kind must be bump, gaussian or barenblatt (got '" +
                        initial.kind + "')");
    }
    if (!(initial.mass > 0.0)) throw DomainError("initial mass must be positive");
    if (!(initial.width > 0.0)) throw DomainError("initial width must be positive");
    if (initial.kind == "barenblatt") {
      if (geometry != "euclidean") throw DomainError("Barenblatt data needs euclidean geometry");
      if (!(time.t0 > 0.0)) throw DomainError("Barenblatt data needs t0 > 0");
    }
  });
  wrap(where + "/fit", [&] {
    if (!(fit.lambda >= 1.0)) throw DomainError("fit lambda must be >= 1 or inf");
    if (!(fit.tolerance > 0.0)) throw DomainError("fit tolerance must be positive");
    if (fit.window && !(fit.window->second > fit.window->first)) {
      throw DomainError("fit window must be increasing");
    }
  });
}

json number_or_inf(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return nullptr;
  return x;
}

json params_json(const ParamsBlock& b) {
  json j = {{"p", b.p}, {"q", b.q}, {"n", b.n}, {"a", b.a}};
  if (b.kappa) j["kappa"] = *b.kappa;
  if (!b.lambdas.empty()) {
    json l = json::array();
    for (double x : b.lambdas) l.push_back(number_or_inf(x));
    j["lambda"] = l;
  }
  return j;
}

json case_json(const ParamsBlock& params, const GridBlock& grid, const TimeBlock& time,
               const InitialBlock& initial, const FitBlock& fit) {
  json t = {{"t0", time.t0}, {"t_end", time.t_end}, {"per_decade", time.per_decade}};
  if (!time.samples.empty()) t["samples"] = time.samples;
  if (time.t_first) t["t_first"] = *time.t_first;
  json ini = {{"kind", initial.kind}, {"mass", initial.mass}, {"width", initial.width}};
  if (initial.profile_constant) ini["profile_constant"] = *initial.profile_constant;
  json f = {{"lambda", number_or_inf(fit.lambda)}, {"tolerance", fit.tolerance}};
  if (fit.window) f["window"] = {fit.window->first, fit.window->second};
  return {{"params", params_json(params)},
          {"grid", {{"R", grid.R}, {"N", grid.N}}},
          {"time", t},
          {"initial", ini},
          {"fit", f}};
}

json config_json(const ExperimentConfig& c) {
  json j = case_json(c.params, c.grid, c.time, c.initial, c.fit);
  j["experiment"] = kind_name(c.kind);
  j["geometry"] = c.geometry;
  j["solver"] = {{"cfl", c.solver.cfl},
                 {"eps_reg", c.solver.eps_reg},
                 {"dt_min", c.solver.dt_min},
                 {"max_steps", c.solver.max_steps}};
  j["seed"] = c.seed;
  return j;
}

std::pair<int, int> line_col(std::string_view text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// ---------------------------------------------------------------- running

double uniform01(std::mt19937_64& rng) {
  // Open interval (0,1) from the top 53 bits; independent of the standard
  // library's distribution implementations.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

RadialField scaled_to_mass(RadialField f, double mass) {
  const double m = lp_norm(f, 1.0);
  if (!(m > 0.0)) throw DomainError("initial data has zero mass on this grid");
  return f.scaled(mass / m);
}

std::string trajectory_csv(const Trajectory& tr) {
  io::CsvWriter w({"time", "linf", "l1", "l1q", "l2", "grad_energy", "mass", "dt_mean"});
  for (const auto& d : tr.diagnostics) {
    w.row(std::vector<double>{d.time, d.linf, d.l1, d.l1q, d.l2, d.grad_energy, d.mass,
                              d.dt_mean});
  }
  return w.str();
}

std::string snapshot_name(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshots/u_%04zu.csv", j);
  return buf;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else if (ch == '\n') out += ' ';
    else out += ch;
  }
  return out + "\"";
}

struct SupBoundInputs {
  bool applicable = false;
  double exp_C = 0;
  double S = 0;
};

SupBoundInputs sup_bound_inputs(const Params& P, double a, const ExperimentConfig& cfg) {
  SupBoundInputs in;
  if (!P.has_sobolev_index() || !admissible(P, a, kInfinity)) return in;
  in.S = cfg.sobolev_constant.value_or(sobolev_lower_estimate(P, cfg.geometry, cfg.sobolev) *
                                       cfg.sobolev.slack);
  in.exp_C = decay_constant(P, a, in.S);
  in.applicable = true;
  return in;
}

/// min over samples after the first of (bound - ||u||_inf)/bound.
double sup_bound_margin(const Trajectory& tr, const Params& P, double a, double exp_C) {
  const double norm_a = lp_norm(tr.fields.front(), a);
  double worst = kInfinity;
  for (std::size_t j = 1; j < tr.times.size(); ++j) {
    const double tau = tr.times[j] - tr.times.front();
    const double bound = sup_bound(P, a, exp_C, norm_a, tau);
    worst = std::min(worst, (bound - tr.diagnostics[j].linf) / bound);
  }
  return worst;
}

SweepRow sweep_row(const ExperimentConfig& base, const SweepCase& sc) {
  SweepRow row;
  row.p = sc.params.p;
  row.q = sc.params.q;
  row.n = sc.params.n;
  row.D = 1.0 - sc.params.q * (sc.params.p - 1.0);
  row.tolerance = sc.fit.tolerance;
  try {
    ExperimentConfig cfg = base;
    cfg.params = sc.params;
    cfg.grid = sc.grid;
    cfg.time = sc.time;
    cfg.initial = sc.initial;
    cfg.fit = sc.fit;
    const Params P = config_params(cfg.params);
    const double a = cfg.params.a;
    row.target = target_slope(P, a, cfg.fit.lambda);
    const SimulationSetup setup = prepare_simulation(cfg);
    const Trajectory tr = run(setup.solver, setup.u0);
    const auto window = cfg.fit.window.value_or(default_window(cfg.time));
    const DecayFit fit = fit_decay_exponent(tr, cfg.fit.lambda, window);
    row.slope = fit.slope;
    row.stderr_ = fit.stderr_;
    row.rel_error = std::fabs(fit.slope - row.target) / std::fabs(row.target);
    row.within = row.rel_error <= row.tolerance;
    const SupBoundInputs sb = sup_bound_inputs(P, a, cfg);
    if (sb.applicable) {
      row.sup_bound_margin = sup_bound_margin(tr, P, a, sb.exp_C);
      if (a >= 1.0 && a < 1.0 + P.q()) {
        const DecayToGniReport g = decay_to_gni(tr, P, a, sb.exp_C);
        row.gni_margin = g.margin / g.c;
      }
    }
  } catch (const std::exception& e) {
    row.status = "failed";
    row.message = e.what();
  }
  return row;
}

json verify_identities(const ExperimentConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  int passed = 0, failed = 0;
  double worst_energy = 0, worst_omega_rel = 0, worst_omega_val = 0, worst_beta = 0;
  double worst_rate = 0;
  json failures = json::array();
  int drawn = 0;
  while (drawn < cfg.verify_count) {
    const double p = 1.1 + 3.9 * uniform01(rng);
    const int n = static_cast<int>(std::floor(p)) + 1 + static_cast<int>(6 * uniform01(rng));
    const double q = 0.05 + 3.95 * uniform01(rng);
    const Params P = derive_params(p, q, n);
    const double lo = std::max(1.0, P.D() / P.nu());
    const double hi = 1.0 + q;
    if (!(hi > lo)) continue;
    const double a = lo + (hi - lo) * uniform01(rng);
    if (!(a > lo && a < hi)) continue;
    ++drawn;
    try {
      const ExponentReport rep = sobolev_chain_exponents(P, a);
      const ChainResiduals res = chain_residuals(P, rep);
      worst_energy = std::max(worst_energy, res.energy_identity);
      worst_omega_rel = std::max(worst_omega_rel, res.omega_relation);
      worst_omega_val = std::max(worst_omega_val, res.omega_value);
      worst_beta = std::max(worst_beta, res.beta_relation);
      const Params P1 = derive_params(p, q, n);
      if (decay_condition(P1)) {
        const DecayExponents de = sup_decay_exponents(P1, 1.0);
        worst_rate = std::max(worst_rate, std::fabs(de.time_rate * (p - n * P1.D()) - n) / n);
      }
      ++passed;
    } catch (const std::exception& e) {
      ++failed;
      if (failures.size() < 20) {
        failures.push_back({{"p", p}, {"q", q}, {"n", n}, {"a", a}, {"error", e.what()}});
      }
    }
  }
  const Params W = derive_params(2.0, 2.0, 3);
  const ExponentReport w = sobolev_chain_exponents(W, 1.0);
  return {{"experiment", "verify"},
          {"seed", cfg.seed},
          {"count", cfg.verify_count},
          {"passed", passed},
          {"failed", failed},
          {"tolerance", 1e-12},
          {"worst",
           {{"energy_identity", worst_energy},
            {"omega_relation", worst_omega_rel},
            {"omega_value", worst_omega_val},
            {"beta_relation", worst_beta},
            {"time_rate_identity", worst_rate}}},
          {"worked_example",
           {{"p", 2.0},
            {"q", 2.0},
            {"n", 3},
            {"a", 1.0},
            {"beta", w.beta_chain},
            {"zeta", w.zeta},
            {"theta", w.theta},
            {"r", w.r_gni},
            {"s", w.s_gni},
            {"omega", w.omega}}},
          {"failures", failures}};
}

json moser_constants_report(const ExperimentConfig& cfg) {
  const Params P = config_params(cfg.params);
  const double a = cfg.params.a;
  const bool estimated = !cfg.sobolev_constant;
  const double S = cfg.sobolev_constant.value_or(
      sobolev_lower_estimate(P, cfg.geometry, cfg.sobolev) * cfg.sobolev.slack);
  const MoserConstants mc = moser_constants(P, a, S);
  const DecayExponents de = sup_decay_exponents(P, a);
  const MoserRun run = make_moser_run(P, a, 1.0, S);
  json margins = json::array();
  for (double frac : {0.1, 0.5, 0.9}) {
    const double s = frac * run.t;
    margins.push_back({{"kind", "psi_ode_residual"},
                       {"s", s},
                       {"psi", psi_solution(run, s, 0.0)},
                       {"value", psi_ode_residual(run, s, 0.0)}});
  }
  const double limit = std::log((a * P.nu() - P.D()) / (a * P.nu()));
  const double quad_limit = integral_f_limit_quadrature(P, a);
  margins.push_back({{"kind", "f_integral_limit"},
                     {"quadrature", quad_limit},
                     {"closed_form", limit},
                     {"value", std::fabs(quad_limit - limit)}});
  json exps = {{"time_rate", de.time_rate}, {"mass_power", de.mass_power}};
  if (a < 1.0 + P.q() && a * P.nu() > P.D()) {
    const ExponentReport rep = sobolev_chain_exponents(P, a);
    exps["beta"] = rep.beta_chain;
    exps["zeta"] = rep.zeta;
    exps["theta"] = rep.theta;
    exps["r"] = rep.r_gni;
    exps["s"] = rep.s_gni;
    exps["omega"] = rep.omega;
  }
  return {{"experiment", "constants"},
          {"seed", cfg.seed},
          {"inputs",
           {{"p", P.p()},
            {"q", P.q()},
            {"n", P.n()},
            {"kappa", P.kappa()},
            {"nu", P.nu()},
            {"D", P.D()},
            {"a", a},
            {"S", S},
            {"S_source", estimated ? "talenti_estimate_times_slack" : "config"},
            {"c1", energy_constant(P)}}},
          {"exponents", exps},
          {"I1", mc.I1},
          {"I2", mc.I2},
          {"constant_C", mc.C},
          {"exp_C", mc.exp_C},
          {"below_lemma_range", mc.below_lemma_range},
          {"margins", margins}};
}

json sobolev_report(const ExperimentConfig& cfg) {
  const Params P = config_params(cfg.params);
  const ModelGeometry geom = ModelGeometry::parse(cfg.geometry, P.n());
  const RadialGrid grid(cfg.sobolev.R, cfg.sobolev.N);
  json family = json::array();
  std::vector<RadialField> fields;
  for (double s : cfg.sobolev.scales) {
    fields.push_back(talenti_field(grid, geom, P.p(), s));
    family.push_back({{"shape", "talenti"}, {"scale", s},
                      {"quotient", rayleigh_quotient(fields.back(), P)}});
  }
  fields.push_back(gaussian_field(grid, geom));
  family.push_back({{"shape", "gaussian"}, {"scale", 1.0},
                    {"quotient", rayleigh_quotient(fields.back(), P)}});
  const double S = estimate_sobolev_constant(geom, P, fields);
  return {{"experiment", "sobolev"},
          {"seed", cfg.seed},
          {"inputs",
           {{"p", P.p()}, {"n", P.n()}, {"kappa", P.kappa()}, {"geometry", cfg.geometry},
            {"R", cfg.sobolev.R}, {"N", cfg.sobolev.N}}},
          {"family", family},
          {"S_lower", S},
          {"slack", cfg.sobolev.slack},
          {"S_used", S * cfg.sobolev.slack}};
}

}  // namespace

// -------------------------------------------------------------- public API

ExperimentKind parse_kind(std::string_view name) {
  if (name == "simulate") return ExperimentKind::simulate;
  if (name == "fit" || name == "fit_decay") return ExperimentKind::fit_decay;
  if (name == "barenblatt" || name == "barenblatt_table") return ExperimentKind::barenblatt_table;
  if (name == "verify" || name == "verify_identities") return ExperimentKind::verify_identities;
  if (name == "constants" || name == "moser_constants") return ExperimentKind::moser_constants;
  if (name == "sobolev" || name == "sobolev_estimate") return ExperimentKind::sobolev_estimate;
  if (name == "sweep") return ExperimentKind::sweep;
  throw ConfigError("unknown experiment '" + std::string(name) + "'", "/experiment");
}

const char* kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::fit_decay: return "fit";
    case ExperimentKind::barenblatt_table: return "barenblatt";
    case ExperimentKind::verify_identities: return "verify";
    case ExperimentKind::moser_constants: return "constants";
    case ExperimentKind::sobolev_estimate: return "sobolev";
    case ExperimentKind::sweep: return "sweep";
  }
  return "unknown";
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    const std::string where = "line " + std::to_string(line) + ", column " + std::to_string(col);
    throw ConfigError("JSON syntax error at " + where, where);
  }
  const Reader top(j, "");
  top.allow({"experiment", "params", "geometry", "grid", "time", "solver", "initial", "fit",
             "sweep", "verify", "constants", "sobolev", "output", "seed"});
  ExperimentConfig c;
  if (top.has("experiment")) {
    std::string k;
    top.string("experiment", k);
    c.kind = parse_kind(k);
  }
  if (top.has("params")) read_params(Reader(top.raw("params"), "/params"), c.params);
  top.string("geometry", c.geometry);
  if (top.has("grid")) read_grid(Reader(top.raw("grid"), "/grid"), c.grid);
  if (top.has("time")) read_time(Reader(top.raw("time"), "/time"), c.time);
  if (top.has("solver")) read_solver(Reader(top.raw("solver"), "/solver"), c.solver);
  if (top.has("initial")) read_initial(Reader(top.raw("initial"), "/initial"), c.initial);
  if (top.has("fit")) read_fit(Reader(top.raw("fit"), "/fit"), c.fit);
  if (top.has("verify")) {
    const Reader r(top.raw("verify"), "/verify");
    r.allow({"count"});
    r.integer("count", c.verify_count);
    if (c.verify_count < 0) throw ConfigError("/verify/count must be non-negative", "/verify/count");
  }
  if (top.has("constants")) {
    const Reader r(top.raw("constants"), "/constants");
    r.allow({"S"});
    r.optional_number("S", c.sobolev_constant);
    if (c.sobolev_constant && !(*c.sobolev_constant > 0.0)) {
      throw ConfigError("/constants/S must be positive", "/constants/S");
    }
  }
  if (top.has("sobolev")) read_sobolev(Reader(top.raw("sobolev"), "/sobolev"), c.sobolev);
  top.string("output", c.output);
  top.integer("seed", c.seed);

  wrap("/geometry", [&] { (void)ModelGeometry::parse(c.geometry, c.params.n); });
  wrap("/solver", [&] {
    if (!(c.solver.cfl > 0.0 && c.solver.cfl < 1.0)) throw DomainError("cfl must lie in (0, 1)");
    if (!(c.solver.eps_reg >= 0.0)) throw DomainError("eps_reg must be non-negative");
    if (!(c.solver.dt_min > 0.0)) throw DomainError("dt_min must be positive");
    if (c.solver.max_steps < 1) throw DomainError("max_steps must be positive");
  });
  wrap("/sobolev", [&] {
    RadialGrid g(c.sobolev.R, c.sobolev.N);
    if (c.sobolev.scales.empty()) throw DomainError("scales must not be empty");
    if (!(c.sobolev.slack >= 1.0)) throw DomainError("slack must be at least 1");
  });
  validate_case(c.params, c.grid, c.time, c.initial, c.fit, c.geometry, "");

  if (top.has("sweep")) {
    const Reader r(top.raw("sweep"), "/sweep");
    r.allow({"cases", "p", "q", "n"});
    if (r.has("p") || r.has("q") || r.has("n")) {
      std::vector<double> ps{c.params.p}, qs{c.params.q}, ns{static_cast<double>(c.params.n)};
      r.numbers("p", ps);
      r.numbers("q", qs);
      r.numbers("n", ns);
      for (double p : ps)
        for (double q : qs)
          for (double n : ns) {
            SweepCase sc{c.params, c.grid, c.time, c.initial, c.fit};
            sc.params.p = p;
            sc.params.q = q;
            sc.params.n = static_cast<int>(n);
            if (sc.params.n != n) throw ConfigError("/sweep/n entries must be integers", "/sweep/n");
            c.sweep.push_back(sc);
          }
    }
    if (r.has("cases")) {
      const json& cases = r.raw("cases");
      if (!cases.is_array()) throw ConfigError("/sweep/cases must be an array", "/sweep/cases");
      for (std::size_t i = 0; i < cases.size(); ++i) {
        const std::string where = "/sweep/cases/" + std::to_string(i);
        const Reader cr(cases[i], where);
        cr.allow({"p", "q", "n", "kappa", "a", "grid", "time", "initial", "fit"});
        SweepCase sc{c.params, c.grid, c.time, c.initial, c.fit};
        sc.params.lambdas.clear();
        cr.number("p", sc.params.p);
        cr.number("q", sc.params.q);
        cr.integer("n", sc.params.n);
        cr.optional_number("kappa", sc.params.kappa);
        cr.number("a", sc.params.a);
        if (cr.has("grid")) read_grid(Reader(cr.raw("grid"), where + "/grid"), sc.grid);
        if (cr.has("time")) read_time(Reader(cr.raw("time"), where + "/time"), sc.time);
        if (cr.has("initial")) {
          read_initial(Reader(cr.raw("initial"), where + "/initial"), sc.initial);
        }
        if (cr.has("fit")) read_fit(Reader(cr.raw("fit"), where + "/fit"), sc.fit);
        c.sweep.push_back(sc);
      }
    }
    for (std::size_t i = 0; i < c.sweep.size(); ++i) {
      const SweepCase& sc = c.sweep[i];
      validate_case(sc.params, sc.grid, sc.time, sc.initial, sc.fit, c.geometry,
                    "/sweep/" + std::to_string(i));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Params config_params(const ParamsBlock& b) {
  if (b.kappa) return derive_params(b.p, b.q, b.n, b.kappa);
  return pde_params(b.p, b.q, b.n);
}

std::vector<double> default_samples(const TimeBlock& time) {
  if (time.t0 > 0.0) return log_sample_times(time.t0, time.t_end, time.per_decade);
  const double first = time.t_first.value_or(1e-3 * time.t_end);
  if (!(first > 0.0 && first < time.t_end)) throw DomainError("t_first must lie in (0, t_end)");
  std::vector<double> ts{0.0};
  const auto rest = log_sample_times(first, time.t_end, time.per_decade);
  ts.insert(ts.end(), rest.begin(), rest.end());
  return ts;
}

std::pair<double, double> default_window(const TimeBlock& time) {
  return {std::max(time.t0, time.t_end / 10.0), time.t_end};
}

double target_slope(const Params& P, double a, double lambda) {
  const double nu = P.has_sobolev_index() ? P.nu() : P.p() / P.n();
  const double g = a * nu - P.D();
  if (!(g > 0.0)) throw AdmissibilityError("no decay: a nu <= D");
  if (std::isinf(lambda)) return -1.0 / g;
  return -(lambda - a) / (lambda * g);
}

double sobolev_lower_estimate(const Params& P, const std::string& geometry,
                              const SobolevBlock& block) {
  const ModelGeometry geom = ModelGeometry::parse(geometry, P.n());
  const RadialGrid grid(block.R, block.N);
  std::vector<RadialField> family;
  for (double s : block.scales) family.push_back(talenti_field(grid, geom, P.p(), s));
  family.push_back(gaussian_field(grid, geom));
  return estimate_sobolev_constant(geom, P, family);
}

SimulationSetup prepare_simulation(const ExperimentConfig& cfg) {
  const Params P = config_params(cfg.params);
  const ModelGeometry geom = ModelGeometry::parse(cfg.geometry, P.n());
  const RadialGrid grid(cfg.grid.R, cfg.grid.N);
  SolverConfig sc{grid, geom, P, 0.0, 1.0, {}};
  sc.t0 = cfg.time.t0;
  sc.t_end = cfg.time.t_end;
  sc.sample_times = cfg.time.samples.empty() ? default_samples(cfg.time) : cfg.time.samples;
  sc.cfl = cfg.solver.cfl;
  sc.eps_reg = cfg.solver.eps_reg;
  sc.dt_min = cfg.solver.dt_min;
  sc.max_steps = cfg.solver.max_steps;
  validate(sc);

  const InitialBlock& ini = cfg.initial;
  if (ini.kind == "bump") {
    return {sc, scaled_to_mass(bump_field(grid, geom, ini.width, 1.0), ini.mass), std::nullopt};
  }
  if (ini.kind == "gaussian") {
    return {sc, scaled_to_mass(gaussian_field(grid, geom, ini.width), ini.mass), std::nullopt};
  }
  const BarenblattProfile b = ini.profile_constant ? make_barenblatt(P, *ini.profile_constant)
                                                   : fit_mass_constant(P, ini.mass, geom);
  const double t0 = sc.t0;
  RadialField u0 = RadialField::sample(grid, geom, [&](double r) { return evaluate(b, r, t0); });
  return {sc, std::move(u0), b};
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int jobs,
                                std::vector<std::string>* warnings) {
  std::vector<SweepCase> cases = cfg.sweep;
  auto key = [](const SweepCase& c) { return std::make_tuple(c.params.p, c.params.q, c.params.n); };
  std::stable_sort(cases.begin(), cases.end(),
                   [&](const SweepCase& x, const SweepCase& y) { return key(x) < key(y); });
  std::vector<SweepCase> unique;
  for (const auto& c : cases) {
    if (!unique.empty() && key(unique.back()) == key(c)) {
      if (warnings) {
        std::ostringstream os;
        os.precision(17);
        os << "duplicate sweep tuple (p=" << c.params.p << ", q=" << c.params.q
           << ", n=" << c.params.n << ") ignored";
        warnings->push_back(os.str());
      }
      continue;
    }
    unique.push_back(c);
  }
  std::vector<SweepRow> rows(unique.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < unique.size(); i = next++) rows[i] = sweep_row(cfg, unique[i]);
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(unique.size())));
  std::vector<std::thread> pool;
  for (int k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  io::CsvWriter w({"p", "q", "n", "D", "slope", "stderr", "target", "rel_error", "tolerance",
                   "within_tolerance", "sup_bound_margin", "gni_margin", "status", "message"});
  auto opt = [](const std::optional<double>& x) { return x ? io::format_double(*x) : ""; };
  for (const auto& r : rows) {
    w.row(std::vector<std::string>{
        io::format_double(r.p), io::format_double(r.q), std::to_string(r.n),
        io::format_double(r.D), io::format_double(r.slope), io::format_double(r.stderr_),
        io::format_double(r.target), io::format_double(r.rel_error),
        io::format_double(r.tolerance), r.within ? "true" : "false", opt(r.sup_bound_margin),
        opt(r.gni_margin), r.status, csv_escape(r.message)});
  }
  return w.str();
}

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                         int jobs) {
  io::OutputDir dir(out);
  RunResult result;
  result.out = out;
  switch (cfg.kind) {
    case ExperimentKind::simulate:
    case ExperimentKind::fit_decay: {
      const SimulationSetup setup = prepare_simulation(cfg);
      const Trajectory tr = run(setup.solver, setup.u0);
      dir.write("trajectory.csv", trajectory_csv(tr));
      if (cfg.kind == ExperimentKind::simulate) {
        for (std::size_t j = 0; j < tr.fields.size(); ++j) {
          dir.write(snapshot_name(j), io::field_csv(tr.fields[j]));
        }
        const auto& last = tr.diagnostics.back();
        json rep = {{"experiment", "simulate"},
                    {"seed", cfg.seed},
                    {"inputs", config_json(cfg)},
                    {"steps", tr.steps},
                    {"clip_mass", tr.clip_mass},
                    {"samples", tr.times.size()},
                    {"mass_initial", tr.diagnostics.front().mass},
                    {"mass_final", last.mass},
                    {"linf_final", last.linf}};
        dir.write("report.json", dump(rep));
      } else {
        const Params& P = setup.solver.params;
        const double a = cfg.params.a;
        const auto window = cfg.fit.window.value_or(default_window(cfg.time));
        const DecayFit fit = fit_decay_exponent(tr, cfg.fit.lambda, window);
        const double target = target_slope(P, a, cfg.fit.lambda);
        const double rel = std::fabs(fit.slope - target) / std::fabs(target);
        json rep = {{"experiment", "fit"},
                    {"seed", cfg.seed},
                    {"inputs", config_json(cfg)},
                    {"lambda", number_or_inf(cfg.fit.lambda)},
                    {"window", {window.first, window.second}},
                    {"slope", fit.slope},
                    {"stderr", fit.stderr_},
                    {"samples", fit.samples},
                    {"target", target},
                    {"rel_error", rel},
                    {"tolerance", cfg.fit.tolerance},
                    {"within_tolerance", rel <= cfg.fit.tolerance},
                    {"steps", tr.steps}};
        dir.write("fit.json", dump(rep));
      }
      break;
    }
    case ExperimentKind::barenblatt_table: {
      const Params P = config_params(cfg.params);
      const ModelGeometry geom = ModelGeometry::parse(cfg.geometry, P.n());
      const BarenblattProfile b = cfg.initial.profile_constant
                                      ? make_barenblatt(P, *cfg.initial.profile_constant)
                                      : fit_mass_constant(P, cfg.initial.mass, geom);
      const RadialGrid grid(cfg.grid.R, cfg.grid.N);
      io::CsvWriter w({"xi", "F"});
      for (int i = 0; i < grid.N(); ++i) {
        const double xi = grid.center(i);
        w.row(std::vector<double>{xi, profile_value(b, xi)});
      }
      dir.write("profile.csv", w.str());
      const BarenblattResiduals res = residual_oracle(b, grid);
      json rep = {{"experiment", "barenblatt"},
                  {"seed", cfg.seed},
                  {"inputs", config_json(cfg)},
                  {"regime", regime_name(b.regime)},
                  {"ss_rate", b.ss_rate},
                  {"profile_constant", b.profile_constant},
                  {"coeff", b.coeff},
                  {"mass", barenblatt_mass(b)},
                  {"support_radius", number_or_inf(support_radius(b))},
                  {"decay_constant", barenblatt_decay_constant(b)},
                  {"ode_residual", res.ode_residual},
                  {"ode_residual_fd", res.ode_residual_fd},
                  {"pde_residual", res.pde_residual},
                  {"excluded_cells", res.excluded_cells}};
      dir.write("residuals.json", dump(rep));
      break;
    }
    case ExperimentKind::verify_identities:
      dir.write("verify.json", dump(verify_identities(cfg)));
      break;
    case ExperimentKind::moser_constants:
      dir.write("constants.json", dump(moser_constants_report(cfg)));
      break;
    case ExperimentKind::sobolev_estimate:
      dir.write("sobolev.json", dump(sobolev_report(cfg)));
      break;
    case ExperimentKind::sweep: {
      const auto rows = run_sweep(cfg, jobs, &result.warnings);
      dir.write("sweep.csv", sweep_csv(rows));
      break;
    }
  }
  dir.finish(cfg.seed);
  result.hashes = dir.hashes();
  return result;
}

std::string error_json(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
    err["type"] = "config_error";
    err["location"] = ce->location();
  } else if (dynamic_cast<const AdmissibilityError*>(&e)) {
    err["type"] = "admissibility_error";
  } else if (dynamic_cast<const DomainError*>(&e)) {
    err["type"] = "domain_error";
  } else if (dynamic_cast<const SizeMismatch*>(&e)) {
    err["type"] = "size_mismatch";
  } else if (dynamic_cast<const QuadratureError*>(&e)) {
    err["type"] = "quadrature_error";
  } else if (dynamic_cast<const SolverError*>(&e)) {
    err["type"] = "solver_error";
  } else {
    err["type"] = "error";
  }
  return json{{"error", err}}.dump();
}

}  // namespace leiblab
