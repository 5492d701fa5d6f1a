#pragma once

// Experiment configuration, orchestration and report emission.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "leiblab/barenblatt.hpp"
#include "leiblab/errors.hpp"
#include "leiblab/solver.hpp"

namespace leiblab {

enum class ExperimentKind {
  simulate,
  fit_decay,
  barenblatt_table,
  verify_identities,
  moser_constants,
  sobolev_estimate,
  sweep
};

/// Accepts the subcommand names (simulate, fit, barenblatt, verify,
/// constants, sobolev, sweep) and the long forms (fit_decay, ...).
ExperimentKind parse_kind(std::string_view name);
const char* kind_name(ExperimentKind kind);

/// Invalid configuration.  location() is a JSON pointer ("/solver/cfl") or
/// "line L, column C" for syntax errors.
class ConfigError : public DomainError {
 public:
  ConfigError(const std::string& message, std::string location)
      : DomainError(message), location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

struct ParamsBlock {
  double p = 2.0;
  double q = 1.0;
  int n = 3;
  std::optional<double> kappa;
  double a = 1.0;
  std::vector<double> lambdas;
};

struct GridBlock {
  double R = 10.0;
  int N = 1000;
};

struct TimeBlock {
  double t0 = 0.0;
  double t_end = 1.0;
  std::vector<double> samples;  ///< explicit sample times; overrides the log grid
  int per_decade = 32;
  std::optional<double> t_first;  ///< first log sample when t0 = 0
};

struct SolverBlock {
  double cfl = 0.25;
  double eps_reg = 1e-12;
  double dt_min = 1e-14;
  long long max_steps = 2'000'000'000;
};

struct InitialBlock {
  std::string kind = "bump";  ///< bump | gaussian | barenblatt
  double mass = 1.0;
  double width = 1.0;
  std::optional<double> profile_constant;
};

struct FitBlock {
  double lambda = kInfinity;
  std::optional<std::pair<double, double>> window;
  double tolerance = 0.05;
};

struct SweepCase {
  ParamsBlock params;
  GridBlock grid;
  TimeBlock time;
  InitialBlock initial;
  FitBlock fit;
};

struct SobolevBlock {
  double R = 1000.0;
  int N = 20000;
  std::vector<double> scales{1.0, 2.0, 4.0};
  double slack = 1.01;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::simulate;
  ParamsBlock params;
  std::string geometry = "euclidean";
  GridBlock grid;
  TimeBlock time;
  SolverBlock solver;
  InitialBlock initial;
  FitBlock fit;
  std::vector<SweepCase> sweep;
  int verify_count = 1000;
  std::optional<double> sobolev_constant;  ///< constants: S override
  SobolevBlock sobolev;
  std::string output = "out";
  unsigned long long seed = 0;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Params for the dynamics: the configured kappa when given, else the
/// euclidean default when n > p, else unset.
Params config_params(const ParamsBlock& block);

struct SimulationSetup {
  SolverConfig solver;
  RadialField u0;
  std::optional<BarenblattProfile> profile;
};

SimulationSetup prepare_simulation(const ExperimentConfig& cfg);

/// Sample times used when none are listed: t0 (when positive, else t0 and
/// then t_first) followed by a log grid to t_end.
std::vector<double> default_samples(const TimeBlock& time);

/// Fit window used when none is given: the last decade of the run.
std::pair<double, double> default_window(const TimeBlock& time);

/// Expected log-log slope of ||u(t)||_lambda: -(1/lambda)(lambda-a)/(a nu - D),
/// with nu = p/n standing in when no Sobolev index is available.
double target_slope(const Params& params, double a, double lambda);

/// Largest Rayleigh quotient over dilated Talenti shapes and a Gaussian on
/// the configured Sobolev grid (no slack applied).
double sobolev_lower_estimate(const Params& params, const std::string& geometry,
                              const SobolevBlock& block);

struct SweepRow {
  double p, q;
  int n;
  double D;
  double slope = 0, stderr_ = 0, target = 0, rel_error = 0, tolerance = 0;
  bool within = false;
  std::optional<double> sup_bound_margin;
  std::optional<double> gni_margin;
  std::string status = "ok";
  std::string message;
};

/// Sorted by (p, q, n), duplicates removed (reported through warnings).
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, int jobs,
                                std::vector<std::string>* warnings = nullptr);
std::string sweep_csv(const std::vector<SweepRow>& rows);

struct RunResult {
  std::filesystem::path out;
  std::map<std::string, std::string> hashes;
  std::vector<std::string> warnings;
};

/// Writes the artifacts of the configured experiment under out, plus
/// manifest.json.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out,
                         int jobs = 1);

/// {"error": {"type", "message", "location"?}}
std::string error_json(const std::exception& e);

}  // namespace leiblab
