#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "degcarl/carleman.hpp"
#include "degcarl/csv.hpp"
#include "degcarl/error.hpp"
#include "degcarl/hardy.hpp"
#include "degcarl/problem.hpp"

namespace degcarl {

enum class Pipeline { Classify, Hardy, Wellposed, Evolve, Carleman, Observability, Hum, Sweep };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& s);

struct HardyParams {
  std::vector<HardyVariant> variants;  // empty: the C* variant of the spec
  int fields = 100;
  bool refine = true;
};

struct WellposedParams {
  int fields = 20;
};

struct EvolveParams {
  std::string u0 = "sine";  // sine | random
  int mode = 1;
};

struct CarlemanParams {
  double d1 = 1.0;
  double R = 1.0;
  double safety = 1.5;
  std::vector<double> s_grid;  // default: 20 log-spaced values in [5,100]
  int cases = 20;
  NondegVariant variant = NondegVariant::A1;
  double r = 1.0;
  double h0 = 1.0;
  double g = 1.0;  // constant g for variant a1
  std::optional<double> frak_c;
  bool localized = false;
};

struct CaccioppoliParams {
  Interval omega_prime;
  double s = 1.0;
  int count = 20;
};

struct ObservabilityParams {
  int iters = 50;
  double tol = 1e-6;
  std::optional<CaccioppoliParams> caccioppoli;
};

struct HumParams {
  double tol = 1e-3;
  int max_iter = 200;
  std::string u0 = "sine";
};

struct SweepParams {
  Pipeline pipeline = Pipeline::Wellposed;
  std::string axis;
  std::vector<double> values;
};

struct ScenarioConfig {
  Pipeline pipeline = Pipeline::Classify;
  ProblemSpec problem;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  HardyParams hardy;
  WellposedParams wellposed;
  EvolveParams evolve;
  CarlemanParams carleman;
  bool has_carleman = false;
  ObservabilityParams observability;
  HumParams hum;
  std::optional<SweepParams> sweep;
  std::optional<double> identity_g;  // constant g of the weight identity
  double identity_h0 = 1.0;
};

/// Parses a JSON config; errors name the offending field (and line for syntax errors).
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Applies one sweep axis value (lambda, K1, K2, omega_lo, omega_hi, N, s).
void apply_axis(ScenarioConfig& cfg, const std::string& axis, double value);
bool is_sweep_axis(const std::string& axis);

/// "axis=v1,v2,..." as given on the command line.
SweepParams parse_sweep_arg(const std::string& arg, Pipeline pipeline);

using Metrics = std::vector<std::pair<std::string, std::string>>;

struct ReportedCheck {
  HypothesisCheck check;
  bool blocking = true;
};

struct PipelineResult {
  Metrics metrics;
  std::vector<ReportedCheck> checks;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  std::vector<std::pair<std::string, CsvTable>> tables;
  bool numerical_failure = false;  // e.g. HUM not converged

  bool outside_hypotheses() const;
};

PipelineResult run_pipeline(Pipeline p, const ScenarioConfig& cfg);
std::vector<std::string> metric_keys(Pipeline p);

struct RunOptions {
  bool allow_outside_hypotheses = false;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::optional<SweepParams> sweep;
};

struct RunOutcome {
  int exit_code = 0;
  std::string status;
  std::vector<std::filesystem::path> files;
  std::string report;
};

/// Runs the configured pipeline (or sweep) and writes summary.csv, detail CSVs and report.txt.
RunOutcome run_scenario(ScenarioConfig cfg, const RunOptions& opts);

/// Process exit status: 2 parse/validation, 3 hypothesis/precondition, 4 numerical, 1 other.
int exit_code_for(const Error& e);

}  // namespace degcarl
