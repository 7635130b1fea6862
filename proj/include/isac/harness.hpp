#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "isac/optimizer.hpp"

namespace isac {

enum class Scheme { kProposed, kFpa, kRpa, kSeparate, kCommOnly, kRandomPhase };

Scheme parse_scheme(const std::string& name);  // throws kUnknownScheme
std::string to_string(Scheme scheme);
const std::vector<Scheme>& all_schemes();

struct TrialResult {
  Scheme scheme = Scheme::kProposed;
  std::string param;   // swept parameter, empty for a single run
  double value = 0.0;  // swept value
  int trial = 0;
  std::uint64_t seed = 0;
  double sum_rate = 0.0;    // bps/Hz
  double secrecy_lb = 0.0;  // sum over users, bps/Hz
  bool converged = false;   // algorithm converged and original constraints hold within margin
  bool feasible = false;
  bool degraded = false;    // did not end converged and feasible (or the sensing block stalled)
  int iterations = 0;  // inner sweeps (FP iterations for the separate pipeline)
  int outer_iterations = 0;
  double wall_time = 0.0;  // seconds, kept out of the deterministic CSV
  MetricReport report;
  std::string diagnostic;
};

/// Outcome of a scheme together with the optimizer state when there is one.
struct SchemeRun {
  TrialResult result;
  DesignVariables vars;
  PenaltyState state;
  MetricReport initial;  // starting point, optimizer schemes only
};

/// Runs one scheme on the channel realization drawn from `seed`.
SchemeRun run_scheme_detailed(Scheme scheme, const Scenario& scenario, const OptimizerOptions& opts,
                              std::uint64_t seed);
TrialResult run_scheme(Scheme scheme, const Scenario& scenario, const OptimizerOptions& opts, std::uint64_t seed);

/// Grid step for the separate baseline's position search.
double separate_grid_step(const Scenario& scenario);

struct SweepSpec {
  std::string param;  // any scenario config key, or N (split into N1 x N2)
  std::vector<double> values;
  int trials = 1;
  std::vector<Scheme> schemes;
  Config base;  // scenario and optimizer keys
  std::string out;

  void validate() const;
  /// Reads sweep.param, sweep.values, sweep.trials, sweep.schemes from `cfg`.
  static SweepSpec from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

/// Config with `param` set to `value`.
Config apply_sweep_value(const Config& base, const std::string& param, double value);

struct AggregateRow {
  std::string param;
  double value = 0.0;
  Scheme scheme = Scheme::kProposed;
  int trials = 0;
  double sum_rate_mean = 0.0;
  double sum_rate_se = 0.0;
  double secrecy_lb_mean = 0.0;
  double secrecy_lb_se = 0.0;
  double converged_fraction = 0.0;
};

struct SweepResult {
  std::vector<TrialResult> trials;  // value-major, then trial, then scheme
  std::vector<AggregateRow> aggregate;
};

/// Worker count: ISAC_THREADS when set, otherwise the hardware concurrency.
int worker_count();

/// Runs every (value, trial, scheme) cell. Trial t uses seed base_seed + t for every value and scheme.
SweepResult run_sweep(const SweepSpec& spec, int threads = 0);

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials);

extern const char* const kTrialSchema;
extern const char* const kAggregateSchema;

void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
void write_timing_csv(std::ostream& os, const std::vector<TrialResult>& trials);
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows);

/// Writes <out>, <out stem>.aggregate.csv and <out stem>.timing.csv. Returns the written paths.
std::vector<std::string> write_sweep(const SweepResult& result, const std::string& out);

/// Human-readable MetricReport.
void print_report(std::ostream& os, const TrialResult& result);

/// Quick oracle and invariant checks; one line per check. Returns true when all pass.
bool run_self_checks(std::ostream& os, std::uint64_t seed = 1);

}  // namespace isac
