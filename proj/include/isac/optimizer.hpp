#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isac/metrics.hpp"
#include "isac/model.hpp"
#include "isac/scenario.hpp"
#include "isac/solvers.hpp"

namespace isac {

struct OptimizerOptions {
  double rho0 = 0.1;
  double eta = 0.85;
  double eps_in = 1e-7;
  double eps_out = 1e-5;
  int T1_max = 400;
  int T2_max = 120;
  double eps1 = 1e-7;           // position MM stopping threshold
  int position_max_iter = 500;
  int phi_max_iter = 1;          // MM steps on the phases per sweep
  double margin_tol = 1e-4;     // relative tolerance on the original constraints at termination
  int degraded_after = 3;       // consecutive sweeps with an infeasible sensing block
  SolverOptions solver;

  void validate() const;
  static OptimizerOptions from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

/// Which blocks the optimizer may change.
struct BlockMask {
  bool phi = true;
  bool positions = true;
  bool sensing = true;  // false drops the radar constraint everywhere
};

struct TraceRow {
  int outer = 0;
  int inner = 0;
  double rho = 0.0;
  double objective = 0.0;
  double violation = 0.0;
  double sum_rate = 0.0;
};

struct PenaltyState {
  double rho = 0.0;
  double eta = 0.0;
  int T1 = 0;        // inner iterations in the current outer iteration
  int T2 = 0;        // outer iterations completed
  int total_sweeps = 0;
  std::vector<double> objective_trace;
  std::vector<double> violation_trace;  // one entry per outer iteration
  std::vector<TraceRow> rows;
  double worst_sweep_change = 0.0;   // most negative objective change of a sweep at fixed rho
  int rejected_blocks = 0;           // block candidates discarded because they lowered the objective
  // largest relative drop of a rejected candidate, per block: lambda/iota, z, x, W, phi, u
  std::array<double, 6> worst_rejected_drop{};
  int sensing_failures = 0;          // consecutive sweeps with an infeasible sensing block
  int total_sensing_failures = 0;
  bool degraded = false;
};

struct InitialPoint {
  std::optional<ComplexVector> phi;
  std::optional<std::vector<Vec2>> u;
};

/// Starting point: random unit-modulus phases, antennas at the origin, matched communication columns
/// plus isotropic radar columns sharing P_B equally, and auxiliary variables from their block solvers.
/// `model` may be in any units (see SystemModel::rescaled); run_optimizer uses signal_normalized().
std::pair<DesignVariables, AuxVariables> initialize(const SystemModel& model, std::uint64_t seed, const BlockMask& mask,
                                                    const InitialPoint& start, const OptimizerOptions& opts);

/// Gauss-Seidel sweep over lambda/iota, z, x, r_B, W, phi, u. Each block keeps its previous value when
/// the candidate would lower the penalized objective. Returns the objective after the sweep.
double inner_sweep(const SystemModel& model, DesignVariables& vars, AuxVariables& aux, double rho,
                   const BlockMask& mask, const OptimizerOptions& opts, PenaltyState& state);

struct RunResult {
  DesignVariables vars;
  AuxVariables aux;
  MetricReport report;          // original constraints and rates at termination
  MetricReport initial_report;  // same metrics at the starting point
  PenaltyState state;
  bool converged = false;  // splitting violation <= eps_out and original constraints within margin_tol
  bool feasible = false;   // original constraints within margin_tol
  std::string diagnostic;

  bool ok() const { return converged && feasible && !state.degraded; }
};

/// Two-layer penalty method on one channel realization.
RunResult run_optimizer(const Scenario& scenario, const ChannelSet& channels, std::uint64_t seed,
                        const OptimizerOptions& opts, const BlockMask& mask = {}, const InitialPoint& start = {});

}  // namespace isac
