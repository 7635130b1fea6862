#pragma once

#include <cstdint>

#include "isac/model.hpp"

namespace isac {

/// SINR of user k (0-based) given its cascaded channel; interference sums over all other columns.
double comm_sinr(const ComplexVector& g_k, const ComplexMatrix& W, int k, double noise);
double comm_sinr(const DesignVariables& vars, const SystemModel& model, int k);

/// Eavesdropper SINR on the stream of user k (0-based).
double eavesdrop_sinr(const DesignVariables& vars, const SystemModel& model, int k);

/// Stacked (I kron H_t) vec(W), i.e. vec(H_t W).
ComplexVector radar_echo(const ComplexVector& g0, const ComplexMatrix& W);

/// Jensen lower bound L sigma_t^2 |r^H (I kron H_t) w|^2 / (sigma_r^2 r^H r).
double radar_snr_lb(const DesignVariables& vars, const SystemModel& model);
double radar_snr_lb(const ComplexVector& g0, const ComplexMatrix& W, const ComplexVector& r, const SystemModel& model);

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of the radar output SNR over random unit-power symbol frames.
MonteCarloEstimate radar_snr_mc(const DesignVariables& vars, const SystemModel& model, int num_samples,
                                std::uint64_t seed);

/// max{log2(1+Gamma) - log2(1+Gamma_e), 0} in bps/Hz.
double secrecy_lower_bound(double gamma, double gamma_e);

/// Sum of squared splitting residuals and their maximum.
double splitting_residual(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux);
double max_violation(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux);
double max_violation(const DesignVariables& vars, const AuxVariables& aux, const SystemModel& model);

/// Fractional-programming part in nats, evaluated on the splitting variables z.
double fp_objective_nats(const AuxVariables& aux, double noise);

/// Penalized objective in bits: (FP(lambda, iota, z) - splitting_residual / (2 rho)) / ln 2.
double penalty_objective(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux, double noise,
                         double rho);
double penalty_objective(const DesignVariables& vars, const AuxVariables& aux, const SystemModel& model, double rho);

struct MetricReport {
  RealVector gamma;      // K
  RealVector gamma_e;    // K
  double radar_lb = 0.0;
  double sum_rate = 0.0;
  RealVector secrecy_lb;  // K, threshold-based bound
  double power_used = 0.0;

  double comm_margin = 0.0;     // min_k gamma_k / Gamma - 1
  double eaves_margin = 0.0;    // min_k 1 - gamma_e,k / Gamma_e
  double radar_margin = 0.0;    // S_lb / Gamma_r - 1
  double power_margin = 0.0;    // 1 - ||W||^2 / P
  double unit_modulus_error = 0.0;
  bool positions_in_region = true;

  /// All original constraints hold; `rel_tol` applies to the SINR/SNR margins, `sensing` false skips the radar check.
  bool feasible(double rel_tol, bool sensing = true) const;
};

MetricReport evaluate(const DesignVariables& vars, const SystemModel& model);

}  // namespace isac
