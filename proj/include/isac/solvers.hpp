#pragma once

#include <optional>

#include "isac/metrics.hpp"
#include "isac/model.hpp"

namespace isac {

// ---- fractional-programming variables -------------------------------------------------------

/// lambda_k = |z_kk|^2 / (sum_{j != k} |z_kj|^2 + noise); the SINR carried by the splitting variables.
RealVector update_lambda(const AuxVariables& aux, double noise);

/// iota_k = sqrt(1 + lambda_k) z_kk / (sum_j |z_kj|^2 + noise).
ComplexVector update_iota(const AuxVariables& aux, const RealVector& lambda, double noise);

// ---- splitting variables -------------------------------------------------------------------

/// Objective of the z subproblem for user k (to be minimized), given a_j = g_k^H w_j.
double z_subproblem_objective(const Eigen::RowVectorXcd& z_row, const Eigen::RowVectorXcd& a, int k, double lambda,
                              cdouble iota, double rho);

struct ZUpdate {
  Eigen::RowVectorXcd z;
  double mu = 0.0;
  bool hard_case = false;
};

/// Minimize the z subproblem for user k subject to |z_kk|^2 >= Gamma (sum_{j != k} |z_kj|^2 + noise).
ZUpdate update_z(const Eigen::RowVectorXcd& a, int k, double lambda, cdouble iota, double rho, double Gamma,
                 double noise, const SolverOptions& opts);

struct XUpdate {
  ComplexVector x;
  RealVector mu;  // one multiplier per user constraint
  int sweeps = 0;
};

/// Closest x to b (b_j = g_0^H w_j) with |x_k|^2 <= Gamma_e (sum_{j != k} |x_j|^2 + noise) for every user k < K.
XUpdate update_x(const ComplexVector& b, int K, double Gamma_e, double noise, const SolverOptions& opts);

// ---- radar receive filter and sensing constraint ---------------------------------------------

/// Unit-norm matched filter r = v / ||v|| with v = vec(H_t W); r^H v is real and positive.
ComplexVector update_receive_filter(const ComplexVector& g0, const ComplexMatrix& W);

struct SensingConstraint {
  ComplexVector c;  // Re{c^H vec(W)} >= eps
  double eps = 0.0;
};

SensingConstraint sensing_constraint(const ComplexVector& g0, const ComplexVector& r, const SystemModel& model);

// ---- transmit beamformer -------------------------------------------------------------------

/// Least-squares blocks of the beamformer subproblem: A = [g0^H; g_1^H; ...], b_j = [x_j; z_1j; ...].
std::vector<LsBlock> beamformer_blocks(const Cascade& cascade, const AuxVariables& aux);

/// Pass `sensing = nullopt` to drop the radar constraint.
LsResult update_beamformer(const Cascade& cascade, const AuxVariables& aux,
                           const std::optional<SensingConstraint>& sensing, double power, const SolverOptions& opts,
                           const std::optional<ComplexMatrix>& warm_start = std::nullopt);

// ---- RIS phases ----------------------------------------------------------------------------

struct PhiStep {
  ComplexVector q;         // linear term of the surrogate, maximize Re{phi^H q}
  Eigen::RowVectorXcd d;   // linearized sensing constraint Re{d phi} >= eps3
  double eps3 = 0.0;
  double eps2 = 0.0;
  double upsilon_bound = 0.0;  // majorization constant, >= lambda_max of the quadratic
  ComplexMatrix S;             // Hermitian sensing form, Re{r^H vec(H_t W)} = phi^H S phi
  double shift = 0.0;          // min(0, lower bound on lambda_min(S))
  bool sensing = true;

  /// Surrogate quadratic of the penalty at phi (same constant as the true penalty at the expansion point).
  double surrogate(const ComplexVector& phi) const;
  /// Linearized sensing value Re{d phi} - eps3 bound on phi^H S phi - eps.
  double sensing_minorizer(const ComplexVector& phi) const;
  double surrogate_constant = 0.0;
};

/// F_kappa = diag(conj h_kappa) H, so that g_kappa^H w = phi^T F_kappa w.
ComplexMatrix phase_channel(const ComplexVector& h, const ComplexMatrix& H);

/// Penalty terms that depend on phi: sum_j |g0^H w_j - x_j|^2 + sum_k sum_j |g_k^H w_j - z_kj|^2.
double phi_penalty(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux,
                   const ComplexVector& phi);

/// phi^H S phi as a real quadratic form in [Re phi; Im phi].
Eigen::MatrixXd real_augmented(const ComplexMatrix& S);

PhiStep build_phi_step(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux,
                       bool sensing, const SolverOptions& opts);

struct PhiSolution {
  ComplexVector phi;
  double mu = 0.0;
};

/// Maximize Re{phi^H q} s.t. Re{d phi} >= eps3, |phi_n| <= 1. Entries where q_n + mu conj(d_n) vanishes keep phi_prev.
PhiSolution solve_phi_subproblem(const ComplexVector& q, const Eigen::RowVectorXcd& d, double eps3,
                                 const ComplexVector& phi_prev, const SolverOptions& opts);

// ---- movable-antenna positions ---------------------------------------------------------------

/// Quadratic model f^H Q f + 2 Re{f^H p} of the user-k penalty in its receive FRV f.
struct PositionQuadratic {
  ComplexMatrix Q;
  ComplexVector p;
  double constant = 0.0;
  double Lambda = 0.0;  // >= lambda_max(Q)

  double value(const ComplexVector& f) const;
};

PositionQuadratic position_quadratic(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux,
                                     int k, const SolverOptions& opts);

struct PositionSurrogate {
  ComplexVector varsigma;
  Vec2 gradient;
  Mat2 hessian;
  double delta = 0.0;
  double psi = 0.0;  // 2 Re{f^H varsigma} at the expansion point
};

/// psi(u) = 2 Re{f(u)^H varsigma}.
double position_psi(const SystemModel& model, int k, const ComplexVector& varsigma, const Vec2& u);

/// Majorization bound Lambda ||f||^2 - 2 Re{f^H (Lambda I - Q) f_t} + f_t^H (Lambda I - Q) f_t + 2 Re{f^H p} + c.
double position_majorizer(const PositionQuadratic& pq, const ComplexVector& f_t, const ComplexVector& f);

PositionSurrogate build_position_surrogate(const SystemModel& model, const PositionQuadratic& pq, int k,
                                           const Vec2& u_t);

Vec2 position_step(const PositionSurrogate& s, const Vec2& u_t, const Region& region);

struct PositionResult {
  Vec2 u;
  double objective_before = 0.0;
  double objective_after = 0.0;
  int iterations = 0;
};

PositionResult optimize_position(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux, int k,
                                 double eps1, int max_iter, const SolverOptions& opts);

}  // namespace isac
