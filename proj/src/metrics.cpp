#include "isac/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace isac {

double comm_sinr(const ComplexVector& g_k, const ComplexMatrix& W, int k, double noise) {
  require(k >= 0 && k < W.cols(), "comm_sinr: column index out of range");
  require(g_k.size() == W.rows(), "comm_sinr: dimension mismatch");
  const Eigen::RowVectorXcd gw = g_k.adjoint() * W;
  const double signal = std::norm(gw(k));
  const double interference = gw.squaredNorm() - signal;
  return signal / (std::max(interference, 0.0) + noise);
}

double comm_sinr(const DesignVariables& vars, const SystemModel& model, int k) {
  require(k >= 0 && k < model.K, "comm_sinr: user index out of range");
  const ComplexVector h = model.user_channel(k, vars.u[static_cast<size_t>(k)]);
  return comm_sinr(cascaded_channel(h, vars.phi, model.H), vars.W, k, model.noise);
}

double eavesdrop_sinr(const DesignVariables& vars, const SystemModel& model, int k) {
  require(k >= 0 && k < model.K, "eavesdrop_sinr: user index out of range");
  return comm_sinr(cascaded_channel(model.h0, vars.phi, model.H), vars.W, k, model.noise);
}

ComplexVector radar_echo(const ComplexVector& g0, const ComplexMatrix& W) {
  const ComplexMatrix ht_w = g0 * (g0.adjoint() * W);
  return Eigen::Map<const ComplexVector>(ht_w.data(), ht_w.size());
}

double radar_snr_lb(const ComplexVector& g0, const ComplexMatrix& W, const ComplexVector& r, const SystemModel& model) {
  require(r.size() == W.size(), "radar_snr_lb: filter size mismatch");
  const double rr = r.squaredNorm();
  require(rr > 0.0, "radar_snr_lb: zero receive filter");
  const cdouble inner = r.dot(radar_echo(g0, W));
  return model.L * model.sigma_t2 * std::norm(inner) / (model.noise * rr);
}

double radar_snr_lb(const DesignVariables& vars, const SystemModel& model) {
  return radar_snr_lb(cascaded_channel(model.h0, vars.phi, model.H), vars.W, vars.r, model);
}

MonteCarloEstimate radar_snr_mc(const DesignVariables& vars, const SystemModel& model, int num_samples,
                                std::uint64_t seed) {
  require(num_samples >= 1, "radar_snr_mc: num_samples must be >= 1");
  const double rr = vars.r.squaredNorm();
  require(rr > 0.0, "radar_snr_mc: zero receive filter");
  const ComplexVector g0 = cascaded_channel(model.h0, vars.phi, model.H);
  const ComplexMatrix ht_w = g0 * (g0.adjoint() * vars.W);  // M x (K+M)
  const Eigen::Index cols = vars.W.cols();
  const Eigen::Index m = vars.W.rows();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const double s2 = std::sqrt(0.5);
  double sum = 0.0;
  double sum_sq = 0.0;
  ComplexMatrix s(cols, model.L);
  for (int t = 0; t < num_samples; ++t) {
    for (Eigen::Index i = 0; i < cols; ++i)
      for (int l = 0; l < model.L; ++l) s(i, l) = cdouble(g(rng), g(rng)) * s2;
    const ComplexMatrix gram = s * s.adjoint();
    // (S S^H kron H_t) vec(W) = vec(H_t W (S S^H)^T)
    const ComplexMatrix y = ht_w * gram.transpose();
    const cdouble inner = vars.r.dot(Eigen::Map<const ComplexVector>(y.data(), m * cols));
    const double v = model.sigma_t2 * std::norm(inner) / (model.L * model.noise * rr);
    sum += v;
    sum_sq += v * v;
  }
  MonteCarloEstimate est;
  est.mean = sum / num_samples;
  const double var = num_samples > 1 ? std::max(0.0, (sum_sq - num_samples * est.mean * est.mean) / (num_samples - 1)) : 0.0;
  est.std_error = std::sqrt(var / num_samples);
  return est;
}

double secrecy_lower_bound(double gamma, double gamma_e) {
  require(gamma >= 0.0 && gamma_e >= 0.0, "secrecy_lower_bound: thresholds must be nonnegative");
  return std::max(std::log2(1.0 + gamma) - std::log2(1.0 + gamma_e), 0.0);
}

double splitting_residual(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux) {
  double total = (W.adjoint() * cascade.g0 - aux.x.conjugate()).squaredNorm();
  for (size_t k = 0; k < cascade.g.size(); ++k) {
    const Eigen::RowVectorXcd gw = cascade.g[k].adjoint() * W;
    total += (gw - aux.z.row(static_cast<Eigen::Index>(k))).squaredNorm();
  }
  return total;
}

double max_violation(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux) {
  const Eigen::RowVectorXcd g0w = cascade.g0.adjoint() * W;
  double worst = (g0w - aux.x.transpose()).cwiseAbs2().maxCoeff();
  for (size_t k = 0; k < cascade.g.size(); ++k) {
    const Eigen::RowVectorXcd gw = cascade.g[k].adjoint() * W;
    worst = std::max(worst, (gw - aux.z.row(static_cast<Eigen::Index>(k))).cwiseAbs2().maxCoeff());
  }
  return worst;
}

double max_violation(const DesignVariables& vars, const AuxVariables& aux, const SystemModel& model) {
  return max_violation(Cascade::of(model, vars), vars.W, aux);
}

double fp_objective_nats(const AuxVariables& aux, double noise) {
  double f = 0.0;
  for (Eigen::Index k = 0; k < aux.z.rows(); ++k) {
    const double lam = aux.lambda(k);
    const double total = aux.z.row(k).squaredNorm() + noise;
    f += std::log1p(lam) - lam - std::norm(aux.iota(k)) * total +
         2.0 * std::sqrt(1.0 + lam) * (std::conj(aux.iota(k)) * aux.z(k, k)).real();
  }
  return f;
}

double penalty_objective(const Cascade& cascade, const ComplexMatrix& W, const AuxVariables& aux, double noise,
                         double rho) {
  require(rho > 0.0, "penalty_objective: rho must be positive");
  return (fp_objective_nats(aux, noise) - splitting_residual(cascade, W, aux) / (2.0 * rho)) / std::numbers::ln2;
}

double penalty_objective(const DesignVariables& vars, const AuxVariables& aux, const SystemModel& model, double rho) {
  return penalty_objective(Cascade::of(model, vars), vars.W, aux, model.noise, rho);
}

bool MetricReport::feasible(double rel_tol, bool sensing) const {
  return comm_margin >= -rel_tol && eaves_margin >= -rel_tol && (!sensing || radar_margin >= -rel_tol) &&
         power_margin >= -1e-9 && unit_modulus_error <= 1e-9 && positions_in_region;
}

MetricReport evaluate(const DesignVariables& vars, const SystemModel& model) {
  MetricReport rep;
  const Cascade c = Cascade::of(model, vars);
  rep.gamma.resize(model.K);
  rep.gamma_e.resize(model.K);
  rep.secrecy_lb.resize(model.K);
  for (int k = 0; k < model.K; ++k) {
    rep.gamma(k) = comm_sinr(c.g[static_cast<size_t>(k)], vars.W, k, model.noise);
    rep.gamma_e(k) = comm_sinr(c.g0, vars.W, k, model.noise);
    rep.sum_rate += std::log2(1.0 + rep.gamma(k));
    rep.secrecy_lb(k) = secrecy_lower_bound(model.Gamma, model.Gamma_e);
  }
  rep.radar_lb = vars.r.squaredNorm() > 0.0 ? radar_snr_lb(c.g0, vars.W, vars.r, model) : 0.0;
  rep.power_used = vars.W.squaredNorm();
  rep.comm_margin = rep.gamma.minCoeff() / model.Gamma - 1.0;
  rep.eaves_margin = 1.0 - rep.gamma_e.maxCoeff() / model.Gamma_e;
  rep.radar_margin = rep.radar_lb / model.Gamma_r - 1.0;
  rep.power_margin = 1.0 - rep.power_used / model.power;
  rep.unit_modulus_error = (vars.phi.cwiseAbs().array() - 1.0).abs().maxCoeff();
  for (const auto& u : vars.u) rep.positions_in_region = rep.positions_in_region && model.region.contains(u);
  return rep;
}

}  // namespace isac
