#include "isac/model.hpp"

#include <cmath>

namespace isac {

ComplexVector SystemModel::user_frv(int k, const Vec2& u) const {
  require(k >= 0 && k < K, "user index out of range");
  return receive_frv(user_rx[static_cast<size_t>(k)], u, lambda);
}

ComplexVector SystemModel::user_channel(int k, const Vec2& u) const {
  // (f^H Sigma G)^T
  return (user_frv(k, u).adjoint() * user_sg[static_cast<size_t>(k)]).transpose();
}

SystemModel SystemModel::from(const Scenario& s, const ChannelSet& cs) {
  SystemModel m;
  m.M = s.M;
  m.N = s.N();
  m.K = s.K;
  m.lambda = s.lambda;
  m.H = cs.H;
  for (int k = 1; k <= s.K; ++k) {
    const NodeLink& link = cs.nodes[static_cast<size_t>(k)];
    m.user_sg.push_back(link.sigma * link.G);
    m.user_rx.push_back(link.rx);
  }
  m.h0 = cs.h0;
  m.noise = s.noise;
  m.sigma_t2 = s.sigma_t * s.sigma_t;
  m.L = s.L;
  m.power = s.power_bound();
  m.Gamma = s.Gamma;
  m.Gamma_e = s.Gamma_e;
  m.Gamma_r = s.Gamma_r;
  m.region = s.region();
  return m;
}

SystemModel SystemModel::rescaled(double a) const {
  require(a > 0.0 && std::isfinite(a), "rescaled: scale must be positive");
  SystemModel m = *this;
  m.H = H * a;
  m.noise = noise * a * a;
  m.sigma_t2 = sigma_t2 / (a * a);
  return m;
}

SystemModel SystemModel::normalized() const {
  SystemModel m = rescaled(1.0 / std::sqrt(noise));
  m.noise = 1.0;
  return m;
}

SystemModel SystemModel::signal_normalized() const {
  const double g = mean_user_gain();
  require(g > 0.0 && power > 0.0, "signal_normalized: vanishing channel or power");
  return rescaled(1.0 / std::sqrt(power * g));
}

double SystemModel::mean_user_gain() const {
  double g = 0.0;
  for (int k = 0; k < K; ++k) {
    const ComplexVector h = user_channel(k, Vec2::Zero());
    for (Eigen::Index n = 0; n < N; ++n) g += std::norm(h(n)) * H.row(n).squaredNorm();
  }
  return g / K;
}

Cascade Cascade::of(const SystemModel& model, const DesignVariables& vars) {
  require(static_cast<int>(vars.u.size()) == model.K, "Cascade: wrong number of positions");
  Cascade c;
  c.g0 = cascaded_channel(model.h0, vars.phi, model.H);
  for (int k = 0; k < model.K; ++k) {
    c.g.push_back(cascaded_channel(model.user_channel(k, vars.u[static_cast<size_t>(k)]), vars.phi, model.H));
  }
  return c;
}

ComplexMatrix Cascade::stacked() const {
  ComplexMatrix a(static_cast<Eigen::Index>(g.size()) + 1, g0.size());
  a.row(0) = g0.adjoint();
  for (size_t k = 0; k < g.size(); ++k) a.row(static_cast<Eigen::Index>(k) + 1) = g[k].adjoint();
  return a;
}

}  // namespace isac
