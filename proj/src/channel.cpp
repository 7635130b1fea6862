#include "isac/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace isac {

namespace {

constexpr double kPi = std::numbers::pi;

double path_phase(const PathAngles& a, Eigen::Index i, const Vec2& u, double lambda) {
  const double rho = u.x() * std::sin(a.elevation(i)) * std::cos(a.azimuth(i)) + u.y() * std::cos(a.elevation(i));
  return 2.0 * kPi / lambda * rho;
}

PathAngles draw_angles(std::mt19937_64& rng, int paths) {
  std::uniform_real_distribution<double> ang(0.0, kPi);
  PathAngles a;
  a.elevation.resize(paths);
  a.azimuth.resize(paths);
  for (int i = 0; i < paths; ++i) {
    a.elevation(i) = ang(rng);
    a.azimuth(i) = ang(rng);
  }
  return a;
}

ComplexMatrix draw_prm(std::mt19937_64& rng, int rx, int tx, double variance) {
  std::normal_distribution<double> g;
  ComplexMatrix s = ComplexMatrix::Zero(rx, tx);
  const double scale = std::sqrt(variance / 2.0);
  for (int l = 0; l < std::min(rx, tx); ++l) {
    const double re = g(rng);
    const double im = g(rng);
    s(l, l) = cdouble(re, im) * scale;
  }
  return s;
}

}  // namespace

ComplexVector receive_frv(const PathAngles& angles, const Vec2& u, double lambda) {
  require(angles.elevation.size() == angles.azimuth.size(), "receive_frv: angle size mismatch");
  ComplexVector f(angles.size());
  for (Eigen::Index i = 0; i < angles.size(); ++i) f(i) = std::polar(1.0, path_phase(angles, i, u, lambda));
  return f;
}

ComplexMatrix transmit_frm(const PathAngles& angles, const std::vector<Vec2>& positions, double lambda) {
  require(angles.elevation.size() == angles.azimuth.size(), "transmit_frm: angle size mismatch");
  ComplexMatrix g(angles.size(), static_cast<Eigen::Index>(positions.size()));
  for (size_t n = 0; n < positions.size(); ++n) {
    for (Eigen::Index i = 0; i < angles.size(); ++i) {
      g(i, static_cast<Eigen::Index>(n)) = std::polar(1.0, path_phase(angles, i, positions[n], lambda));
    }
  }
  return g;
}

ComplexVector channel_ris_to_node(const ComplexMatrix& sigma, const ComplexMatrix& g, const ComplexVector& f) {
  require(sigma.rows() == f.size() && sigma.cols() == g.rows(), "channel_ris_to_node: dimension mismatch");
  return (f.adjoint() * sigma * g).transpose();
}

ComplexVector cascaded_channel(const ComplexVector& h, const ComplexVector& phi, const ComplexMatrix& H) {
  require(h.size() == phi.size() && H.rows() == h.size(), "cascaded_channel: dimension mismatch");
  // g = H^H diag(conj phi) h
  return H.adjoint() * (phi.conjugate().cwiseProduct(h));
}

ComplexMatrix target_response(const ComplexMatrix& H, const ComplexVector& phi, const ComplexVector& h0) {
  const ComplexVector g0 = cascaded_channel(h0, phi, H);
  return g0 * g0.adjoint();
}

std::vector<Vec2> upa_positions(int rows, int cols, double spacing) {
  require(rows >= 1 && cols >= 1, "upa_positions: empty array");
  std::vector<Vec2> pos;
  pos.reserve(static_cast<size_t>(rows * cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      pos.emplace_back((c - (cols - 1) / 2.0) * spacing, (r - (rows - 1) / 2.0) * spacing);
    }
  }
  return pos;
}

std::pair<int, int> near_square(int n) {
  require(n >= 1, "near_square: n must be positive");
  int rows = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
  while (n % rows != 0) --rows;
  return {rows, n / rows};
}

double path_variance(double g0, double distance, double alpha, int paths) {
  require(distance > 0 && paths >= 1, "path_variance: bad arguments");
  return g0 * std::pow(distance, -alpha) / paths;
}

ComplexVector ChannelSet::node_channel(int kappa, const Vec2& u) const {
  require(kappa >= 0 && kappa < static_cast<int>(nodes.size()), "node_channel: node index out of range");
  const NodeLink& link = nodes[static_cast<size_t>(kappa)];
  return channel_ris_to_node(link.sigma, link.G, receive_frv(link.rx, u, lambda));
}

ChannelSet sample_scenario(const Scenario& s, std::uint64_t seed) {
  s.validate();
  std::mt19937_64 rng(seed);
  ChannelSet cs;
  cs.lambda = s.lambda;
  const double spacing = s.lambda / 2.0;
  cs.ris_elements = upa_positions(s.N2, s.N1, spacing);
  const auto [bs_rows, bs_cols] = near_square(s.M);
  cs.bs_elements = upa_positions(bs_rows, bs_cols, spacing);

  std::uniform_real_distribution<double> circle(0.0, 2.0 * kPi);
  for (int k = 0; k < s.K; ++k) {
    const double t = circle(rng);
    cs.user_positions.push_back(s.user_center + s.user_radius * Vec3(std::cos(t), std::sin(t), 0.0));
  }

  cs.bs_distance = (s.ris_pos - s.bs_pos).norm();
  cs.bs_rx = draw_angles(rng, s.Lp);
  cs.bs_tx = draw_angles(rng, s.Lp);
  cs.sigma_bs = draw_prm(rng, s.Lp, s.Lp, path_variance(s.g0, cs.bs_distance, s.alpha, s.Lp));
  cs.F_s = transmit_frm(cs.bs_rx, cs.ris_elements, s.lambda);
  cs.G_b = transmit_frm(cs.bs_tx, cs.bs_elements, s.lambda);
  cs.H = cs.F_s.adjoint() * cs.sigma_bs * cs.G_b;

  for (int kappa = 0; kappa <= s.K; ++kappa) {
    const int paths = kappa == 0 ? s.L0 : s.Lp;
    const Vec3 node = kappa == 0 ? s.target_pos : cs.user_positions[static_cast<size_t>(kappa - 1)];
    NodeLink link;
    link.distance = (node - s.ris_pos).norm();
    require(link.distance > 0, "sample_scenario: node coincides with the RIS");
    link.rx = draw_angles(rng, paths);
    link.tx = draw_angles(rng, paths);
    link.sigma = draw_prm(rng, paths, paths, path_variance(s.g0, link.distance, s.alpha, paths));
    link.G = transmit_frm(link.tx, cs.ris_elements, s.lambda);
    cs.nodes.push_back(std::move(link));
  }
  cs.h0 = cs.node_channel(0, cs.u0);
  return cs;
}

}  // namespace isac
