#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Elevation and azimuth angles of a set of paths (radians).
struct PathAngles {
  RealVector elevation;
  RealVector azimuth;

  Eigen::Index size() const { return elevation.size(); }
};

/// Receive field-response vector at local position u: exp(j 2pi/lambda (x sin(el) cos(az) + y cos(el))).
ComplexVector receive_frv(const PathAngles& angles, const Vec2& u, double lambda);

/// Field-response matrix, one column per element position (paths x elements).
ComplexMatrix transmit_frm(const PathAngles& angles, const std::vector<Vec2>& positions, double lambda);

/// h = (f^H Sigma G)^T.
ComplexVector channel_ris_to_node(const ComplexMatrix& sigma, const ComplexMatrix& g, const ComplexVector& f);

/// Cascaded channel g with g^H = h^H diag(phi) H.
ComplexVector cascaded_channel(const ComplexVector& h, const ComplexVector& phi, const ComplexMatrix& H);

/// H_t = g0 g0^H with g0 the cascaded BS-RIS-target channel.
ComplexMatrix target_response(const ComplexMatrix& H, const ComplexVector& phi, const ComplexVector& h0);

/// Element positions of a rows x cols planar array with the given spacing, centred on the origin.
std::vector<Vec2> upa_positions(int rows, int cols, double spacing);

/// Factor n as rows x cols with rows <= cols and rows as large as possible.
std::pair<int, int> near_square(int n);

/// Per-path variance g0 d^-alpha / paths of a diagonal path-response matrix.
double path_variance(double g0, double distance, double alpha, int paths);

/// Paths between the RIS and one node; receive angles at the node, transmit angles at the RIS.
struct NodeLink {
  PathAngles rx;
  PathAngles tx;
  ComplexMatrix sigma;  // rx paths x tx paths, diagonal
  ComplexMatrix G;      // transmit FRM at the RIS, tx paths x N
  double distance = 0.0;
};

struct ChannelSet {
  double lambda = 0.0;
  std::vector<Vec2> ris_elements;
  std::vector<Vec2> bs_elements;

  PathAngles bs_rx;  // arrival at the RIS
  PathAngles bs_tx;  // departure at the BS
  ComplexMatrix sigma_bs;
  ComplexMatrix F_s;  // receive FRM at the RIS, paths x N
  ComplexMatrix G_b;  // transmit FRM at the BS, paths x M
  ComplexMatrix H;    // N x M
  double bs_distance = 0.0;

  std::vector<NodeLink> nodes;  // index 0 is the eavesdropping target, 1..K the users
  std::vector<Vec3> user_positions;
  Vec2 u0{0.0, 0.0};
  ComplexVector h0;

  /// Channel from the RIS to node kappa with its antenna at local position u.
  ComplexVector node_channel(int kappa, const Vec2& u) const;
};

/// Draw one channel realization. Deterministic in (scenario, seed).
ChannelSet sample_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace isac
