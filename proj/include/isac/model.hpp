#pragma once

#include <vector>

#include "isac/channel.hpp"
#include "isac/numerics.hpp"
#include "isac/scenario.hpp"

namespace isac {

/// Everything the metrics and block solvers need about one channel realization.
///
/// `noise` is the shared receiver noise power and `sigma_t2` the RCS variance.
/// Rescaling H leaves every SINR and the radar SNR unchanged but moves the
/// penalty terms: `normalized()` puts the noise at 1, `signal_normalized()`
/// puts the mean received signal power at full budget at 1.
struct SystemModel {
  int M = 0;
  int N = 0;
  int K = 0;
  double lambda = 0.0;
  ComplexMatrix H;                       // N x M
  std::vector<ComplexMatrix> user_sg;    // per user Sigma_k G_k (rx paths x N)
  std::vector<PathAngles> user_rx;       // per user receive angles
  ComplexVector h0;                      // RIS -> target, N
  double noise = 1.0;
  double sigma_t2 = 1.0;
  int L = 1;
  double power = 1.0;  // bound on ||W||_F^2
  double Gamma = 1.0;
  double Gamma_e = 1.0;
  double Gamma_r = 1.0;
  Region region;

  int columns() const { return K + M; }
  int paths(int k) const { return static_cast<int>(user_rx[static_cast<size_t>(k)].size()); }

  /// h_k(u) for user k in 0..K-1.
  ComplexVector user_channel(int k, const Vec2& u) const;
  /// Receive FRV of user k at u.
  ComplexVector user_frv(int k, const Vec2& u) const;

  static SystemModel from(const Scenario& scenario, const ChannelSet& channels);
  SystemModel normalized() const;
  /// H scaled by a, noise by a^2, sigma_t2 by 1/a^2: every SINR and the radar SNR are unchanged.
  SystemModel rescaled(double a) const;
  /// Mean over users of E||g_k||^2 for uniformly random phases, at the region centre.
  double mean_user_gain() const;
  /// rescaled(1 / sqrt(power * mean_user_gain())); the scale the optimizer works in.
  SystemModel signal_normalized() const;
};

/// Transmit beamformer, RIS phases, radar receive filter and MA positions.
struct DesignVariables {
  ComplexMatrix W;             // M x (K+M), first K columns for communication
  ComplexVector phi;           // N
  ComplexVector r;             // M(K+M), matches vec(W)
  std::vector<Vec2> u;         // K

  ComplexVector w_tilde() const { return Eigen::Map<const ComplexVector>(W.data(), W.size()); }
};

/// Cascaded channels for the current (phi, u): g_0 for the target, g_1..g_K for the users.
struct Cascade {
  ComplexVector g0;
  std::vector<ComplexVector> g;  // K entries

  static Cascade of(const SystemModel& model, const DesignVariables& vars);
  /// Row-stacked [g0^H; g_1^H; ...; g_K^H].
  ComplexMatrix stacked() const;
};

/// Fractional-programming and penalty-splitting variables.
struct AuxVariables {
  RealVector lambda;     // K
  ComplexVector iota;    // K
  ComplexMatrix z;       // K x (K+M), z(k, j) tracks g_k^H w_j
  ComplexVector x;       // K+M, x(j) tracks g_0^H w_j
  RealVector mu1;        // K
  RealVector mu2;        // K
};

}  // namespace isac
