#include "isac/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace isac {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDualGap = 1e-9;  // keep multipliers this far inside their domain
}  // namespace

RealVector update_lambda(const AuxVariables& aux, double noise) {
  const Eigen::Index K = aux.z.rows();
  RealVector lambda(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double signal = std::norm(aux.z(k, k));
    const double interference = std::max(aux.z.row(k).squaredNorm() - signal, 0.0);
    lambda(k) = signal / (interference + noise);
  }
  return lambda;
}

ComplexVector update_iota(const AuxVariables& aux, const RealVector& lambda, double noise) {
  const Eigen::Index K = aux.z.rows();
  ComplexVector iota(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    iota(k) = std::sqrt(1.0 + lambda(k)) * aux.z(k, k) / (aux.z.row(k).squaredNorm() + noise);
  }
  return iota;
}

double z_subproblem_objective(const Eigen::RowVectorXcd& z_row, const Eigen::RowVectorXcd& a, int k, double lambda,
                              cdouble iota, double rho) {
  return std::norm(iota) * z_row.squaredNorm() - 2.0 * std::sqrt(1.0 + lambda) * (std::conj(iota) * z_row(k)).real() +
         (a - z_row).squaredNorm() / (2.0 * rho);
}

ZUpdate update_z(const Eigen::RowVectorXcd& a, int k, double lambda, cdouble iota, double rho, double Gamma,
                 double noise, const SolverOptions& opts) {
  require(rho > 0.0, "update_z: rho must be positive");
  require(k >= 0 && k < a.size(), "update_z: user index out of range");
  const double base = 1.0 + 2.0 * rho * std::norm(iota);
  const cdouble num_k = a(k) + 2.0 * rho * std::sqrt(1.0 + lambda) * iota;
  const double others = a.squaredNorm() - std::norm(a(k));

  auto z_at = [&](double mu) {
    Eigen::RowVectorXcd z = a / (base + 2.0 * rho * mu * Gamma);
    z(k) = num_k / (base - 2.0 * rho * mu);
    return z;
  };
  // |z_kk|^2 - Gamma (sum_{j != k} |z_kj|^2 + noise), increasing in mu
  auto slack = [&](double mu) {
    const double dk = base - 2.0 * rho * mu;
    const double dj = base + 2.0 * rho * mu * Gamma;
    return std::norm(num_k) / (dk * dk) - Gamma * (others / (dj * dj) + noise);
  };

  ZUpdate out;
  const double mu_max = base / (2.0 * rho);
  const double mu_hi = mu_max - kDualGap * std::max(1.0, mu_max);
  if (slack(0.0) >= 0.0) {
    out.z = z_at(0.0);
    return out;
  }
  if (slack(mu_hi) >= 0.0) {
    const BisectResult br = bisect_monotone(slack, 0.0, mu_hi, KeepSide::kNonNegative, opts);
    out.mu = br.x;
    out.z = z_at(br.x);
    return out;
  }
  // z_kk's coefficient vanishes at mu_max: take the smallest feasible |z_kk| with the best available phase.
  out.hard_case = true;
  out.mu = mu_max;
  out.z = a / (base + 2.0 * rho * mu_max * Gamma);
  const double need = Gamma * (out.z.squaredNorm() - std::norm(out.z(k)) + noise);
  const cdouble dir = std::abs(num_k) > 0.0 ? num_k / std::abs(num_k) : (std::abs(a(k)) > 0.0 ? a(k) / std::abs(a(k)) : cdouble(1.0));
  out.z(k) = dir * std::sqrt(need) * (1.0 + 1e-12);
  return out;
}

namespace {

// Per-user constraint value |x_k|^2 - Gamma_e (sum_{j != k} |x_j|^2 + noise).
double x_slack(const ComplexVector& x, int k, double Gamma_e, double noise) {
  const double xk = std::norm(x(k));
  return xk - Gamma_e * (x.squaredNorm() - xk + noise);
}

ComplexVector x_at(const ComplexVector& b, const RealVector& mu, int K, double Gamma_e) {
  const double total = mu.sum();
  ComplexVector x(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double own = j < K ? mu(j) : 0.0;
    const double c = 1.0 + own - Gamma_e * (total - own);
    x(j) = b(j) / c;
  }
  return x;
}

}  // namespace

XUpdate update_x(const ComplexVector& b, int K, double Gamma_e, double noise, const SolverOptions& opts) {
  require(K >= 1 && K <= b.size(), "update_x: bad user count");
  require(Gamma_e > 0.0, "update_x: Gamma_e must be positive");
  XUpdate out;
  out.mu = RealVector::Zero(K);
  out.x = b;
  auto all_ok = [&](const ComplexVector& x, double tol) {
    for (int k = 0; k < K; ++k)
      if (x_slack(x, k, Gamma_e, noise) > tol) return false;
    return true;
  };
  if (all_ok(b, 0.0)) return out;

  const double scale = std::max(b.squaredNorm(), noise);
  const double tol = 1e-13 * scale;
  const int max_sweeps = 2000;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    out.sweeps = sweep + 1;
    double change = 0.0;
    for (int k = 0; k < K; ++k) {
      // largest admissible mu_k keeping every denominator positive
      const double total_others = out.mu.sum() - out.mu(k);
      double ub = std::numeric_limits<double>::infinity();
      for (Eigen::Index j = 0; j < b.size(); ++j) {
        if (j == k) continue;
        const double own = j < K ? out.mu(j) : 0.0;
        const double rest = 1.0 + own - Gamma_e * (total_others - (j < K ? out.mu(j) : 0.0));
        ub = std::min(ub, rest / Gamma_e);
      }
      auto h = [&](double m) {
        RealVector mu = out.mu;
        mu(k) = m;
        return x_slack(x_at(b, mu, K, Gamma_e), k, Gamma_e, noise);
      };
      // mu_k's own denominator 1 + mu_k - Gamma_e * total_others must stay positive too
      const double lb = std::max(0.0, Gamma_e * total_others - 1.0);
      const double lo = lb > 0.0 ? lb + kDualGap * std::max(1.0, lb) : 0.0;
      const double hi = ub - kDualGap * std::max(1.0, ub);
      double next = out.mu(k);
      if (hi > lo) {
        if (h(lo) <= 0.0) {
          next = lo;
        } else if (h(hi) <= 0.0) {
          SolverOptions local = opts;
          local.bisection_tol = std::min(opts.bisection_tol, tol);
          next = bisect_monotone(h, lo, hi, KeepSide::kNonPositive, local).x;
        } else {
          next = hi;
        }
      }
      change = std::max(change, std::abs(next - out.mu(k)) / std::max(1.0, next));
      out.mu(k) = next;
    }
    out.x = x_at(b, out.mu, K, Gamma_e);
    if (change <= 1e-14 && all_ok(out.x, tol)) break;
  }
  // Coordinate ascent leaves tiny residual violations; shrink the offending entries.
  for (int pass = 0; pass < 100 && !all_ok(out.x, 0.0); ++pass) {
    for (int k = 0; k < K; ++k) {
      if (x_slack(out.x, k, Gamma_e, noise) > 0.0) {
        const double allowed = Gamma_e * (out.x.squaredNorm() - std::norm(out.x(k)) + noise);
        out.x(k) *= std::sqrt(allowed / std::norm(out.x(k))) * (1.0 - 1e-15);
      }
    }
  }
  return out;
}

ComplexVector update_receive_filter(const ComplexVector& g0, const ComplexMatrix& W) {
  const ComplexVector v = radar_echo(g0, W);
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::kDegenerateSensing, "receive filter: target echo vanished");
  return v / n;
}

SensingConstraint sensing_constraint(const ComplexVector& g0, const ComplexVector& r, const SystemModel& model) {
  const Eigen::Index M = g0.size();
  require(r.size() % M == 0, "sensing_constraint: filter size mismatch");
  const Eigen::Map<const ComplexMatrix> R(r.data(), M, r.size() / M);
  const ComplexMatrix htr = g0 * (g0.adjoint() * R);
  SensingConstraint s;
  s.c = Eigen::Map<const ComplexVector>(htr.data(), htr.size());
  s.eps = std::sqrt(model.Gamma_r * model.noise * r.squaredNorm() / (model.L * model.sigma_t2));
  return s;
}

std::vector<LsBlock> beamformer_blocks(const Cascade& cascade, const AuxVariables& aux) {
  const ComplexMatrix A = cascade.stacked();
  const Eigen::Index J = aux.x.size();
  std::vector<LsBlock> blocks;
  blocks.reserve(static_cast<size_t>(J));
  for (Eigen::Index j = 0; j < J; ++j) {
    ComplexVector b(A.rows());
    b(0) = aux.x(j);
    for (Eigen::Index k = 0; k < aux.z.rows(); ++k) b(k + 1) = aux.z(k, j);
    blocks.push_back({A, b});
  }
  return blocks;
}

LsResult update_beamformer(const Cascade& cascade, const AuxVariables& aux,
                           const std::optional<SensingConstraint>& sensing, double power, const SolverOptions& opts,
                           const std::optional<ComplexMatrix>& warm_start) {
  const auto blocks = beamformer_blocks(cascade, aux);
  std::optional<ComplexVector> warm;
  if (warm_start) warm = ComplexVector(Eigen::Map<const ComplexVector>(warm_start->data(), warm_start->size()));
  if (sensing) return solve_ls_ball_halfspace(blocks, sensing->c, sensing->eps, power, opts, warm);
  return solve_ls_ball_halfspace(blocks, ComplexVector(), 0.0, power, opts, warm);
}

ComplexMatrix phase_channel(const ComplexVector& h, const ComplexMatrix& H) {
  return h.conjugate().asDiagonal() * H;
}

double phi_penalty(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux,
                   const ComplexVector& phi) {
  DesignVariables v = vars;
  v.phi = phi;
  const Cascade c = Cascade::of(model, v);
  return splitting_residual(c, vars.W, aux);
}

Eigen::MatrixXd real_augmented(const ComplexMatrix& S) {
  const Eigen::Index n = S.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = S.real();
  out.topRightCorner(n, n) = -S.imag();
  out.bottomLeftCorner(n, n) = S.imag();
  out.bottomRightCorner(n, n) = S.real();
  return out;
}

double PhiStep::surrogate(const ComplexVector& phi) const {
  return upsilon_bound * phi.squaredNorm() - 2.0 * phi.dot(q).real() + surrogate_constant;
}

double PhiStep::sensing_minorizer(const ComplexVector& phi) const { return (d * phi)(0).real() - eps3; }

PhiStep build_phi_step(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux, bool sensing,
                       const SolverOptions& opts) {
  const ComplexVector& phi_t = vars.phi;
  const Eigen::Index N = phi_t.size();
  const Eigen::Index J = vars.W.cols();
  const Eigen::Index K = aux.z.rows();

  // Columns a with target value y: the penalty is sum |a^T phi - y|^2.
  ComplexMatrix A(N, (K + 1) * J);
  ComplexVector y((K + 1) * J);
  const ComplexMatrix F0 = phase_channel(model.h0, model.H);
  A.leftCols(J) = F0 * vars.W;
  y.head(J) = aux.x;
  for (Eigen::Index k = 0; k < K; ++k) {
    const ComplexVector hk = model.user_channel(static_cast<int>(k), vars.u[static_cast<size_t>(k)]);
    A.middleCols((k + 1) * J, J) = phase_channel(hk, model.H) * vars.W;
    y.segment((k + 1) * J, J) = aux.z.row(k).transpose();
  }

  PhiStep st;
  st.sensing = sensing;
  // lambda_max of sum conj(a) a^T equals that of the (smaller) Gram A^H A.
  const ComplexMatrix gram = A.adjoint() * A;
  st.upsilon_bound = safe_max_eigenvalue(gram, opts) * (1.0 + 1e-12);
  const ComplexVector at_phi = A.transpose() * phi_t;  // a^T phi_t per column
  st.q = st.upsilon_bound * phi_t + A.conjugate() * (y - at_phi);
  // touch the true penalty at phi_t
  st.surrogate_constant = (at_phi - y).squaredNorm() - st.upsilon_bound * phi_t.squaredNorm() +
                          2.0 * phi_t.dot(st.q).real();

  if (!sensing) {
    st.d = Eigen::RowVectorXcd::Zero(N);
    st.S = ComplexMatrix::Zero(N, N);
    st.eps3 = -std::numeric_limits<double>::infinity();
    return st;
  }

  // Re{r^H vec(H_t W)} = sum_j (r_j^H g0)(g0^H w_j) = phi^H C phi with C = sum_j conj(F0 r_j) (F0 w_j)^T
  const Eigen::Map<const ComplexMatrix> R(vars.r.data(), vars.W.rows(), J);
  const ComplexMatrix E = F0 * R;
  const ComplexMatrix B = F0 * vars.W;
  const ComplexMatrix C = E.conjugate() * B.transpose();
  st.S = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(st.S, Eigen::EigenvaluesOnly);
  const double lam_min = es.eigenvalues().minCoeff();
  const double guard = 1e-12 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  st.shift = std::min(0.0, lam_min - guard);
  const ComplexMatrix T = st.S - st.shift * ComplexMatrix::Identity(N, N);
  const ComplexVector t_phi = T * phi_t;
  st.d = 2.0 * t_phi.adjoint();
  st.eps2 = phi_t.dot(t_phi).real() - st.shift * static_cast<double>(N);
  const SensingConstraint sc = sensing_constraint(cascaded_channel(model.h0, phi_t, model.H), vars.r, model);
  st.eps3 = sc.eps + st.eps2;
  return st;
}

PhiSolution solve_phi_subproblem(const ComplexVector& q, const Eigen::RowVectorXcd& d, double eps3,
                                 const ComplexVector& phi_prev, const SolverOptions& opts) {
  const Eigen::Index N = q.size();
  require(d.size() == N && phi_prev.size() == N, "solve_phi_subproblem: dimension mismatch");
  const double dsum = d.cwiseAbs().sum();
  if (std::isfinite(eps3) && eps3 > dsum) {
    fail(ErrorCode::kInfeasibleSubproblem, "phi step: linearized sensing constraint cannot be met");
  }
  auto phi_at = [&](double mu) {
    ComplexVector phi(N);
    for (Eigen::Index n = 0; n < N; ++n) {
      const cdouble v = q(n) + mu * std::conj(d(n));
      const double a = std::abs(v);
      phi(n) = a > 0.0 ? v / a : phi_prev(n);
    }
    return phi;
  };
  auto slack = [&](double mu) { return (d * phi_at(mu))(0).real() - eps3; };

  PhiSolution out;
  if (!std::isfinite(eps3) || slack(0.0) >= 0.0) {
    out.phi = phi_at(0.0);
    return out;
  }
  const double qmax = q.cwiseAbs().maxCoeff();
  const double dmin_nz = [&] {
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index n = 0; n < N; ++n)
      if (std::abs(d(n)) > 0.0) m = std::min(m, std::abs(d(n)));
    return m;
  }();
  double hi = std::max(1.0, qmax / dmin_nz);
  for (int i = 0; i < 200 && slack(hi) < 0.0; ++i) hi *= 2.0;
  if (slack(hi) < 0.0) {
    // limit mu -> infinity: phases of conj(d)
    ComplexVector phi(N);
    for (Eigen::Index n = 0; n < N; ++n) phi(n) = std::abs(d(n)) > 0.0 ? std::conj(d(n)) / std::abs(d(n)) : phi_prev(n);
    out.phi = phi;
    out.mu = std::numeric_limits<double>::infinity();
    return out;
  }
  const BisectResult br = bisect_monotone(slack, 0.0, hi, KeepSide::kNonNegative, opts);
  out.mu = br.x;
  out.phi = phi_at(br.x);
  return out;
}

double PositionQuadratic::value(const ComplexVector& f) const {
  return f.dot(Q * f).real() + 2.0 * f.dot(p).real() + constant;
}

PositionQuadratic position_quadratic(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux,
                                     int k, const SolverOptions& opts) {
  require(k >= 0 && k < model.K, "position_quadratic: user index out of range");
  // g_k^H w_j = f^T e_j with e_j = conj(Sigma_k G_k) (phi .* H w_j)
  const ComplexMatrix E = model.user_sg[static_cast<size_t>(k)].conjugate() * (vars.phi.asDiagonal() * (model.H * vars.W));
  const Eigen::RowVectorXcd z = aux.z.row(k);
  PositionQuadratic pq;
  pq.Q = E.conjugate() * E.transpose();
  pq.Q = 0.5 * (pq.Q + pq.Q.adjoint());
  pq.p = -(E.conjugate() * z.transpose());
  pq.constant = z.squaredNorm();
  pq.Lambda = safe_max_eigenvalue(pq.Q, opts) * (1.0 + 1e-12);
  return pq;
}

double position_psi(const SystemModel& model, int k, const ComplexVector& varsigma, const Vec2& u) {
  return 2.0 * model.user_frv(k, u).dot(varsigma).real();
}

double position_majorizer(const PositionQuadratic& pq, const ComplexVector& f_t, const ComplexVector& f) {
  const Eigen::Index n = f.size();
  const ComplexMatrix D = pq.Lambda * ComplexMatrix::Identity(n, n) - pq.Q;
  return pq.Lambda * f.squaredNorm() - 2.0 * f.dot(D * f_t).real() + f_t.dot(D * f_t).real() +
         2.0 * f.dot(pq.p).real() + pq.constant;
}

PositionSurrogate build_position_surrogate(const SystemModel& model, const PositionQuadratic& pq, int k,
                                           const Vec2& u_t) {
  const ComplexVector f_t = model.user_frv(k, u_t);
  const PathAngles& ang = model.user_rx[static_cast<size_t>(k)];
  PositionSurrogate s;
  s.varsigma = pq.p - (pq.Lambda * f_t - pq.Q * f_t);
  s.gradient.setZero();
  s.hessian.setZero();
  double weight = 0.0;
  const double kw = 2.0 * kPi / model.lambda;
  for (Eigen::Index i = 0; i < ang.size(); ++i) {
    const double mag = std::abs(s.varsigma(i));
    const Vec2 a(std::sin(ang.elevation(i)) * std::cos(ang.azimuth(i)), std::cos(ang.elevation(i)));
    const double nu = -kw * a.dot(u_t) + std::arg(s.varsigma(i));
    s.psi += 2.0 * mag * std::cos(nu);
    s.gradient += 2.0 * kw * mag * std::sin(nu) * a;
    s.hessian -= 2.0 * kw * kw * mag * std::cos(nu) * a * a.transpose();
    weight += mag;
  }
  s.delta = 4.0 * kw * kw * weight;
  return s;
}

Vec2 position_step(const PositionSurrogate& s, const Vec2& u_t, const Region& region) {
  if (!(s.delta > 0.0)) return project_box(u_t, region);
  return project_box(u_t - s.gradient / s.delta, region);
}

PositionResult optimize_position(const SystemModel& model, const DesignVariables& vars, const AuxVariables& aux, int k,
                                 double eps1, int max_iter, const SolverOptions& opts) {
  const PositionQuadratic pq = position_quadratic(model, vars, aux, k, opts);
  PositionResult res;
  res.u = vars.u[static_cast<size_t>(k)];
  double f = pq.value(model.user_frv(k, res.u));
  res.objective_before = f;
  for (int it = 0; it < max_iter; ++it) {
    const PositionSurrogate s = build_position_surrogate(model, pq, k, res.u);
    const Vec2 next = position_step(s, res.u, model.region);
    const double f_next = pq.value(model.user_frv(k, next));
    res.iterations = it + 1;
    if (f_next > f) break;  // rounding; MM never increases the exact objective
    const double decrease = f - f_next;
    res.u = next;
    f = f_next;
    if (decrease < eps1) break;
  }
  res.objective_after = f;
  return res;
}

}  // namespace isac
