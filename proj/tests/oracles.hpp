#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "isac/numerics.hpp"

namespace oracle {

using isac::cdouble;
using isac::ComplexMatrix;
using isac::ComplexVector;

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = cdouble(g(rng), g(rng));
  return m;
}

inline ComplexVector random_vector(std::mt19937_64& rng, Eigen::Index n) {
  return random_matrix(rng, n, 1).col(0);
}

inline ComplexMatrix random_psd(std::mt19937_64& rng, Eigen::Index n, Eigen::Index rank) {
  const ComplexMatrix b = random_matrix(rng, n, rank);
  return b * b.adjoint();
}

inline double dense_max_eigenvalue(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

inline double dense_min_eigenvalue(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Ridge solution (G + tau I)^{-1} A^H b per block, by Cholesky-type solve.
inline ComplexVector ridge(const std::vector<isac::LsBlock>& blocks, double tau) {
  Eigen::Index total = 0;
  for (const auto& b : blocks) total += b.a.cols();
  ComplexVector w(total);
  Eigen::Index off = 0;
  for (const auto& b : blocks) {
    const Eigen::Index n = b.a.cols();
    ComplexMatrix g = b.a.adjoint() * b.a + tau * ComplexMatrix::Identity(n, n);
    w.segment(off, n) = g.ldlt().solve(b.a.adjoint() * b.b);
    off += n;
  }
  return w;
}

// Single ball multiplier found by plain bisection on ||w(tau)||^2 = P.
inline ComplexVector ball_dual(const std::vector<isac::LsBlock>& blocks, double power) {
  double lo = 0.0;
  double hi = 1.0;
  while (ridge(blocks, hi).squaredNorm() > power) hi *= 2.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (ridge(blocks, mid).squaredNorm() > power) lo = mid; else hi = mid;
  }
  return ridge(blocks, hi);
}

inline ComplexVector project_ball(const ComplexVector& v, double power) {
  const double n2 = v.squaredNorm();
  return n2 <= power ? v : ComplexVector(v * std::sqrt(power / n2));
}

inline ComplexVector project_halfspace(const ComplexVector& v, const ComplexVector& c, double eps) {
  const double s = c.dot(v).real();
  if (s >= eps) return v;
  return v + c * ((eps - s) / c.squaredNorm());
}

// Dykstra's alternating projection onto {||w||^2 <= P} intersected with {Re c^H w >= eps}.
inline ComplexVector dykstra(const ComplexVector& v, const ComplexVector& c, double eps, double power,
                             int iters = 500) {
  ComplexVector x = v;
  ComplexVector p = ComplexVector::Zero(v.size());
  ComplexVector q = ComplexVector::Zero(v.size());
  for (int i = 0; i < iters; ++i) {
    const ComplexVector y = project_ball(x + p, power);
    p = x + p - y;
    const ComplexVector xn = project_halfspace(y + q, c, eps);
    q = y + q - xn;
    if ((xn - x).norm() <= 1e-15 * std::max(1.0, x.norm())) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

// Projected gradient on sum_j ||A_j w_j - b_j||^2 with a fixed 1/L step.
inline ComplexVector projected_gradient(const std::vector<isac::LsBlock>& blocks, const ComplexVector& c,
                                        double eps, double power, int iters) {
  Eigen::Index total = 0;
  double lip = 0.0;
  for (const auto& b : blocks) {
    total += b.a.cols();
    lip = std::max(lip, 2.0 * dense_max_eigenvalue(b.a.adjoint() * b.a));
  }
  ComplexVector w = dykstra(ComplexVector::Zero(total), c, eps, power);
  for (int it = 0; it < iters; ++it) {
    ComplexVector grad(total);
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      const Eigen::Index n = b.a.cols();
      grad.segment(off, n) = 2.0 * b.a.adjoint() * (b.a * w.segment(off, n) - b.b);
      off += n;
    }
    w = dykstra(w - grad / lip, c, eps, power);
  }
  return w;
}

// Nearest grid point of the rectangle, by exhaustive scan.
inline isac::Vec2 grid_projection(const isac::Vec2& u, const isac::Region& r, int steps) {
  isac::Vec2 best(r.x_min, r.y_min);
  double best_d = (u - best).norm();
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; j <= steps; ++j) {
      const isac::Vec2 p(r.x_min + (r.x_max - r.x_min) * i / steps, r.y_min + (r.y_max - r.y_min) * j / steps);
      const double d = (u - p).norm();
      if (d < best_d) {
        best_d = d;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace oracle
