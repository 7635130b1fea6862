#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "isac/error.hpp"

namespace isac {

using cdouble = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Tolerances and iteration caps shared by the small numerical kernels.
struct SolverOptions {
  double bisection_tol = 1e-8;
  int bisection_max_iter = 200;
  double eig_tol = 1e-10;
  int eig_max_iter = 20000;
  double ls_kkt_tol = 1e-7;
  int ls_max_iter = 200;

  void validate() const;
};

/// True when max|A - A^H| <= rel_tol * max|A| (a zero matrix is Hermitian).
bool is_hermitian(const ComplexMatrix& a, double rel_tol = 1e-12);

struct EigenPair {
  double value = 0.0;
  ComplexVector vector;
  double residual = 0.0;  // ||A v - value v||
  int iterations = 0;
};

/// Largest eigenpair of a Hermitian PSD matrix by power iteration.
///
/// Starts from the normalized all-ones vector; if the residual has not reached
/// `eig_tol * value` after half the iteration budget, one restart from a
/// deterministic pseudo-random vector is made and the better pair is kept.
/// Throws kInvalidInput for non-square or non-Hermitian input.
EigenPair max_eigenpair(const ComplexMatrix& a, const SolverOptions& opts);

/// Upper bound on the largest eigenvalue usable for majorization: value + residual.
double safe_max_eigenvalue(const ComplexMatrix& a, const SolverOptions& opts);

/// Which sign the returned point must carry.
enum class KeepSide { kNonNegative, kNonPositive };

struct BisectResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
  bool boundary = false;  // returned `lo` because f(lo) already lies on the kept side
};

/// Bisection for a monotone scalar function on [lo, hi].
///
/// Returns a point on the `keep` side of the root: `lo` itself when f(lo) is
/// already there (boundary certificate), otherwise the kept bracket end once
/// |f| <= bisection_tol or the bracket collapses to machine precision.
/// f is never evaluated outside [lo, hi]. Throws kInfeasibleBracket when
/// neither end lies on the kept side.
BisectResult bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                             KeepSide keep, const SolverOptions& opts);

/// One column block of a separable least-squares objective ||A w - b||^2.
struct LsBlock {
  ComplexMatrix a;
  ComplexVector b;
};

struct LsResult {
  ComplexVector w;             // stacked columns, block j occupies [j*n, (j+1)*n)
  double objective = 0.0;      // sum_j ||A_j w_j - b_j||^2
  double ball_multiplier = 0.0;       // tau
  double halfspace_multiplier = 0.0;  // nu
  double kkt_residual = 0.0;
  bool used_warm_start = false;
};

/// Sum of block residuals for a stacked vector.
double ls_objective(const std::vector<LsBlock>& blocks, const ComplexVector& w);

/// Minimize sum_j ||A_j w_j - b_j||^2  s.t.  Re{c^H w} >= eps,  ||w||^2 <= power.
///
/// Two-multiplier dual: for a ball multiplier tau the halfspace multiplier is
/// closed-form, and tau is found by bisection on the ball residual, which is
/// monotone in tau. An empty `c` (size 0) drops the halfspace. When a feasible
/// warm start is supplied and is not worse, it is returned unchanged.
/// Throws kInfeasibleSubproblem when eps > sqrt(power) * ||c||.
LsResult solve_ls_ball_halfspace(const std::vector<LsBlock>& blocks, const ComplexVector& c,
                                 double eps, double power, const SolverOptions& opts,
                                 const std::optional<ComplexVector>& warm_start = std::nullopt);

/// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Region {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  bool contains(const Vec2& u, double slack = 0.0) const;
};

/// Euclidean projection onto the rectangle (componentwise clamp).
Vec2 project_box(const Vec2& u, const Region& region);

}  // namespace isac
