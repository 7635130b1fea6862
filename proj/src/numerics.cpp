#include "isac/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

namespace isac {

void SolverOptions::validate() const {
  require(bisection_tol > 0 && eig_tol > 0 && ls_kkt_tol > 0, "solver tolerances must be positive");
  require(bisection_max_iter >= 1 && eig_max_iter >= 1 && ls_max_iter >= 1,
          "solver iteration caps must be >= 1");
}

bool is_hermitian(const ComplexMatrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

namespace {

struct PowerRun {
  EigenPair pair;
  bool converged = false;
};

PowerRun power_iterate(const ComplexMatrix& a, ComplexVector v, int max_iter, double tol) {
  PowerRun run;
  v.normalize();
  ComplexVector av = a * v;
  double lambda = 0.0;
  double residual = 0.0;
  int it = 0;
  for (; it < max_iter; ++it) {
    lambda = v.dot(av).real();
    residual = (av - lambda * v).norm();
    if (residual <= tol * std::abs(lambda)) {
      run.converged = true;
      break;
    }
    const double n = av.norm();
    if (n == 0.0) break;
    v = av / n;
    av = a * v;
  }
  run.pair.value = std::max(lambda, 0.0);
  run.pair.vector = v;
  run.pair.residual = residual;
  run.pair.iterations = it;
  return run;
}

ComplexVector restart_vector(Eigen::Index n) {
  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned long long>(n));
  std::normal_distribution<double> g;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = cdouble(g(rng), g(rng));
  return v;
}

}  // namespace

EigenPair max_eigenpair(const ComplexMatrix& a, const SolverOptions& opts) {
  require(a.rows() >= 1 && a.rows() == a.cols(), "max_eigenpair: matrix must be square and non-empty");
  require(is_hermitian(a), "max_eigenpair: matrix is not Hermitian");
  const Eigen::Index n = a.rows();
  const double fro = a.norm();
  if (fro == 0.0) {
    EigenPair zero;
    zero.vector = ComplexVector::Ones(n) / std::sqrt(static_cast<double>(n));
    return zero;
  }

  const int half = std::max(1, opts.eig_max_iter / 2);
  PowerRun first = power_iterate(a, ComplexVector::Ones(n), half, opts.eig_tol);
  // The all-ones start can be orthogonal to the whole range of A.
  const bool annihilated = (a * first.pair.vector).norm() <= 1e-14 * fro;
  if (first.converged && !annihilated) return first.pair;

  PowerRun second = power_iterate(a, restart_vector(n), opts.eig_max_iter - half, opts.eig_tol);
  second.pair.iterations += first.pair.iterations;
  if (annihilated || second.pair.value > first.pair.value ||
      (second.pair.value == first.pair.value && second.pair.residual < first.pair.residual)) {
    return second.pair;
  }
  first.pair.iterations = second.pair.iterations;
  return first.pair;
}

double safe_max_eigenvalue(const ComplexMatrix& a, const SolverOptions& opts) {
  const EigenPair p = max_eigenpair(a, opts);
  return p.value + p.residual;
}

BisectResult bisect_monotone(const std::function<double(double)>& f, double lo, double hi,
                             KeepSide keep, const SolverOptions& opts) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "bisect_monotone: bad interval");
  auto kept = [keep](double v) { return keep == KeepSide::kNonNegative ? v >= 0.0 : v <= 0.0; };

  BisectResult res;
  const double flo = f(lo);
  if (kept(flo)) {
    res.x = lo;
    res.fx = flo;
    res.boundary = true;
    return res;
  }
  double fhi = f(hi);
  if (!kept(fhi)) {
    fail(ErrorCode::kInfeasibleBracket, "bisect_monotone: no sign change on [" + std::to_string(lo) +
                                            ", " + std::to_string(hi) + "]");
  }
  const double eps = std::numeric_limits<double>::epsilon();
  int it = 0;
  while (it < opts.bisection_max_iter) {
    if (std::abs(fhi) <= opts.bisection_tol) break;
    if (hi - lo <= 2.0 * eps * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    ++it;
    if (kept(fm)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
    }
  }
  res.x = hi;
  res.fx = fhi;
  res.iterations = it;
  return res;
}

double ls_objective(const std::vector<LsBlock>& blocks, const ComplexVector& w) {
  double obj = 0.0;
  Eigen::Index off = 0;
  for (const auto& blk : blocks) {
    const Eigen::Index n = blk.a.cols();
    obj += (blk.a * w.segment(off, n) - blk.b).squaredNorm();
    off += n;
  }
  return obj;
}

namespace {

struct BlockBasis {
  RealVector d;       // Gram eigenvalues, clipped at zero
  ComplexMatrix u;    // Gram eigenvectors
  ComplexVector beta; // U^H A^H b
  ComplexVector gamma;  // U^H c_j (zero without halfspace)
  std::vector<bool> null;
};

struct DualPoint {
  double tau = 0.0;
  double nu = 0.0;
  std::vector<ComplexVector> y;  // per-block coordinates in the eigenbasis
  double norm2 = 0.0;
};

class LsDual {
 public:
  LsDual(const std::vector<LsBlock>& blocks, const ComplexVector& c, bool halfspace, double eps)
      : halfspace_(halfspace), eps_(eps) {
    Eigen::Index off = 0;
    for (const auto& blk : blocks) {
      const Eigen::Index n = blk.a.cols();
      BlockBasis bb;
      const ComplexMatrix gram = blk.a.adjoint() * blk.a;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram);
      bb.d = es.eigenvalues().cwiseMax(0.0);
      bb.u = es.eigenvectors();
      bb.beta = bb.u.adjoint() * (blk.a.adjoint() * blk.b);
      bb.gamma = halfspace ? ComplexVector(bb.u.adjoint() * c.segment(off, n)) : ComplexVector::Zero(n);
      dmax_ = std::max(dmax_, bb.d.size() ? bb.d.maxCoeff() : 0.0);
      bases_.push_back(std::move(bb));
      off += n;
    }
    const double null_tol = 1e-13 * std::max(dmax_, 1e-300);
    for (auto& bb : bases_) {
      bb.null.resize(static_cast<size_t>(bb.d.size()));
      for (Eigen::Index i = 0; i < bb.d.size(); ++i) {
        bb.null[static_cast<size_t>(i)] = bb.d(i) <= null_tol;
        if (bb.null[static_cast<size_t>(i)]) {
          cnull2_ += std::norm(bb.gamma(i));
        }
        c2_ += std::norm(bb.gamma(i));
      }
    }
  }

  double dmax() const { return dmax_; }

  DualPoint at(double tau) const {
    DualPoint p;
    p.tau = tau;
    double alpha = 0.0;
    double kappa = 0.0;
    for (const auto& bb : bases_) {
      for (Eigen::Index i = 0; i < bb.d.size(); ++i) {
        if (tau == 0.0 && bb.null[static_cast<size_t>(i)]) continue;
        const double den = bb.d(i) + tau;
        alpha += (std::conj(bb.gamma(i)) * bb.beta(i)).real() / den;
        kappa += std::norm(bb.gamma(i)) / den;
      }
    }
    const bool null_shift = tau == 0.0 && halfspace_ && cnull2_ > 1e-24 * c2_;
    double t = 0.0;
    if (halfspace_ && !null_shift && kappa > 0.0) {
      p.nu = std::max(0.0, 2.0 * (eps_ - alpha) / kappa);
    }
    if (null_shift) t = std::max(0.0, eps_ - alpha) / cnull2_;
    for (const auto& bb : bases_) {
      ComplexVector y(bb.d.size());
      for (Eigen::Index i = 0; i < bb.d.size(); ++i) {
        if (tau == 0.0 && bb.null[static_cast<size_t>(i)]) {
          y(i) = t * bb.gamma(i);
        } else {
          y(i) = (bb.beta(i) + 0.5 * p.nu * bb.gamma(i)) / (bb.d(i) + tau);
        }
      }
      p.norm2 += y.squaredNorm();
      p.y.push_back(std::move(y));
    }
    return p;
  }

  ComplexVector assemble(const DualPoint& p) const {
    Eigen::Index total = 0;
    for (const auto& bb : bases_) total += bb.d.size();
    ComplexVector w(total);
    Eigen::Index off = 0;
    for (size_t j = 0; j < bases_.size(); ++j) {
      const Eigen::Index n = bases_[j].d.size();
      w.segment(off, n) = bases_[j].u * p.y[j];
      off += n;
    }
    return w;
  }

 private:
  bool halfspace_;
  double eps_;
  double dmax_ = 0.0;
  double cnull2_ = 0.0;
  double c2_ = 0.0;
  std::vector<BlockBasis> bases_;
};

double kkt_residual(const std::vector<LsBlock>& blocks, const ComplexVector& c, bool halfspace,
                    double eps, double power, const ComplexVector& w, double tau, double nu) {
  double worst = 0.0;
  Eigen::Index off = 0;
  for (const auto& blk : blocks) {
    const Eigen::Index n = blk.a.cols();
    const ComplexVector wj = w.segment(off, n);
    const ComplexVector atb = blk.a.adjoint() * blk.b;
    const ComplexVector gw = blk.a.adjoint() * (blk.a * wj);
    ComplexVector r = gw + tau * wj - atb;
    double scale = std::max({atb.norm(), gw.norm() + tau * wj.norm(), 1e-300});
    if (halfspace) {
      r -= 0.5 * nu * c.segment(off, n);
      scale = std::max(scale, 0.5 * nu * c.segment(off, n).norm());
    }
    worst = std::max(worst, r.norm() / scale);
    off += n;
  }
  const double n2 = w.squaredNorm();
  worst = std::max(worst, std::max(0.0, n2 - power) / power);
  if (tau > 0.0) worst = std::max(worst, std::abs(n2 - power) / power);
  if (halfspace) {
    const double lhs = c.dot(w).real();
    const double hs_scale = std::max({std::abs(eps), c.norm() * w.norm(), 1e-300});
    worst = std::max(worst, std::max(0.0, eps - lhs) / hs_scale);
    if (nu > 0.0) worst = std::max(worst, std::abs(lhs - eps) / hs_scale);
  }
  return worst;
}

bool ls_feasible(const ComplexVector& c, bool halfspace, double eps, double power, const ComplexVector& w) {
  if (w.squaredNorm() > power * (1.0 + 1e-12)) return false;
  if (halfspace && c.dot(w).real() < eps - 1e-12 * std::max(1.0, std::abs(eps))) return false;
  return true;
}

}  // namespace

LsResult solve_ls_ball_halfspace(const std::vector<LsBlock>& blocks, const ComplexVector& c, double eps,
                                 double power, const SolverOptions& opts,
                                 const std::optional<ComplexVector>& warm_start) {
  require(!blocks.empty(), "solve_ls_ball_halfspace: no blocks");
  require(power > 0.0 && std::isfinite(power), "solve_ls_ball_halfspace: power bound must be positive");
  Eigen::Index total = 0;
  for (const auto& blk : blocks) {
    require(blk.a.rows() == blk.b.size(), "solve_ls_ball_halfspace: block row mismatch");
    require(blk.a.cols() >= 1, "solve_ls_ball_halfspace: empty block");
    total += blk.a.cols();
  }
  const bool halfspace = c.size() > 0;
  require(!halfspace || c.size() == total, "solve_ls_ball_halfspace: halfspace vector size mismatch");
  if (warm_start) require(warm_start->size() == total, "solve_ls_ball_halfspace: warm start size mismatch");

  LsResult res;
  const double cn = halfspace ? c.norm() : 0.0;
  if (halfspace && eps > std::sqrt(power) * cn) {
    fail(ErrorCode::kInfeasibleSubproblem, "solve_ls_ball_halfspace: eps exceeds sqrt(P)*||c||");
  }

  if (halfspace && cn > 0.0 && eps >= std::sqrt(power) * cn * (1.0 - 1e-12)) {
    // The feasible set has collapsed to (almost) a single point.
    res.w = c * (std::sqrt(power) / cn);
    res.objective = ls_objective(blocks, res.w);
    res.kkt_residual = 0.0;
  } else {
    LsDual dual(blocks, c, halfspace, eps);
    DualPoint best = dual.at(0.0);
    if (best.norm2 > power) {
      double tau_hi = std::max(1.0, dual.dmax());
      DualPoint hi = dual.at(tau_hi);
      for (int k = 0; k < 1000 && hi.norm2 > power; ++k) {
        tau_hi *= 2.0;
        hi = dual.at(tau_hi);
      }
      SolverOptions local = opts;
      local.bisection_tol = 1e-13 * power;
      local.bisection_max_iter = std::max(opts.ls_max_iter, 1);
      const BisectResult br = bisect_monotone(
          [&](double tau) { return dual.at(tau).norm2 - power; }, 0.0, tau_hi, KeepSide::kNonPositive, local);
      best = dual.at(br.x);
    }
    res.w = dual.assemble(best);
    // rounding on the bracket end can leave the norm a few ulps above the bound
    const double n2 = res.w.squaredNorm();
    if (n2 > power) res.w *= std::sqrt(power / n2);
    res.ball_multiplier = best.tau;
    res.halfspace_multiplier = best.nu;
    res.objective = ls_objective(blocks, res.w);
    res.kkt_residual = kkt_residual(blocks, c, halfspace, eps, power, res.w, best.tau, best.nu);
  }

  if (warm_start && ls_feasible(c, halfspace, eps, power, *warm_start)) {
    const double warm_obj = ls_objective(blocks, *warm_start);
    if (warm_obj <= res.objective) {
      res.w = *warm_start;
      res.objective = warm_obj;
      res.used_warm_start = true;
    }
  }
  return res;
}

bool Region::contains(const Vec2& u, double slack) const {
  return u.x() >= x_min - slack && u.x() <= x_max + slack && u.y() >= y_min - slack && u.y() <= y_max + slack;
}

Vec2 project_box(const Vec2& u, const Region& region) {
  require(region.x_min <= region.x_max && region.y_min <= region.y_max, "project_box: degenerate region");
  return Vec2(std::clamp(u.x(), region.x_min, region.x_max), std::clamp(u.y(), region.y_min, region.y_max));
}

}  // namespace isac
