#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>

#include "isac/harness.hpp"

namespace isac {

namespace {

struct Instance {
  SystemModel model;
  DesignVariables vars;
  AuxVariables aux;
};

Instance small_instance(std::uint64_t seed) {
  Scenario s;
  s.M = 2;
  s.N1 = 3;
  s.N2 = 2;
  s.K = 2;
  s.Lp = 3;
  s.noise = dbm_to_watt(-120.0);
  s.sigma_t = 1000.0;
  const ChannelSet ch = sample_scenario(s, seed);
  Instance in;
  in.model = SystemModel::from(s, ch).normalized();
  OptimizerOptions opts;
  auto [vars, aux] = initialize(in.model, seed, {}, {}, opts);
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<double> pos(-0.015, 0.015);
  for (auto& u : vars.u) u = Vec2(pos(rng), pos(rng));
  in.vars = vars;
  in.aux = aux;
  return in;
}

ComplexVector random_unit_modulus(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, a(rng));
  return v;
}

}  // namespace

bool run_self_checks(std::ostream& os, std::uint64_t seed) {
  bool all = true;
  auto report = [&](const std::string& name, bool ok, const std::string& detail) {
    os << (ok ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
    all = all && ok;
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  const SolverOptions so;

  {
    const double v = secrecy_lower_bound(10.0, 1.0);
    report("secrecy_bound", std::abs(v - 2.4594) < 1e-4, "value " + std::to_string(v));
  }
  {
    ComplexMatrix B(6, 6);
    for (Eigen::Index i = 0; i < B.size(); ++i) B(i) = cdouble(g(rng), g(rng));
    const ComplexMatrix A = B * B.adjoint();
    const double dense = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(A).eigenvalues().maxCoeff();
    const EigenPair ep = max_eigenpair(A, so);
    const double rel = std::abs(ep.value - dense) / dense;
    report("max_eigenpair", rel < 1e-8 && safe_max_eigenvalue(A, so) >= dense * (1 - 1e-12),
           "relative error " + std::to_string(rel));
  }

  const Instance in = small_instance(seed);
  const SystemModel& m = in.model;
  {
    const Cascade c = Cascade::of(m, in.vars);
    const ComplexVector r = update_receive_filter(c.g0, in.vars.W);
    const double best = radar_snr_lb(c.g0, in.vars.W, r, m);
    bool ok = true;
    for (int t = 0; t < 200; ++t) {
      ComplexVector x(r.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cdouble(g(rng), g(rng));
      ok = ok && radar_snr_lb(c.g0, in.vars.W, x, m) <= best * (1 + 1e-12);
    }
    report("receive_filter_optimal", ok, "200 random filters");
  }
  {
    const PhiStep st = build_phi_step(m, in.vars, in.aux, true, so);
    const double at = phi_penalty(m, in.vars, in.aux, in.vars.phi);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const ComplexVector phi = random_unit_modulus(rng, m.N);
      worst = std::min(worst, st.surrogate(phi) - phi_penalty(m, in.vars, in.aux, phi));
    }
    const double touch = std::abs(st.surrogate(in.vars.phi) - at) / std::max(at, 1.0);
    report("phase_surrogate", worst >= -1e-9 * std::max(at, 1.0) && touch < 1e-9,
           "touch " + std::to_string(touch) + " worst gap " + std::to_string(worst));
  }
  {
    const PositionQuadratic pq = position_quadratic(m, in.vars, in.aux, 0, so);
    const Vec2 u = in.vars.u[0];
    const PositionSurrogate s = build_position_surrogate(m, pq, 0, u);
    const auto psi = [&](const Vec2& p) { return position_psi(m, 0, s.varsigma, p); };
    const double h = 1e-7;
    Vec2 fd;
    Mat2 fh;
    for (int i = 0; i < 2; ++i) {
      Vec2 e = Vec2::Zero();
      e(i) = h;
      fd(i) = (psi(u + e) - psi(u - e)) / (2 * h);
    }
    const double hh = 1e-5;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        Vec2 ei = Vec2::Zero(), ej = Vec2::Zero();
        ei(i) = hh;
        ej(j) = hh;
        fh(i, j) = (psi(u + ei + ej) - psi(u + ei - ej) - psi(u - ei + ej) + psi(u - ei - ej)) / (4 * hh * hh);
      }
    const double gerr = (fd - s.gradient).norm() / std::max(s.gradient.norm(), 1e-12);
    const double herr = (fh - s.hessian).norm() / std::max(s.hessian.norm(), 1e-12);
    const double top = Eigen::SelfAdjointEigenSolver<Mat2>(s.hessian).eigenvalues().maxCoeff();
    report("position_derivatives", gerr < 1e-4 && herr < 1e-3 && top <= s.delta * (1 + 1e-12),
           "gradient " + std::to_string(gerr) + " hessian " + std::to_string(herr));
  }
  {
    OptimizerOptions opts;
    opts.T2_max = 3;
    opts.T1_max = 30;
    DesignVariables vars = in.vars;
    AuxVariables aux = in.aux;
    PenaltyState st;
    double f = penalty_objective(vars, aux, m, opts.rho0);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double next = inner_sweep(m, vars, aux, opts.rho0, {}, opts, st);
      worst = std::min(worst, next - f);
      f = next;
    }
    report("sweep_monotone", worst >= -1e-9, "worst change " + std::to_string(worst));
  }
  return all;
}

}  // namespace isac
