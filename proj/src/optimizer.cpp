#include "isac/optimizer.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace isac {

void OptimizerOptions::validate() const {
  auto check = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorCode::kConfig, "invalid optimizer options: " + what);
  };
  check(rho0 > 0.0, "rho0 must be positive");
  check(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  check(eps_in > 0.0 && eps_out > 0.0 && eps1 > 0.0, "thresholds must be positive");
  check(T1_max >= 1 && T2_max >= 1 && position_max_iter >= 1 && phi_max_iter >= 1, "iteration caps must be >= 1");
  check(margin_tol >= 0.0 && degraded_after >= 1, "bad margin or degradation settings");
  solver.validate();
}

const std::vector<std::string>& OptimizerOptions::config_keys() {
  static const std::vector<std::string> keys = {"rho0", "eta", "eps_in", "eps_out", "T1_max", "T2_max", "eps1",
                                                "position_max_iter", "phi_max_iter", "margin_tol"};
  return keys;
}

OptimizerOptions OptimizerOptions::from_config(const Config& cfg) {
  OptimizerOptions o;
  o.rho0 = cfg.get_double("rho0", o.rho0);
  o.eta = cfg.get_double("eta", o.eta);
  o.eps_in = cfg.get_double("eps_in", o.eps_in);
  o.eps_out = cfg.get_double("eps_out", o.eps_out);
  o.T1_max = cfg.get_int("T1_max", o.T1_max);
  o.T2_max = cfg.get_int("T2_max", o.T2_max);
  o.eps1 = cfg.get_double("eps1", o.eps1);
  o.position_max_iter = cfg.get_int("position_max_iter", o.position_max_iter);
  o.phi_max_iter = cfg.get_int("phi_max_iter", o.phi_max_iter);
  o.margin_tol = cfg.get_double("margin_tol", o.margin_tol);
  o.validate();
  return o;
}

namespace {

// Seeds for the optimizer's own random draws, kept apart from the channel stream.
constexpr std::uint64_t kInitStream = 0x9e3779b97f4a7c15ULL;

ComplexVector random_phases(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  ComplexVector phi(n);
  for (int i = 0; i < n; ++i) phi(i) = std::polar(1.0, ang(rng));
  return phi;
}

// MM ascent on ||g0(phi)||^2 = phi^H conj(F0 F0^H) phi.
ComplexVector boost_target_gain(const SystemModel& model, ComplexVector phi) {
  const ComplexMatrix F0 = phase_channel(model.h0, model.H);
  const ComplexMatrix R = (F0 * F0.adjoint()).conjugate();
  for (int it = 0; it < 200; ++it) {
    const ComplexVector v = R * phi;
    ComplexVector next(phi.size());
    for (Eigen::Index n = 0; n < phi.size(); ++n) next(n) = std::abs(v(n)) > 0.0 ? v(n) / std::abs(v(n)) : phi(n);
    const double before = phi.dot(R * phi).real();
    phi = next;
    if (phi.dot(R * phi).real() - before <= 1e-12 * std::abs(before)) break;
  }
  return phi;
}

struct Evaluator {
  const SystemModel& model;
  double rho;

  double operator()(const Cascade& c, const ComplexMatrix& W, const AuxVariables& aux) const {
    return penalty_objective(c, W, aux, model.noise, rho);
  }
};

double sum_rate_of(const Cascade& c, const ComplexMatrix& W, double noise) {
  double s = 0.0;
  for (size_t k = 0; k < c.g.size(); ++k) s += std::log2(1.0 + comm_sinr(c.g[k], W, static_cast<int>(k), noise));
  return s;
}

void refresh_splitting(const SystemModel& model, const Cascade& c, const DesignVariables& vars, AuxVariables& aux,
                       double rho, const OptimizerOptions& opts) {
  const Eigen::Index J = vars.W.cols();
  aux.z.resize(model.K, J);
  for (int k = 0; k < model.K; ++k) aux.z.row(k) = c.g[static_cast<size_t>(k)].adjoint() * vars.W;
  aux.x = (c.g0.adjoint() * vars.W).transpose();
  aux.lambda = update_lambda(aux, model.noise);
  aux.iota = update_iota(aux, aux.lambda, model.noise);
  aux.mu1 = RealVector::Zero(model.K);
  for (int k = 0; k < model.K; ++k) {
    const Eigen::RowVectorXcd a = c.g[static_cast<size_t>(k)].adjoint() * vars.W;
    const ZUpdate zu = update_z(a, k, aux.lambda(k), aux.iota(k), rho, model.Gamma, model.noise, opts.solver);
    aux.z.row(k) = zu.z;
    aux.mu1(k) = zu.mu;
  }
  const XUpdate xu = update_x((c.g0.adjoint() * vars.W).transpose(), model.K, model.Gamma_e, model.noise, opts.solver);
  aux.x = xu.x;
  aux.mu2 = xu.mu;
}

}  // namespace

std::pair<DesignVariables, AuxVariables> initialize(const SystemModel& model, std::uint64_t seed, const BlockMask& mask,
                                                    const InitialPoint& start, const OptimizerOptions& opts) {
  std::mt19937_64 rng(seed ^ kInitStream);
  DesignVariables vars;
  vars.phi = start.phi ? *start.phi : random_phases(rng, model.N);
  require(vars.phi.size() == model.N, "initialize: phase vector has wrong length");
  vars.u = start.u ? *start.u : std::vector<Vec2>(static_cast<size_t>(model.K), Vec2::Zero());
  require(static_cast<int>(vars.u.size()) == model.K, "initialize: wrong number of positions");

  const int J = model.columns();
  auto build_w = [&](const Cascade& c) {
    ComplexMatrix W = ComplexMatrix::Zero(model.M, J);
    const double comm = std::sqrt(model.power / (2.0 * model.K));
    const double radar = std::sqrt(model.power / (2.0 * model.M));
    for (int k = 0; k < model.K; ++k) {
      const ComplexVector& g = c.g[static_cast<size_t>(k)];
      const double n = g.norm();
      if (n > 0.0) {
        W.col(k) = g / n * comm;
      } else {
        W(0, k) = comm;
      }
    }
    for (int m = 0; m < model.M; ++m) W(m, model.K + m) = radar;
    return W;
  };

  Cascade c = Cascade::of(model, vars);
  vars.W = build_w(c);
  if (mask.sensing && mask.phi && !start.phi) {
    // When even the full budget cannot reach the radar threshold, start from phases that favour the target.
    const double best = model.L * model.sigma_t2 * std::pow(c.g0.squaredNorm(), 2) * model.power / model.noise;
    if (best < model.Gamma_r) {
      vars.phi = boost_target_gain(model, vars.phi);
      c = Cascade::of(model, vars);
      vars.W = build_w(c);
    }
  }
  vars.r = update_receive_filter(c.g0, vars.W);
  if (mask.sensing && radar_snr_lb(c.g0, vars.W, vars.r, model) < model.Gamma_r) {
    // nearest beamformer meeting the radar constraint
    const SensingConstraint sc = sensing_constraint(c.g0, vars.r, model);
    std::vector<LsBlock> blocks;
    for (int j = 0; j < J; ++j) blocks.push_back({ComplexMatrix::Identity(model.M, model.M), vars.W.col(j)});
    try {
      const LsResult res = solve_ls_ball_halfspace(blocks, sc.c, sc.eps, model.power, opts.solver);
      vars.W = Eigen::Map<const ComplexMatrix>(res.w.data(), model.M, J);
      vars.r = update_receive_filter(c.g0, vars.W);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSubproblem) throw;
    }
  }
  AuxVariables aux;
  refresh_splitting(model, c, vars, aux, opts.rho0, opts);
  return {vars, aux};
}

double inner_sweep(const SystemModel& model, DesignVariables& vars, AuxVariables& aux, double rho,
                   const BlockMask& mask, const OptimizerOptions& opts, PenaltyState& state) {
  const Evaluator objective{model, rho};
  Cascade c = Cascade::of(model, vars);
  double f = objective(c, vars.W, aux);
  bool sensing_blocked = false;
  auto reject = [&](double fc, int block) {
    ++state.rejected_blocks;
    const double drop = (f - fc) / std::max(std::abs(f), 1.0);
    double& worst = state.worst_rejected_drop[static_cast<size_t>(block)];
    worst = std::max(worst, drop);
  };

  {  // lambda and iota jointly maximize the fractional-programming terms for fixed z
    AuxVariables cand = aux;
    cand.lambda = update_lambda(aux, model.noise);
    cand.iota = update_iota(cand, cand.lambda, model.noise);
    const double fc = objective(c, vars.W, cand);
    if (fc >= f) {
      aux = std::move(cand);
      f = fc;
    } else {
      reject(fc, 0);
    }
  }
  {
    AuxVariables cand = aux;
    for (int k = 0; k < model.K; ++k) {
      const Eigen::RowVectorXcd a = c.g[static_cast<size_t>(k)].adjoint() * vars.W;
      const ZUpdate zu = update_z(a, k, aux.lambda(k), aux.iota(k), rho, model.Gamma, model.noise, opts.solver);
      cand.z.row(k) = zu.z;
      cand.mu1(k) = zu.mu;
    }
    const double fc = objective(c, vars.W, cand);
    if (fc >= f) {
      aux = std::move(cand);
      f = fc;
    } else {
      reject(fc, 1);
    }
  }
  {
    AuxVariables cand = aux;
    const XUpdate xu = update_x((c.g0.adjoint() * vars.W).transpose(), model.K, model.Gamma_e, model.noise, opts.solver);
    cand.x = xu.x;
    cand.mu2 = xu.mu;
    const double fc = objective(c, vars.W, cand);
    if (fc >= f) {
      aux = std::move(cand);
      f = fc;
    } else {
      reject(fc, 2);
    }
  }

  std::optional<SensingConstraint> sensing;
  try {
    vars.r = update_receive_filter(c.g0, vars.W);
    if (mask.sensing) sensing = sensing_constraint(c.g0, vars.r, model);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDegenerateSensing) throw;
    sensing_blocked = mask.sensing;
  }

  if (!sensing_blocked) {
    try {
      const LsResult res = update_beamformer(c, aux, sensing, model.power, opts.solver, vars.W);
      const ComplexMatrix W = Eigen::Map<const ComplexMatrix>(res.w.data(), model.M, model.columns());
      const double fc = objective(c, W, aux);
      if (fc >= f) {
        vars.W = W;
        f = fc;
      } else {
        reject(fc, 3);
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSubproblem) throw;
      sensing_blocked = true;
    }
  }

  if (mask.phi) {
    // MM on the phase block, re-linearized at every accepted point
    try {
      const bool with_sensing = mask.sensing && !sensing_blocked;
      for (int it = 0; it < opts.phi_max_iter; ++it) {
        const PhiStep st = build_phi_step(model, vars, aux, with_sensing, opts.solver);
        const PhiSolution sol = solve_phi_subproblem(st.q, st.d, st.eps3, vars.phi, opts.solver);
        DesignVariables cand = vars;
        cand.phi = sol.phi;
        const Cascade cc = Cascade::of(model, cand);
        const double fc = objective(cc, vars.W, aux);
        if (fc < f) {
          reject(fc, 4);
          break;
        }
        const double gain = fc - f;
        vars.phi = sol.phi;
        c = cc;
        f = fc;
        if (gain <= opts.eps_in * std::max(std::abs(f), 1.0)) break;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSubproblem) throw;
      sensing_blocked = true;
    }
  }

  if (mask.positions) {
    for (int k = 0; k < model.K; ++k) {
      const PositionResult pr = optimize_position(model, vars, aux, k, opts.eps1, opts.position_max_iter, opts.solver);
      DesignVariables cand = vars;
      cand.u[static_cast<size_t>(k)] = pr.u;
      const Cascade cc = Cascade::of(model, cand);
      const double fc = objective(cc, vars.W, aux);
      if (fc >= f) {
        vars.u = cand.u;
        c = cc;
        f = fc;
      } else {
        reject(fc, 5);
      }
    }
  }

  if (sensing_blocked) {
    ++state.sensing_failures;
    ++state.total_sensing_failures;
    if (state.sensing_failures >= opts.degraded_after) state.degraded = true;
  } else {
    state.sensing_failures = 0;
  }
  return f;
}

RunResult run_optimizer(const Scenario& scenario, const ChannelSet& channels, std::uint64_t seed,
                        const OptimizerOptions& opts, const BlockMask& mask, const InitialPoint& start) {
  opts.validate();
  const SystemModel physical = SystemModel::from(scenario, channels);
  // The penalty weight compares splitting residuals with log-rates, so the working units matter. In
  // noise units the residuals grow with the SNR and the penalty dominates sooner at high power.
  const SystemModel model = physical.signal_normalized();

  RunResult out;
  auto [vars, aux] = initialize(model, seed, mask, start, opts);
  out.initial_report = evaluate(vars, physical);

  PenaltyState& st = out.state;
  st.rho = opts.rho0;
  st.eta = opts.eta;
  double f = penalty_objective(vars, aux, model, st.rho);
  for (st.T2 = 0; st.T2 < opts.T2_max;) {
    if (st.T2 > 0) {
      // rho changed: the objective is re-evaluated at the new weight before the inner loop
      f = penalty_objective(vars, aux, model, st.rho);
    }
    for (st.T1 = 1; st.T1 <= opts.T1_max; ++st.T1) {
      const double f_new = inner_sweep(model, vars, aux, st.rho, mask, opts, st);
      ++st.total_sweeps;
      st.worst_sweep_change = std::min(st.worst_sweep_change, f_new - f);
      st.objective_trace.push_back(f_new);
      const Cascade c = Cascade::of(model, vars);
      st.rows.push_back({st.T2 + 1, st.T1, st.rho, f_new, max_violation(c, vars.W, aux), sum_rate_of(c, vars.W, model.noise)});
      const double rel = (f_new - f) / std::max(std::abs(f), 1.0);
      f = f_new;
      if (rel < opts.eps_in) break;
    }
    ++st.T2;
    const double viol = max_violation(vars, aux, model);
    st.violation_trace.push_back(viol);
    // A violation of eps_out still leaves the SINRs off by about sqrt(eps_out) relative, so the
    // loop keeps tightening rho until the original constraints also hold within margin_tol.
    if (viol <= opts.eps_out && evaluate(vars, model).feasible(opts.margin_tol, mask.sensing)) {
      out.converged = true;
      break;
    }
    st.rho *= opts.eta;
  }

  out.report = evaluate(vars, physical);
  out.feasible = out.report.feasible(opts.margin_tol, mask.sensing);
  if (!out.converged) out.diagnostic = "no convergence within T2_max outer iterations";
  if (!out.feasible) {
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += "original constraints violated beyond margin";
  }
  if (st.degraded) {
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += "sensing block infeasible for consecutive sweeps";
  }
  out.vars = std::move(vars);
  out.aux = std::move(aux);
  return out;
}

}  // namespace isac
