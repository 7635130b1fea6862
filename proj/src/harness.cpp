#include "isac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

namespace isac {

namespace {

// Random antenna positions for the RPA baseline come from their own stream.
constexpr std::uint64_t kPositionStream = 0xd1b54a32d192ed03ULL;

struct SchemeName {
  Scheme scheme;
  const char* name;
};

constexpr SchemeName kSchemeNames[] = {
    {Scheme::kProposed, "proposed"}, {Scheme::kFpa, "fpa"},           {Scheme::kRpa, "rpa"},
    {Scheme::kSeparate, "separate"}, {Scheme::kCommOnly, "comm_only"}, {Scheme::kRandomPhase, "random_phase"},
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double achieved_secrecy(const MetricReport& rep) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < rep.gamma.size(); ++k) s += secrecy_lower_bound(rep.gamma(k), rep.gamma_e(k));
  return s;
}

TrialResult result_from_report(Scheme scheme, std::uint64_t seed, const MetricReport& rep) {
  TrialResult t;
  t.scheme = scheme;
  t.seed = seed;
  t.report = rep;
  t.sum_rate = rep.sum_rate;
  t.secrecy_lb = achieved_secrecy(rep);
  return t;
}

// Unit-modulus MM ascent on sum_k ||g_k(phi)||^2. With psi = conj(phi), sum_k ||g_k||^2 = psi^H A psi.
ComplexVector max_sum_gain_phases(const SystemModel& model, const std::vector<Vec2>& u, ComplexVector phi) {
  const ComplexMatrix HH = model.H * model.H.adjoint();
  ComplexMatrix A = ComplexMatrix::Zero(model.N, model.N);
  for (int k = 0; k < model.K; ++k) {
    const ComplexVector h = model.user_channel(k, u[static_cast<size_t>(k)]);
    A += h.conjugate().asDiagonal() * HH * h.asDiagonal();
  }
  ComplexVector psi = phi.conjugate();
  double value = psi.dot(A * psi).real();
  for (int it = 0; it < 500; ++it) {
    const ComplexVector v = A * psi;
    ComplexVector next = psi;
    for (int n = 0; n < model.N; ++n)
      if (std::abs(v(n)) > 0.0) next(n) = v(n) / std::abs(v(n));
    const double nv = next.dot(A * next).real();
    if (nv < value) break;  // rounding only; the linear minorizer cannot decrease the gain
    psi = next;
    const bool done = nv - value <= 1e-12 * std::max(std::abs(value), 1e-300);
    value = nv;
    if (done) break;
  }
  return psi.conjugate();
}

// Sequential pipeline: positions by grid search, phases by gain maximization, radar columns at minimum
// power, communication columns by FP sum-rate maximization in the remaining budget.
SchemeRun run_separate(const Scenario& scenario, const OptimizerOptions& opts, std::uint64_t seed) {
  const ChannelSet channels = sample_scenario(scenario, seed);
  const SystemModel physical = SystemModel::from(scenario, channels);
  const SystemModel model = physical.signal_normalized();
  std::string diagnostic;

  DesignVariables vars;
  const double step = separate_grid_step(scenario);
  const int count = static_cast<int>(std::lround(scenario.region_width / step)) + 1;
  vars.u.assign(static_cast<size_t>(model.K), Vec2::Zero());
  for (int k = 0; k < model.K; ++k) {
    double best = -1.0;
    for (int ix = 0; ix < count; ++ix) {
      for (int iy = 0; iy < count; ++iy) {
        const Vec2 u(model.region.x_min + ix * step, model.region.y_min + iy * step);
        const double gain = model.user_channel(k, u).squaredNorm();
        if (gain > best) {
          best = gain;
          vars.u[static_cast<size_t>(k)] = u;
        }
      }
    }
  }

  BlockMask comm_mask;
  comm_mask.sensing = false;
  const ComplexVector phi0 = initialize(model, seed, comm_mask, {}, opts).first.phi;
  vars.phi = max_sum_gain_phases(model, vars.u, phi0);
  const Cascade c = Cascade::of(model, vars);
  const int K = model.K;
  const int J = model.columns();

  // radar: all of the echo in one radar column aligned with g0
  vars.W = ComplexMatrix::Zero(model.M, J);
  {
    ComplexMatrix R = ComplexMatrix::Zero(model.M, J);
    R.col(K) = c.g0 / c.g0.norm();
    const ComplexVector r = Eigen::Map<const ComplexVector>(R.data(), R.size());
    const SensingConstraint sc = sensing_constraint(c.g0, r, model);
    std::vector<LsBlock> blocks(static_cast<size_t>(J), {ComplexMatrix::Identity(model.M, model.M),
                                                       ComplexVector::Zero(model.M)});
    try {
      const LsResult res = solve_ls_ball_halfspace(blocks, sc.c, sc.eps, model.power, opts.solver);
      vars.W = Eigen::Map<const ComplexMatrix>(res.w.data(), model.M, J);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kInfeasibleSubproblem) throw;
      vars.W.col(K) = c.g0 / c.g0.norm() * std::sqrt(model.power);
      diagnostic = "radar threshold unreachable within the power budget";
    }
  }

  const double comm_power = std::max(model.power - vars.W.squaredNorm(), 0.0);
  for (int k = 0; k < K; ++k) {
    const ComplexVector& g = c.g[static_cast<size_t>(k)];
    if (g.norm() > 0.0) vars.W.col(k) = g / g.norm() * std::sqrt(comm_power / K);
  }
  AuxVariables aux;
  aux.z.resize(K, J);
  auto rate = [&]() {
    double s = 0.0;
    for (int k = 0; k < K; ++k) s += std::log2(1.0 + comm_sinr(c.g[static_cast<size_t>(k)], vars.W, k, model.noise));
    return s;
  };
  double current = rate();
  bool fp_converged = comm_power == 0.0;
  int iterations = 0;
  for (; iterations < opts.T1_max && !fp_converged; ++iterations) {
    for (int k = 0; k < K; ++k) aux.z.row(k) = c.g[static_cast<size_t>(k)].adjoint() * vars.W;
    const RealVector lam = update_lambda(aux, model.noise);
    const ComplexVector iota = update_iota(aux, lam, model.noise);
    ComplexMatrix A(K, model.M);
    for (int k = 0; k < K; ++k) A.row(k) = std::conj(iota(k)) * c.g[static_cast<size_t>(k)].adjoint();
    std::vector<LsBlock> blocks;
    for (int j = 0; j < K; ++j) {
      ComplexVector b = ComplexVector::Zero(K);
      b(j) = std::sqrt(1.0 + lam(j));
      blocks.push_back({A, b});
    }
    const LsResult res = solve_ls_ball_halfspace(blocks, ComplexVector(), 0.0, comm_power, opts.solver);
    const ComplexMatrix prev = vars.W;
    vars.W.leftCols(K) = Eigen::Map<const ComplexMatrix>(res.w.data(), model.M, K);
    const double next = rate();
    if (next < current) {  // rounding; keep the better point
      vars.W = prev;
      fp_converged = true;
    } else {
      fp_converged = (next - current) / std::max(std::abs(current), 1.0) < opts.eps_in;
      current = next;
    }
  }
  vars.r = update_receive_filter(c.g0, vars.W);

  SchemeRun run;
  run.result = result_from_report(Scheme::kSeparate, seed, evaluate(vars, physical));
  run.result.feasible = run.result.report.feasible(opts.margin_tol, true);
  run.result.converged = fp_converged && run.result.feasible;
  run.result.degraded = !run.result.converged;
  run.result.iterations = iterations;
  if (!fp_converged) diagnostic += (diagnostic.empty() ? "" : "; ") + std::string("FP iteration cap reached");
  if (!run.result.feasible)
    diagnostic += (diagnostic.empty() ? "" : "; ") + std::string("original constraints violated beyond margin");
  run.result.diagnostic = diagnostic;
  run.vars = vars;
  return run;
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  for (const auto& s : kSchemeNames)
    if (name == s.name) return s.scheme;
  fail(ErrorCode::kUnknownScheme, "unknown scheme '" + name + "'");
}

std::string to_string(Scheme scheme) {
  for (const auto& s : kSchemeNames)
    if (s.scheme == scheme) return s.name;
  return "?";
}

const std::vector<Scheme>& all_schemes() {
  static const std::vector<Scheme> v = {Scheme::kProposed, Scheme::kFpa,      Scheme::kRpa,
                                        Scheme::kSeparate, Scheme::kCommOnly, Scheme::kRandomPhase};
  return v;
}

double separate_grid_step(const Scenario& scenario) {
  // lambda/50, shrunk so the grid lands exactly on both region edges
  const double step = scenario.lambda / 50.0;
  const double cells = std::max(1.0, std::ceil(scenario.region_width / step - 1e-9));
  return scenario.region_width / cells;
}

SchemeRun run_scheme_detailed(Scheme scheme, const Scenario& scenario, const OptimizerOptions& opts,
                              std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SchemeRun run;
  if (scheme == Scheme::kSeparate) {
    run = run_separate(scenario, opts, seed);
  } else {
    BlockMask mask;
    InitialPoint init;
    switch (scheme) {
      case Scheme::kFpa:
        mask.positions = false;
        break;
      case Scheme::kRpa: {
        mask.positions = false;
        std::mt19937_64 rng(seed ^ kPositionStream);
        const Region reg = scenario.region();
        std::uniform_real_distribution<double> ux(reg.x_min, reg.x_max);
        std::uniform_real_distribution<double> uy(reg.y_min, reg.y_max);
        std::vector<Vec2> u;
        for (int k = 0; k < scenario.K; ++k) {
          const double x = ux(rng);
          u.emplace_back(x, uy(rng));
        }
        init.u = u;
        break;
      }
      case Scheme::kCommOnly:
        mask.sensing = false;
        break;
      case Scheme::kRandomPhase:
        mask.phi = false;
        break;
      default:
        break;
    }
    const ChannelSet channels = sample_scenario(scenario, seed);
    const RunResult r = run_optimizer(scenario, channels, seed, opts, mask, init);
    run.result = result_from_report(scheme, seed, r.report);
    run.result.converged = r.ok();
    run.result.feasible = r.feasible;
    // anything short of a converged, feasible run is flagged
    run.result.degraded = !r.ok();
    run.result.iterations = r.state.total_sweeps;
    run.result.outer_iterations = r.state.T2;
    run.result.diagnostic = r.diagnostic;
    run.vars = r.vars;
    run.state = r.state;
    run.initial = r.initial_report;
  }
  run.result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

TrialResult run_scheme(Scheme scheme, const Scenario& scenario, const OptimizerOptions& opts, std::uint64_t seed) {
  return run_scheme_detailed(scheme, scenario, opts, seed).result;
}

void SweepSpec::validate() const {
  if (param.empty()) fail(ErrorCode::kConfig, "sweep.param is missing");
  if (values.empty()) fail(ErrorCode::kConfig, "sweep.values is empty");
  for (size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) fail(ErrorCode::kConfig, "sweep.values must be strictly increasing");
  if (trials < 1) fail(ErrorCode::kConfig, "sweep.trials must be >= 1");
  if (schemes.empty()) fail(ErrorCode::kConfig, "sweep.schemes is empty");
}

const std::vector<std::string>& SweepSpec::config_keys() {
  static const std::vector<std::string> keys = {"sweep.param", "sweep.values", "sweep.trials", "sweep.schemes"};
  return keys;
}

SweepSpec SweepSpec::from_config(const Config& cfg) {
  SweepSpec s;
  s.param = cfg.get_string("sweep.param", "");
  s.values = cfg.get_list("sweep.values");
  s.trials = cfg.get_int("sweep.trials", 1);
  for (const auto& w : cfg.get_words("sweep.schemes")) s.schemes.push_back(parse_scheme(w));
  if (s.schemes.empty()) s.schemes.push_back(Scheme::kProposed);
  s.base = cfg;
  s.validate();
  return s;
}

Config apply_sweep_value(const Config& base, const std::string& param, double value) {
  Config cfg = base;
  char buf[64];
  if (param == "N") {
    const double n = std::round(value);
    require(n >= 1 && std::abs(n - value) < 1e-9, "sweep over N needs positive integer values");
    const auto [rows, cols] = near_square(static_cast<int>(n));
    cfg.set("N1", std::to_string(cols));
    cfg.set("N2", std::to_string(rows));
    return cfg;
  }
  std::snprintf(buf, sizeof buf, "%.17g", value);
  cfg.set(param, buf);
  return cfg;
}

int worker_count() {
  if (const char* env = std::getenv("ISAC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  struct Cell {
    size_t value_index;
    int trial;
    Scheme scheme;
  };
  std::vector<Scenario> scenarios;
  for (double v : spec.values) scenarios.push_back(Scenario::from_config(apply_sweep_value(spec.base, spec.param, v)));
  const OptimizerOptions opts = OptimizerOptions::from_config(spec.base);
  const std::uint64_t base_seed = spec.base.get_u64("seed", 1);

  std::vector<Cell> cells;
  for (size_t i = 0; i < spec.values.size(); ++i)
    for (int t = 0; t < spec.trials; ++t)
      for (Scheme s : spec.schemes) cells.push_back({i, t, s});

  SweepResult out;
  out.trials.resize(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<size_t> next{0};
  auto work = [&]() {
    for (size_t i = next++; i < cells.size(); i = next++) {
      const Cell& cell = cells[i];
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(cell.trial);
      try {
        TrialResult r = run_scheme(cell.scheme, scenarios[cell.value_index], opts, seed);
        r.param = spec.param;
        r.value = spec.values[cell.value_index];
        r.trial = cell.trial;
        out.trials[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(threads > 0 ? threads : worker_count(), 1, static_cast<int>(cells.size()));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  out.aggregate = aggregate(out.trials);
  return out;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials) {
  std::vector<AggregateRow> rows;
  struct Acc {
    double s = 0, s2 = 0, q = 0, q2 = 0;
    int n = 0, conv = 0;
  };
  std::vector<Acc> acc;
  for (const auto& t : trials) {
    size_t i = 0;
    while (i < rows.size() && !(rows[i].value == t.value && rows[i].scheme == t.scheme && rows[i].param == t.param)) ++i;
    if (i == rows.size()) {
      AggregateRow r;
      r.param = t.param;
      r.value = t.value;
      r.scheme = t.scheme;
      rows.push_back(r);
      acc.emplace_back();
    }
    Acc& a = acc[i];
    a.s += t.sum_rate;
    a.s2 += t.sum_rate * t.sum_rate;
    a.q += t.secrecy_lb;
    a.q2 += t.secrecy_lb * t.secrecy_lb;
    ++a.n;
    a.conv += t.converged ? 1 : 0;
  }
  auto se = [](double s, double s2, int n) {
    if (n < 2) return 0.0;
    const double mean = s / n;
    return std::sqrt(std::max(0.0, (s2 - n * mean * mean) / (n - 1)) / n);
  };
  for (size_t i = 0; i < rows.size(); ++i) {
    const Acc& a = acc[i];
    rows[i].trials = a.n;
    rows[i].sum_rate_mean = a.s / a.n;
    rows[i].sum_rate_se = se(a.s, a.s2, a.n);
    rows[i].secrecy_lb_mean = a.q / a.n;
    rows[i].secrecy_lb_se = se(a.q, a.q2, a.n);
    rows[i].converged_fraction = static_cast<double>(a.conv) / a.n;
  }
  return rows;
}

const char* const kTrialSchema = "isac.trial.v1";
const char* const kAggregateSchema = "isac.aggregate.v1";

void write_trials_csv(std::ostream& os, const std::vector<TrialResult>& trials) {
  os << "schema,param,value,scheme,trial,seed,sum_rate,secrecy_lb,converged,feasible,degraded,iterations,"
        "outer_iterations,min_comm_sinr,max_eaves_sinr,radar_snr_lb,power_used\n";
  for (const auto& t : trials) {
    const auto& r = t.report;
    os << kTrialSchema << ',' << t.param << ',' << fmt(t.value) << ',' << to_string(t.scheme) << ',' << t.trial << ','
       << t.seed << ',' << fmt(t.sum_rate) << ',' << fmt(t.secrecy_lb) << ',' << t.converged << ',' << t.feasible << ','
       << t.degraded << ',' << t.iterations << ',' << t.outer_iterations << ','
       << fmt(r.gamma.size() ? r.gamma.minCoeff() : 0.0) << ',' << fmt(r.gamma_e.size() ? r.gamma_e.maxCoeff() : 0.0)
       << ',' << fmt(r.radar_lb) << ',' << fmt(r.power_used) << '\n';
  }
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
  os << "schema,param,value,scheme,trials,sum_rate_mean,sum_rate_se,secrecy_lb_mean,secrecy_lb_se,converged_fraction\n";
  for (const auto& r : rows) {
    os << kAggregateSchema << ',' << r.param << ',' << fmt(r.value) << ',' << to_string(r.scheme) << ',' << r.trials
       << ',' << fmt(r.sum_rate_mean) << ',' << fmt(r.sum_rate_se) << ',' << fmt(r.secrecy_lb_mean) << ','
       << fmt(r.secrecy_lb_se) << ',' << fmt(r.converged_fraction) << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<TrialResult>& trials) {
  os << "param,value,scheme,trial,seed,wall_time_s\n";
  for (const auto& t : trials)
    os << t.param << ',' << fmt(t.value) << ',' << to_string(t.scheme) << ',' << t.trial << ',' << t.seed << ','
       << fmt(t.wall_time) << '\n';
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
  os << "outer_iter,inner_iter,rho,objective,violation,sum_rate\n";
  for (const auto& r : rows)
    os << r.outer << ',' << r.inner << ',' << fmt(r.rho) << ',' << fmt(r.objective) << ',' << fmt(r.violation) << ','
       << fmt(r.sum_rate) << '\n';
}

std::vector<std::string> write_sweep(const SweepResult& result, const std::string& out) {
  namespace fs = std::filesystem;
  const fs::path path(out);
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) fail(ErrorCode::kIo, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
  }
  const fs::path stem = path.parent_path() / path.stem();
  const std::vector<std::string> paths = {path.string(), stem.string() + ".aggregate.csv", stem.string() + ".timing.csv"};
  for (size_t i = 0; i < paths.size(); ++i) {
    std::ofstream f(paths[i], std::ios::binary);
    if (!f) fail(ErrorCode::kIo, "cannot open '" + paths[i] + "' for writing");
    if (i == 0) write_trials_csv(f, result.trials);
    if (i == 1) write_aggregate_csv(f, result.aggregate);
    if (i == 2) write_timing_csv(f, result.trials);
    f.flush();
    if (!f) fail(ErrorCode::kIo, "write to '" + paths[i] + "' failed");
  }
  return paths;
}

void print_report(std::ostream& os, const TrialResult& t) {
  const auto& r = t.report;
  os << "scheme            " << to_string(t.scheme) << '\n'
     << "seed              " << t.seed << '\n'
     << "sum_rate          " << fmt(t.sum_rate) << " bps/Hz\n"
     << "secrecy_lb        " << fmt(t.secrecy_lb) << " bps/Hz\n";
  for (Eigen::Index k = 0; k < r.gamma.size(); ++k)
    os << "user " << k << "            sinr " << fmt(r.gamma(k)) << "  eaves_sinr " << fmt(r.gamma_e(k)) << '\n';
  os << "radar_snr_lb      " << fmt(r.radar_lb) << '\n'
     << "power_used        " << fmt(r.power_used) << " W\n"
     << "margins           comm " << fmt(r.comm_margin) << "  eaves " << fmt(r.eaves_margin) << "  radar "
     << fmt(r.radar_margin) << "  power " << fmt(r.power_margin) << '\n'
     << "converged         " << (t.converged ? "yes" : "no") << '\n'
     << "feasible          " << (t.feasible ? "yes" : "no") << '\n'
     << "degraded          " << (t.degraded ? "yes" : "no") << '\n'
     << "iterations        " << t.iterations << " sweeps, " << t.outer_iterations << " outer\n";
  if (!t.diagnostic.empty()) os << "diagnostic        " << t.diagnostic << '\n';
}

}  // namespace isac
