#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "isac/metrics.hpp"
#include "isac/solvers.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

SystemModel radar_model(int L = 16) {
  SystemModel m;
  m.M = 3;
  m.K = 2;
  m.noise = 0.5;
  m.sigma_t2 = 2.0;
  m.L = L;
  return m;
}

ComplexMatrix kron_identity(int n, const ComplexMatrix& a) {
  ComplexMatrix out = ComplexMatrix::Zero(n * a.rows(), n * a.cols());
  for (int i = 0; i < n; ++i) out.block(i * a.rows(), i * a.cols(), a.rows(), a.cols()) = a;
  return out;
}

struct Sampled {
  Scenario scenario;
  SystemModel model;
  DesignVariables vars;
};

Sampled sampled(std::uint64_t seed) {
  Sampled s;
  s.scenario.M = 3;
  s.scenario.N1 = 3;
  s.scenario.N2 = 2;
  s.scenario.K = 2;
  s.scenario.Lp = 3;
  s.model = SystemModel::from(s.scenario, sample_scenario(s.scenario, seed));
  std::mt19937_64 rng(seed);
  s.vars.W = oracle::random_matrix(rng, 3, 5) * 0.1;
  std::uniform_real_distribution<double> a(0, 2 * std::numbers::pi);
  s.vars.phi.resize(6);
  for (int n = 0; n < 6; ++n) s.vars.phi(n) = std::polar(1.0, a(rng));
  s.vars.u = {Vec2(0.001, 0.002), Vec2(-0.01, 0.0)};
  s.vars.r = oracle::random_vector(rng, 15);
  return s;
}

AuxVariables exact_aux(const Cascade& c, const ComplexMatrix& W, double noise) {
  AuxVariables aux;
  const int K = static_cast<int>(c.g.size());
  aux.z.resize(K, W.cols());
  for (int k = 0; k < K; ++k) aux.z.row(k) = c.g[static_cast<size_t>(k)].adjoint() * W;
  aux.x = (c.g0.adjoint() * W).transpose();
  aux.lambda = update_lambda(aux, noise);
  aux.iota = update_iota(aux, aux.lambda, noise);
  return aux;
}

}  // namespace

TEST_CASE("comm SINR examples") {
  ComplexVector g(2);
  g << cdouble(1, 0), cdouble(0, 1);
  ComplexMatrix W = ComplexMatrix::Zero(2, 1);
  CHECK(comm_sinr(g, W, 0, 0.3) == 0.0);
  // |g^H w|^2 = noise
  W(0, 0) = std::sqrt(0.3);
  CHECK(comm_sinr(g, W, 0, 0.3) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(comm_sinr(g, W, 1, 0.3), Error);

  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const ComplexVector gk = oracle::random_vector(rng, 4);
    const ComplexMatrix Wr = oracle::random_matrix(rng, 4, 6);
    for (int k = 0; k < 2; ++k) {
      double interference = 0.0;
      for (int j = 0; j < 6; ++j)
        if (j != k) interference += std::norm(gk.dot(Wr.col(j)));
      const double naive = std::norm(gk.dot(Wr.col(k))) / (interference + 0.7);
      CHECK(comm_sinr(gk, Wr, k, 0.7) == doctest::Approx(naive).epsilon(1e-12));
    }
  }
}

TEST_CASE("eavesdropper SINR uses the target channel") {
  const Sampled s = sampled(4);
  const Cascade c = Cascade::of(s.model, s.vars);
  for (int k = 0; k < 2; ++k) {
    CHECK(eavesdrop_sinr(s.vars, s.model, k) == doctest::Approx(comm_sinr(c.g0, s.vars.W, k, s.model.noise)));
    CHECK(comm_sinr(s.vars, s.model, k) ==
          doctest::Approx(comm_sinr(c.g[static_cast<size_t>(k)], s.vars.W, k, s.model.noise)));
  }
  DesignVariables zero = s.vars;
  zero.W.setZero();
  CHECK(eavesdrop_sinr(zero, s.model, 0) == 0.0);
  CHECK_THROWS_AS(eavesdrop_sinr(s.vars, s.model, 2), Error);
}

TEST_CASE("SINRs ignore global phases on phi and on each column") {
  const Sampled s = sampled(6);
  DesignVariables v = s.vars;
  v.phi *= std::polar(1.0, 1.3);
  for (Eigen::Index j = 0; j < v.W.cols(); ++j) v.W.col(j) *= std::polar(1.0, 0.4 * static_cast<double>(j));
  for (int k = 0; k < 2; ++k) {
    CHECK(comm_sinr(v, s.model, k) == doctest::Approx(comm_sinr(s.vars, s.model, k)).epsilon(1e-12));
    CHECK(eavesdrop_sinr(v, s.model, k) == doctest::Approx(eavesdrop_sinr(s.vars, s.model, k)).epsilon(1e-12));
  }
}

TEST_CASE("radar SNR lower bound") {
  const SystemModel m = radar_model();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const ComplexVector g0 = oracle::random_vector(rng, 3);
    const ComplexMatrix W = oracle::random_matrix(rng, 3, 5);
    const ComplexMatrix Ht = g0 * g0.adjoint();
    const ComplexVector w = Eigen::Map<const ComplexVector>(W.data(), W.size());
    const ComplexVector echo = kron_identity(5, Ht) * w;
    CHECK((radar_echo(g0, W) - echo).norm() < 1e-12 * echo.norm());

    const double aligned = radar_snr_lb(g0, W, echo, m);
    CHECK(aligned == doctest::Approx(m.L * m.sigma_t2 * echo.squaredNorm() / m.noise).epsilon(1e-12));

    const ComplexVector r = oracle::random_vector(rng, 15);
    const double direct = m.L * m.sigma_t2 * std::norm(r.dot(echo)) / (m.noise * r.squaredNorm());
    CHECK(radar_snr_lb(g0, W, r, m) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(radar_snr_lb(g0, W, r * 3.7, m) == doctest::Approx(direct).epsilon(1e-12));

    const ComplexVector orth = r - echo * (echo.dot(r) / echo.squaredNorm());
    CHECK(radar_snr_lb(g0, W, orth, m) <= 1e-20 * aligned);

    SystemModel twice = m;
    twice.L = 2 * m.L;
    CHECK(radar_snr_lb(g0, W, r, twice) == doctest::Approx(2 * direct).epsilon(1e-14));
  }
  CHECK_THROWS_AS(radar_snr_lb(ComplexVector::Ones(3), ComplexMatrix::Ones(3, 5), ComplexVector::Zero(15), m), Error);
}

TEST_CASE("Monte-Carlo radar SNR sits above the Jensen bound") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Sampled s = sampled(seed);
    s.model.L = 32;
    s.model.noise = 1e-20;
    const double lb = radar_snr_lb(s.vars, s.model);
    const MonteCarloEstimate est = radar_snr_mc(s.vars, s.model, 10000, seed + 100);
    CHECK(est.mean >= lb - 3 * est.std_error);
    CHECK(est.std_error > 0.0);
  }
  Sampled s = sampled(1);
  s.model.sigma_t2 = 0.0;
  CHECK(radar_snr_mc(s.vars, s.model, 50, 1).mean == 0.0);
  CHECK_THROWS_AS(radar_snr_mc(s.vars, s.model, 0, 1), Error);
}

TEST_CASE("secrecy lower bound arithmetic") {
  const double per_user = secrecy_lower_bound(10.0, 1.0);
  CHECK(per_user == doctest::Approx(2.4594).epsilon(1e-4 / 2.4594));
  CHECK(per_user == doctest::Approx(std::log2(11.0) - 1.0).epsilon(1e-15));
  const double system = 3 * per_user;
  CHECK(system == doctest::Approx(7.378).epsilon(1e-4));
  CHECK(std::abs(system - 7.38) < 0.005);
  CHECK(secrecy_lower_bound(1.0, 1.0) == 0.0);
  CHECK(secrecy_lower_bound(1.0, 4.0) == 0.0);
  CHECK_THROWS_AS(secrecy_lower_bound(-1.0, 1.0), Error);
}

TEST_CASE("penalty objective at exact splitting") {
  const Sampled s = sampled(8);
  const Cascade c = Cascade::of(s.model, s.vars);
  const AuxVariables aux = exact_aux(c, s.vars.W, s.model.noise);
  CHECK(splitting_residual(c, s.vars.W, aux) == doctest::Approx(0.0));
  CHECK(max_violation(c, s.vars.W, aux) <= 1e-28);
  // closed-form lambda, iota turn the FP terms into the sum rate
  double rate = 0.0;
  for (int k = 0; k < 2; ++k) rate += std::log2(1.0 + comm_sinr(s.vars, s.model, k));
  CHECK(penalty_objective(c, s.vars.W, aux, s.model.noise, 0.1) == doctest::Approx(rate).epsilon(1e-12));
  CHECK(fp_objective_nats(aux, s.model.noise) / std::numbers::ln2 == doctest::Approx(rate).epsilon(1e-12));
  CHECK_THROWS_AS(penalty_objective(c, s.vars.W, aux, s.model.noise, 0.0), Error);
}

TEST_CASE("penalty term scales with 1/rho and violation is the largest squared residual") {
  const Sampled s = sampled(9);
  const Cascade c = Cascade::of(s.model, s.vars);
  AuxVariables aux = exact_aux(c, s.vars.W, s.model.noise);
  const double fp = fp_objective_nats(aux, s.model.noise) / std::numbers::ln2;
  aux.z(1, 3) += cdouble(1e-7, -2e-7);
  aux.x(4) += cdouble(3e-7, 0.0);
  const double fp_perturbed = fp_objective_nats(aux, s.model.noise) / std::numbers::ln2;
  const double v = splitting_residual(c, s.vars.W, aux);
  CHECK(v == doctest::Approx(5e-14 + 9e-14).epsilon(1e-6));
  CHECK(max_violation(c, s.vars.W, aux) == doctest::Approx(9e-14).epsilon(1e-6));
  const double p1 = fp_perturbed - penalty_objective(c, s.vars.W, aux, s.model.noise, 0.2);
  const double p2 = fp_perturbed - penalty_objective(c, s.vars.W, aux, s.model.noise, 0.1);
  CHECK(p2 == doctest::Approx(2 * p1).epsilon(1e-9));
  CHECK(p1 == doctest::Approx(v / 0.4 / std::numbers::ln2).epsilon(1e-9));
  CHECK(fp != fp_perturbed);

  AuxVariables bigger = aux;
  bigger.x(4) += cdouble(3e-7, 0.0);
  CHECK(max_violation(c, s.vars.W, bigger) > max_violation(c, s.vars.W, aux));
}

TEST_CASE("metric report") {
  Sampled s = sampled(10);
  const MetricReport rep = evaluate(s.vars, s.model);
  double rate = 0.0;
  for (int k = 0; k < 2; ++k) {
    rate += std::log2(1.0 + rep.gamma(k));
    CHECK(rep.gamma(k) >= 0.0);
    CHECK(rep.gamma_e(k) >= 0.0);
    CHECK(rep.secrecy_lb(k) == doctest::Approx(secrecy_lower_bound(s.model.Gamma, s.model.Gamma_e)));
  }
  CHECK(rep.sum_rate == doctest::Approx(rate).epsilon(1e-14));
  CHECK(rep.power_used == doctest::Approx(s.vars.W.squaredNorm()));
  CHECK(rep.positions_in_region);
  s.vars.u[0] = Vec2(1.0, 0.0);
  CHECK_FALSE(evaluate(s.vars, s.model).positions_in_region);
}

TEST_CASE("normalization keeps every SINR and the radar bound") {
  Sampled s = sampled(12);
  s.model.noise = 1e-12;
  s.model.sigma_t2 = 3.0;
  const SystemModel n = s.model.normalized();
  CHECK(n.noise == 1.0);
  const MetricReport a = evaluate(s.vars, s.model);
  const MetricReport b = evaluate(s.vars, n);
  for (int k = 0; k < 2; ++k) {
    CHECK(b.gamma(k) == doctest::Approx(a.gamma(k)).epsilon(1e-12));
    CHECK(b.gamma_e(k) == doctest::Approx(a.gamma_e(k)).epsilon(1e-12));
  }
  CHECK(b.radar_lb == doctest::Approx(a.radar_lb).epsilon(1e-12));
}
