#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "isac/channel.hpp"
#include "isac/model.hpp"
#include "oracles.hpp"

using namespace isac;

namespace {

constexpr double kPi = std::numbers::pi;

PathAngles angles_of(std::initializer_list<std::pair<double, double>> list) {
  PathAngles a;
  a.elevation.resize(static_cast<Eigen::Index>(list.size()));
  a.azimuth.resize(static_cast<Eigen::Index>(list.size()));
  Eigen::Index i = 0;
  for (const auto& [el, az] : list) {
    a.elevation(i) = el;
    a.azimuth(i) = az;
    ++i;
  }
  return a;
}

PathAngles random_angles(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, kPi);
  PathAngles a;
  a.elevation.resize(n);
  a.azimuth.resize(n);
  for (int i = 0; i < n; ++i) {
    a.elevation(i) = u(rng);
    a.azimuth(i) = u(rng);
  }
  return a;
}

Scenario small_scenario() {
  Scenario s;
  s.M = 4;
  s.N1 = 4;
  s.N2 = 2;
  s.K = 2;
  s.Lp = 4;
  return s;
}

}  // namespace

TEST_CASE("path variance at 20 m") {
  // g0 20^-2.8 / 6 evaluates to 3.7928e-9
  const double v = path_variance(1e-4, 20.0, 2.8, 6);
  CHECK(v == doctest::Approx(3.792842e-9).epsilon(1e-6));
  CHECK(std::abs(v / 3.74e-9 - 1.0) < 0.03);
}

TEST_CASE("sampled path gains have the formula variance") {
  Scenario s;
  s.M = 1;
  s.N1 = 1;
  s.N2 = 1;
  s.K = 1;
  s.Lp = 6;
  s.bs_pos = Vec3(0, 0, 3);
  s.ris_pos = Vec3(0, 20, 3);
  const double expected = path_variance(s.g0, 20.0, s.alpha, s.Lp);
  double sum = 0.0;
  int n = 0;
  for (std::uint64_t seed = 1; n < 100000; ++seed) {
    const ChannelSet cs = sample_scenario(s, seed);
    for (int i = 0; i < s.Lp; ++i) {
      sum += std::norm(cs.sigma_bs(i, i));
      ++n;
    }
  }
  CHECK(std::abs(sum / n / expected - 1.0) < 0.03);
}

TEST_CASE("path-response matrices are diagonal") {
  const ChannelSet cs = sample_scenario(small_scenario(), 3);
  auto off_diagonal_zero = [](const ComplexMatrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (i != j && m(i, j) != cdouble(0.0, 0.0)) return false;
    return true;
  };
  CHECK(off_diagonal_zero(cs.sigma_bs));
  for (const auto& node : cs.nodes) CHECK(off_diagonal_zero(node.sigma));
}

TEST_CASE("sampling is deterministic in the seed") {
  const Scenario s = small_scenario();
  const ChannelSet a = sample_scenario(s, 11);
  const ChannelSet b = sample_scenario(s, 11);
  CHECK(a.H == b.H);
  CHECK(a.h0 == b.h0);
  for (size_t k = 0; k < a.nodes.size(); ++k) {
    CHECK(a.nodes[k].sigma == b.nodes[k].sigma);
    CHECK(a.nodes[k].G == b.nodes[k].G);
  }
  const ChannelSet c = sample_scenario(s, 12);
  CHECK(a.H != c.H);
}

TEST_CASE("sampled angles lie in [0, pi] and users on the circle") {
  const Scenario s = small_scenario();
  const ChannelSet cs = sample_scenario(s, 5);
  auto in_range = [](const PathAngles& a) {
    return a.elevation.minCoeff() >= 0.0 && a.elevation.maxCoeff() <= kPi && a.azimuth.minCoeff() >= 0.0 &&
           a.azimuth.maxCoeff() <= kPi;
  };
  CHECK(in_range(cs.bs_rx));
  CHECK(in_range(cs.bs_tx));
  for (const auto& n : cs.nodes) {
    CHECK(in_range(n.rx));
    CHECK(in_range(n.tx));
  }
  for (const auto& p : cs.user_positions) {
    CHECK((p - s.user_center).norm() == doctest::Approx(s.user_radius).epsilon(1e-12));
  }
  CHECK(cs.nodes[0].rx.size() == s.L0);
}

TEST_CASE("receive FRV examples") {
  const double lambda = 0.01;
  const PathAngles a = angles_of({{0.3, 1.1}, {2.0, 0.4}});
  const ComplexVector f0 = receive_frv(a, Vec2(0, 0), lambda);
  CHECK((f0 - ComplexVector::Ones(2)).norm() == 0.0);

  const PathAngles b = angles_of({{kPi / 2, 0.0}});
  const ComplexVector f1 = receive_frv(b, Vec2(lambda / 2, 0), lambda);
  CHECK(std::abs(f1(0) - cdouble(-1.0, 0.0)) < 1e-14);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pos(-0.02, 0.02);
  for (int t = 0; t < 20; ++t) {
    const PathAngles r = random_angles(rng, 5);
    const Vec2 u(pos(rng), pos(rng));
    const ComplexVector f = receive_frv(r, u, lambda);
    for (int i = 0; i < 5; ++i) {
      const double phase = 2 * kPi / lambda *
                           (u.x() * std::sin(r.elevation(i)) * std::cos(r.azimuth(i)) + u.y() * std::cos(r.elevation(i)));
      CHECK(std::abs(f(i) - std::exp(cdouble(0.0, phase))) < 1e-14);
    }
    CHECK(f.squaredNorm() == doctest::Approx(5.0).epsilon(1e-14));
  }
}

TEST_CASE("transmit FRM columns match receive FRVs") {
  const double lambda = 0.01;
  std::mt19937_64 rng(8);
  const PathAngles a = random_angles(rng, 3);
  const std::vector<Vec2> origin(4, Vec2::Zero());
  CHECK((transmit_frm(a, origin, lambda) - ComplexMatrix::Ones(3, 4)).norm() == 0.0);

  const auto pos = upa_positions(2, 3, lambda / 2);
  REQUIRE(pos.size() == 6);
  const ComplexMatrix G = transmit_frm(a, pos, lambda);
  for (size_t n = 0; n < pos.size(); ++n)
    CHECK((G.col(static_cast<Eigen::Index>(n)) - receive_frv(a, pos[n], lambda)).norm() < 1e-14);
  for (Eigen::Index i = 0; i < G.size(); ++i) CHECK(std::abs(std::abs(G(i)) - 1.0) < 1e-14);
}

TEST_CASE("UPA positions are centred with half-wavelength spacing") {
  const auto pos = upa_positions(2, 4, 0.005);
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pos) mean += p;
  CHECK(mean.norm() < 1e-15);
  CHECK((pos[1] - pos[0]).norm() == doctest::Approx(0.005));
  CHECK(near_square(16) == std::make_pair(4, 4));
  CHECK(near_square(8) == std::make_pair(2, 4));
  CHECK(near_square(6) == std::make_pair(2, 3));
  CHECK(near_square(7) == std::make_pair(1, 7));
}

TEST_CASE("RIS-to-node channel examples") {
  ComplexMatrix sigma = ComplexMatrix::Identity(1, 1);
  ComplexMatrix G = ComplexMatrix::Ones(1, 3);
  ComplexVector f = ComplexVector::Ones(1);
  CHECK((channel_ris_to_node(sigma, G, f) - ComplexVector::Ones(3)).norm() == 0.0);

  // one path: h_n = conj(f) s G_n
  sigma(0, 0) = cdouble(0.3, -0.7);
  G << cdouble(1, 0), cdouble(0, 1), cdouble(-1, 0);
  f(0) = std::polar(1.0, 0.4);
  const ComplexVector h = channel_ris_to_node(sigma, G, f);
  for (int n = 0; n < 3; ++n) CHECK(std::abs(h(n) - std::conj(f(0)) * sigma(0, 0) * G(0, n)) < 1e-15);

  CHECK_THROWS_AS(channel_ris_to_node(sigma, G, ComplexVector::Ones(2)), Error);
}

TEST_CASE("moving the antenna changes only the receive FRV") {
  const ChannelSet cs = sample_scenario(small_scenario(), 9);
  const ComplexMatrix sigma = cs.nodes[1].sigma;
  const ComplexMatrix G = cs.nodes[1].G;
  const ComplexVector h1 = cs.node_channel(1, Vec2(0.001, -0.002));
  const ComplexVector h2 = cs.node_channel(1, Vec2(-0.003, 0.004));
  CHECK(cs.nodes[1].sigma == sigma);
  CHECK(cs.nodes[1].G == G);
  CHECK((h1 - h2).norm() > 0.0);
  const ComplexVector direct = channel_ris_to_node(sigma, G, receive_frv(cs.nodes[1].rx, Vec2(0.001, -0.002), cs.lambda));
  CHECK((h1 - direct).norm() == 0.0);
}

TEST_CASE("BS-RIS channel reproduces from its factors") {
  const ChannelSet cs = sample_scenario(small_scenario(), 2);
  CHECK(cs.H.rows() == 8);
  CHECK(cs.H.cols() == 4);
  const ComplexMatrix again = cs.F_s.adjoint() * cs.sigma_bs * cs.G_b;
  CHECK((cs.H - again).norm() <= 1e-12 * cs.H.norm());
}

TEST_CASE("cascaded channel formulas agree") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    const ComplexVector h = oracle::random_vector(rng, 6);
    const ComplexMatrix H = oracle::random_matrix(rng, 6, 3);
    ComplexVector phi(6);
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    for (int n = 0; n < 6; ++n) phi(n) = std::polar(1.0, ang(rng));
    const ComplexVector g = cascaded_channel(h, phi, H);
    const Eigen::RowVectorXcd a = h.adjoint() * phi.asDiagonal() * H;
    const Eigen::RowVectorXcd b = phi.transpose() * h.conjugate().asDiagonal() * H;
    CHECK((g.adjoint() - a).norm() < 1e-13 * a.norm());
    CHECK((a - b).norm() < 1e-13 * a.norm());
    const ComplexVector rotated = cascaded_channel(h, phi * std::polar(1.0, 0.7), H);
    CHECK((rotated.cwiseAbs() - g.cwiseAbs()).norm() < 1e-13 * g.norm());
  }
  // scalar RIS
  ComplexVector h(1);
  h(0) = cdouble(0.2, 0.5);
  ComplexMatrix H(1, 2);
  H << cdouble(1, 1), cdouble(0, -2);
  const ComplexVector g = cascaded_channel(h, ComplexVector::Ones(1), H);
  CHECK((g.adjoint() - std::conj(h(0)) * H.row(0)).norm() < 1e-15);
  CHECK_THROWS_AS(cascaded_channel(h, ComplexVector::Ones(2), H), Error);
}

TEST_CASE("target response is the rank-one outer product") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 10; ++t) {
    const ComplexVector h0 = oracle::random_vector(rng, 5);
    const ComplexMatrix H = oracle::random_matrix(rng, 5, 3);
    ComplexVector phi(5);
    std::uniform_real_distribution<double> ang(0, 2 * kPi);
    for (int n = 0; n < 5; ++n) phi(n) = std::polar(1.0, ang(rng));
    const ComplexMatrix Ht = target_response(H, phi, h0);
    const ComplexMatrix Phi = phi.asDiagonal();
    const ComplexMatrix literal = H.adjoint() * Phi.adjoint() * (h0 * h0.adjoint()) * Phi * H;
    CHECK((Ht - literal).norm() < 1e-13 * literal.norm());
    const ComplexVector g0 = cascaded_channel(h0, phi, H);
    CHECK(Ht.trace().real() == doctest::Approx(g0.squaredNorm()).epsilon(1e-13));
    CHECK(is_hermitian(Ht, 1e-12));
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<ComplexMatrix>(Ht).eigenvalues();
    CHECK(ev(0) >= -1e-12 * ev(2));
    CHECK(std::abs(ev(1)) <= 1e-12 * ev(2));
  }
}

TEST_CASE("scenario validation and config parsing") {
  Scenario s;
  CHECK_NOTHROW(s.validate());
  s.K = 0;
  CHECK_THROWS_AS(s.validate(), Error);

  const Config cfg = Config::parse("# comment\nM = 4\nN1=4\nN2 = 2\nK=2\nPB_dBm = 32\nsigma_dBm=-90\nA_over_lambda=2\n");
  const Scenario t = Scenario::from_config(cfg);
  CHECK(t.M == 4);
  CHECK(t.N() == 8);
  CHECK(t.power == doctest::Approx(1.5849).epsilon(1e-4));
  CHECK(t.noise == doctest::Approx(1e-12).epsilon(1e-9));
  CHECK(t.region_width == doctest::Approx(2 * t.lambda));
  CHECK_THROWS_AS(Config::parse("M 4\n"), Error);
  CHECK_THROWS_AS(Scenario::from_config(Config::parse("M = four\n")), Error);
  CHECK_THROWS_AS(Config::parse("bogus = 1\n").check_known(Scenario::config_keys()), Error);
  CHECK_THROWS_AS(Config::load("/nonexistent/path.cfg"), Error);
}
