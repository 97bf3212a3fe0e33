#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "peer_astab/criterion.hpp"
#include "peer_astab/maps.hpp"
#include "support.hpp"

using namespace peer_astab;
using namespace test_support;

namespace {

const FieldSpec kQ65 = FieldSpec::quadratic(65);

std::vector<double> sorted_eigenvalues(const ExactMatrix& m) {
  auto ev = eig_symmetric(to_real(m));
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Weighted random PD seed with a little structure.
ExactMatrix seed(Rng& rng, std::size_t s) { return rng.positive_definite(s); }

Vector<Scalar> ones(std::size_t n) { return Vector<Scalar>(n, Scalar(1)); }

}  // namespace

TEST_CASE("original form on the worked examples") {
  const auto m52 = method(ex52_nodes(), ex52_G());
  const ExactMatrix t52 = build_test_original(m52, ex52_original());
  CHECK(t52.is_symmetric());
  CHECK(rank(t52) == 3);
  CHECK(psd_check(t52).semidefinite());

  const ExactMatrix zero = build_test_original(m52, {ExactMatrix(3, 3), ExactMatrix(3, 3), Representation::original});
  CHECK(zero.is_zero());
  const auto degenerate = certify(m52, {ExactMatrix(3, 3), ExactMatrix(3, 3), Representation::original});
  CHECK_FALSE(degenerate.a_stable);
  CHECK(degenerate.certificate.semidefinite());

  const auto m41 = method(ex41_nodes(), ex41_G(), kQ65);
  const ExactMatrix t41 = build_test_original(m41, ex41_original());
  CHECK(rank(t41) == 3);
  const auto ev = sorted_eigenvalues(t41);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(ev[i]) < 1e-9);
  CHECK(ev[3] >= 0.127 - 1e-2);
  CHECK(ev[5] <= 3.033 + 1e-2);
  CHECK(sorted_eigenvalues(ex41_original().Z)[0] == doctest::Approx(0.204).epsilon(5e-3));
  CHECK(sorted_eigenvalues(ex41_original().W)[0] == doctest::Approx(0.0167).epsilon(5e-3));
}

TEST_CASE("hat form") {
  const auto m52 = method(ex52_nodes(), ex52_G());
  const ExactMatrix h52 = build_test_hat(m52, ex52_hat());
  CHECK(h52.block(0, 0, 3, 6).is_zero());
  CHECK(h52.block(3, 3, 3, 3) == ex52_hat().W);
  CHECK(psd_check(h52).semidefinite());

  // S^T M S with S = [[I, 0], [Theta^-1, Theta^-1]]
  Rng rng(61);
  for (int t = 0; t < 30; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 4));
    const auto m = method(rng.nodes(s), rng.nonsingular(s));
    const WeightPair<Scalar> w{rng.symmetric(s), rng.symmetric(s), Representation::original};
    const ExactMatrix theta_inv = inverse(build_E_Theta(m.nodes).Theta);
    const ExactMatrix sm = block_matrix(ExactMatrix::identity(s), ExactMatrix(s, s), theta_inv, theta_inv);
    const auto hat = transform_weights(m, w, Representation::hat);
    CHECK(build_test_hat(m, hat) == sm.transpose() * build_test_original(m, w) * sm);
  }

  const auto m41 = method(ex41_nodes(), ex41_G(), kQ65);
  const auto hat41 = transform_weights(m41, ex41_original(), Representation::hat);
  const ExactMatrix h41 = build_test_hat(m41, hat41);
  CHECK(h41.block(0, 0, 3, 6).is_zero());
  CHECK(psd_check(h41.block(3, 3, 3, 3)).verdict == Definiteness::positive_definite);
}

TEST_CASE("generic form") {
  const ExactMatrix et = e_tilde<Scalar>(4);
  const auto nord = ex53_nordsieck();
  const auto m53 = method(ex53_nodes(), ex53_G());
  const ExactMatrix v = vandermonde(m53.nodes);
  const ExactMatrix h_tilde = inverse(v) * inverse(m53.G) * v;
  const ExactMatrix g53 = build_test_generic(et, h_tilde, nord.W, nord.Z);
  const auto cert = psd_check(g53);
  CHECK(cert.semidefinite());
  CHECK(cert.rank == 6);

  Rng rng(62);
  const ExactMatrix e = build_E_Theta(rng.nodes(3)).E;
  const ExactMatrix w = rng.positive_definite(3);
  const ExactMatrix z = map_Phi(e, w);
  const ExactMatrix h = e + solve(z, w);
  const ExactMatrix g = build_test_generic(e, h, w, z);
  CHECK(g.block(0, 0, 3, 6).is_zero());
  CHECK(build_test_generic(e, h, ExactMatrix(3, 3), ExactMatrix(3, 3)).is_zero());
}

TEST_CASE("certify the worked examples") {
  const auto r52 = certify(method(ex52_nodes(), ex52_G()), ex52_original());
  CHECK(r52.a_stable);
  CHECK(r52.certificate.rank == 3);
  CHECK(r52.order_conditions);

  const auto r53 = certify(method(ex53_nodes(), ex53_G()), ex53_nordsieck());
  CHECK(r53.a_stable);
  CHECK(r53.certificate.rank == 6);
  CHECK(r53.block_defect == 2);
  REQUIRE(r53.nontrivial_block);
  CHECK(r53.nontrivial_block->rows() == 6);
  CHECK(r53.nontrivial_definiteness == Definiteness::positive_definite);

  CHECK(certify(method(ex41_nodes(), ex41_G(), kQ65), ex41_original()).a_stable);
}

TEST_CASE("perturbed weights give a witness") {
  const auto m52 = method(ex52_nodes(), ex52_G());
  auto w = ex52_hat();
  w.W(0, 0) -= Scalar(1);
  const auto r = certify(m52, w);
  CHECK_FALSE(r.a_stable);
  CHECK(r.certificate.verdict == Definiteness::indefinite);
  REQUIRE(r.certificate.witness);
  CHECK(quadratic_form(r.matrix, *r.certificate.witness) < Scalar(0));
  // float oracle: the perturbed block has a negative eigenvalue
  CHECK(sorted_eigenvalues(w.W)[0] < 0);
}

TEST_CASE("certify rejects A != 0 and malformed input") {
  auto m = method(ex52_nodes(), ex52_G());
  m.A(0, 0) = Scalar(1);
  CHECK_THROWS_AS(certify(m, ex52_hat()), PreconditionError);
  const auto m52 = method(ex52_nodes(), ex52_G());
  CHECK_THROWS(certify(m52, {ExactMatrix::identity(2), ExactMatrix::identity(2), Representation::hat}));
  auto w = ex52_hat();
  w.W(0, 1) += Scalar(1);
  CHECK_THROWS(certify(m52, w));
  auto surd = ex52_hat();
  surd.W(0, 0) = q65(1, 1, 1, 1);
  CHECK_THROWS_AS(certify(m52, surd), PreconditionError);
}

TEST_CASE("congruence consistency across forms") {
  Rng rng(63);
  const Representation all[] = {Representation::original, Representation::hat, Representation::nordsieck};
  int stable = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 4));
    PeerMethod m;
    WeightPair<Scalar> w;
    if (t % 2) {
      const auto made = construct_general(rng.nodes(s), seed(rng, s), FieldSpec::rational());
      m = made.method;
      w = made.weights;
    } else {
      m = method(rng.nodes(s), rng.nonsingular(s));
      w = {rng.positive_definite(s), rng.positive_definite(s), Representation::hat};
    }
    std::vector<TestMatrixReport> reports;
    for (auto r : all) reports.push_back(certify(m, transform_weights(m, w, r)));
    for (const auto& r : reports) {
      CHECK(r.certificate.verdict == reports[0].certificate.verdict);
      CHECK(r.certificate.rank == reports[0].certificate.rank);
      CHECK(r.a_stable == reports[0].a_stable);
    }
    stable += reports[0].a_stable;
  }
  CHECK(stable >= 20);
}

TEST_CASE("ones vector is in the kernel") {
  Rng rng(64);
  const auto check = [](const PeerMethod& m, const WeightPair<Scalar>& w) {
    const auto orig = transform_weights(m, w, Representation::original);
    const ExactMatrix t = build_test_original(m, orig);
    if (!psd_check(t).semidefinite()) return;
    for (const auto& x : t * ones(t.rows())) CHECK(x.is_zero());
  };
  check(method(ex52_nodes(), ex52_G()), ex52_original());
  check(method(ex53_nodes(), ex53_G()), ex53_original());
  for (int t = 0; t < 20; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 4));
    const auto made = construct_general(rng.nodes(s), seed(rng, s), FieldSpec::rational());
    check(made.method, made.weights);
  }
}

TEST_CASE("Nordsieck form has leading zero rows") {
  Rng rng(65);
  for (int t = 0; t < 25; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 5));
    const auto made = construct_general(rng.nodes(s), seed(rng, s), FieldSpec::rational());
    const auto r = certify(made.method, transform_weights(made.method, made.weights, Representation::nordsieck));
    REQUIRE(r.certificate.semidefinite());
    const std::size_t k = (s + 1) / 2;
    CHECK(r.block_defect >= k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < 2 * s; ++j) CHECK(r.matrix(i, j).is_zero());
  }
}

TEST_CASE("necessary conditions") {
  for (const auto& [m, w] : {std::pair{method(ex52_nodes(), ex52_G()), ex52_original()},
                             std::pair{method(ex53_nodes(), ex53_G()), ex53_original()}}) {
    const auto [a, b] = necessary_conditions(m, w);
    for (const auto& x : a) CHECK(x.is_zero());
    for (const auto& x : b) CHECK(x.is_zero());
  }
  // G = I and a random preconsistent B
  Rng rng(66);
  PeerMethod m = method(ex52_nodes(), ExactMatrix::identity(3));
  m.B = rng.matrix(3, 3);
  for (std::size_t i = 0; i < 3; ++i) m.B(i, 2) = Scalar(1) - m.B(i, 0) - m.B(i, 1);
  m.order_sm1 = false;
  const auto [a, b] = necessary_conditions(m, {ExactMatrix::identity(3), ExactMatrix::identity(3), Representation::original});
  bool nonzero = false;
  for (const auto& x : a) nonzero = nonzero || !x.is_zero();
  for (const auto& x : b) nonzero = nonzero || !x.is_zero();
  CHECK(nonzero);
}

TEST_CASE("construct_general") {
  const auto two = construct_general(NodeSet({q(0), q(1)}), ExactMatrix::identity(2), FieldSpec::rational());
  CHECK(two.weights.Z == ExactMatrix{{q(2, 3), q(-2, 3)}, {q(-2, 3), q(8, 3)}});
  CHECK(inverse(two.method.G) == ExactMatrix{{q(1), q(3, 2)}, {q(-1, 2), q(3, 2)}});
  CHECK(two.method.G == ExactMatrix{{q(2, 3), q(-2, 3)}, {q(2, 9), q(4, 9)}});

  const auto one = construct_general(NodeSet({q(1)}), ExactMatrix{{q(7, 3)}}, FieldSpec::rational());
  CHECK(one.weights.Z == ExactMatrix{{q(7, 3)}});
  CHECK(one.method.G == ExactMatrix{{1}});

  CHECK_THROWS_AS(construct_general(ex52_nodes(), ExactMatrix{{1, 0, 0}, {0, -1, 0}, {0, 0, 1}}, FieldSpec::rational()),
                  std::invalid_argument);

  Rng rng(67);
  for (int t = 0; t < 36; ++t) {
    const std::size_t s = static_cast<std::size_t>(1 + t % 6);
    const NodeSet c = t < 6 ? ex52_nodes() : rng.nodes(s);
    const auto made = construct_general(c, seed(rng, c.size()), FieldSpec::rational());
    const auto r = certify(made.method, made.weights);
    CHECK(r.a_stable);
    CHECK(r.matrix.block(0, 0, c.size(), 2 * c.size()).is_zero());
    // eigenvalues of G in the closed right half plane
    for (auto lambda : eig_float(to_real(made.method.G))) CHECK(lambda.real() >= -1e-12);
  }
}

TEST_CASE("construct_param") {
  const ExactMatrix e = e_tilde<Scalar>(4);
  const ExactMatrix w0 = ExactMatrix::identity(4) * Scalar(10);

  SlackSpec none{ExactMatrix(4, 4), ExactMatrix(4, 4), {}};
  const auto plain = construct_param(e, w0, none);
  CHECK(plain.weights.Z == map_Phi(e, w0));
  CHECK(plain.H == e + solve(map_Phi(e, w0), w0));
  CHECK(plain.certificate.semidefinite());

  ExactMatrix m11(4, 4);
  m11(2, 2) = q(1);
  m11(3, 3) = q(2);
  SlackSpec slack{m11, ExactMatrix(4, 4), {q(0), q(4)}};
  const auto sol = construct_param(e, w0, slack);
  ExactMatrix k44(4, 4);
  k44(3, 3) = q(4);
  CHECK(sol.kernel == k44);
  CHECK(map_P(e, sol.preimage) == m11);
  CHECK(sol.test_matrix.block(0, 0, 4, 4) == m11);
  CHECK(sol.certificate.semidefinite());
  CHECK(sol.certificate.rank == 6);

  CHECK_THROWS_AS(construct_param(e, ExactMatrix::identity(4), slack), InfeasibleSlackError);
  SlackSpec huge{ExactMatrix(4, 4), ExactMatrix(4, 4), {q(0), q(1000)}};
  try {
    construct_param(e, w0, huge);
    FAIL("huge kernel coefficient accepted");
  } catch (const InfeasibleSlackError& err) {
    REQUIRE(err.witness());
    const ExactMatrix w_hat = w0 - Scalar(1000) * symmetric_kernel(e)[1];
    CHECK(quadratic_form(w_hat, *err.witness()) < Scalar(0));
    CHECK_FALSE(psd_check(w_hat).semidefinite());
  }
}

TEST_CASE("construct_zfree") {
  Rng rng(68);
  const ExactMatrix k = ExactMatrix{{0, 0, 1}, {0, q(-1, 2), 0}, {1, 0, 0}} * q(1, 10);
  const auto zero = construct_zfree(ExactMatrix(3, 3), k);
  CHECK(zero.W == ExactMatrix::identity(3) + k);
  CHECK(zero.H == ExactMatrix::identity(3) + k);

  // seed of the singly-implicit three stage method
  RealMatrix e(3, 3);
  e(0, 1) = 1.5;
  e(0, 2) = -3.0 / 14 * std::sqrt(91.0);
  e(1, 2) = 24.0 / 35 * std::sqrt(35.0);
  RealMatrix kappa(3, 3);
  kappa(2, 2) = 174.0 / 175;
  const auto z = construct_zfree(e, kappa);
  const double r7 = std::sqrt(7.0), r5 = std::sqrt(5.0), r13 = std::sqrt(13.0);
  const RealMatrix h{{1, 0.75, (-15 * r13 + 12 * r5) / 140 * r7},
                     {-0.75, 11.0 / 8, (96 * r5 - 15 * r13) / 280 * r7},
                     {(15 * r13 + 12 * r5) / 140 * r7, (-96 * r5 - 15 * r13) / 280 * r7, 41.0 / 8}};
  CHECK(max_abs(z.H - h) < 1e-9);
  CHECK(z.H(1, 1) == doctest::Approx(11.0 / 8).epsilon(1e-12));

  for (int t = 0; t < 30; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 5));
    ExactMatrix en(s, s);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) en(i, j) = rng.rational(2, 3);
    ExactMatrix kk(s, s);
    kk(s - 1, s - 1) = q(rng.integer(0, 4));
    ZFreeSolution<Scalar> sol;
    try {
      sol = construct_zfree(en, kk);
    } catch (const std::invalid_argument&) {
      continue;
    }
    CHECK(sol.H - sol.H.transpose() == en - en.transpose());
    const ExactMatrix mg = build_test_generic(en, sol.H, sol.W, ExactMatrix::identity(s));
    CHECK(mg.block(0, 0, s, 2 * s).is_zero());
    CHECK(psd_check(mg).semidefinite());
  }

  CHECK_THROWS_AS(construct_zfree(ExactMatrix(2, 2), ExactMatrix{{0, 0}, {0, -5}}), std::invalid_argument);
  CHECK_THROWS_AS(construct_zfree(e_tilde<Scalar>(2), ExactMatrix{{1, 0}, {0, 0}}), std::invalid_argument);
}

TEST_CASE("zero-slack weight search") {
  const auto made = construct_general(NodeSet({q(0), q(1)}), ExactMatrix::identity(2), FieldSpec::rational());
  const auto found = find_weights_zero_slack(made.method.nodes, made.method.G);
  REQUIRE(found.weights);
  CHECK(certify(made.method, *found.weights).a_stable);

  const auto m52 = method(ex52_nodes(), ex52_G());
  const auto f52 = find_weights_zero_slack(m52.nodes, m52.G);
  REQUIRE(f52.weights);
  CHECK(certify(m52, *f52.weights).a_stable);

  const auto neg = find_weights_zero_slack(ex52_nodes(), -ExactMatrix::identity(3));
  CHECK_FALSE(neg.weights);
  CHECK(neg.samples_tried > 0);

  CHECK_THROWS_AS(find_weights_zero_slack(ex52_nodes(), ExactMatrix(3, 3)), PreconditionError);
}

TEST_CASE("q(E) similarity keeps solutions") {
  Rng rng(69);
  for (int t = 0; t < 20; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(2, 4));
    const NodeSet c = rng.nodes(s);
    const ExactMatrix e = build_E_Theta(c).E;
    const ExactMatrix w0 = seed(rng, s);
    const auto made = construct_general(c, w0, FieldSpec::rational());
    const ExactMatrix h = inverse(made.method.G);

    ExactMatrix qe = ExactMatrix::identity(s), power = ExactMatrix::identity(s);
    for (std::size_t k = 1; k < s; ++k) {
      power = power * e;
      qe += rng.rational(3, 4) * power;
    }
    const ExactMatrix h2 = inverse(qe) * h * qe;
    const ExactMatrix w2 = qe.transpose() * w0 * qe;
    CHECK(h2 == e + solve(map_Phi(e, w2), w2));

    const PeerMethod m2 = method(c, inverse(h2));
    const auto r = certify(m2, {map_Phi(e, w2), w2, Representation::hat});
    CHECK(r.a_stable);
  }
}

TEST_CASE("symmetric kernel") {
  CHECK(symmetric_kernel(e_tilde<Scalar>(4)).size() == 2);
  const ExactMatrix e = build_E_Theta(ex52_nodes()).E;
  const auto basis = symmetric_kernel(e);
  CHECK(basis.size() == 2);
  for (const auto& k : basis) CHECK(map_L(e, k).is_zero());
}
