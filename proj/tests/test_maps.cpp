#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "peer_astab/maps.hpp"
#include "support.hpp"

using namespace peer_astab;
using namespace test_support;

namespace {

ExactMatrix shift(std::size_t s) { return e_tilde<Scalar>(s); }

// Symmetric X with X_kl = P_kl(x) for the entries listed, zero elsewhere.
ExactMatrix sym(std::size_t s, std::initializer_list<std::tuple<int, int, Scalar>> entries) {
  ExactMatrix m(s, s);
  for (const auto& [i, j, v] : entries) m(i - 1, j - 1) = m(j - 1, i - 1) = v;
  return m;
}

// Solves L_E(K) = 0 over the s(s+1)/2 upper entries by plain elimination.
std::size_t kernel_dimension(const ExactMatrix& e) {
  const std::size_t s = e.rows();
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i; j < s; ++j) idx.emplace_back(i, j);
  ExactMatrix a(idx.size(), idx.size());
  for (std::size_t c = 0; c < idx.size(); ++c) {
    ExactMatrix u(s, s);
    u(idx[c].first, idx[c].second) = u(idx[c].second, idx[c].first) = Scalar(1);
    const ExactMatrix img = map_L(e, u);
    for (std::size_t r = 0; r < idx.size(); ++r) a(r, c) = img(idx[r].first, idx[r].second);
  }
  return idx.size() - rank(a);
}

// Trailing block PSD matrix: support on indices > floor((s+1)/2).
ExactMatrix trailing_psd(Rng& rng, std::size_t s) {
  const std::size_t h = (s + 1) / 2, t = s - h;
  ExactMatrix u(s, s);
  if (t == 0) return u;
  const ExactMatrix b = rng.matrix(t, t);
  u.set_block(h, h, b * b.transpose());
  return u;
}

}  // namespace

TEST_CASE("map_L") {
  CHECK(map_L(shift(2), ExactMatrix::identity(2)) == ExactMatrix{{0, 1}, {1, 0}});
  for (std::size_t s = 1; s <= 6; ++s) {
    ExactMatrix ess(s, s);
    ess(s - 1, s - 1) = Scalar(1);
    CHECK(map_L(shift(s), ess).is_zero());
  }
  Rng rng(41);
  const ExactMatrix x = rng.symmetric(4);
  CHECK(map_L(ExactMatrix(4, 4), x).is_zero());
  CHECK(map_L(shift(4), x).is_symmetric());
}

TEST_CASE("map_P") {
  CHECK(map_P(shift(2), ExactMatrix::identity(2)) == ExactMatrix{{0, 1}, {1, 1}});
  Rng rng(42);
  CHECK(map_P(ExactMatrix(3, 3), rng.symmetric(3)).is_zero());
  for (std::size_t s = 1; s <= 6; ++s)
    for (const auto& k : kernel_basis<Scalar>(s)) CHECK(map_P(shift(s), k).is_zero());
}

TEST_CASE("map_Phi") {
  CHECK(map_Phi(ExactMatrix{{-1, 1}, {-1, 1}}, ExactMatrix::identity(2)) ==
        ExactMatrix{{q(2, 3), q(-2, 3)}, {q(-2, 3), q(8, 3)}});
  Rng rng(43);
  const ExactMatrix x = rng.symmetric(3);
  CHECK(map_Phi(ExactMatrix(3, 3), x) == x);
  for (std::size_t s = 1; s <= 6; ++s)
    for (const auto& k : kernel_basis<Scalar>(s)) CHECK(map_Phi(shift(s), k) == k);
}

TEST_CASE("map_Psi") {
  const ExactMatrix psi = map_Psi(shift(2), ExactMatrix::identity(2));
  CHECK(psi == ExactMatrix{{1, q(-1, 2)}, {q(-1, 2), q(7, 6)}});
  CHECK(map_Phi(shift(2), psi) == ExactMatrix::identity(2));
  Rng rng(44);
  const ExactMatrix x = rng.symmetric(4);
  CHECK(map_Psi(ExactMatrix(4, 4), x) == x);
  for (std::size_t s = 1; s <= 6; ++s)
    for (const auto& k : kernel_basis<Scalar>(s)) CHECK(map_Psi(shift(s), k) == k);
}

TEST_CASE("factorization P = L Phi = Phi L") {
  Rng rng(45);
  for (int t = 0; t < 60; ++t) {
    const std::size_t s = static_cast<std::size_t>(1 + t % 6);
    const ExactMatrix e = shift(s), x = rng.symmetric(s);
    const ExactMatrix p = map_P(e, x);
    CHECK(p == map_L(e, map_Phi(e, x)));
    CHECK(p == map_Phi(e, map_L(e, x)));
  }
  // also for E similar to the shift
  for (int t = 0; t < 20; ++t) {
    const NodeSet c = rng.nodes(static_cast<std::size_t>(rng.integer(1, 5)));
    const ExactMatrix e = build_E_Theta(c).E, x = rng.symmetric(c.size());
    CHECK(map_P(e, x) == map_L(e, map_Phi(e, x)));
  }
}

TEST_CASE("Phi keeps positive definiteness") {
  Rng rng(46);
  for (int t = 0; t < 100; ++t) {
    const std::size_t s = static_cast<std::size_t>(1 + t % 5);
    const ExactMatrix x = rng.positive_definite(s);
    CHECK(psd_check(map_Phi(shift(s), x)).verdict == Definiteness::positive_definite);
  }
}

TEST_CASE("congruence covariance") {
  Rng rng(47);
  for (int t = 0; t < 40; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 5));
    const ExactMatrix e = shift(s), x = rng.symmetric(s), u = rng.nonsingular(s);
    const ExactMatrix lhs = u.transpose() * map_Phi(e, x) * u;
    CHECK(lhs == map_Phi(inverse(u) * e * u, u.transpose() * x * u));
  }
}

TEST_CASE("Phi and Psi are inverse") {
  Rng rng(48);
  for (int t = 0; t < 60; ++t) {
    const std::size_t s = static_cast<std::size_t>(1 + t % 6);
    const ExactMatrix e = t % 2 ? shift(s) : build_E_Theta(rng.nodes(s)).E;
    const ExactMatrix x = rng.symmetric(s);
    CHECK(map_Phi(e, map_Psi(e, x)) == x);
    CHECK(map_Psi(e, map_Phi(e, x)) == x);
  }
}

TEST_CASE("series terminates at 2s-1") {
  Rng rng(49);
  for (std::size_t s = 1; s <= 6; ++s) {
    const ExactMatrix e = shift(s);
    for (int t = 0; t < 10; ++t) {
      ExactMatrix xk = rng.symmetric(s);
      for (std::size_t k = 0; k < 2 * s - 1; ++k) xk = map_L(e, xk);
      CHECK(xk.is_zero());
    }
    // the identity reaches the last nonzero power at 2s-2
    ExactMatrix xk = ExactMatrix::identity(s);
    for (std::size_t k = 0; k < 2 * s - 2; ++k) xk = map_L(e, xk);
    CHECK_FALSE(xk.is_zero());
  }
}

TEST_CASE("kernel basis") {
  const auto k3 = kernel_basis<Scalar>(3);
  REQUIRE(k3.size() == 2);
  const ExactMatrix e33 = sym(3, {{3, 3, q(1)}});
  const ExactMatrix anti = ExactMatrix{{0, 0, 1}, {0, q(-1, 2), 0}, {1, 0, 0}};
  CHECK(k3[0] == anti);
  CHECK(k3[1] == e33);
  CHECK(kernel_dimension(shift(3)) == 2);

  const auto k1 = kernel_basis<Scalar>(1);
  REQUIRE(k1.size() == 1);
  CHECK(k1[0] == ExactMatrix{{1}});

  const auto k4 = kernel_basis<Scalar>(4);
  REQUIRE(k4.size() == 2);
  // parameters x33, x44: the basis elements are normalized on the last column
  CHECK(k4[0](1, 3) == q(1));
  CHECK(k4[0](2, 2) == q(-2, 3));
  CHECK(k4[1] == sym(4, {{4, 4, q(1)}}));

  for (std::size_t s = 1; s <= 7; ++s) {
    const auto basis = kernel_basis<Scalar>(s);
    CHECK(basis.size() == (s + 1) / 2);
    CHECK(kernel_dimension(shift(s)) == (s + 1) / 2);
    for (const auto& k : basis) {
      CHECK(k.is_symmetric());
      CHECK(map_L(shift(s), k).is_zero());
      for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j)
          if (i + j + 2 <= s || (i + j) % 2) CHECK(k(i, j).is_zero());
    }
  }

  Rng rng(50);
  for (int t = 0; t < 20; ++t) {
    const std::size_t s = static_cast<std::size_t>(rng.integer(1, 5));
    const ExactMatrix u = rng.nonsingular(s);
    const ExactMatrix e = u * shift(s) * inverse(u);
    const auto basis = kernel_basis(u);
    CHECK(basis.size() == kernel_dimension(e));
    for (const auto& k : basis) CHECK(map_L(e, k).is_zero());
  }
}

TEST_CASE("preimage of the four stage shift") {
  Rng rng(51);
  for (int t = 0; t < 30; ++t) {
    const Scalar u33 = rng.rational(), u34 = rng.rational(), u44 = rng.rational();
    const Scalar x33 = rng.rational(), x44 = rng.rational();
    const ExactMatrix target = sym(4, {{3, 3, u33}, {3, 4, u34}, {4, 4, u44}});
    const auto pre = preimage_P(shift(4), target, {{{2, 2}, x33}, {{3, 3}, x44}});
    // x34 carries -u34/2; -u34/3 would miss P(X) = U
    const ExactMatrix expect = sym(4, {{1, 4, q(-3, 4) * u33},
                                       {2, 3, q(1, 4) * u33},
                                       {2, 4, q(-3, 2) * x33 - q(3, 4) * u33 + q(1, 2) * u34},
                                       {3, 3, x33},
                                       {3, 4, q(1, 4) * u33 - q(1, 2) * u34 + q(1, 6) * u44},
                                       {4, 4, x44}});
    CHECK(pre.X == expect);
    CHECK(pre.free_entries == std::vector<EntryIndex>{{2, 2}, {3, 3}});
  }
  CHECK_THROWS_AS(preimage_P(shift(4), sym(4, {{1, 1, q(1)}})), InconsistentSystemError);
  CHECK_THROWS_AS(preimage_P(shift(4), ExactMatrix(4, 4), {{{0, 0}, q(1)}}), std::invalid_argument);
}

TEST_CASE("preimage basics") {
  const auto zero = preimage_P(shift(4), ExactMatrix(4, 4), {{{2, 2}, q(3)}, {{3, 3}, q(-2)}});
  CHECK(map_L(shift(4), zero.X).is_zero());
  const auto k4 = kernel_basis<Scalar>(4);
  CHECK(zero.X == q(3) / k4[0](2, 2) * k4[0] + q(-2) * k4[1]);

  const ExactMatrix target = sym(3, {{3, 3, q(4)}});
  const auto pre = preimage_P(shift(3), target);
  CHECK(map_P(shift(3), pre.X) == target);
}

TEST_CASE("PSD images have the trailing zero pattern") {
  Rng rng(52);
  for (int t = 0; t < 60; ++t) {
    const std::size_t s = static_cast<std::size_t>(2 + t % 5);
    const ExactMatrix u = trailing_psd(rng, s);
    Preimage pre;
    try {
      pre = preimage_P(shift(s), u);
    } catch (const InconsistentSystemError&) {
      continue;
    }
    CHECK(map_P(shift(s), pre.X) == u);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j)
        if (i + j + 2 <= s) CHECK(pre.X(i, j).is_zero());
  }
  // a PSD matrix touching the leading block is never an image
  for (int t = 0; t < 40; ++t) {
    const std::size_t s = static_cast<std::size_t>(2 + t % 5);
    ExactMatrix u = trailing_psd(rng, s);
    u(0, 0) += q(1 + t % 3);
    CHECK_THROWS_AS(preimage_P(shift(s), u), InconsistentSystemError);
  }
}

TEST_CASE("float preimage") {
  const RealMatrix target = to_real(sym(4, {{3, 3, q(2)}, {3, 4, q(1)}, {4, 4, q(5)}}));
  const auto pre = preimage_P(to_real(shift(4)), target, {{{2, 2}, 0.5}, {{3, 3}, -1.0}});
  CHECK(pre.residual < 1e-12);
  CHECK(pre.X(2, 2) == 0.5);
  CHECK(pre.X(3, 3) == -1.0);
  CHECK(pre.X(0, 3) == doctest::Approx(-1.5).epsilon(1e-12));

  const auto bad = preimage_P(to_real(shift(3)), RealMatrix::identity(3), {});
  CHECK(bad.residual > 1e-3);
}

TEST_CASE("Bernoulli numbers and psi") {
  const auto beta = bernoulli_table(4);
  REQUIRE(beta.size() == 4);
  CHECK(beta[0] == Rational(1, 6));
  CHECK(beta[1] == Rational(1, 30));
  CHECK(beta[2] == Rational(1, 42));
  CHECK(beta[3] == Rational(1, 30));

  const auto psi = psi_coefficients(4);
  CHECK(psi == std::vector<Rational>{Rational(1), Rational(-1, 2), Rational(1, 12), Rational(0), Rational(-1, 720)});

  for (std::size_t s = 1; s <= 7; ++s) {
    const std::size_t n = 2 * s - 2;
    const auto p = psi_coefficients(n);
    std::vector<Rational> phi(n + 1);
    Rational f(1);
    for (std::size_t k = 0; k <= n; ++k) {
      f /= Rational(static_cast<long>(k + 1));
      phi[k] = f;
    }
    for (std::size_t d = 0; d <= n; ++d) {
      Rational acc(0);
      for (std::size_t k = 0; k <= d; ++k) acc += p[k] * phi[d - k];
      CHECK(acc == Rational(d == 0 ? 1 : 0));
    }
  }
}
