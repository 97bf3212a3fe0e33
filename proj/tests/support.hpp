#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "peer_astab/criterion.hpp"
#include "peer_astab/linalg.hpp"
#include "peer_astab/peer.hpp"

namespace test_support {

using namespace peer_astab;

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(PEER_ASTAB_FIXTURES) / name; }

inline Scalar q(long a, long b = 1) { return Scalar(Rational(a, b)); }
inline Scalar q65(long a, long b, long c, long d) { return Scalar(Rational(a, b), Rational(c, d), 65); }

inline ExactMatrix symmetrize_upper(ExactMatrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) m(i, j) = m(j, i);
  return m;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}

  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(gen); }
  Scalar rational(long range = 9, long max_den = 7) { return q(integer(-range, range), integer(1, max_den)); }
  Scalar quad(long range = 9, long max_den = 7, long d = 65) {
    return Scalar(Rational(integer(-range, range), integer(1, max_den)), Rational(integer(-range, range), integer(1, max_den)), d);
  }

  ExactMatrix matrix(std::size_t r, std::size_t c) {
    ExactMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m(i, j) = rational();
    return m;
  }
  ExactMatrix symmetric(std::size_t n) {
    ExactMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = rational();
    return m;
  }
  // A A^T + I: positive definite with small rational entries.
  ExactMatrix positive_definite(std::size_t n) {
    const ExactMatrix a = matrix(n, n);
    return a * a.transpose() + ExactMatrix::identity(n);
  }
  ExactMatrix nonsingular(std::size_t n) {
    for (;;) {
      ExactMatrix m = matrix(n, n);
      if (rank(m) == n) return m;
    }
  }
  NodeSet nodes(std::size_t s) {
    std::vector<Scalar> c;
    while (c.size() < s) {
      const Scalar x = rational(4, 5);
      bool fresh = true;
      for (const auto& y : c) fresh = fresh && !(x == y);
      if (fresh) c.push_back(x);
    }
    return NodeSet(c);
  }
  Vector<Scalar> vector(std::size_t n) {
    Vector<Scalar> v(n);
    for (auto& x : v) x = rational();
    return v;
  }
};

// Parallel 3-stage method, hat weights.
inline NodeSet ex52_nodes() { return NodeSet({q(0), q(2), q(1)}); }
inline ExactMatrix ex52_G() { return {{q(2, 5), 0, 0}, {0, q(20, 29), 0}, {0, 0, q(5, 11)}}; }
inline ExactMatrix ex52_B() {
  return {{q(1, 5), q(-1, 5), 1}, {q(-1, 29), q(37, 29), q(-7, 29)}, {q(-5, 22), q(7, 22), q(10, 11)}};
}
inline WeightPair<Scalar> ex52_hat() {
  ExactMatrix zh{{1, q(5, 3), q(-5, 2)}, {q(5, 3), 5, -5}, {q(-5, 2), -5, q(20, 3)}};
  ExactMatrix wh = ExactMatrix{{23, 20, -50}, {20, 37, -52}, {-50, -52, 116}} / Scalar(12);
  return {zh, wh, Representation::hat};
}
inline WeightPair<Scalar> ex52_original() {
  ExactMatrix z = symmetrize_upper({{q(25, 4), q(145, 24), q(-55, 4)}, {0, q(841, 80), q(-319, 20)}, {0, 0, q(484, 15)}});
  ExactMatrix w = symmetrize_upper({{37, 59, -91}, {0, 137, -167}, {0, 0, 236}}) / Scalar(12);
  return {z, w, Representation::original};
}

// Parallel 4-stage method, Nordsieck weights.
inline NodeSet ex53_nodes() { return NodeSet({q(-1), q(-2, 5), q(2, 5), q(1)}); }
inline ExactMatrix ex53_G() {
  return {{q(2, 5), 0, 0, 0}, {0, q(16, 25), 0, 0}, {0, 0, q(24, 25), 0}, {0, 0, 0, q(6, 5)}};
}
inline ExactMatrix ex53_B() {
  return {{q(-2, 15), q(25, 21), 0, q(-2, 35)},
          {q(-31, 525), q(4, 21), q(52, 35), q(-108, 175)},
          {q(31, 25), q(-138, 35), 6, q(-402, 175)},
          {q(116, 35), q(-135, 14), q(165, 14), q(-156, 35)}};
}
inline WeightPair<Scalar> ex53_nordsieck() {
  ExactMatrix z{{1, 0, q(-7, 6), q(-473, 375)},
                {0, q(5, 6), q(-1429, 2250), q(-2999, 2250)},
                {q(-7, 6), q(-1429, 2250), 5, 6},
                {q(-473, 375), q(-2999, 2250), 6, 16}};
  ExactMatrix w{{1, q(-1, 2), -1, q(31, 12)},
                {q(-1, 2), 1, q(-19, 12), q(679, 4500)},
                {-1, q(-19, 12), q(8329, 1125), q(-833, 100)},
                {q(31, 12), q(679, 4500), q(-833, 100), q(69, 2)}};
  return {z, w, Representation::nordsieck};
}
inline WeightPair<Scalar> ex53_original() {
  ExactMatrix z = symmetrize_upper({{q(1299365, 63504), q(-329675, 9072), q(19656575, 762048), q(-221965, 27216)},
                                    {0, q(2551515625, 32514048), q(-456171875, 6967296), q(66676975, 3048192)},
                                    {0, 0, q(530265625, 8128512), q(-719075, 31104)},
                                    {0, 0, 0, q(1615015, 190512)}});
  ExactMatrix w = symmetrize_upper({{q(743437, 79380), q(-3233059, 127008), q(1101553, 42336), q(-530603, 52920)},
                                    {0, q(4662305, 63504), q(-93605, 1176), q(433471, 14112)},
                                    {0, 0, q(1967785, 21168), q(-509231, 14112)},
                                    {0, 0, 0, q(93346, 6615)}});
  return {z, w, Representation::original};
}

// Singly diagonal 3-stage method over Q(sqrt 65).
inline NodeSet ex41_nodes() { return NodeSet({q(-1), q65(25, 12, -1, 4), q(1)}); }
inline ExactMatrix ex41_G() {
  return {{q(2, 5), 0, 0},
          {q65(207, 500, 3, 100), q(2, 5), 0},
          {q65(-3672, 30625, 72, 1225), q65(-468, 1225, 36, 245), q(2, 5)}};
}
inline ExactMatrix ex41_B() {
  return {{q65(817, 1960, -9, 392), q65(369, 784, 675, 10192), q65(9, 80, -9, 208)},
          {q65(1371, 6125, -39, 4900), q65(4001, 3920, -1917, 50960), q65(-489, 2000, 237, 5200)},
          {q65(55737, 245000, -117, 9800), q65(13869, 19600, -12393, 254800), q65(649, 10000, 63, 1040)}};
}
inline WeightPair<Scalar> ex41_original() {
  ExactMatrix z = symmetrize_upper(
      {{q65(3389263, 768320, 3518461, 6914880), q65(-902677, 460992, -577413, 1997632), q65(265, 672, 1415, 26208)},
       {0, q65(18279351, 7990528, 1358121, 7990528), q65(-34595, 69888, -1215, 23296)},
       {0, 0, q65(2825, 9984, 725, 29952)}});
  ExactMatrix w = symmetrize_upper(
      {{q65(1163, 10976, -767, 98784), q65(7585, 32928, -1647, 142688), q65(-1, 21, 29, 6552)},
       {0, q65(422145, 570752, 4383, 570752), q65(-7219, 34944, -15, 11648)},
       {0, 0, q65(1009, 4992, 253, 14976)}});
  return {z, w, Representation::original};
}
inline ExactMatrix ex41_What() {
  return symmetrize_upper(
      {{q65(76249, 76832, 63211, 691488), q65(-33793, 115248, -33073, 499408), q65(541, 4704, 2945, 183456)},
       {0, q65(1887495, 3995264, 90585, 3995264), q65(-16225, 244608, -661, 81536)},
       {0, 0, q65(121, 4992, 37, 14976)}});
}

// Singly diagonal 4-stage method, data given to ten digits.
inline RealMatrix ex42_E_check() {
  return {{0, 1.828746674, -2.100327482, -0.0374802335},
          {0, 0, 1.159613679, 0.0397218240},
          {0, 0, 0, 1.105306335},
          {0, 0, 0, 0}};
}
inline std::vector<double> ex42_nodes() { return {-0.889874593986289, 0.522100340305431, -0.297184898847891, 1.0}; }
constexpr double kEx42Eta = 1.80350113085004;
inline RealMatrix ex42_G() {
  return {{0.5544770574, 0, 0, 0},
          {1.249724440, 0.5544770574, 0, 0},
          {0.5816903621, -0.1016593761, 0.5544770574, 0},
          {1.591284531, 0.2616450399, -0.1745521833, 0.5544770574}};
}

inline PeerMethod method(const NodeSet& c, const ExactMatrix& g, FieldSpec f = FieldSpec::rational()) {
  return assemble_order_sm1(c, g, f);
}

}  // namespace test_support
