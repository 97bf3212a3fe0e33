#include "peer_astab/peer.hpp"

#include <cmath>
#include <stdexcept>

namespace peer_astab {

template <class T>
BasicNodeSet<T>::BasicNodeSet(std::vector<T> c) : c_(std::move(c)) {
  if (c_.empty()) throw std::invalid_argument("node set is empty");
  for (std::size_t i = 0; i < c_.size(); ++i)
    for (std::size_t j = i + 1; j < c_.size(); ++j)
      if (c_[i] == c_[j])
        throw std::invalid_argument("nodes " + std::to_string(i + 1) + " and " +
                                    std::to_string(j + 1) + " coincide");
}

template <class T>
Matrix<T> vandermonde(const BasicNodeSet<T>& nodes) {
  const std::size_t s = nodes.size();
  Matrix<T> v(s, s);
  for (std::size_t i = 0; i < s; ++i) {
    T p(1);
    for (std::size_t j = 0; j < s; ++j) {
      v(i, j) = p;
      p *= nodes[i];
    }
  }
  return v;
}

namespace {

// Complete homogeneous symmetric polynomials h_0..h_deg of xs.
template <class T>
std::vector<T> complete_homogeneous(const std::vector<T>& xs, std::size_t deg) {
  std::vector<T> h(deg + 1);
  h[0] = T(1);
  for (const T& x : xs)
    for (std::size_t k = 1; k <= deg; ++k) h[k] += x * h[k - 1];
  return h;
}

// Elementary symmetric polynomials e_0..e_n of xs.
template <class T>
std::vector<T> elementary(const std::vector<T>& xs) {
  std::vector<T> e(xs.size() + 1);
  e[0] = T(1);
  for (std::size_t n = 0; n < xs.size(); ++n)
    for (std::size_t k = n + 1; k >= 1; --k) e[k] += xs[n] * e[k - 1];
  return e;
}

}  // namespace

template <class T>
VandermondeFactors<T> vdm_lu_factors(const BasicNodeSet<T>& nodes) {
  const std::size_t s = nodes.size();
  const auto& c = nodes.values();
  VandermondeFactors<T> f{Matrix<T>(s, s), Matrix<T>(s, s), Matrix<T>(s, s), Matrix<T>(s, s)};
  for (std::size_t i = 0; i < s; ++i) {
    // Newton basis evaluated at c_i.
    T p(1);
    for (std::size_t j = 0; j <= i; ++j) {
      f.L(i, j) = p;
      p *= c[i] - c[j];
    }
    // Divided-difference weights.
    for (std::size_t j = 0; j <= i; ++j) {
      T q(1);
      for (std::size_t k = 0; k <= i; ++k)
        if (k != j) q *= c[j] - c[k];
      f.L_inv(i, j) = T(1) / q;
    }
    // Monomial x^j in the Newton basis: coefficient h_{j-i}(c_1..c_i).
    const std::vector<T> lead(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(i + 1));
    const auto h = complete_homogeneous(lead, s - 1 - i);
    for (std::size_t j = i; j < s; ++j) f.U(i, j) = h[j - i];
  }
  for (std::size_t j = 0; j < s; ++j) {
    // Newton polynomial j expanded in monomials.
    const std::vector<T> roots(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(j));
    const auto e = elementary(roots);
    for (std::size_t i = 0; i <= j; ++i) {
      const T& v = e[j - i];
      f.U_inv(i, j) = (j - i) % 2 == 0 ? v : -v;
    }
  }
  return f;
}

template <class T>
Matrix<T> e_tilde(std::size_t s) {
  Matrix<T> e(s, s);
  for (std::size_t i = 0; i + 1 < s; ++i) e(i, i + 1) = T(static_cast<long>(i + 1));
  return e;
}

template <class T>
Matrix<T> exp_nilpotent(const Matrix<T>& n) {
  if (!n.square()) throw DimensionError("exp_nilpotent needs a square matrix");
  const std::size_t s = n.rows();
  Matrix<T> result = Matrix<T>::identity(s);
  Matrix<T> term = result;
  for (std::size_t k = 1; k <= s; ++k) {
    term = term * n / T(static_cast<long>(k));
    if (k == s) {
      if constexpr (FieldTraits<T>::exact) {
        if (!term.is_zero()) throw std::invalid_argument("exp_nilpotent: matrix is not nilpotent");
      }
      break;
    }
    result += term;
  }
  return result;
}

template <class T>
Matrix<T> pascal(std::size_t s) {
  return exp_nilpotent(e_tilde<T>(s));
}

template <class T>
DifferenceOperators<T> build_E_Theta(const BasicNodeSet<T>& nodes) {
  const std::size_t s = nodes.size();
  const Matrix<T> v = vandermonde(nodes);
  const Matrix<T> v_inv = inverse(v);
  return {v * e_tilde<T>(s) * v_inv, v * pascal<T>(s) * v_inv};
}

template <class T>
BasicPeerMethod<T> assemble_order_sm1(const BasicNodeSet<T>& nodes, const Matrix<T>& g,
                                      FieldSpec field) {
  const std::size_t s = nodes.size();
  if (g.rows() != s || g.cols() != s) throw DimensionError("G must be s x s");
  const auto ops = build_E_Theta(nodes);
  BasicPeerMethod<T> m;
  m.nodes = nodes;
  m.G = g;
  m.B = (Matrix<T>::identity(s) - g * ops.E) * ops.Theta;
  m.A = Matrix<T>(s, s);
  m.field = field;
  m.order_sm1 = true;
  return m;
}

template <class T>
Matrix<T> order_residual(const BasicPeerMethod<T>& m) {
  const auto ops = build_E_Theta(m.nodes);
  return m.B - (Matrix<T>::identity(m.stages()) - m.G * ops.E) * ops.Theta;
}

template <class T>
Vector<T> preconsistency_residual(const BasicPeerMethod<T>& m) {
  Vector<T> r = m.B * Vector<T>(m.stages(), T(1));
  for (auto& x : r) x -= T(1);
  return r;
}

ComplexMatrix stability_matrix(const RealPeerMethod& m, std::complex<double> z) {
  const Eigen::Index s = static_cast<Eigen::Index>(m.stages());
  const ComplexMatrix g = to_eigen(m.G).cast<std::complex<double>>();
  const ComplexMatrix lhs = ComplexMatrix::Identity(s, s) - z * g;
  const ComplexMatrix rhs =
      to_eigen(m.B).cast<std::complex<double>>() + z * to_eigen(m.A).cast<std::complex<double>>();
  Eigen::PartialPivLU<ComplexMatrix> lu(lhs);
  const double scale = std::max(1.0, lhs.cwiseAbs().maxCoeff());
  if (std::abs(lu.determinant()) <= 1e-14 * std::pow(scale, static_cast<double>(s)))
    throw PoleError("I - zG is singular at the requested z");
  return lu.solve(rhs);
}

RealPeerMethod to_real(const PeerMethod& m) {
  std::vector<double> c;
  for (const auto& x : m.nodes.values()) c.push_back(x.to_double());
  RealPeerMethod r;
  r.nodes = RealNodeSet(std::move(c));
  r.G = to_real(m.G);
  r.B = to_real(m.B);
  r.A = to_real(m.A);
  r.field = FieldSpec::float64();
  r.order_sm1 = m.order_sm1;
  return r;
}

std::string to_string(Representation r) {
  switch (r) {
    case Representation::original: return "original";
    case Representation::hat: return "hat";
    case Representation::nordsieck: return "nordsieck";
  }
  return "?";
}

Representation parse_representation(std::string_view text) {
  if (text == "original") return Representation::original;
  if (text == "hat") return Representation::hat;
  if (text == "nordsieck") return Representation::nordsieck;
  throw ParseError("unknown representation '" + std::string(text) + "'");
}

namespace {

template <class T>
WeightPair<T> to_hat(const BasicPeerMethod<T>& m, const WeightPair<T>& w) {
  switch (w.representation) {
    case Representation::hat: return w;
    case Representation::original: {
      const auto ops = build_E_Theta(m.nodes);
      const Matrix<T> th_inv = inverse(ops.Theta);
      return {m.G.transpose() * w.Z * m.G, th_inv.transpose() * w.W * th_inv, Representation::hat};
    }
    case Representation::nordsieck: {
      const Matrix<T> v_inv = inverse(vandermonde(m.nodes));
      return {v_inv.transpose() * w.Z * v_inv, v_inv.transpose() * w.W * v_inv,
              Representation::hat};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

template <class T>
WeightPair<T> transform_weights(const BasicPeerMethod<T>& m, const WeightPair<T>& w,
                                Representation to) {
  if (w.representation == to) return w;
  const WeightPair<T> hat = to_hat(m, w);
  switch (to) {
    case Representation::hat: return hat;
    case Representation::original: {
      const Matrix<T> h = inverse(m.G);
      const auto ops = build_E_Theta(m.nodes);
      return {h.transpose() * hat.Z * h, ops.Theta.transpose() * hat.W * ops.Theta,
              Representation::original};
    }
    case Representation::nordsieck: {
      const Matrix<T> v = vandermonde(m.nodes);
      return {v.transpose() * hat.Z * v, v.transpose() * hat.W * v, Representation::nordsieck};
    }
  }
  throw std::logic_error("unreachable");
}

#define PEER_ASTAB_INSTANTIATE(T)                                                          \
  template class BasicNodeSet<T>;                                                          \
  template Matrix<T> vandermonde(const BasicNodeSet<T>&);                                  \
  template VandermondeFactors<T> vdm_lu_factors(const BasicNodeSet<T>&);                   \
  template Matrix<T> e_tilde<T>(std::size_t);                                              \
  template Matrix<T> pascal<T>(std::size_t);                                               \
  template Matrix<T> exp_nilpotent(const Matrix<T>&);                                      \
  template DifferenceOperators<T> build_E_Theta(const BasicNodeSet<T>&);                   \
  template BasicPeerMethod<T> assemble_order_sm1(const BasicNodeSet<T>&, const Matrix<T>&, \
                                                 FieldSpec);                               \
  template Matrix<T> order_residual(const BasicPeerMethod<T>&);                            \
  template Vector<T> preconsistency_residual(const BasicPeerMethod<T>&);                   \
  template WeightPair<T> transform_weights(const BasicPeerMethod<T>&, const WeightPair<T>&, \
                                           Representation);

PEER_ASTAB_INSTANTIATE(Scalar)
PEER_ASTAB_INSTANTIATE(double)

#undef PEER_ASTAB_INSTANTIATE

}  // namespace peer_astab
