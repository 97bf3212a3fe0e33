#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "peer_astab/linalg.hpp"
#include "peer_astab/matrix.hpp"
#include "peer_astab/scalar.hpp"

namespace peer_astab {

/// Pairwise distinct stage nodes c_1..c_s.
template <class T>
class BasicNodeSet {
 public:
  BasicNodeSet() = default;
  /// Throws std::invalid_argument on an empty list or repeated nodes.
  explicit BasicNodeSet(std::vector<T> c);

  std::size_t size() const { return c_.size(); }
  const T& operator[](std::size_t i) const { return c_[i]; }
  const std::vector<T>& values() const { return c_; }

 private:
  std::vector<T> c_;
};

using NodeSet = BasicNodeSet<Scalar>;
using RealNodeSet = BasicNodeSet<double>;

/// V_ij = c_i^(j-1).
template <class T>
Matrix<T> vandermonde(const BasicNodeSet<T>& nodes);

/// Newton-form factors V = L U. L carries the node differences on and below
/// the diagonal, U is unit upper. Both inverses come from closed forms too.
template <class T>
struct VandermondeFactors {
  Matrix<T> L, U, L_inv, U_inv;
};

template <class T>
VandermondeFactors<T> vdm_lu_factors(const BasicNodeSet<T>& nodes);

/// Scaled shift: entry (i, i+1) equals i (1-based), zero elsewhere.
template <class T>
Matrix<T> e_tilde(std::size_t s);

/// Upper binomial matrix exp(e_tilde(s)).
template <class T>
Matrix<T> pascal(std::size_t s);

/// exp(N) by the finite series; N must be nilpotent (checked).
template <class T>
Matrix<T> exp_nilpotent(const Matrix<T>& n);

/// Differentiation matrix E = V Et V^-1 and shift matrix Theta = V P V^-1.
template <class T>
struct DifferenceOperators {
  Matrix<T> E;
  Matrix<T> Theta;
};

template <class T>
DifferenceOperators<T> build_E_Theta(const BasicNodeSet<T>& nodes);

/// Peer two-step method with coefficient matrices A, B, G.
template <class T>
struct BasicPeerMethod {
  BasicNodeSet<T> nodes;
  Matrix<T> G;
  Matrix<T> B;
  Matrix<T> A;
  FieldSpec field;
  bool order_sm1 = false;  // B was assembled from the order s-1 conditions

  std::size_t stages() const { return nodes.size(); }
  bool stiffly_accurate() const { return A.is_zero(); }
};

using PeerMethod = BasicPeerMethod<Scalar>;
using RealPeerMethod = BasicPeerMethod<double>;

/// B = (I - G E) Theta, A = 0.
template <class T>
BasicPeerMethod<T> assemble_order_sm1(const BasicNodeSet<T>& nodes, const Matrix<T>& g,
                                      FieldSpec field);

/// B - (I - G E) Theta.
template <class T>
Matrix<T> order_residual(const BasicPeerMethod<T>& m);

/// B 1 - 1.
template <class T>
Vector<T> preconsistency_residual(const BasicPeerMethod<T>& m);

class PoleError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// M(z) = (I - zG)^-1 (B + zA) in double precision. Throws PoleError when
/// I - zG is numerically singular.
ComplexMatrix stability_matrix(const RealPeerMethod& m, std::complex<double> z);

RealPeerMethod to_real(const PeerMethod& m);

enum class Representation { original, hat, nordsieck };
std::string to_string(Representation r);
Representation parse_representation(std::string_view text);

template <class T>
struct WeightPair {
  Matrix<T> Z;
  Matrix<T> W;
  Representation representation = Representation::original;
};

/// Exact change of representation. The hat form is the hub:
///   Zhat = G^T Z G,  What = Theta^-T W Theta^-1,
///   Znord = V^T Zhat V,  Wnord = V^T What V.
template <class T>
WeightPair<T> transform_weights(const BasicPeerMethod<T>& m, const WeightPair<T>& w,
                                Representation to);

}  // namespace peer_astab
