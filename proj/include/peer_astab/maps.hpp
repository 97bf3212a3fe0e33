#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "peer_astab/matrix.hpp"
#include "peer_astab/scalar.hpp"

namespace peer_astab {

/// X E + E^T X.
template <class T>
Matrix<T> map_L(const Matrix<T>& e, const Matrix<T>& x);

/// Theta^T X Theta - X with Theta = exp(E), E nilpotent.
template <class T>
Matrix<T> map_P(const Matrix<T>& e, const Matrix<T>& x);

/// sum_k L_E^k(X) / (k+1)!, terminating at k = 2s-2.
template <class T>
Matrix<T> map_Phi(const Matrix<T>& e, const Matrix<T>& x);

/// Inverse of map_Phi: X - L(X)/2 - sum_k (-1)^k beta_k L^(2k)(X) / (2k)!.
template <class T>
Matrix<T> map_Psi(const Matrix<T>& e, const Matrix<T>& x);

/// beta_k = |B_2k| for k = 1..k_max (beta_1 = 1/6, beta_2 = 1/30).
std::vector<Rational> bernoulli_table(std::size_t k_max);

/// Coefficients of psi(z) = 1 - z/2 + z^2/12 - ... up to z^degree.
std::vector<Rational> psi_coefficients(std::size_t degree);

/// Symmetric kernel of L_Et for the scaled shift of size s: one matrix per
/// even antidiagonal i+j > s, normalized by x_{m-s,s} = 1.
template <class T>
std::vector<Matrix<T>> kernel_basis(std::size_t s);

/// Kernel of L_E for E = U Et U^-1: the matrices U^-T K U^-1.
template <class T>
std::vector<Matrix<T>> kernel_basis(const Matrix<T>& u);

class InconsistentSystemError : public std::runtime_error {
 public:
  InconsistentSystemError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

using EntryIndex = std::pair<std::size_t, std::size_t>;

/// Symmetric solution X of P_E(X) = target.
struct Preimage {
  ExactMatrix X;
  std::vector<EntryIndex> free_entries;  // kernel parameters, 0-based (i <= j)
};

/// Exact elimination with the unknowns x_ij (i <= j) ordered by antidiagonal
/// and then by row, so that for the scaled shift the free unknowns are the
/// diagonal entries on the kernel antidiagonals. `parameters` fixes the free
/// unknowns (default 0). Throws InconsistentSystemError if target is not in
/// the range of P_E.
Preimage preimage_P(const ExactMatrix& e, const ExactMatrix& target,
                    const std::map<EntryIndex, Scalar>& parameters = {});

/// Float counterpart: the entries in `fixed` are prescribed, the rest of the
/// symmetric X is the least-squares solution of P_E(X) = target.
struct RealPreimage {
  RealMatrix X;
  double residual = 0.0;  // max-norm of P_E(X) - target
};
RealPreimage preimage_P(const RealMatrix& e, const RealMatrix& target,
                        const std::map<EntryIndex, double>& fixed);

}  // namespace peer_astab
