#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "peer_astab/matrix.hpp"

namespace peer_astab {

class SingularMatrixError : public std::runtime_error {
 public:
  SingularMatrixError(const std::string& what, std::size_t rank)
      : std::runtime_error(what), rank_(rank) {}
  std::size_t rank() const { return rank_; }

 private:
  std::size_t rank_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest dimension accepted by the exact routines. Default 32, overridden by
/// the PEER_ASTAB_MAX_DIM environment variable.
std::size_t max_dimension();
void require_dimension(std::size_t n);

/// P A = L U, with P given as a row order: row i of PA is row perm[i] of A.
template <class T>
struct LuFactors {
  std::vector<std::size_t> perm;
  Matrix<T> L;  // unit lower
  Matrix<T> U;
};

/// Partial pivoting. Exact fields take the first nonzero pivot, doubles the
/// largest. Throws SingularMatrixError carrying the exact rank.
template <class T>
LuFactors<T> lu_decompose(const Matrix<T>& a);

template <class T>
Matrix<T> inverse(const Matrix<T>& a);

/// Solves A X = B.
template <class T>
Matrix<T> solve(const Matrix<T>& a, const Matrix<T>& b);

/// Exact rank by row reduction.
std::size_t rank(const ExactMatrix& a);

/// Numerical rank: singular values above tol * max(1, sigma_max).
std::size_t numerical_rank(const RealMatrix& a, double tol);

/// Basis of the right nullspace, computed exactly via reduced row echelon form.
std::vector<Vector<Scalar>> nullspace(const ExactMatrix& a);

enum class Definiteness { positive_definite, positive_semidefinite, indefinite };
const char* to_string(Definiteness d);

/// Exact pivoted LDL^T outcome.
///
/// For the semidefinite verdicts, P^T L D L^T P reproduces the input exactly,
/// where P maps position k to row permutation[k]. For an indefinite verdict
/// pivots stop at the failure point and rank comes from separate elimination.
struct PsdCertificate {
  Definiteness verdict = Definiteness::indefinite;
  std::vector<std::size_t> permutation;
  std::vector<Scalar> pivots;
  std::size_t rank = 0;
  std::optional<Vector<Scalar>> witness;  // x with x^T M x < 0
  ExactMatrix L;

  bool semidefinite() const { return verdict != Definiteness::indefinite; }
};

/// Throws std::invalid_argument on non-symmetric input.
PsdCertificate psd_check(const ExactMatrix& m);

using ComplexMatrix = Eigen::MatrixXcd;

Eigen::MatrixXd to_eigen(const RealMatrix& m);
RealMatrix from_eigen(const Eigen::MatrixXd& m);

/// Eigenvalues, sorted by decreasing modulus. Advisory only.
std::vector<std::complex<double>> eig_float(const RealMatrix& m);
std::vector<std::complex<double>> eig_float(const ExactMatrix& m);
std::vector<std::complex<double>> eig_float(const ComplexMatrix& m);

/// Eigenvalues of a symmetric matrix in ascending order.
std::vector<double> eig_symmetric(const RealMatrix& m);

double spectral_radius(const ComplexMatrix& m);

/// Float definiteness test by Cholesky; advisory.
bool cholesky_positive_definite(const RealMatrix& m);

}  // namespace peer_astab
