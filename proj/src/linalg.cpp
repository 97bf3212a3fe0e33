#include "peer_astab/linalg.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <string>

namespace peer_astab {

std::size_t max_dimension() {
  if (const char* env = std::getenv("PEER_ASTAB_MAX_DIM")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 32;
}

void require_dimension(std::size_t n) {
  if (n > max_dimension())
    throw DimensionError("dimension " + std::to_string(n) + " exceeds the cap of " +
                         std::to_string(max_dimension()) + " (PEER_ASTAB_MAX_DIM)");
}

namespace {

template <class T>
bool is_zero(const T& x) {
  return FieldTraits<T>::is_zero(x);
}

// Pivot search below and at row k of column k; npos if the column is zero.
template <class T>
std::size_t find_pivot(const Matrix<T>& a, std::size_t k, std::size_t start) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t i = start; i < a.rows(); ++i) {
    if (is_zero(a(i, k))) continue;
    if (best == static_cast<std::size_t>(-1) || FieldTraits<T>::better_pivot(a(i, k), a(best, k)))
      best = i;
  }
  return best;
}

void swap_rows(auto& a, std::size_t i, std::size_t j) {
  if (i == j) return;
  for (std::size_t c = 0; c < a.cols(); ++c) std::swap(a(i, c), a(j, c));
}

}  // namespace

template <class T>
LuFactors<T> lu_decompose(const Matrix<T>& a) {
  if (!a.square()) throw DimensionError("lu_decompose needs a square matrix");
  if constexpr (FieldTraits<T>::exact) require_dimension(a.rows());
  const std::size_t n = a.rows();
  Matrix<T> u = a;
  Matrix<T> l = Matrix<T>::identity(n);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t p = find_pivot(u, k, k);
    if (p == static_cast<std::size_t>(-1)) {
      std::size_t r;
      if constexpr (FieldTraits<T>::exact) {
        r = rank(a);
      } else {
        r = numerical_rank(a, 1e-14);
      }
      throw SingularMatrixError("matrix is singular", r);
    }
    if (p != k) {
      swap_rows(u, p, k);
      std::swap(perm[p], perm[k]);
      for (std::size_t c = 0; c < k; ++c) std::swap(l(p, c), l(k, c));
    }
    const T pivot = u(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      if (is_zero(u(i, k))) continue;
      const T f = u(i, k) / pivot;
      l(i, k) = f;
      u(i, k) = T(0);
      for (std::size_t j = k + 1; j < n; ++j)
        if (!is_zero(u(k, j))) u(i, j) -= f * u(k, j);
    }
  }
  return {std::move(perm), std::move(l), std::move(u)};
}

template <class T>
Matrix<T> solve(const Matrix<T>& a, const Matrix<T>& b) {
  if (b.rows() != a.rows()) throw DimensionError("solve: right-hand side shape mismatch");
  const LuFactors<T> f = lu_decompose(a);
  const std::size_t n = a.rows();
  Matrix<T> x(n, b.cols());
  for (std::size_t c = 0; c < b.cols(); ++c) {
    std::vector<T> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      T acc = b(f.perm[i], c);
      for (std::size_t j = 0; j < i; ++j)
        if (!is_zero(f.L(i, j))) acc -= f.L(i, j) * y[j];
      y[i] = acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      T acc = y[ii];
      for (std::size_t j = ii + 1; j < n; ++j)
        if (!is_zero(f.U(ii, j))) acc -= f.U(ii, j) * x(j, c);
      x(ii, c) = acc / f.U(ii, ii);
    }
  }
  return x;
}

template <class T>
Matrix<T> inverse(const Matrix<T>& a) {
  return solve(a, Matrix<T>::identity(a.rows()));
}

template LuFactors<Scalar> lu_decompose(const ExactMatrix&);
template LuFactors<double> lu_decompose(const RealMatrix&);
template ExactMatrix solve(const ExactMatrix&, const ExactMatrix&);
template RealMatrix solve(const RealMatrix&, const RealMatrix&);
template ExactMatrix inverse(const ExactMatrix&);
template RealMatrix inverse(const RealMatrix&);

namespace {

// In-place reduced row echelon form; returns pivot columns.
std::vector<std::size_t> rref(ExactMatrix& a) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < a.cols() && row < a.rows(); ++col) {
    const std::size_t p = find_pivot(a, col, row);
    if (p == static_cast<std::size_t>(-1)) continue;
    swap_rows(a, p, row);
    const Scalar inv = a(row, col).inverse();
    for (std::size_t j = col; j < a.cols(); ++j) a(row, j) *= inv;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      if (i == row || a(i, col).is_zero()) continue;
      const Scalar f = a(i, col);
      for (std::size_t j = col; j < a.cols(); ++j)
        if (!a(row, j).is_zero()) a(i, j) -= f * a(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

std::size_t rank(const ExactMatrix& a) {
  ExactMatrix w = a;
  return rref(w).size();
}

std::size_t numerical_rank(const RealMatrix& a, double tol) {
  if (a.empty()) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(a));
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() ? sv(0) : 0.0);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * scale) ++r;
  return r;
}

std::vector<Vector<Scalar>> nullspace(const ExactMatrix& a) {
  ExactMatrix w = a;
  const std::vector<std::size_t> pivots = rref(w);
  std::vector<bool> is_pivot(a.cols(), false);
  for (std::size_t p : pivots) is_pivot[p] = true;
  std::vector<Vector<Scalar>> basis;
  for (std::size_t free = 0; free < a.cols(); ++free) {
    if (is_pivot[free]) continue;
    Vector<Scalar> v(a.cols());
    v[free] = Scalar(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -w(r, free);
    basis.push_back(std::move(v));
  }
  return basis;
}

const char* to_string(Definiteness d) {
  switch (d) {
    case Definiteness::positive_definite: return "positive_definite";
    case Definiteness::positive_semidefinite: return "positive_semidefinite";
    case Definiteness::indefinite: return "indefinite";
  }
  return "?";
}

namespace {

// Lifts a negative direction v of the Schur complement on `rest` back to the
// full space: x_rest = v, x_lead solves M_lead,lead x_lead = -M_lead,rest v.
Vector<Scalar> lift_witness(const ExactMatrix& m, const std::vector<std::size_t>& lead,
                            const std::vector<std::size_t>& rest, const Vector<Scalar>& v) {
  Vector<Scalar> x(m.rows());
  for (std::size_t k = 0; k < rest.size(); ++k) x[rest[k]] = v[k];
  if (lead.empty()) return x;
  const std::size_t nl = lead.size();
  ExactMatrix a11(nl, nl);
  ExactMatrix rhs(nl, 1);
  for (std::size_t i = 0; i < nl; ++i) {
    for (std::size_t j = 0; j < nl; ++j) a11(i, j) = m(lead[i], lead[j]);
    Scalar acc;
    for (std::size_t k = 0; k < rest.size(); ++k) acc += m(lead[i], rest[k]) * v[k];
    rhs(i, 0) = -acc;
  }
  const ExactMatrix xl = solve(a11, rhs);
  for (std::size_t i = 0; i < nl; ++i) x[lead[i]] = xl(i, 0);
  return x;
}

}  // namespace

PsdCertificate psd_check(const ExactMatrix& m) {
  if (!m.square()) throw DimensionError("psd_check needs a square matrix");
  if (!m.is_symmetric()) throw std::invalid_argument("psd_check needs a symmetric matrix");
  const std::size_t n = m.rows();
  require_dimension(n);

  PsdCertificate cert;
  ExactMatrix work = m;  // Schur complements accumulate here
  std::vector<std::size_t> rest(n);
  std::iota(rest.begin(), rest.end(), 0);
  std::vector<std::size_t> lead;
  ExactMatrix l_cols(n, n);  // column k: multipliers of pivot k, by original index

  auto fail = [&](const Vector<Scalar>& v) {
    cert.verdict = Definiteness::indefinite;
    cert.witness = lift_witness(m, lead, rest, v);
    cert.rank = rank(m);
    cert.permutation = lead;
    cert.permutation.insert(cert.permutation.end(), rest.begin(), rest.end());
    return cert;
  };

  while (!rest.empty()) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < rest.size(); ++k)
      if (work(rest[k], rest[k]) > work(rest[best], rest[best])) best = k;
    const std::size_t p = rest[best];
    const Scalar d = work(p, p);

    if (d.sign() < 0) {
      Vector<Scalar> v(rest.size());
      v[best] = Scalar(1);
      return fail(v);
    }
    if (d.is_zero()) {
      for (std::size_t a = 0; a < rest.size(); ++a) {
        if (work(rest[a], rest[a]).sign() < 0) {
          Vector<Scalar> v(rest.size());
          v[a] = Scalar(1);
          return fail(v);
        }
      }
      for (std::size_t a = 0; a < rest.size(); ++a) {
        for (std::size_t b = a + 1; b < rest.size(); ++b) {
          const Scalar& off = work(rest[a], rest[b]);
          if (off.is_zero()) continue;
          // zero diagonal: (e_a - sign e_b)^T S (e_a - sign e_b) = -2|off|
          Vector<Scalar> v(rest.size());
          v[a] = Scalar(1);
          v[b] = Scalar(-off.sign());
          return fail(v);
        }
      }
      break;  // remaining block is exactly zero
    }

    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(best));
    const std::size_t k = lead.size();
    lead.push_back(p);
    cert.pivots.push_back(d);
    l_cols(p, k) = Scalar(1);
    const Scalar dinv = d.inverse();
    for (std::size_t i : rest) l_cols(i, k) = work(i, p) * dinv;
    for (std::size_t i : rest) {
      if (work(i, p).is_zero()) continue;
      for (std::size_t j : rest) {
        if (work(p, j).is_zero()) continue;
        work(i, j) -= l_cols(i, k) * work(p, j);
      }
    }
  }

  cert.rank = lead.size();
  cert.permutation = lead;
  cert.permutation.insert(cert.permutation.end(), rest.begin(), rest.end());
  for (std::size_t k = lead.size(); k < n; ++k) {
    cert.pivots.push_back(Scalar(0));
    l_cols(cert.permutation[k], k) = Scalar(1);
  }
  cert.L = ExactMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) cert.L(i, k) = l_cols(cert.permutation[i], k);
  cert.verdict = cert.rank == n ? Definiteness::positive_definite
                                : Definiteness::positive_semidefinite;
  return cert;
}

Eigen::MatrixXd to_eigen(const RealMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

RealMatrix from_eigen(const Eigen::MatrixXd& e) {
  RealMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

std::vector<std::complex<double>> eig_float(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("eig_float needs a square matrix");
  if (m.rows() == 0) return {};
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue iteration did not converge");
  std::vector<std::complex<double>> ev(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::stable_sort(ev.begin(), ev.end(),
                   [](const auto& a, const auto& b) { return std::abs(a) > std::abs(b); });
  return ev;
}

std::vector<std::complex<double>> eig_float(const RealMatrix& m) {
  return eig_float(ComplexMatrix(to_eigen(m).cast<std::complex<double>>()));
}

std::vector<std::complex<double>> eig_float(const ExactMatrix& m) { return eig_float(to_real(m)); }

std::vector<double> eig_symmetric(const RealMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(to_eigen(m), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return {ev.begin(), ev.end()};
}

double spectral_radius(const ComplexMatrix& m) {
  double r = 0.0;
  for (const auto& l : eig_float(m)) r = std::max(r, std::abs(l));
  return r;
}

bool cholesky_positive_definite(const RealMatrix& m) {
  if (!m.square()) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(m));
  return llt.info() == Eigen::Success;
}

}  // namespace peer_astab
