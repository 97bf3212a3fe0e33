#include "peer_astab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "peer_astab/linalg.hpp"
#include "peer_astab/peer.hpp"

namespace peer_astab {

namespace {

Rational factorial(std::size_t n) {
  Rational f(1);
  for (std::size_t k = 2; k <= n; ++k) f *= Rational(static_cast<long>(k));
  return f;
}

template <class T>
T as_field(const Rational& q) {
  if constexpr (std::is_same_v<T, double>) {
    return q.to_double();
  } else {
    return T(q);
  }
}

}  // namespace

template <class T>
Matrix<T> map_L(const Matrix<T>& e, const Matrix<T>& x) {
  return x * e + e.transpose() * x;
}

template <class T>
Matrix<T> map_P(const Matrix<T>& e, const Matrix<T>& x) {
  const Matrix<T> theta = exp_nilpotent(e);
  return theta.transpose() * x * theta - x;
}

template <class T>
Matrix<T> map_Phi(const Matrix<T>& e, const Matrix<T>& x) {
  const std::size_t s = e.rows();
  Matrix<T> result = x;
  Matrix<T> xk = x;
  for (std::size_t k = 1; k + 1 < 2 * s; ++k) {
    xk = map_L(e, xk);
    result += xk / as_field<T>(factorial(k + 1));
  }
  return result;
}

template <class T>
Matrix<T> map_Psi(const Matrix<T>& e, const Matrix<T>& x) {
  const std::size_t s = e.rows();
  const Matrix<T> lx = map_L(e, x);
  Matrix<T> result = x - lx / T(2);
  const auto beta = bernoulli_table(s > 0 ? s - 1 : 0);
  Matrix<T> even = x;
  for (std::size_t k = 1; k < s; ++k) {
    even = map_L(e, map_L(e, even));
    Rational c = beta[k - 1] / factorial(2 * k);
    if (k % 2 == 1) c = -c;  // (-1)^k
    result -= even * as_field<T>(c);
  }
  return result;
}

std::vector<Rational> bernoulli_table(std::size_t k_max) {
  const std::size_t n_max = 2 * k_max;
  std::vector<Rational> b(n_max + 1);
  b[0] = Rational(1);
  for (std::size_t n = 1; n <= n_max; ++n) {
    // sum_{k=0}^{n} C(n+1,k) B_k = 0
    Rational acc;
    mpz_class c = 1;  // C(n+1, 0)
    for (std::size_t k = 0; k < n; ++k) {
      acc += Rational(c, 1) * b[k];
      c = c * (n + 1 - k) / (k + 1);
    }
    b[n] = -acc / Rational(static_cast<long>(n + 1));
  }
  std::vector<Rational> beta;
  for (std::size_t k = 1; k <= k_max; ++k) beta.push_back(b[2 * k].abs());
  return beta;
}

std::vector<Rational> psi_coefficients(std::size_t degree) {
  std::vector<Rational> c(degree + 1);
  c[0] = Rational(1);
  if (degree >= 1) c[1] = Rational(-1, 2);
  const auto beta = bernoulli_table(degree / 2);
  for (std::size_t k = 1; 2 * k <= degree; ++k) {
    Rational v = beta[k - 1] / factorial(2 * k);
    c[2 * k] = k % 2 == 1 ? v : -v;
  }
  return c;
}

template <class T>
std::vector<Matrix<T>> kernel_basis(std::size_t s) {
  std::vector<Matrix<T>> basis;
  // 1-based antidiagonal index m = i + j; nonzero kernels need m > s, m even.
  for (std::size_t m = s + 1; m <= 2 * s; ++m) {
    if (m % 2 != 0) continue;
    Matrix<T> k(s, s);
    // start at (i, j) = (m-s, s) and walk towards the diagonal
    std::size_t i = m - s;
    std::size_t j = s;
    k(i - 1, j - 1) = T(1);
    while (i < j) {
      // x_{i+1,j-1} = -i/(j-1) x_{i,j}
      const T next = -k(i - 1, j - 1) * T(static_cast<long>(i)) / T(static_cast<long>(j - 1));
      ++i;
      --j;
      k(i - 1, j - 1) = next;
    }
    for (std::size_t a = 0; a < s; ++a)
      for (std::size_t b = a + 1; b < s; ++b)
        k(b, a) = k(a, b);
    basis.push_back(std::move(k));
  }
  return basis;
}

template <class T>
std::vector<Matrix<T>> kernel_basis(const Matrix<T>& u) {
  const Matrix<T> u_inv = inverse(u);
  std::vector<Matrix<T>> basis;
  for (const auto& k : kernel_basis<T>(u.rows())) basis.push_back(u_inv.transpose() * k * u_inv);
  return basis;
}

namespace {

std::vector<EntryIndex> antidiagonal_order(std::size_t s) {
  std::vector<EntryIndex> order;
  for (std::size_t m = 0; m + 1 < 2 * s; ++m)
    for (std::size_t i = 0; i < s; ++i)
      if (m >= i && m - i >= i && m - i < s) order.emplace_back(i, m - i);
  return order;
}

template <class T>
Matrix<T> unit_symmetric(std::size_t s, const EntryIndex& ij) {
  Matrix<T> x(s, s);
  x(ij.first, ij.second) = T(1);
  x(ij.second, ij.first) = T(1);
  return x;
}

}  // namespace

Preimage preimage_P(const ExactMatrix& e, const ExactMatrix& target,
                    const std::map<EntryIndex, Scalar>& parameters) {
  const std::size_t s = e.rows();
  if (!target.is_symmetric() || target.rows() != s) throw DimensionError("preimage_P: bad target");
  const auto unknowns = antidiagonal_order(s);
  const std::size_t n = unknowns.size();
  // Equation rows: upper-triangle entries of P_E(X), plus the augmented column.
  ExactMatrix aug(n, n + 1);
  for (std::size_t c = 0; c < n; ++c) {
    const ExactMatrix img = map_P(e, unit_symmetric<Scalar>(s, unknowns[c]));
    for (std::size_t r = 0; r < n; ++r) aug(r, c) = img(unknowns[r].first, unknowns[r].second);
  }
  for (std::size_t r = 0; r < n; ++r) aug(r, n) = target(unknowns[r].first, unknowns[r].second);

  // reduced row echelon form over the coefficient columns
  std::vector<std::size_t> pivot_cols;
  std::size_t row = 0;
  for (std::size_t col = 0; col < n && row < n; ++col) {
    std::size_t p = row;
    while (p < n && aug(p, col).is_zero()) ++p;
    if (p == n) continue;
    for (std::size_t j = 0; j <= n; ++j) std::swap(aug(p, j), aug(row, j));
    const Scalar inv = aug(row, col).inverse();
    for (std::size_t j = col; j <= n; ++j) aug(row, j) *= inv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == row || aug(i, col).is_zero()) continue;
      const Scalar f = aug(i, col);
      for (std::size_t j = col; j <= n; ++j) aug(i, j) -= f * aug(row, j);
    }
    pivot_cols.push_back(col);
    ++row;
  }
  double residual = 0.0;
  for (std::size_t r = row; r < n; ++r) residual = std::max(residual, std::abs(aug(r, n).to_double()));
  for (std::size_t r = row; r < n; ++r)
    if (!aug(r, n).is_zero())
      throw InconsistentSystemError("target is not in the range of P_E (residual " +
                                        std::to_string(residual) + ")",
                                    residual);

  Preimage out{ExactMatrix(s, s), {}};
  std::vector<Scalar> value(n);
  std::vector<bool> is_pivot(n, false);
  for (std::size_t c : pivot_cols) is_pivot[c] = true;
  for (std::size_t c = 0; c < n; ++c) {
    if (is_pivot[c]) continue;
    out.free_entries.push_back(unknowns[c]);
    if (auto it = parameters.find(unknowns[c]); it != parameters.end()) value[c] = it->second;
  }
  for (const auto& [ij, v] : parameters)
    if (std::find(out.free_entries.begin(), out.free_entries.end(), ij) == out.free_entries.end())
      throw std::invalid_argument("preimage_P: entry (" + std::to_string(ij.first + 1) + "," +
                                  std::to_string(ij.second + 1) + ") is not a free parameter");
  for (std::size_t r = 0; r < pivot_cols.size(); ++r) {
    Scalar acc = aug(r, n);
    for (std::size_t c = 0; c < n; ++c)
      if (!is_pivot[c] && !aug(r, c).is_zero()) acc -= aug(r, c) * value[c];
    value[pivot_cols[r]] = acc;
  }
  for (std::size_t c = 0; c < n; ++c) {
    out.X(unknowns[c].first, unknowns[c].second) = value[c];
    out.X(unknowns[c].second, unknowns[c].first) = value[c];
  }
  return out;
}

RealPreimage preimage_P(const RealMatrix& e, const RealMatrix& target,
                        const std::map<EntryIndex, double>& fixed) {
  const std::size_t s = e.rows();
  if (target.rows() != s || target.cols() != s) throw DimensionError("preimage_P: bad target");
  const auto all = antidiagonal_order(s);
  std::vector<EntryIndex> unknowns;
  RealMatrix base(s, s);
  for (const auto& ij : all) {
    if (auto it = fixed.find(ij); it != fixed.end()) {
      base(ij.first, ij.second) = base(ij.second, ij.first) = it->second;
    } else {
      unknowns.push_back(ij);
    }
  }
  const RealMatrix b0 = map_P(e, base);
  Eigen::MatrixXd a(all.size(), unknowns.size());
  Eigen::VectorXd rhs(all.size());
  for (std::size_t r = 0; r < all.size(); ++r)
    rhs(r) = target(all[r].first, all[r].second) - b0(all[r].first, all[r].second);
  for (std::size_t c = 0; c < unknowns.size(); ++c) {
    const RealMatrix img = map_P(e, unit_symmetric<double>(s, unknowns[c]));
    for (std::size_t r = 0; r < all.size(); ++r) a(r, c) = img(all[r].first, all[r].second);
  }
  const Eigen::VectorXd v = a.completeOrthogonalDecomposition().solve(rhs);
  RealPreimage out{base, 0.0};
  for (std::size_t c = 0; c < unknowns.size(); ++c)
    out.X(unknowns[c].first, unknowns[c].second) = out.X(unknowns[c].second, unknowns[c].first) = v(c);
  out.residual = max_abs(map_P(e, out.X) - target);
  return out;
}

#define PEER_ASTAB_INSTANTIATE(T)                                             \
  template Matrix<T> map_L(const Matrix<T>&, const Matrix<T>&);               \
  template Matrix<T> map_P(const Matrix<T>&, const Matrix<T>&);               \
  template Matrix<T> map_Phi(const Matrix<T>&, const Matrix<T>&);             \
  template Matrix<T> map_Psi(const Matrix<T>&, const Matrix<T>&);             \
  template std::vector<Matrix<T>> kernel_basis<T>(std::size_t);               \
  template std::vector<Matrix<T>> kernel_basis(const Matrix<T>&);

PEER_ASTAB_INSTANTIATE(Scalar)
PEER_ASTAB_INSTANTIATE(double)

#undef PEER_ASTAB_INSTANTIATE

}  // namespace peer_astab
