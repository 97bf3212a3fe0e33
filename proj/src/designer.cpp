#include "peer_astab/designer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "peer_astab/linalg.hpp"
#include "peer_astab/maps.hpp"

namespace peer_astab {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct StrictUpper {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> entries;
  explicit StrictUpper(Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) entries.emplace_back(i, j);
  }
  Eigen::Index size() const { return static_cast<Eigen::Index>(entries.size()); }
};

MatrixXd upper_with_diag(const VectorXd& diag, const StrictUpper& idx, const VectorXd& x) {
  MatrixXd u = diag.asDiagonal();
  for (Eigen::Index k = 0; k < idx.size(); ++k) u(idx.entries[k].first, idx.entries[k].second) = x(k);
  return u;
}

VectorXd strict_upper_of(const MatrixXd& t, const StrictUpper& idx) {
  VectorXd f(idx.size());
  for (Eigen::Index k = 0; k < idx.size(); ++k) f(k) = t(idx.entries[k].first, idx.entries[k].second);
  return f;
}

// Damped Newton on strict-upper(U^-1 A U) = 0.
bool tcf_newton(const MatrixXd& a, const VectorXd& diag, VectorXd& x, const TcfOptions& opt,
                int& iterations, double& residual) {
  const StrictUpper idx(a.rows());
  auto eval = [&](const VectorXd& v, MatrixXd& t) {
    const MatrixXd u = upper_with_diag(diag, idx, v);
    t = u.triangularView<Eigen::Upper>().solve(a * u);
    return strict_upper_of(t, idx);
  };
  MatrixXd t;
  VectorXd f = eval(x, t);
  residual = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  for (iterations = 0; iterations < opt.max_iterations; ++iterations) {
    if (residual <= opt.tolerance) return true;
    const MatrixXd u = upper_with_diag(diag, idx, x);
    MatrixXd jac(idx.size(), idx.size());
    for (Eigen::Index k = 0; k < idx.size(); ++k) {
      const auto [p, q] = idx.entries[k];
      // d(U^-1 A U) = U^-1 (A dU - dU T), dU = e_p e_q^T
      MatrixXd rhs = MatrixXd::Zero(a.rows(), a.cols());
      rhs.col(q) += a.col(p);
      rhs.row(p) -= t.row(q);
      jac.col(k) = strict_upper_of(u.triangularView<Eigen::Upper>().solve(rhs), idx);
    }
    const VectorXd step = jac.colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) return false;
    double alpha = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half, alpha /= 2) {
      MatrixXd t_try;
      const VectorXd x_try = x + alpha * step;
      const VectorXd f_try = eval(x_try, t_try);
      const double r_try = f_try.cwiseAbs().maxCoeff();
      if (std::isfinite(r_try) && r_try < residual) {
        x = x_try;
        f = f_try;
        t = t_try;
        residual = r_try;
        improved = true;
        break;
      }
    }
    if (!improved) return residual <= opt.tolerance;
  }
  return residual <= opt.tolerance;
}

// Levenberg-Marquardt on A U - U L = 0 with L lower, one shared diagonal.
bool tcf_equal_diagonal(const MatrixXd& a, const VectorXd& diag, VectorXd& x, const TcfOptions& opt,
                        int& iterations, double& residual) {
  const Eigen::Index n = a.rows();
  const StrictUpper idx(n);
  const Eigen::Index m = idx.size();
  const Eigen::Index unknowns = 2 * m + 1;
  auto unpack = [&](const VectorXd& v, MatrixXd& u, MatrixXd& l) {
    u = upper_with_diag(diag, idx, v.head(m));
    l = MatrixXd::Identity(n, n) * v(2 * m);
    for (Eigen::Index k = 0; k < m; ++k) l(idx.entries[k].second, idx.entries[k].first) = v(m + k);
  };
  auto residual_of = [&](const VectorXd& v) {
    MatrixXd u, l;
    unpack(v, u, l);
    const MatrixXd r = a * u - u * l;
    return VectorXd(Eigen::Map<const VectorXd>(r.data(), r.size()));
  };
  auto relative = [&](const VectorXd& v, const VectorXd& f) {
    MatrixXd u, l;
    unpack(v, u, l);
    return f.cwiseAbs().maxCoeff() / (std::max(1e-300, a.cwiseAbs().maxCoeff()) * u.cwiseAbs().maxCoeff());
  };

  VectorXd f = residual_of(x);
  double cost = f.squaredNorm();
  double lambda = 1e-3;
  residual = relative(x, f);
  for (iterations = 0; iterations < opt.max_iterations; ++iterations) {
    if (residual <= opt.tolerance * 1e-4) return true;
    MatrixXd u, l;
    unpack(x, u, l);
    MatrixXd jac(n * n, unknowns);
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto [p, q] = idx.entries[k];
      MatrixXd d = MatrixXd::Zero(n, n);
      d.col(q) += a.col(p);
      d.row(p) -= l.row(q);
      jac.col(k) = Eigen::Map<const VectorXd>(d.data(), d.size());
      MatrixXd dl = MatrixXd::Zero(n, n);
      // dL = e_q e_p^T with q > p
      dl.col(p) -= u.col(q);
      jac.col(m + k) = Eigen::Map<const VectorXd>(dl.data(), dl.size());
    }
    const MatrixXd neg_u = -u;
    jac.col(2 * m) = Eigen::Map<const VectorXd>(neg_u.data(), neg_u.size());

    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd jtf = jac.transpose() * f;
    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      MatrixXd damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
      const VectorXd step = damped.ldlt().solve(-jtf);
      const VectorXd x_try = x + step;
      const VectorXd f_try = residual_of(x_try);
      const double c_try = f_try.squaredNorm();
      if (std::isfinite(c_try) && c_try < cost) {
        x = x_try;
        f = f_try;
        cost = c_try;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 4.0;
      }
    }
    residual = relative(x, f);
    if (!accepted) break;
  }
  return residual <= opt.tolerance;
}

}  // namespace

TriangularCanonicalForm triangular_canonical_form(const RealMatrix& a_in,
                                                  const std::vector<double>& prescribed_diag,
                                                  const TcfOptions& opt) {
  if (!a_in.square()) throw DimensionError("triangular_canonical_form needs a square matrix");
  const Eigen::Index n = static_cast<Eigen::Index>(a_in.rows());
  if (prescribed_diag.size() != a_in.rows()) throw DimensionError("prescribed diagonal has wrong length");
  for (double d : prescribed_diag)
    if (d == 0.0 || !std::isfinite(d)) throw std::invalid_argument("prescribed diagonal must be finite and nonzero");
  const MatrixXd a = to_eigen(a_in);
  const VectorXd diag = Eigen::Map<const VectorXd>(prescribed_diag.data(), n);
  const StrictUpper idx(n);
  const Eigen::Index m = idx.size();
  const bool equal = opt.mode == TcfOptions::Mode::equal_diagonal;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double best = std::numeric_limits<double>::infinity();
  int total_iterations = 0;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    VectorXd x(equal ? 2 * m + 1 : m);
    if (restart == 0 && !equal) {
      x.setZero();
    } else {
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) = normal(rng);
    }
    if (equal) x(2 * m) = a.trace() / static_cast<double>(n);
    int iters = 0;
    double residual = 0.0;
    const bool ok = equal ? tcf_equal_diagonal(a, diag, x, opt, iters, residual)
                          : tcf_newton(a, diag, x, opt, iters, residual);
    total_iterations += iters;
    best = std::min(best, residual);
    if (!ok) continue;

    TriangularCanonicalForm out;
    const MatrixXd u = upper_with_diag(diag, idx, x.head(m));
    out.U = from_eigen(u);
    if (equal) {
      MatrixXd l = MatrixXd::Identity(n, n) * x(2 * m);
      for (Eigen::Index k = 0; k < m; ++k) l(idx.entries[k].second, idx.entries[k].first) = x(m + k);
      out.L = from_eigen(l);
    } else {
      const MatrixXd t = u.triangularView<Eigen::Upper>().solve(a * u);
      out.L = from_eigen(MatrixXd(t.triangularView<Eigen::Lower>()));
    }
    out.residual = residual;
    out.iterations = total_iterations;
    out.restarts = restart;
    return out;
  }
  throw ConvergenceError("triangular canonical form did not converge (best residual " +
                         std::to_string(best) + ")");
}

RealMatrix compact_from_slack(const RealMatrix& e, const RealMatrix& slack,
                              const std::map<std::pair<std::size_t, std::size_t>, double>& kernel) {
  const RealPreimage pre = preimage_P(e, slack, kernel);
  const double scale = std::max(1.0, max_abs(slack));
  if (pre.residual > 1e-8 * scale)
    throw ReconstructionError("slack matrix is not in the range of P_E (residual " +
                              std::to_string(pre.residual) + ")");
  return pre.X;
}

RecoveredNodes recover_nodes(const RealMatrix& ep, double c1, double cs, double tolerance) {
  if (!ep.square()) throw DimensionError("recover_nodes needs a square matrix");
  const std::size_t s = ep.rows();
  RecoveredNodes out;
  for (std::size_t i = 0; i + 1 < s; ++i)
    out.superdiagonal_residual =
        std::max(out.superdiagonal_residual, std::abs(ep(i, i + 1) - static_cast<double>(i + 1)));
  if (out.superdiagonal_residual > std::sqrt(tolerance))
    throw ReconstructionError("superdiagonal of E' deviates from (1, ..., s-1) by " +
                              std::to_string(out.superdiagonal_residual));

  std::vector<double> c{c1};
  double sum = c1;
  for (std::size_t i = 1; i + 1 < s; ++i) {
    // 1-based: c_{i+1} = (c_1 + ... + c_i - e'_{i,i+2}) / i
    const double next = (sum - ep(i - 1, i + 1)) / static_cast<double>(i);
    c.push_back(next);
    sum += next;
  }
  if (s > 1) c.push_back(cs);
  if (s == 1) c = {cs};

  try {
    out.nodes = RealNodeSet(c);
  } catch (const std::invalid_argument& e) {
    throw ReconstructionError(std::string("recovered nodes are not distinct: ") + e.what());
  }
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j)
      if (std::abs(c[i] - c[j]) <= tolerance)
        throw ReconstructionError("recovered nodes " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1) + " coincide");

  const auto f = vdm_lu_factors(out.nodes);
  const RealMatrix model = f.U * e_tilde<double>(s) * f.U_inv;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 3; j < s; ++j)
      out.consistency_residual = std::max(out.consistency_residual, std::abs(ep(i, j) - model(i, j)));
  if (s == 4) out.node_condition = 2 * ep(0, 3) - ep(0, 2) * (ep(0, 2) + ep(1, 3));
  const double scale = std::max(1.0, max_abs(ep));
  if (out.consistency_residual > tolerance * scale)
    throw ReconstructionError("E' is not of Vandermonde form: residual " +
                              std::to_string(out.consistency_residual));
  return out;
}

Reconstruction reconstruct_diag(const CompactForm& cf, double node_tolerance) {
  const RealMatrix& e = cf.E;
  if (!e.square() || cf.X.rows() != e.rows() || cf.X.cols() != e.cols())
    throw DimensionError("compact form: E and X must be square of equal size");
  const std::size_t s = e.rows();
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (e(i, j) != 0.0) throw std::invalid_argument("compact form: E must be strictly upper triangular");

  // Step 1
  const RealMatrix w = symmetric_part(map_Psi(e, RealMatrix::identity(s)) - cf.X);
  if (!cholesky_positive_definite(w)) throw ReconstructionError("step 1: W = Psi_E(I) - X is not positive definite");
  const RealMatrix h_check = e + w;

  // Step 2
  std::vector<double> diag{1.0};
  for (std::size_t i = 1; i < s; ++i) {
    if (e(i - 1, i) == 0.0) throw ReconstructionError("step 2: E has a zero superdiagonal entry");
    diag.push_back(diag.back() * static_cast<double>(i) / e(i - 1, i));
  }
  TcfOptions opt;
  if (cf.singly_implicit) {
    opt.mode = TcfOptions::Mode::equal_diagonal;
    opt.tolerance = 1e-8;
  }
  TriangularCanonicalForm tcf;
  try {
    tcf = triangular_canonical_form(h_check, diag, opt);
  } catch (const ConvergenceError& ex) {
    throw ReconstructionError(std::string("step 2: ") + ex.what());
  }

  // Step 3
  const RealMatrix u_inv = inverse(tcf.U);
  const RealMatrix e_prime = u_inv * e * tcf.U;
  const RealMatrix w_prime = tcf.U.transpose() * w * tcf.U;
  const RealMatrix z_prime = tcf.U.transpose() * tcf.U;

  // Step 4
  RecoveredNodes rn;
  try {
    rn = recover_nodes(e_prime, cf.c1, cf.cs, node_tolerance);
  } catch (const ReconstructionError& ex) {
    throw ReconstructionError(std::string("step 4: ") + ex.what());
  }

  // Step 5
  const auto lv = vdm_lu_factors(rn.nodes);
  const RealMatrix h = lv.L * tcf.L * lv.L_inv;
  const RealMatrix w_hat = symmetric_part(lv.L_inv.transpose() * w_prime * lv.L_inv);
  const RealMatrix z_hat = symmetric_part(lv.L_inv.transpose() * z_prime * lv.L_inv);
  RealMatrix g = inverse(h);

  Reconstruction out;
  auto& d = out.diagnostics;
  for (std::size_t i = 0; i < s; ++i) d.eta += tcf.L(i, i) / static_cast<double>(s);
  for (std::size_t i = 0; i < s; ++i) d.eta_spread = std::max(d.eta_spread, std::abs(tcf.L(i, i) - d.eta));
  d.tcf_residual = tcf.residual;
  d.superdiagonal_residual = rn.superdiagonal_residual;
  d.node_consistency = rn.consistency_residual;
  d.node_condition = rn.node_condition;
  d.U_H = tcf.U;
  d.L_H = tcf.L;
  d.E_prime = e_prime;
  const double gscale = std::max(1.0, max_abs(g));
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i + 1; j < s; ++j) {
      d.upper_residual = std::max(d.upper_residual, std::abs(g(i, j)));
      g(i, j) = 0.0;
    }
  if (d.upper_residual > 1e-9 * gscale)
    throw ReconstructionError("step 5: G is not lower triangular (residual " +
                              std::to_string(d.upper_residual) + ")");

  out.method = assemble_order_sm1(rn.nodes, g, FieldSpec::float64());
  out.weights = {z_hat, w_hat, Representation::hat};
  const RealMatrix e_nodes = build_E_Theta(rn.nodes).E;
  d.generic_residual = max_abs(h - e_nodes - solve(z_hat, w_hat));
  return out;
}

namespace {

ExactMatrix shift_f0(std::size_t s) {
  ExactMatrix f(s, s);
  for (std::size_t i = 0; i + 1 < s; ++i) f(i + 1, i) = Scalar(1);
  return f;
}

ExactMatrix rank_matrix(const ExactMatrix& gt) {
  const std::size_t s = gt.rows();
  const ExactMatrix f0 = shift_f0(s);
  const ExactMatrix comm = f0 * gt - gt * f0;
  ExactMatrix r(s + 1, s > 0 ? s - 1 : 0);
  for (std::size_t j = 0; j + 1 < s; ++j) {
    for (std::size_t i = 0; i < s; ++i) r(i, j) = comm(i, j);
    r(s, j) = gt(s - 1, j);
  }
  return r;
}

// Continued-fraction approximation with bounded denominator.
Rational rationalize(double x, long max_den = 1000000) {
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(v);
    if (std::abs(a) > 1e15) break;
    const long ai = static_cast<long>(a);
    const long h2 = ai * h1 + h0;
    const long k2 = ai * k1 + k0;
    if (k2 > max_den) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    const double frac = v - a;
    if (std::abs(x - static_cast<double>(h1) / static_cast<double>(k1)) <= 1e-13 * std::max(1.0, std::abs(x)) ||
        frac < 1e-15)
      break;
    v = 1.0 / frac;
  }
  return k1 == 0 ? Rational(0) : Rational(h1, k1);
}

Scalar evaluate(const std::vector<Scalar>& p, const Scalar& x) {
  // x^s + sum p_i x^(i-1), Horner from the top
  Scalar acc(1);
  for (std::size_t i = p.size(); i-- > 0;) acc = acc * x + p[i];
  return acc;
}

}  // namespace

ParallelRankCheck parallel_rank_check(const ExactMatrix& g_tilde) {
  if (!g_tilde.square()) throw DimensionError("parallel_rank_check needs a square matrix");
  ParallelRankCheck out;
  out.residual_rank = rank(rank_matrix(g_tilde));
  out.passes = out.residual_rank <= 1;
  out.degenerate = out.residual_rank == 0;
  return out;
}

NodePolynomial recover_node_polynomial(const ExactMatrix& g_tilde) {
  if (!g_tilde.square()) throw DimensionError("recover_node_polynomial needs a square matrix");
  const std::size_t s = g_tilde.rows();
  const ExactMatrix r = rank_matrix(g_tilde);
  std::optional<std::size_t> col;
  for (std::size_t j = 0; j + 1 < s && !col; ++j)
    if (!r(s, j).is_zero()) col = j;
  bool commutator_zero = true;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j + 1 < s; ++j) commutator_zero = commutator_zero && r(i, j).is_zero();
  if (!col) {
    if (commutator_zero)
      throw UnderdeterminedError("the commutator vanishes: every monic node polynomial is admissible");
    throw ReconstructionError("degenerate last row: e_s^T Gt vanishes on columns 1..s-1");
  }

  NodePolynomial out;
  out.p.resize(s);
  for (std::size_t i = 0; i < s; ++i) out.p[i] = r(i, *col) / r(s, *col);
  for (std::size_t j = 0; j + 1 < s; ++j)
    for (std::size_t i = 0; i < s; ++i)
      if (!(r(i, j) == out.p[i] * r(s, j)))
        throw ReconstructionError("rank condition fails: the node polynomial system is inconsistent");

  // companion matrix of x^s + sum p_i x^(i-1)
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t i = 1; i < s; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  std::vector<double> pf;
  for (const auto& x : out.p) pf.push_back(x.to_double());
  for (std::size_t i = 0; i < s; ++i) comp(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s - 1)) = -pf[i];
  const auto ev = eig_float(from_eigen(comp));
  auto value = [&](double x, double& deriv) {
    double v = 1.0, dv = 0.0;
    for (std::size_t i = s; i-- > 0;) {
      dv = dv * x + v;
      v = v * x + pf[i];
    }
    deriv = dv;
    return v;
  };
  for (const auto& z : ev) {
    out.max_imaginary = std::max(out.max_imaginary, std::abs(z.imag()));
    double x = z.real();
    for (int it = 0; it < 3; ++it) {
      double dv;
      const double v = value(x, dv);
      if (dv == 0.0) break;
      const double nx = x - v / dv;
      if (!std::isfinite(nx) || std::abs(nx - x) > 1e-6 * std::max(1.0, std::abs(x))) break;
      x = nx;
    }
    out.roots.push_back(x);
  }
  std::sort(out.roots.begin(), out.roots.end());
  for (double x : out.roots) {
    const Scalar q(rationalize(x));
    if (evaluate(out.p, q).is_zero()) out.exact_roots.emplace_back(q);
    else out.exact_roots.emplace_back(std::nullopt);
  }
  return out;
}

SylvesterHint sylvester_real_eigen_hint(const RealMatrix& a) {
  if (!a.square()) throw DimensionError("sylvester_real_eigen_hint needs a square matrix");
  const std::size_t n = a.rows();
  std::vector<double> traces(2 * n > 0 ? 2 * n - 1 : 0);
  RealMatrix power = RealMatrix::identity(n);
  for (std::size_t k = 0; k < traces.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) traces[k] += power(i, i);
    power = power * a;
  }
  RealMatrix hankel(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) hankel(i, j) = traces[i + j];
  SylvesterHint out;
  const double scale = std::max(1.0, max_abs(hankel));
  for (std::size_t k = 0; k < n; ++k) {
    const double piv = hankel(k, k);
    out.pivots.push_back(piv);
    if (piv < -1e-8 * scale) {
      out.real_spectrum_plausible = false;
      break;
    }
    if (std::abs(piv) <= 1e-8 * scale) break;  // remaining block is numerically singular
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = hankel(i, k) / piv;
      for (std::size_t j = k; j < n; ++j) hankel(i, j) -= f * hankel(k, j);
    }
  }
  return out;
}

}  // namespace peer_astab
