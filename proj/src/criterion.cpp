#include "peer_astab/criterion.hpp"

#include <cmath>
#include <string>

#include "peer_astab/maps.hpp"

namespace peer_astab {

namespace {

void require_entries_in(const ExactMatrix& m, const FieldSpec& field, const char* what) {
  for (const Scalar& x : m.elements()) {
    if (x.is_rational()) continue;
    if (field.kind != FieldSpec::Kind::quadratic || x.surd() != field.d)
      throw PreconditionError(std::string(what) + " has an entry outside the field " + field.str());
  }
}

void require_shape(const ExactMatrix& m, std::size_t s, const char* what) {
  if (m.rows() != s || m.cols() != s)
    throw PreconditionError(std::string(what) + " must be " + std::to_string(s) + "x" +
                            std::to_string(s));
}

FieldSpec field_of(const ExactMatrix& m) {
  for (const Scalar& x : m.elements())
    if (!x.is_rational()) return FieldSpec::quadratic(x.surd());
  return FieldSpec::rational();
}

}  // namespace

void require_consistent(const PeerMethod& m) {
  if (!m.field.exact()) throw PreconditionError("certification needs an exact field");
  const std::size_t s = m.stages();
  require_shape(m.G, s, "G");
  require_shape(m.B, s, "B");
  require_shape(m.A, s, "A");
  ExactMatrix c(s, 1);
  for (std::size_t i = 0; i < s; ++i) c(i, 0) = m.nodes[i];
  require_entries_in(c, m.field, "nodes");
  require_entries_in(m.G, m.field, "G");
  require_entries_in(m.B, m.field, "B");
  require_entries_in(m.A, m.field, "A");
}

void require_consistent(const PeerMethod& m, const WeightPair<Scalar>& w) {
  require_consistent(m);
  const std::size_t s = m.stages();
  require_shape(w.Z, s, "Z");
  require_shape(w.W, s, "W");
  if (!w.Z.is_symmetric()) throw PreconditionError("Z is not symmetric");
  if (!w.W.is_symmetric()) throw PreconditionError("W is not symmetric");
  require_entries_in(w.Z, m.field, "Z");
  require_entries_in(w.W, m.field, "W");
}

ExactMatrix build_test_original(const PeerMethod& m, const WeightPair<Scalar>& w) {
  if (w.representation != Representation::original)
    throw PreconditionError("build_test_original needs original-form weights");
  if (!m.A.is_zero()) throw PreconditionError("the criterion covers A = 0 only");
  const ExactMatrix gt_z = m.G.transpose() * w.Z;
  const ExactMatrix m11 = gt_z + gt_z.transpose() - w.W;
  const ExactMatrix m12 = -(gt_z * m.B);
  return block_matrix(m11, m12, m12.transpose(), w.W);
}

ExactMatrix build_test_hat(const PeerMethod& m, const WeightPair<Scalar>& w) {
  if (w.representation != Representation::hat)
    throw PreconditionError("build_test_hat needs hat-form weights");
  if (!m.A.is_zero()) throw PreconditionError("the criterion covers A = 0 only");
  const auto ops = build_E_Theta(m.nodes);
  const ExactMatrix h = inverse(m.G);
  const ExactMatrix& zh = w.Z;
  const ExactMatrix& wh = w.W;
  const ExactMatrix zh_h = zh * h;
  const ExactMatrix q = zh_h * m.B * inverse(ops.Theta);
  const ExactMatrix m11 = zh_h + zh_h.transpose() - q - q.transpose() - map_P(ops.E, wh);
  const ExactMatrix m12 = wh - q;
  return block_matrix(m11, m12, m12.transpose(), wh);
}

ExactMatrix build_test_nordsieck(const PeerMethod& m, const WeightPair<Scalar>& w) {
  if (w.representation != Representation::nordsieck)
    throw PreconditionError("build_test_nordsieck needs Nordsieck-form weights");
  const std::size_t s = m.stages();
  const ExactMatrix v = vandermonde(m.nodes);
  const ExactMatrix hat = build_test_hat(m, transform_weights(m, w, Representation::hat));
  const ExactMatrix zero(s, s);
  const ExactMatrix vv = block_matrix(v, zero, zero, v);
  return vv.transpose() * hat * vv;
}

template <class T>
Matrix<T> build_test_generic(const Matrix<T>& e, const Matrix<T>& h, const Matrix<T>& w_hat,
                             const Matrix<T>& z_hat) {
  const Matrix<T> m11 = map_L(e, z_hat) - map_P(e, w_hat);
  const Matrix<T> m12 = w_hat - z_hat * (h - e);
  return block_matrix(m11, m12, m12.transpose(), w_hat);
}

template ExactMatrix build_test_generic(const ExactMatrix&, const ExactMatrix&, const ExactMatrix&,
                                        const ExactMatrix&);
template RealMatrix build_test_generic(const RealMatrix&, const RealMatrix&, const RealMatrix&,
                                       const RealMatrix&);

TestMatrixReport certify(const PeerMethod& m, const WeightPair<Scalar>& w) {
  require_consistent(m, w);
  if (!m.A.is_zero()) throw PreconditionError("the criterion covers stiffly accurate methods (A = 0) only");

  TestMatrixReport r;
  r.form = w.representation;
  switch (w.representation) {
    case Representation::original: r.matrix = build_test_original(m, w); break;
    case Representation::hat: r.matrix = build_test_hat(m, w); break;
    case Representation::nordsieck: r.matrix = build_test_nordsieck(m, w); break;
  }
  r.certificate = psd_check(r.matrix);
  r.z_definiteness = psd_check(w.Z).verdict;
  r.w_definiteness = psd_check(w.W).verdict;
  r.order_conditions = order_residual(m).is_zero();
  if (!r.order_conditions) r.warnings.push_back("B does not satisfy the order s-1 conditions exactly");
  if (w.W.is_zero()) r.warnings.push_back("W = 0: the certificate rests on Z alone");
  if (r.z_definiteness != Definiteness::positive_definite)
    r.warnings.push_back("Z is not positive definite");
  if (r.w_definiteness == Definiteness::indefinite) r.warnings.push_back("W is not positive semidefinite");

  if (w.representation == Representation::nordsieck) {
    const std::size_t n = r.matrix.rows();
    std::size_t k = 0;
    while (k < n) {
      bool zero_row = true;
      for (std::size_t j = 0; j < n && zero_row; ++j) zero_row = r.matrix(k, j).is_zero();
      if (!zero_row) break;
      ++k;
    }
    r.block_defect = k;
    const std::size_t expected = (m.stages() + 1) / 2;
    if (r.certificate.semidefinite() && r.order_conditions && k < expected)
      r.warnings.push_back("Nordsieck test matrix lacks the expected " + std::to_string(expected) +
                           " leading zero rows");
    if (k < n) {
      r.nontrivial_block = r.matrix.block(k, k, n - k, n - k);
      r.nontrivial_definiteness = psd_check(*r.nontrivial_block).verdict;
    }
  }

  r.a_stable = r.certificate.semidefinite() &&
               r.z_definiteness == Definiteness::positive_definite &&
               r.w_definiteness != Definiteness::indefinite;
  return r;
}

std::pair<Vector<Scalar>, Vector<Scalar>> necessary_conditions(const PeerMethod& m,
                                                               const WeightPair<Scalar>& w) {
  if (w.representation != Representation::original)
    throw PreconditionError("necessary_conditions needs original-form weights");
  const std::size_t s = m.stages();
  const Vector<Scalar> ones(s, Scalar(1));
  const Vector<Scalar> zg1 = w.Z * (m.G * ones);
  const ExactMatrix bt = m.B.transpose();
  Vector<Scalar> first = bt * zg1;
  for (std::size_t i = 0; i < s; ++i) first[i] -= zg1[i];
  Vector<Scalar> second = w.W * ones;
  const Vector<Scalar> bt_zg1 = bt * zg1;
  for (std::size_t i = 0; i < s; ++i) second[i] -= bt_zg1[i];
  return {first, second};
}

Construction construct_general(const NodeSet& nodes, const ExactMatrix& w0, FieldSpec field) {
  const std::size_t s = nodes.size();
  if (w0.rows() != s || w0.cols() != s) throw std::invalid_argument("seed W must be s x s");
  if (!w0.is_symmetric() || psd_check(w0).verdict != Definiteness::positive_definite)
    throw std::invalid_argument("seed W is not positive definite");
  const auto ops = build_E_Theta(nodes);
  const ExactMatrix z_hat = map_Phi(ops.E, w0);
  const ExactMatrix h = ops.E + solve(z_hat, w0);
  Construction c{assemble_order_sm1(nodes, inverse(h), field), {z_hat, w0, Representation::hat}};
  return c;
}

std::vector<ExactMatrix> symmetric_kernel(const ExactMatrix& e) {
  const std::size_t s = e.rows();
  if (e == e_tilde<Scalar>(s)) return kernel_basis<Scalar>(s);
  std::vector<EntryIndex> unknowns;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i; j < s; ++j) unknowns.emplace_back(i, j);
  ExactMatrix a(unknowns.size(), unknowns.size());
  for (std::size_t c = 0; c < unknowns.size(); ++c) {
    ExactMatrix x(s, s);
    x(unknowns[c].first, unknowns[c].second) = x(unknowns[c].second, unknowns[c].first) = Scalar(1);
    const ExactMatrix img = map_L(e, x);
    for (std::size_t r = 0; r < unknowns.size(); ++r) a(r, c) = img(unknowns[r].first, unknowns[r].second);
  }
  std::vector<ExactMatrix> basis;
  for (const auto& v : nullspace(a)) {
    ExactMatrix k(s, s);
    for (std::size_t c = 0; c < unknowns.size(); ++c)
      k(unknowns[c].first, unknowns[c].second) = k(unknowns[c].second, unknowns[c].first) = v[c];
    basis.push_back(std::move(k));
  }
  return basis;
}

ParamSolution construct_param(const ExactMatrix& e, const ExactMatrix& w0, const SlackSpec& slack) {
  const std::size_t s = e.rows();
  if (w0.rows() != s || slack.m11.rows() != s || slack.m12.rows() != s)
    throw std::invalid_argument("construct_param: shape mismatch");
  const auto basis = symmetric_kernel(e);
  if (slack.kernel_coeffs.size() > basis.size())
    throw std::invalid_argument("more kernel coefficients than kernel dimension " +
                                std::to_string(basis.size()));
  ParamSolution out;
  out.kernel = ExactMatrix(s, s);
  for (std::size_t i = 0; i < slack.kernel_coeffs.size(); ++i)
    out.kernel += basis[i] * slack.kernel_coeffs[i];
  out.preimage = preimage_P(e, slack.m11).X;

  const ExactMatrix z_hat = map_Phi(e, w0);
  const ExactMatrix w_hat = w0 - out.kernel - out.preimage;
  const PsdCertificate w_cert = psd_check(w_hat);
  if (w_cert.verdict != Definiteness::positive_definite)
    throw InfeasibleSlackError("W = W0 - K - N is not positive definite", w_cert.witness);

  out.H = e + solve(z_hat, w_hat - slack.m12);
  out.weights = {z_hat, w_hat, Representation::hat};
  out.test_matrix = build_test_generic(e, out.H, w_hat, z_hat);
  out.certificate = psd_check(out.test_matrix);
  if (!out.certificate.semidefinite())
    throw InfeasibleSlackError("assembled test matrix is indefinite", out.certificate.witness);
  return out;
}

template <class T>
ZFreeSolution<T> construct_zfree(const Matrix<T>& e, const Matrix<T>& k) {
  const std::size_t s = e.rows();
  if (k.rows() != s || k.cols() != s) throw std::invalid_argument("kernel element must be s x s");
  const Matrix<T> lk = map_L(e, k);
  if constexpr (FieldTraits<T>::exact) {
    if (!lk.is_zero()) throw std::invalid_argument("K is not in the kernel of L_E");
  } else {
    if (max_abs(lk) > 1e-9 * (1.0 + max_abs(e)) * (1.0 + max_abs(k)))
      throw std::invalid_argument("K is not in the kernel of L_E");
  }
  ZFreeSolution<T> out;
  out.W = map_Psi(e, Matrix<T>::identity(s)) + k;
  bool pd;
  if constexpr (FieldTraits<T>::exact) {
    pd = psd_check(out.W).verdict == Definiteness::positive_definite;
  } else {
    pd = cholesky_positive_definite(symmetric_part(out.W));
  }
  if (!pd) throw std::invalid_argument("W = Psi_E(I) + K is not positive definite");
  out.H = e + out.W;
  return out;
}

template ZFreeSolution<Scalar> construct_zfree(const ExactMatrix&, const ExactMatrix&);
template ZFreeSolution<double> construct_zfree(const RealMatrix&, const RealMatrix&);

ZeroSlackSearch find_weights_zero_slack(const NodeSet& nodes, const ExactMatrix& g,
                                        std::size_t points_per_dim) {
  const std::size_t s = nodes.size();
  if (g.rows() != s || g.cols() != s) throw PreconditionError("G must be s x s");
  if (points_per_dim < 2) throw std::invalid_argument("lattice needs at least two points per dimension");
  ExactMatrix h;
  try {
    h = inverse(g);
  } catch (const SingularMatrixError&) {
    throw PreconditionError("G is singular");
  }
  const auto ops = build_E_Theta(nodes);
  const ExactMatrix h_minus_e = h - ops.E;

  std::vector<EntryIndex> unknowns;
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = i; j < s; ++j) unknowns.emplace_back(i, j);
  const std::size_t n = unknowns.size();
  const std::size_t skew_rows = s * (s - 1) / 2;
  ExactMatrix a(skew_rows + n, n);
  for (std::size_t c = 0; c < n; ++c) {
    ExactMatrix z(s, s);
    z(unknowns[c].first, unknowns[c].second) = z(unknowns[c].second, unknowns[c].first) = Scalar(1);
    const ExactMatrix w = z * h_minus_e;
    const ExactMatrix m11 = map_L(ops.E, z) - map_P(ops.E, w);
    std::size_t r = 0;
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = i + 1; j < s; ++j) a(r++, c) = w(i, j) - w(j, i);
    for (const auto& [i, j] : unknowns) a(r++, c) = m11(i, j);
  }

  ZeroSlackSearch out;
  std::vector<ExactMatrix> directions;
  for (const auto& v : nullspace(a)) {
    ExactMatrix z(s, s);
    for (std::size_t c = 0; c < n; ++c)
      z(unknowns[c].first, unknowns[c].second) = z(unknowns[c].second, unknowns[c].first) = v[c];
    directions.push_back(std::move(z));
  }
  out.solution_dimension = directions.size();
  if (directions.empty()) return out;

  const PeerMethod method = assemble_order_sm1(nodes, g, field_of(g));
  const long steps = static_cast<long>(points_per_dim) - 1;
  std::vector<long> idx(directions.size(), 0);
  constexpr std::size_t max_samples = 200000;
  while (out.samples_tried < max_samples) {
    bool all_center = true;
    ExactMatrix z(s, s);
    for (std::size_t d = 0; d < directions.size(); ++d) {
      // lattice value -1 + 2 idx / steps
      const Scalar coeff(Rational(2 * idx[d] - steps, steps));
      if (!coeff.is_zero()) {
        all_center = false;
        z += directions[d] * coeff;
      }
    }
    if (!all_center) {
      ++out.samples_tried;
      if (cholesky_positive_definite(to_real(z)) &&
          psd_check(z).verdict == Definiteness::positive_definite) {
        const ExactMatrix w = z * h_minus_e;
        if (psd_check(symmetric_part(w)).semidefinite() && w.is_symmetric()) {
          const WeightPair<Scalar> pair{z, w, Representation::hat};
          if (certify(method, pair).a_stable) {
            out.weights = pair;
            return out;
          }
        }
      }
    }
    std::size_t d = 0;
    while (d < idx.size() && ++idx[d] > steps) idx[d++] = 0;
    if (d == idx.size()) break;
  }
  return out;
}

}  // namespace peer_astab
