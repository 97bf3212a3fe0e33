#include "peer_astab/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace peer_astab {

namespace {

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log grid needs 0 < lo <= hi");
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = std::exp(a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1));
  return out;
}

using ExtComplex = std::complex<long double>;
using ExtMatrix = Eigen::Matrix<ExtComplex, Eigen::Dynamic, Eigen::Dynamic>;

ExtMatrix extend(const RealMatrix& a) { return to_eigen(a).cast<long double>().cast<ExtComplex>(); }

// Double rounding inside the solve and the eigen iteration costs up to ~1e-9 near z = 0 for
// six-stage methods with |B| in the thousands; 64-bit mantissas bring that under 1e-11.
Sample sample_one(const RealPeerMethod& m, std::complex<double> z) {
  const Eigen::Index s = static_cast<Eigen::Index>(m.stages());
  const ExtComplex ze(z.real(), z.imag());
  const ExtMatrix lhs = ExtMatrix::Identity(s, s) - ze * extend(m.G);
  Eigen::PartialPivLU<ExtMatrix> lu(lhs);
  const long double scale = std::max<long double>(1.0L, lhs.cwiseAbs().maxCoeff());
  if (std::abs(lu.determinant()) <= 1e-14L * std::pow(scale, static_cast<long double>(s))) return {z, 0.0, true};
  const ExtMatrix mz = lu.solve(extend(m.B) + ze * extend(m.A));
  Eigen::ComplexEigenSolver<ExtMatrix> solver(mz, false);
  if (solver.info() != Eigen::Success) throw ConvergenceError("eigenvalue iteration did not converge");
  long double r = 0.0L;
  for (const auto& l : solver.eigenvalues()) r = std::max(r, std::abs(l));
  return {z, static_cast<double>(r), false};
}

Eigen::MatrixXcd complexify(const RealMatrix& a) { return to_eigen(a).cast<std::complex<double>>(); }

}  // namespace

std::vector<std::complex<double>> SampleGrid::points() const {
  std::vector<std::complex<double>> zs;
  const auto re = log_grid(re_min, re_max, re_points);
  auto im = log_grid(im_min, im_max, im_points);
  if (!re.empty()) im.insert(im.begin(), 0.0);
  for (double x : re)
    for (double y : im) zs.emplace_back(-x, y);
  for (double y : log_grid(im_min, im_max, boundary_points)) zs.emplace_back(0.0, y);
  if (include_origin) zs.emplace_back(0.0, 0.0);
  return zs;
}

SampleGrid SampleGrid::parse(std::string_view spec) {
  SampleGrid g;
  auto number = [](std::string_view s) {
    std::size_t used = 0;
    const std::string str(s);
    double v = 0.0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != str.size() || str.empty()) throw std::invalid_argument("bad grid number '" + str + "'");
    return v;
  };
  auto count = [&](std::string_view s) {
    const double v = number(s);
    if (v < 0 || v != std::floor(v)) throw std::invalid_argument("bad grid count '" + std::string(s) + "'");
    return static_cast<std::size_t>(v);
  };
  while (!spec.empty()) {
    const auto comma = spec.find(',');
    const auto item = spec.substr(0, comma);
    spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("grid entry without '=': " + std::string(item));
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (key == "re" || key == "im") {
      const auto c1 = value.find(':');
      const auto c2 = c1 == std::string_view::npos ? c1 : value.find(':', c1 + 1);
      if (c2 == std::string_view::npos) throw std::invalid_argument("grid axis must be lo:hi:n");
      const double lo = number(value.substr(0, c1));
      const double hi = number(value.substr(c1 + 1, c2 - c1 - 1));
      const std::size_t n = count(value.substr(c2 + 1));
      (key == "re" ? g.re_min : g.im_min) = lo;
      (key == "re" ? g.re_max : g.im_max) = hi;
      (key == "re" ? g.re_points : g.im_points) = n;
    } else if (key == "boundary") {
      g.boundary_points = count(value);
    } else if (key == "origin") {
      g.include_origin = count(value) != 0;
    } else {
      throw std::invalid_argument("unknown grid key '" + std::string(key) + "'");
    }
  }
  g.points();  // validates ranges
  return g;
}

std::vector<Sample> sample_points(const RealPeerMethod& m, const std::vector<std::complex<double>>& zs,
                                  Execution exec) {
  std::vector<Sample> out(zs.size());
  const auto n = static_cast<long>(zs.size());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (long k = 0; k < n; ++k) out[k] = sample_one(m, zs[k]);
  } else {
    for (long k = 0; k < n; ++k) out[k] = sample_one(m, zs[k]);
  }
  return out;
}

ValidationReport sample_spectral_radius(const RealPeerMethod& m, const SampleGrid& grid, Execution exec) {
  if (!m.stiffly_accurate()) throw std::invalid_argument("spectral-radius sampling expects A = 0");
  const auto zs = grid.points();
  if (zs.empty()) throw std::invalid_argument("sample grid has no points");
  ValidationReport r;
  r.samples = sample_points(m, zs, exec);
  // reduction in grid order keeps the argmax independent of the thread count
  for (const auto& s : r.samples) {
    if (s.pole) {
      ++r.poles_skipped;
      continue;
    }
    if (!r.max_spectral_radius || s.spectral_radius > *r.max_spectral_radius) {
      r.max_spectral_radius = s.spectral_radius;
      r.argmax_z = s.z;
    }
  }
  if (!r.max_spectral_radius) throw std::invalid_argument("every grid point is a pole of M(z)");
  return r;
}

double weighted_norm_bound(const RealPeerMethod& m, const WeightPair<double>& w, const SampleGrid& grid) {
  const RealMatrix wo = transform_weights(m, w, Representation::original).W;
  if (!cholesky_positive_definite(wo)) throw std::invalid_argument("W is not positive definite");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(symmetric_part(wo)));
  const Eigen::MatrixXcd root = es.operatorSqrt().cast<std::complex<double>>();
  const Eigen::MatrixXcd root_inv = es.operatorInverseSqrt().cast<std::complex<double>>();
  double best = 0.0;
  for (const auto z : grid.points()) {
    try {
      const Eigen::MatrixXcd t = root * stability_matrix(m, z) * root_inv;
      best = std::max(best, Eigen::JacobiSVD<Eigen::MatrixXcd>(t).singularValues()(0));
    } catch (const PoleError&) {
    }
  }
  return best;
}

double numerical_radius(const ComplexMatrix& u, const RealMatrix& n) {
  if (u.rows() != u.cols() || static_cast<std::size_t>(u.rows()) != n.rows() || !n.square())
    throw DimensionError("numerical_radius: shapes disagree");
  Eigen::LLT<Eigen::MatrixXd> llt(to_eigen(symmetric_part(n)));
  if (llt.info() != Eigen::Success || !cholesky_positive_definite(n))
    throw std::invalid_argument("numerical_radius: N is not positive definite");
  const Eigen::MatrixXcd l = Eigen::MatrixXd(llt.matrixL()).cast<std::complex<double>>();
  const Eigen::MatrixXcd ut =
      l.triangularView<Eigen::Lower>().solve(l.triangularView<Eigen::Lower>().solve(u.adjoint()).adjoint());

  auto f = [&](double theta) {
    const Eigen::MatrixXcd rot = std::polar(1.0, theta) * ut;
    const Eigen::MatrixXcd herm = (rot + rot.adjoint()) / 2.0;
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(herm, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  };
  constexpr int points = 512;
  constexpr int rounds = 3;
  constexpr int candidates = 3;
  double span = 2 * std::numbers::pi;
  std::vector<double> centres{0.0};
  double best = -std::numeric_limits<double>::infinity();
  for (int round = 0; round <= rounds; ++round) {
    std::vector<std::pair<double, double>> values;
    for (double c : centres) {
      const double lo = round == 0 ? 0.0 : c - span / 2;
      const double step = span / (round == 0 ? points : points - 1);
      for (int k = 0; k < points; ++k) {
        const double th = lo + step * k;
        values.emplace_back(f(th), th);
      }
    }
    std::sort(values.begin(), values.end(), std::greater<>());
    best = std::max(best, values.front().first);
    centres.clear();
    for (int k = 0; k < candidates && k < static_cast<int>(values.size()); ++k) centres.push_back(values[k].second);
    span = 2 * span / (round == 0 ? points : points - 1);
  }
  return std::max(best, 0.0);
}

double numerical_radius(const RealMatrix& u, const RealMatrix& n) { return numerical_radius(complexify(u), n); }

bool zero_stability(const RealMatrix& b) {
  if (!b.square()) throw DimensionError("zero_stability needs a square matrix");
  const auto ev = eig_float(b);
  const Eigen::MatrixXcd bc = complexify(b);
  const auto size = bc.rows();
  for (const auto lambda : ev) {
    if (std::abs(lambda) > 1 + 1e-10) return false;
    if (std::abs(lambda) < 1 - 1e-8) continue;
    const auto algebraic = std::count_if(ev.begin(), ev.end(), [&](auto mu) { return std::abs(mu - lambda) <= 1e-6; });
    const Eigen::MatrixXcd shifted = bc - lambda * Eigen::MatrixXcd::Identity(size, size);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(shifted).singularValues();
    const double cut = 1e-8 * std::max(1.0, sv.size() ? sv(0) : 0.0);
    const auto rank = (sv.array() > cut).count();
    if (size - rank < algebraic) return false;
  }
  return true;
}

bool zero_stability(const RealPeerMethod& m) { return zero_stability(m.B); }

void write_csv(std::ostream& out, const std::vector<Sample>& samples) {
  const auto old = out.precision(17);
  out << "re_z,im_z,spectral_radius\n";
  for (const auto& s : samples)
    if (!s.pole) out << s.z.real() << ',' << s.z.imag() << ',' << s.spectral_radius << '\n';
  out.precision(old);
}

}  // namespace peer_astab
