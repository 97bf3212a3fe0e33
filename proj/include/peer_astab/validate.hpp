#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "peer_astab/linalg.hpp"
#include "peer_astab/matrix.hpp"
#include "peer_astab/peer.hpp"

namespace peer_astab {

/// Points z with Re z <= 0: a log grid of negative real parts times
/// {0} plus a log grid of imaginary parts, pure-imaginary boundary samples, z = 0.
/// Only Im z >= 0 is sampled; M(conj z) = conj M(z) for real coefficients.
struct SampleGrid {
  double re_min = 1e-3, re_max = 1e3;
  std::size_t re_points = 60;
  double im_min = 1e-3, im_max = 1e3;
  std::size_t im_points = 60;
  std::size_t boundary_points = 200;
  bool include_origin = true;

  std::vector<std::complex<double>> points() const;

  /// "re=a:b:n,im=c:d:m,boundary=k,origin=0|1"; omitted keys keep defaults.
  static SampleGrid parse(std::string_view spec);
};

struct Sample {
  std::complex<double> z;
  double spectral_radius = 0.0;
  bool pole = false;
};

enum class Execution { serial, parallel };

/// rho(M(z)) at every point, in input order. Poles are flagged, not thrown.
std::vector<Sample> sample_points(const RealPeerMethod& m, const std::vector<std::complex<double>>& zs,
                                  Execution exec = Execution::parallel);

struct ValidationReport {
  std::optional<double> max_spectral_radius;
  std::optional<std::complex<double>> argmax_z;
  std::optional<double> max_weighted_norm;
  std::optional<double> numerical_radius;
  std::optional<bool> zero_stable;
  std::size_t poles_skipped = 0;
  std::vector<Sample> samples;
};

/// Max of rho(M(z)) over the grid; the first maximum in grid order wins.
/// Throws std::invalid_argument for an empty or pole-only grid.
ValidationReport sample_spectral_radius(const RealPeerMethod& m, const SampleGrid& grid,
                                        Execution exec = Execution::parallel);

/// max_z || W^(1/2) M(z) W^(-1/2) ||_2 with W in original form.
/// Throws std::invalid_argument unless W is positive definite.
double weighted_norm_bound(const RealPeerMethod& m, const WeightPair<double>& w, const SampleGrid& grid);

/// r(U, N) = max |x* U x| / x* N x, via N = L L^T and a refined theta sweep.
double numerical_radius(const ComplexMatrix& u, const RealMatrix& n);
double numerical_radius(const RealMatrix& u, const RealMatrix& n);

/// |lambda| <= 1 + 1e-10 for every eigenvalue of B, and eigenvalues near the
/// unit circle non-defective (float rank, threshold 1e-8; heuristic).
bool zero_stability(const RealMatrix& b);
bool zero_stability(const RealPeerMethod& m);

/// re_z,im_z,spectral_radius; poles are omitted.
void write_csv(std::ostream& out, const std::vector<Sample>& samples);

}  // namespace peer_astab
