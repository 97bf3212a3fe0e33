#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peer_astab/matrix.hpp"
#include "peer_astab/peer.hpp"

namespace peer_astab {

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A = U L U^-1 with U upper (diagonal prescribed) and L lower triangular.
struct TriangularCanonicalForm {
  RealMatrix U;
  RealMatrix L;
  double residual = 0.0;  // see TcfOptions::mode
  int iterations = 0;
  int restarts = 0;
};

struct TcfOptions {
  enum class Mode {
    /// Damped Newton on the strict upper triangle of U^-1 A U; residual is its
    /// max norm, required <= tolerance (default 1e-12).
    free,
    /// Levenberg-Marquardt on A U - U L with one shared diagonal for L;
    /// residual is max|A U - U L| / (max|A| max|U|).
    equal_diagonal,
  };
  Mode mode = Mode::free;
  int max_iterations = 200;
  int max_restarts = 10;
  std::uint64_t seed = 0x5EED;
  double tolerance = 1e-12;
};

/// Throws ConvergenceError when no restart reaches the tolerance.
TriangularCanonicalForm triangular_canonical_form(const RealMatrix& a,
                                                  const std::vector<double>& prescribed_diag,
                                                  const TcfOptions& options = {});

/// Z-free seed of a diagonally implicit method.
struct CompactForm {
  RealMatrix E;  // strictly upper, nonzero superdiagonal
  RealMatrix X;  // W = Psi_E(I) - X
  double c1 = 0.0;
  double cs = 1.0;
  bool singly_implicit = true;  // L_H has one s-fold diagonal value
};

/// X with P_E(X) = slack and the given kernel entries, by least squares.
RealMatrix compact_from_slack(const RealMatrix& e, const RealMatrix& slack,
                              const std::map<std::pair<std::size_t, std::size_t>, double>& kernel);

struct ReconstructionDiagnostics {
  double eta = 0.0;                    // mean diagonal of L_H
  double eta_spread = 0.0;             // max deviation of diag(L_H) from eta
  double tcf_residual = 0.0;
  double superdiagonal_residual = 0.0; // E' against (1, ..., s-1)
  double node_consistency = 0.0;       // remaining entries of E'
  std::optional<double> node_condition;  // s = 4: 2e'14 - e'13 (e'13 + e'24)
  double upper_residual = 0.0;         // strict upper part of G
  double generic_residual = 0.0;       // H - E - Zh^-1 Wh
  RealMatrix U_H;
  RealMatrix L_H;
  RealMatrix E_prime;
};

struct Reconstruction {
  RealPeerMethod method;
  WeightPair<double> weights;  // hat form
  ReconstructionDiagnostics diagnostics;
};

/// The five-step algorithm: W and H from the seed, triangular canonical form,
/// congruence with U_H, node recovery, final congruence with L_V.
/// Throws ReconstructionError naming the failing step.
Reconstruction reconstruct_diag(const CompactForm& cf, double node_tolerance = 1e-8);

struct RecoveredNodes {
  RealNodeSet nodes;
  double superdiagonal_residual = 0.0;
  double consistency_residual = 0.0;
  std::optional<double> node_condition;
};

/// Solves E' = U_V Et U_V^-1 for c_2..c_{s-1} from the second superdiagonal,
/// c_{i+1} = (c_1 + ... + c_i - e'_{i,i+2}) / i, and checks the other entries.
/// Throws ReconstructionError on inconsistency or repeated nodes.
RecoveredNodes recover_nodes(const RealMatrix& e_prime, double c1, double cs,
                             double tolerance = 1e-8);

struct ParallelRankCheck {
  bool passes = false;
  bool degenerate = false;  // rank 0
  std::size_t residual_rank = 0;
};

/// Rank of columns 1..s-1 of [F0 Gt - Gt F0 ; e_s^T Gt].
ParallelRankCheck parallel_rank_check(const ExactMatrix& g_tilde);

struct NodePolynomial {
  std::vector<Scalar> p;  // x^s + sum_i p_i x^(i-1)
  std::vector<double> roots;               // sorted ascending
  std::vector<std::optional<Scalar>> exact_roots;  // confirmed rational roots
  double max_imaginary = 0.0;
};

class UnderdeterminedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws UnderdeterminedError when the system leaves p free and
/// ReconstructionError when it is degenerate or inconsistent.
NodePolynomial recover_node_polynomial(const ExactMatrix& g_tilde);

/// Traces-of-powers Hankel test. A negative pivot proves non-real
/// eigenvalues; otherwise the spectrum is plausibly real. Advisory only.
struct SylvesterHint {
  std::vector<double> pivots;
  bool real_spectrum_plausible = true;
};
SylvesterHint sylvester_real_eigen_hint(const RealMatrix& a);

}  // namespace peer_astab
