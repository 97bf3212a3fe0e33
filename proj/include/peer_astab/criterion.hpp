#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "peer_astab/linalg.hpp"
#include "peer_astab/matrix.hpp"
#include "peer_astab/peer.hpp"

namespace peer_astab {

/// Raised when a method or weight pair violates a precondition of the
/// criterion (A != 0, wrong shapes, entries outside the declared field).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// [[G^T Z + Z G - W, -G^T Z B], [-B^T Z G, W]]. Weights in original form.
ExactMatrix build_test_original(const PeerMethod& m, const WeightPair<Scalar>& w);

/// S^T M S with S = [[I, 0], [Theta^-1, Theta^-1]], written in hat weights.
/// Under the order s-1 conditions it coincides with the generic form.
ExactMatrix build_test_hat(const PeerMethod& m, const WeightPair<Scalar>& w);

/// The hat form congruence diag(V, V); weights in Nordsieck form.
ExactMatrix build_test_nordsieck(const PeerMethod& m, const WeightPair<Scalar>& w);

/// [[L_E(Zh) - P_E(Wh), Wh - Zh (H - E)], [sym, Wh]].
template <class T>
Matrix<T> build_test_generic(const Matrix<T>& e, const Matrix<T>& h, const Matrix<T>& w_hat,
                             const Matrix<T>& z_hat);

struct TestMatrixReport {
  Representation form = Representation::original;
  ExactMatrix matrix;
  PsdCertificate certificate;
  Definiteness z_definiteness = Definiteness::indefinite;
  Definiteness w_definiteness = Definiteness::indefinite;
  bool order_conditions = false;  // B = (I - G E) Theta exactly
  std::size_t block_defect = 0;   // leading zero rows (Nordsieck form)
  std::optional<ExactMatrix> nontrivial_block;
  std::optional<Definiteness> nontrivial_definiteness;
  bool a_stable = false;
  std::vector<std::string> warnings;
};

/// Builds the test matrix of w's representation and checks everything from
/// scratch. Throws PreconditionError for A != 0 or malformed input.
TestMatrixReport certify(const PeerMethod& m, const WeightPair<Scalar>& w);

/// Throws PreconditionError unless every entry lies in m.field and all shapes
/// agree with the stage count.
void require_consistent(const PeerMethod& m);
void require_consistent(const PeerMethod& m, const WeightPair<Scalar>& w);

/// (B^T - I) Z G 1 and W 1 - B^T Z G 1; both vanish for a PSD test matrix.
std::pair<Vector<Scalar>, Vector<Scalar>> necessary_conditions(const PeerMethod& m,
                                                               const WeightPair<Scalar>& w);

struct Construction {
  PeerMethod method;
  WeightPair<Scalar> weights;  // hat form
};

/// Zh = Phi_E(W0), H = E + Zh^-1 W0, G = H^-1, B = (I - G E) Theta.
/// Throws std::invalid_argument if W0 is not positive definite.
Construction construct_general(const NodeSet& nodes, const ExactMatrix& w0, FieldSpec field);

/// Symmetric kernel of L_E: the canonical antidiagonal basis when E is the
/// scaled shift, otherwise an exact nullspace basis.
std::vector<ExactMatrix> symmetric_kernel(const ExactMatrix& e);

struct SlackSpec {
  ExactMatrix m11;                  // P_E(N) = m11 fixes N
  ExactMatrix m12;                  // off-diagonal slack block
  std::vector<Scalar> kernel_coeffs;  // against symmetric_kernel(E)
};

struct ParamSolution {
  ExactMatrix H;
  WeightPair<Scalar> weights;  // Zh, Wh
  ExactMatrix kernel;          // K
  ExactMatrix preimage;        // N
  ExactMatrix test_matrix;     // generic form, re-certified
  PsdCertificate certificate;
};

class InfeasibleSlackError : public std::runtime_error {
 public:
  InfeasibleSlackError(const std::string& what, std::optional<Vector<Scalar>> witness)
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::optional<Vector<Scalar>>& witness() const { return witness_; }

 private:
  std::optional<Vector<Scalar>> witness_;
};

/// Zh = Phi_E(W0), Wh = W0 - K - N, H = E + Zh^-1 (Wh - M12). Throws
/// InfeasibleSlackError when Wh loses definiteness or the assembled test
/// matrix is indefinite.
ParamSolution construct_param(const ExactMatrix& e, const ExactMatrix& w0, const SlackSpec& slack);

/// Z-free seed: W = Psi_E(I) + K, H = E + W. The generic test matrix with
/// Zh = I, Wh = W then has zero 11 and 12 blocks.
template <class T>
struct ZFreeSolution {
  Matrix<T> H;
  Matrix<T> W;
};

/// Throws std::invalid_argument if W is not positive definite (exactly for
/// Scalar, by Cholesky for double).
template <class T>
ZFreeSolution<T> construct_zfree(const Matrix<T>& e, const Matrix<T>& k);

struct ZeroSlackSearch {
  std::size_t solution_dimension = 0;
  std::size_t samples_tried = 0;
  std::optional<WeightPair<Scalar>> weights;  // hat form
};

/// Searches the zero-slack family {Zh symmetric : Zh (H - E) symmetric,
/// L_E(Zh) = P_E(Zh (H - E))} for Zh PD with Wh = Zh (H - E) PSD, sampling a
/// lattice of `points_per_dim` values in [-1, 1] per basis direction. A miss
/// is inconclusive.
ZeroSlackSearch find_weights_zero_slack(const NodeSet& nodes, const ExactMatrix& g,
                                        std::size_t points_per_dim = 11);

}  // namespace peer_astab
