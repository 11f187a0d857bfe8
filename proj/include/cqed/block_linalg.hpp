#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cqed/errors.hpp"
#include "cqed/secular_solver.hpp"

namespace cqed {

// Thrown when a block matrix is exactly singular; carries a null direction.
class SingularBlockError : public Error {
 public:
  SingularBlockError(const std::string& what, Eigen::VectorXd witness)
      : Error(ErrorCode::NotInvertible, what), witness_(std::move(witness)) {}
  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  Eigen::VectorXd witness_;
};

// [[A1, v u^T], [u v^T, diag(D2) + d u u^T]]
struct RankOneBlockMatrix {
  Eigen::MatrixXd A1;
  Eigen::VectorXd v;
  Eigen::VectorXd u;
  Eigen::VectorXd D2;
  double d = 0.0;

  Eigen::MatrixXd dense() const;
};

struct BlockInverse {
  Eigen::MatrixXd B11, B12, B22;  // B21 = B12^T
  double trace_term = 0.0;        // T = (u^T A2^-1 u)(v^T A1^-1 v)

  Eigen::MatrixXd dense() const;
};

BlockInverse invert_rank_one_block(const RankOneBlockMatrix& m,
                                   double singular_tol = 1e-14);

// [[A, -a U^T], [-U a^T, C_alpha + U U^T]] with a = [a_1..a_M], U = [u_1..u_M].
struct FiniteRankBlockMatrix {
  Eigen::MatrixXd A;        // p x p
  Eigen::MatrixXd a;        // p x M
  Eigen::MatrixXd C_alpha;  // N x N
  Eigen::MatrixXd U;        // N x M

  Eigen::MatrixXd dense() const;
};

struct FiniteRankInverse {
  Eigen::MatrixXd mu, nu;                 // u_i^T C_alpha^-1 u_j, a_i^T A^-1 a_j
  Eigen::MatrixXd beta, gamma, lambda, rho;
  Eigen::MatrixXd B11, B12, B21, B22;
  double condition = 0.0;                 // of I + mu - nu mu

  Eigen::MatrixXd dense() const;
};

FiniteRankInverse invert_finite_rank_block(const FiniteRankBlockMatrix& m,
                                           double singular_tol = 1e-14);

// Max residual of beta = mu gamma, rho = I + mu lambda,
// (I + mu) gamma - nu beta = I, (I + mu) lambda - nu rho + I = 0.
double coefficient_residual(const FiniteRankInverse& inv);

// ---------------------------------------------------------------------------
// Networks attached to one line through rank-one channels. The line block is
// N_alpha I + sum (C_d - alpha c) u u^T in capacitance and
// N_alpha Omega^2 + sum (1/L_d - 1/(beta l)) u u^T in inverse inductance; the
// network-line blocks are -C_c a u^T and -(1/L_c) b u^T.
struct NetworkPart {
  Eigen::MatrixXd A, Binv;
  Eigen::VectorXd a, b;
};

struct Channel {
  std::size_t net = 0;
  Eigen::VectorXd u;  // mode values (or jumps) at the attach point
  double C_c = 0.0, C_d = 0.0;
  double L_c = 0.0, L_d = 0.0;  // inf disconnects
  double alpha = 0.0, beta = 0.0;
  double rho = 1.0;  // second sum rule limit for this attach point
};

struct ChannelSystem {
  std::vector<NetworkPart> nets;
  std::vector<Channel> channels;
  double N_alpha = 1.0;
  Eigen::VectorXd omega2;  // rad^2/s^2
  double c = 0.0, l = 0.0;

  std::size_t network_order() const;
  std::size_t modes() const { return static_cast<std::size_t>(omega2.size()); }
};

struct DenseSystem {
  Eigen::MatrixXd C, Linv;
  std::size_t p = 0, N = 0;
};

inline constexpr std::size_t kDefaultDenseCap = 10000;

DenseSystem dense_truncated_assembly(const ChannelSystem& sys,
                                     std::size_t cap = kDefaultDenseCap);

// Discrete LC ladder standing in for a line. Attachment nodes carry only the
// dressing capacitance alpha c and inductance beta l, so the normal modes are
// a complete basis and the sum rules hold exactly.
struct LadderSpec {
  double c = 0.0, l = 0.0, length = 0.0;
  std::size_t nodes = 200;
  EndKind far_end = EndKind::Short;
  std::vector<Attachment> attachments;  // alpha > 0 required
};

struct LadderModes {
  Eigen::VectorXd omega2;
  Eigen::MatrixXd u;                  // N x M, values at the attachments
  std::vector<std::size_t> node_of;   // attachment -> node
  Eigen::VectorXd resolvent;          // (K^-1)_ii = sum u_n(x_i)^2/(N omega_n^2)
  double N_alpha = 1.0;
};

LadderModes ladder_modes(const LadderSpec& spec, double N_alpha);

struct ZeroModeReport {
  bool cap_degenerate = false;
  bool ind_degenerate = false;
  std::vector<double> cap_condition;  // per channel, 0 means singular
  std::vector<double> ind_condition;  // NaN when not applicable
  Eigen::VectorXd cap_witness, ind_witness;
  // numerical confirmation on the dense assembly, filled when flagged
  double cap_rayleigh = 0.0, ind_rayleigh = 0.0;  // relative to matrix scale
  double cap_min_eig = 0.0, ind_min_eig = 0.0;    // relative to matrix scale
  bool cap_confirmed = false, ind_confirmed = false;
};

// Closed-form conditions evaluated per channel; the channel u vectors must be
// complete (a ladder basis) for the closed forms to be exact.
ZeroModeReport detect_zero_modes(const ChannelSystem& sys, double tol = 1e-12);

struct NullCheck {
  double rayleigh = 0.0;   // w^T M w / (|w|^2 |M|)
  double residual = 0.0;   // |M w| / (|M| |w|)
  double min_eig = 0.0;    // smallest eigenvalue / |M|
};

// |M| is the largest eigenvalue magnitude.
NullCheck check_null_vector(const Eigen::MatrixXd& M, const Eigen::VectorXd& w);

// Off-diagonal harmonic-harmonic entries of the capacitive inverse relative
// to its diagonal, from a dense LU inverse.
double mode_mode_residual(const DenseSystem& d);

struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, first nonzero component positive
};

// LAPACK dsyevd; vectors optional.
SymEig sym_eig(const Eigen::MatrixXd& S, bool vectors = true);

// S^{1/2} and S^{-1/2} of a symmetric positive-definite matrix.
Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& S);
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& S);

}  // namespace cqed
