#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cqed/block_linalg.hpp"
#include "cqed/circuit_model.hpp"

namespace cqed {

// Harmonic sector after the dressing transformation: the kinetic block is
// I/M0 and the potential block M0 diag(Omega^2).
struct DressedImpedance {
  Eigen::MatrixXd M_alpha;    // empty when the spectrum was not requested
  Eigen::MatrixXd coupling;   // N x ports, rotated coupling vectors U f
  Eigen::VectorXd Omega;      // rad/s, ascending
  Eigen::MatrixXd rotation;   // U, rows are normal modes
  double M0 = 0.0;            // F
  double norm = 0.0;          // recorded |f|^2 (Foster-1: |f|^2/M0)
  double norm_limit = 0.0;    // its analytic N -> inf value
  double eig_residual = 0.0;  // |M^-1/2 L^-1 M^-1/2 - U^T Omega^2 U| / |.|
};

struct DressOptions {
  std::optional<double> M0;   // defaults to the first stage capacitance
  bool spectrum = true;       // dense eigendecomposition of order N
};

// Stages are series LC cells in the line joining C_B to ground (C_A shunts
// the anharmonic node). Infinite stage inductance is allowed.
struct Foster1Result {
  DressedImpedance dressed;
  double C_Sigma = 0.0, t = 0.0, d = 0.0;
  double s = 0.0;                 // e^T C_alpha^-1 e
  double eMe = 0.0;               // e^T M_alpha^-1 e
  double q_coefficient = 0.0;     // 1/C_Sigma + t^2 |f|^2/M0, coefficient of q^2/2
  double coupling_coefficient = 0.0;  // C_B/(M0 C_Sigma), multiplies q f.p
  Eigen::MatrixXd kinetic;        // (1+N)^2 inverse capacitance, rotated
  Eigen::MatrixXd potential;      // (1+N)^2 inverse inductance, rotated
};

// Threshold on s C_B above which e^T C_alpha^-1 e counts as divergent.
inline constexpr double kFosterDivergence = 1e12;

// Throws SingularBlockError when C_A = 0 and s C_B >= kFosterDivergence.
Foster1Result foster1_dress(double C_A, double C_B,
                            const std::vector<double>& stage_caps,
                            const std::vector<double>& stage_inds,
                            const DressOptions& opt = {});

// The same final matrices obtained by composing the three point
// transformations (shift by t e, rescale by M0^1/2 M^-1/2, unshift) on the
// dense capacitance matrix and inverting it.
struct HamiltonianMatrices {
  Eigen::MatrixXd kinetic, potential;
};
HamiltonianMatrices foster1_three_step(double C_A, double C_B,
                                       const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds,
                                       std::optional<double> M0 = {});

// Dense Lagrangian matrices of the series-stage circuit, (Phi_A, Phi_alpha).
HamiltonianMatrices foster1_lagrangian(double C_A, double C_B,
                                       const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds);

struct FosterPathology {
  bool flagged = false;   // from the closed form: C_A = 0 and s C_B divergent
  double s = 0.0;
  double scale = 0.0;     // largest eigenvalue of C
  Eigen::VectorXd witness;  // (1, C_alpha^-1 e / s)
  NullCheck check;
  bool confirmed = false;   // rayleigh and residual below tol
};

FosterPathology foster1_pathology(double C_A, double C_B,
                                  const std::vector<double>& stage_caps,
                                  double tol = 1e-12);

// Parallel LC stages hanging from the anharmonic node (admittance form).
struct Foster2Result {
  DressedImpedance dressed;
  double C_A = 0.0;
  double coupling_coefficient = 0.0;  // 1/C_A
  Eigen::MatrixXd kinetic, potential;  // rotated, (1+N)^2
};

Foster2Result foster2_dress(double C_A, const std::vector<double>& stage_caps,
                            const std::vector<double>& stage_inds,
                            const DressOptions& opt = {});

HamiltonianMatrices foster2_lagrangian(double C_A,
                                       const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds);

struct MultiportResult {
  Eigen::MatrixXd M_alpha;
  double min_eig = 0.0;            // of M_alpha
  Eigen::MatrixXd port_coupling;   // u_i^T M_alpha^-1 u_j
  double identity_residual = 0.0;  // |M^1/2 D^-1 M^1/2 - I|_max
  FiniteRankInverse inverse;
  // with a stage inverse inductance: rotated Hamiltonian matrices
  DressedImpedance dressed;
  Eigen::MatrixXd kinetic, potential;
};

// C = [[A, -a U^T], [-U a^T, C_alpha + U U^T]]. Throws NotPositive with the
// smallest eigenvalue when M_alpha = C_alpha + U (I - a^T A^-1 a) U^T is not
// positive-definite.
MultiportResult multiport_dressing(const Eigen::MatrixXd& A,
                                   const Eigen::MatrixXd& C_alpha,
                                   const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& U,
                                   const std::optional<Eigen::MatrixXd>& L_alpha_inv = {},
                                   std::optional<double> M0 = {});

// Stages k = 0..N of the open two-port line: C_0 = cL, C_k = cL/2,
// L_k = 2 l L/(k pi)^2, T_k = [1, (-1)^k]. L_0 is virtual (infinite).
FosterExpansion synthesize_tl_two_port(double c, double l, double L, std::size_t N);

// Stage resonance Omega_k = k pi/(sqrt(lc) L).
double tl_stage_frequency(double c, double l, double L, std::size_t k);

// Foster1/Multiport: Z = sum_k T_k T_k^T (s/C_k)/(s^2 + 1/(L_k C_k)).
// Foster2: 1x1, Z = 1/sum_k (s C_k)/(1 + s^2 L_k C_k).
// Throws PoleProximity when |s^2 + Omega_k^2| < pole_tol max(|s|^2, Omega_k^2).
Eigen::MatrixXcd impedance_eval(const FosterExpansion& f, std::complex<double> s,
                                double pole_tol = 1e-9);

// Z_0 [[coth, csch], [csch, coth]](s sqrt(lc) L).
Eigen::Matrix2cd tl_two_port_impedance(double c, double l, double L,
                                       std::complex<double> s);

struct Example3Params {
  double c = 249e-12, l = 623e-9, L = 9.4e-3;
  double C_g1 = 40.3e-15, C_J1 = 5.13e-15;
  double C_g2 = 40.3e-15 / 2, C_J2 = 5.13e-15 / 2;
};

struct Example3Spectrum {
  std::size_t N = 0;               // inductive stages kept
  Eigen::VectorXd Omega;           // rad/s, ascending
  Eigen::MatrixXd g;               // N x 2, rad/s
  Eigen::Matrix2d mu, nu, lambda, rho, beta;
  std::size_t argmax[2] = {0, 0};
  double seconds = 0.0;

  double frequency(std::size_t i) const;  // Hz
};

// Two charge qubits at the ports of the synthesized line; the virtual
// (Phi_L0, Q_L0) pair is removed after the L_0 -> inf limit.
Example3Spectrum example3_spectrum(const Example3Params& p, std::size_t N);

}  // namespace cqed
