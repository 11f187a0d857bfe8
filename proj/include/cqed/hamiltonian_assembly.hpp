#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cqed/block_linalg.hpp"
#include "cqed/circuit_model.hpp"
#include "cqed/mode_basis.hpp"

namespace cqed {

// Coupling (C_c, L_c) and dressing (C_d, L_d) constants of one channel.
// Point: C_c = C_d = C_g, L_c = L_d = L_g.
// Galvanic: C_c = C_A, C_d = C_g + C_A, L_c = L_B, L_d = L_g L_B/(L_g + L_B).
struct ChannelConstants {
  double C_c = 0.0, C_d = 0.0;
  double L_c = kInf, L_d = kInf;
};

ChannelConstants channel_constants(const CouplerSpec& cp);

struct Dressing {
  double alpha = 0.0;      // m
  double beta = kInf;      // m
  double quad_form = 0.0;  // a^T A^-1 a
};

// alpha = (C_d - C_c^2 a^T A^-1 a)/c, beta = L_d/l. Throws NotPositive when
// alpha would be negative (over-coupled network).
Dressing optimal_alpha_beta(const NetworkBlock& net, const CouplerSpec& cp,
                            const LineSegment& line);
std::vector<Dressing> optimal_alpha_beta(const CircuitSpec& spec);

// Charge and flux matrix elements contracted with the coupling channels.
// Defaults: Q = 2e e_0, F = phi_0 e_0 (first network coordinate).
struct MatrixElements {
  std::optional<Eigen::VectorXd> Q;
  std::optional<Eigen::VectorXd> F;
};

struct ChannelData {
  std::size_t block = 0, coupler = 0;
  double x = 0.0;
  Dressing dressing;
  Eigen::VectorXd channel_vector;  // A^-1 a, contract with q yourself
  double q_reduction = 0.0;        // Q^T A^-1 a
  double f_reduction = 0.0;        // F^T b
  std::vector<double> g_cap;       // rad/s
  std::vector<double> g_ind;       // rad/s
};

struct QuantizedHamiltonian {
  std::vector<Eigen::MatrixXd> network_cap_inv;  // per block, 1/F
  std::vector<Eigen::MatrixXd> network_ind_inv;  // per block, 1/H
  std::vector<double> omega;                     // rad/s
  std::vector<double> frequencies;               // Hz
  std::vector<ChannelData> channels;
  double N_alpha = 0.0;
};

// Single attachment (point end, galvanic or insertion) described by coupler
// `coupler` of spec; the basis must carry the optimal dressing.
QuantizedHamiltonian assemble(const CircuitSpec& spec, std::size_t coupler,
                              const ModeBasis& basis, std::size_t n_max,
                              const MatrixElements& me = {});

// Several point couplers on one line; attachments in basis.problem follow the
// couplers in `couplers`, sorted by position.
QuantizedHamiltonian assemble(const CircuitSpec& spec,
                              const std::vector<std::size_t>& couplers,
                              const MultiModeBasis& basis, std::size_t n_max,
                              const MatrixElements& me = {});

// Couplings on the bare line basis (alpha = 0, beta kept): the small-k
// approximation, valid while alpha k << 1. Point couplers at x = 0 of a
// finite line only.
QuantizedHamiltonian assemble_bare(const CircuitSpec& spec, std::size_t coupler,
                                   std::size_t n_max, const MatrixElements& me = {});

// Geometry of the charge-qubit example: point coupling at x = 0 of a line
// shorted at its far end, no inductive coupling.
struct ChargeQubitParams {
  double C_g = 0.0, C_J = 0.0;
  double c = 0.0, l = 0.0, L = 0.0;

  double alpha() const;
  LineParams line() const;
};

struct CouplingTable {
  std::vector<double> k;      // rad/m
  std::vector<double> f;      // Hz
  std::vector<double> g;      // rad/s
  bool outside_window = false;  // approx only: n_max reaches alpha k ~ 0.1
};

CouplingTable charge_qubit_couplings_exact(const ChargeQubitParams& p, std::size_t n_max);
CouplingTable charge_qubit_couplings_approx(const ChargeQubitParams& p, std::size_t n_max);

struct CutoffPrediction {
  bool bounded = true;
  double k_c = kInf;   // rad/m
  std::size_t n_c = 0;
  double f_c = kInf;   // Hz
};

// k_c = sqrt((1 + alpha/L)/alpha^2); n_c is the exact mode (line shorted at
// L, no inductive coupling) closest to k_c.
CutoffPrediction predict_cutoff(double alpha, double L, const LineParams& line);

enum class TlTlPathology { None, CgZero, CgrndZero, LSigma };
const char* to_string(TlTlPathology p);

// Line 1 ends at the junction with C_G, L_G to ground; C_g, L_g join it to
// the end of line 2.
struct TlTlParams {
  LineParams line1, line2;
  EndKind far1 = EndKind::Open, far2 = EndKind::Open;
  double C_g = 0.0, C_G = 0.0;
  double L_g = kInf, L_G = kInf;
  double N_alpha1 = 1e-12, N_alpha2 = 1e-12;
  // used when the optimal alpha vanishes
  double ref_alpha1 = 0.0, ref_alpha2 = 0.0;
  std::size_t ladder_nodes = 200;
};

struct TlTlReport {
  double alpha1 = 0.0, alpha2 = 0.0;  // selected (optimal or reference)
  bool alpha1_reference = false, alpha2_reference = false;
  double beta1 = kInf, beta2 = kInf;
  double delta1 = 0.0, delta2 = 0.0, beta_coupling = 0.0;  // 1/F
  double cap_condition = 1.0;  // C_G/C_Sigma
  double ind_condition = 1.0;  // (1 + e1 S1)(1 + e2 S2) - S1 S2/L_g^2
  TlTlPathology pathology = TlTlPathology::None;
  Eigen::VectorXd witness;     // dense ladder coordinates
  NullCheck confirmation;
  bool confirmed = false;
};

TlTlReport tl_tl_analyze(const TlTlParams& p, double tol = 1e-12);

struct DecouplingCertificate {
  double alpha_used = 0.0;
  double mode_mode = 0.0;         // max off-diagonal / max diagonal of (C^-1)_22
  double network_block_err = 0.0;  // emitted network_cap_inv vs dense inverse
  double coupling_block_err = 0.0; // emitted (C_c/N) A^-1 a u^T vs dense
};

// Dense ladder check of the emitted capacitive structure for one point or
// galvanic channel, with the basis alpha scaled by alpha_scale.
DecouplingCertificate decoupling_certificate(const NetworkBlock& net,
                                             const CouplerSpec& cp,
                                             const LineSegment& line,
                                             double alpha_scale = 1.0,
                                             std::size_t nodes = 200,
                                             double N_alpha = 1e-12);

}  // namespace cqed
