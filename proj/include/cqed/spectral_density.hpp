#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cqed/mode_basis.hpp"

namespace cqed {

enum class DensityKind { Inductive, SpinCapacitive, ClosedFormJC, ClosedFormJL, CaldeiraLeggett };
const char* to_string(DensityKind k);

struct ExponentFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  double decades = 0.0;
  double half_slope_gap = 0.0;  // |slope(lower half) - slope(upper half)|
};

// Delta comb: J(omega) = sum_n weight_n delta(omega - omega_n).
struct SpectralDensity {
  DensityKind kind = DensityKind::Inductive;
  std::vector<double> omega;   // rad/s
  std::vector<double> weight;  // kind dependent units
  std::optional<ExponentFit> low, high;

  bool empty() const { return omega.empty(); }
  // Sum of weights with omega in [lo, hi).
  double integral(double lo, double hi) const;
  // Lorentzian smoothing, only meant for plotting.
  double smoothed(double w, double width) const;
};

// J^I weights (pi/2L_g) u_n^2/(N_alpha omega_n). Empty when L_g is infinite.
SpectralDensity inductive_spectral(const ModeBasis& basis, double L_g);
// J^SC weights A u_n^2 omega_n.
SpectralDensity spin_capacitive_spectral(const ModeBasis& basis, double A);

// Closed forms on the half line. With k = omega/v and omega_a = v/alpha,
// u_k(0)^2 = (2/pi) omega^2 omega_a^2/D, D = (omega^2 - alpha omega_a^2/beta)^2
// + omega^2 omega_a^2. J = g_k^2/v with the charge and flux couplings
// g_k^C = (alpha Q/C_J) sqrt(omega c/(2 hbar)) u_k(0),
// g_k^L = (F/(beta l)) u_k(0)/sqrt(2 hbar omega c).
struct HalflineDensity {
  double alpha = 0.0, beta = kInf, v = 0.0;
  double kC = 1.0, kL = 1.0;  // J^C = kC omega u^2/v, J^L = kL u^2/(omega v)

  double omega_alpha() const { return v / alpha; }
  double denominator(double omega) const;
  double u0_squared(double omega) const;
  double JC(double omega) const;
  double JL(double omega) const;
};

// Shapes only (kC = kL = 1). Throws InvalidInput for alpha <= 0.
HalflineDensity halfline_spectral(double alpha, double beta, double v_p);
// Prefactors of a charge qubit with junction C_J and matrix elements Q, F.
HalflineDensity halfline_spectral(double alpha, double beta, const LineParams& line,
                                  double C_J, double Q, double F);

// Device description for the galvanically coupled flux qubit on an infinite
// line. The ratios are required; NaN marks a missing value.
struct GalvanicDevice {
  double alpha = 0.0, beta = 0.0;  // m
  double c = 0.0, l = 0.0;         // per unit length
  double r1 = kNaN, r2 = kNaN, r3 = kNaN;
  double E_J = kNaN;               // J
  double f_eps = kNaN;             // frustration
};

// alpha = (C/c)(r4 + r5 + r1 r2 r3/(r1 r2 + r2 r3 + r3 r1)),
// beta = phi_0^2/(l E_J (r4 + r5 cos 2 pi f_beta)).
std::pair<double, double> galvanic_device_alpha_beta(double C, double c, double l,
                                                     double r1, double r2, double r3,
                                                     double r4, double r5, double E_J,
                                                     double f_beta);

struct GalvanicCouplings {
  GalvanicDevice dev;
  double gamma = 0.0;

  double delta_u(double k) const;  // |Delta u_k(0)|
  double gC1(double k) const;
  double gC2(double k) const;
  double gL(double k) const;
};

GalvanicCouplings galvanic_infinite_couplings(const GalvanicDevice& dev);

// Location of the maximum of a positive function of k > 0 (golden section on
// log k after a coarse log grid scan of [k_lo, k_hi]).
double argmax_log(const std::function<double(double)>& f, double k_lo, double k_hi);

// Least-squares slope of log w against log omega over omega in [lo, hi].
// Throws InvalidInput with a span diagnostic for fewer than 20 samples, less
// than one decade, or when the two halves of the window disagree by more
// than max_gap (the window straddles a crossover).
ExponentFit fit_asymptotic_exponent(const std::vector<double>& omega,
                                    const std::vector<double>& w, double lo, double hi,
                                    double max_gap = 0.1);

// Bath of oscillators coupled to one system coordinate. In the capacitive
// form L = m/2 qd^2 - kappa/2 q^2 + sum [m_a/2 xd_a^2 - m_a w_a^2/2 x_a^2]
// - qd sum c_a xd_a; the inductive form replaces the last term by
// -q sum c_a xi_a and carries no velocity coupling.
struct BathMap {
  double m = 0.0;       // system mass
  double kappa = 0.0;   // system spring constant
  std::vector<double> masses, omegas, couplings;
  bool inductive = false;
};

enum class MapDirection { CapacitiveToInductive, InductiveToCapacitive };

struct BathMapResult {
  BathMap bath;
  SpectralDensity density;  // weights c_a^2 w_a^3/m_a of the capacitive bath
};

// xi_a = x_a - c_a q/m_a. The system mass becomes m - sum c_a^2/m_a (the
// Schur complement of the kinetic matrix), the spring kappa + sum c_a^2
// w_a^2/m_a and the couplings c_a w_a^2.
BathMapResult caldeira_leggett_map(const BathMap& bath,
                                   MapDirection dir = MapDirection::CapacitiveToInductive);

// Initial data (q, qdot, x, xdot) in the coordinates of `bath` (use
// map_state for the inductive form). Returns q at `times`.
struct BathState {
  double q = 0.0, qd = 0.0;
  std::vector<double> x, xd;
};
std::vector<double> integrate_system_coordinate(const BathMap& bath, const BathState& s0,
                                                const std::vector<double>& times,
                                                double tol = 1e-13);
// Coordinates of s0 after xi_a = x_a - c_a q/m_a.
BathState map_state(const BathMap& capacitive, const BathState& s0);

// Lowest normal-mode angular frequency of the coupled system.
double bath_fundamental(const BathMap& bath);

}  // namespace cqed
