#pragma once

#include <cstddef>
#include <vector>

#include "cqed/quadrature.hpp"
#include "cqed/secular_solver.hpp"

namespace cqed {

struct LineParams {
  double c = 0.0;       // F/m
  double l = 0.0;       // H/m
  double length = 0.0;  // m (half-length for the galvanic geometry)

  double phase_velocity() const;
  double impedance() const;
};

// Geometry conventions:
//  PointEnd        line on (0, L), network at x = 0, far end at L.
//                  Short far end: u_n = A_n sin(k_n (L - x)); open: cos.
//  GalvanicMid     line on (-L, L), network inserted at 0, outer ends shorted.
//                  endpoint holds the jump u(0+) - u(0-).
//  PointInsertion  line on (0, L) shorted at both ends, network at x0.
struct ModeBasis {
  BoundaryParams bp;
  LineParams line;
  double N_alpha = 0.0;  // F
  std::vector<double> k;
  std::vector<double> amplitude;
  std::vector<double> endpoint;
  std::vector<ModeFamily> family;

  std::size_t size() const { return k.size(); }
  double omega(std::size_t n) const;       // rad/s
  double frequency(std::size_t n) const;   // Hz
};

ModeBasis build_finite_modes(const WavenumberSet& ks, const BoundaryParams& bp,
                             const LineParams& line, double N_alpha);

double mode_value(const ModeBasis& b, std::size_t n, double x);
double mode_slope(const ModeBasis& b, std::size_t n, double x);

// c [ int u_n u_m + alpha u_n(0) u_m(0) ] by quadrature.
double inner_alpha(const ModeBasis& b, std::size_t n, std::size_t m,
                   double tol = 1e-12);
// (1/l) [ int u_n' u_m' + (1/beta) u_n(0) u_m(0) ] by quadrature.
double inner_inv_beta(const ModeBasis& b, std::size_t n, std::size_t m,
                      double tol = 1e-12);

struct SumRules {
  double s1_partial = 0.0;
  double s2_partial = 0.0;        // NaN when beta is infinite
  double s1_extrapolated = 0.0;
  double s2_extrapolated = 0.0;
  double s2_expected = 1.0;        // depends on the DC path through the line
  std::vector<double> s1_running;  // running partial sums, one per mode
};

// s1 = alpha c/N_alpha sum u_n(0)^2, s2 = c/(beta N_alpha) sum u_n(0)^2/k_n^2.
// Extrapolation fits S(N) = S_inf - a/N over the last decade of N.
// s1 tends to 1 in every geometry. s2 tends to 1 only when the line offers
// no DC path to ground; otherwise the line inductance shares the current and
// the limit is Lline/(Lline + beta), Lline being the shunting line length.
SumRules verify_sum_rules(const ModeBasis& b, std::size_t N_trunc);

double second_sum_rule_limit(const BoundaryParams& bp, double length);

// Least-squares intercept of S(N) = S_inf - a/N for N in [n_lo, n_hi].
double extrapolate_inverse_n(const std::vector<double>& running,
                             std::size_t n_lo, std::size_t n_hi);

// Continuum modes of the half-line (0, inf), generalised orthonormal in k:
// u_k(x) = sqrt(2/pi) (k cos kx - s sin kx)/sqrt(k^2 + s^2), s = alpha k^2 - 1/beta.
double continuum_mode(double k, double x, double alpha, double beta);

// u_k(0) for PointEnd, |Delta u_k(0)| for GalvanicMid.
double continuum_mode_at_origin(double k, double alpha, double beta,
                                ProblemKind kind = ProblemKind::PointEnd);

struct ContinuumSumRules {
  double I1 = 0.0;  // int u_k(0)^2 dk, expected 1/alpha
  double I2 = 0.0;  // int u_k(0)^2/k^2 dk, expected beta
  double rel_err1 = 0.0;
  double rel_err2 = 0.0;
};

ContinuumSumRules verify_continuum_sum_rules(double alpha, double beta,
                                             QuadSpec quad = {});

// Modes of a line with several point attachments, values at each attachment.
struct MultiModeBasis {
  MultiPointProblem problem;
  LineParams line;
  double N_alpha = 0.0;
  std::vector<double> k;
  std::vector<std::vector<double>> at_attachment;  // [mode][attachment]

  std::size_t size() const { return k.size(); }
  double omega(std::size_t n) const;
};

MultiModeBasis build_multi_modes(const MultiPointProblem& p,
                                 const WavenumberSet& ks, const LineParams& line,
                                 double N_alpha);

}  // namespace cqed
