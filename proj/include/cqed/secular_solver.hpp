#pragma once

#include <vector>

#include "cqed/constants.hpp"

namespace cqed {

enum class ProblemKind { PointEnd, GalvanicMid, PointInsertion };

// Short = flux node pinned to ground (u = 0), Open = no current (u' = 0).
enum class EndKind { Short, Open };

struct BoundaryParams {
  double alpha = 0.0;           // m
  double beta = kInf;           // m, infinity disconnects the inductive path
  ProblemKind kind = ProblemKind::PointEnd;
  EndKind far_end = EndKind::Short;
  double x0 = 0.0;              // insertion point, PointInsertion only
};

enum class ModeFamily { Coupled, Uncoupled };

struct WavenumberSet {
  std::vector<double> k;          // rad/m, ascending
  std::vector<double> residual;   // normalized secular residual per root
  std::vector<ModeFamily> family;
  std::vector<int> iterations;
  int n_max = 0;
  bool unvalidated = false;       // spectrum has no published reference data
  BoundaryParams params;
  double length = 0.0;
};

// Dimensionless boundary slope sigma(k) = alpha k - 1/(beta k).
double boundary_sigma(double alpha, double beta, double k);

// Raw secular function of the point-coupled line on (0, L), scaled by L so
// that every term is dimensionless. Used by census checks.
double point_secular(const BoundaryParams& bp, double L, double k);

// k cos(kL) - 2 (alpha k^2 - 1/beta) sin(kL), times L.
double galvanic_secular(const BoundaryParams& bp, double L, double k);

WavenumberSet solve_point_secular(const BoundaryParams& bp, double L, int n_max,
                                  double tol = 1e-12);

// Line on (-L, L) with both outer ends shorted and the network inserted at 0.
WavenumberSet solve_galvanic_secular(const BoundaryParams& bp, double L,
                                     int n_max, double tol = 1e-12);

// Line on (0, L), shorted at both ends, network inserted at bp.x0.
WavenumberSet solve_point_insertion(const BoundaryParams& bp, double L,
                                    int n_max, double tol = 1e-12);

// xi_n = n pi + a/(n pi) for n in [n_first, n_last].
std::vector<double> asymptotic_wavenumbers(double a, int n_first, int n_last);

// General line with any number of point attachments. An attachment at an
// end requires that end to be Open; interior attachments impose the jump
// u'(x-) - u'(x+) = (alpha k^2 - 1/beta) u(x).
struct Attachment {
  double x = 0.0;
  double alpha = 0.0;
  double beta = kInf;
};

struct MultiPointProblem {
  double length = 0.0;
  EndKind near_end = EndKind::Open;
  EndKind far_end = EndKind::Short;
  std::vector<Attachment> attachments;  // sorted by x
};

// Monotone Pruefer phase; eigenvalues sit at G(k) = m pi.
double prufer_phase(const MultiPointProblem& p, double k);

WavenumberSet solve_multi_point(const MultiPointProblem& p, int n_max,
                                double tol = 1e-12);

}  // namespace cqed
