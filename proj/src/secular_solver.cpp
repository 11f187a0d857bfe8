#include "cqed/secular_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "cqed/errors.hpp"

namespace cqed {

namespace {

constexpr int kMaxNewton = 100;

void check_params(const BoundaryParams& bp, double L) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw Error(ErrorCode::InvalidInput, "line length must be finite and positive");
  if (!(bp.alpha >= 0.0) || !std::isfinite(bp.alpha))
    throw Error(ErrorCode::InvalidInput, "alpha must be finite and non-negative");
  if (!(bp.beta > 0.0))
    throw Error(ErrorCode::InvalidInput, "beta must be positive or infinite");
}

// The secular equations of the single-attachment problems can all be put in
// the phase form  phi(k) = kL + atan(f sigma(k)) = T  with phi strictly
// increasing, so every root is isolated in its own window.
struct PhaseProblem {
  double L, alpha, beta, f;

  double phase(double k) const {
    return k * L + std::atan(f * boundary_sigma(alpha, beta, k));
  }
  double dphase(double k) const {
    double s = f * boundary_sigma(alpha, beta, k);
    double ds = alpha;
    if (std::isfinite(beta)) ds += 1.0 / (beta * k * k);
    return L + f * ds / (1.0 + s * s);
  }
};

struct Root {
  double k;
  double residual;
  int iterations;
};

Root newton_bracketed(const PhaseProblem& pp, double target, double lo,
                      double hi, double guess, double tol) {
  double k = guess;
  if (!(k > lo && k < hi)) k = 0.5 * (lo + hi);
  int it = 0;
  for (; it < kMaxNewton; ++it) {
    double r = pp.phase(k) - target;
    if (r == 0.0) break;
    if (r < 0.0)
      lo = k;
    else
      hi = k;
    double kn = k - r / pp.dphase(k);
    if (!(kn > lo && kn < hi)) kn = 0.5 * (lo + hi);
    double step = std::abs(kn - k);
    k = kn;
    if (step <= tol * k || hi - lo <= tol * k) {
      ++it;
      break;
    }
  }
  if (it >= kMaxNewton) {
    std::ostringstream os;
    os << "secular solve did not converge in bracket [" << lo << ", " << hi
       << "] rad/m";
    throw Error(ErrorCode::NonConvergence, os.str());
  }
  return {k, std::abs(std::sin(pp.phase(k) - target)), it};
}

// Solve phase(k) = target. The window follows from atan in (-pi/2, pi/2),
// tightened to [0, pi/2) when there is no inductive term.
Root solve_phase_root(const PhaseProblem& pp, double target, double tol) {
  const double half = 0.5 * kPi;
  double lo = (target - half) / pp.L;
  double hi = (target + half) / pp.L;
  if (!std::isfinite(pp.beta)) hi = target / pp.L;
  if (lo <= 0.0) lo = 1e-12 * half / pp.L;
  hi = std::nextafter(hi, kInf);

  double guess = 0.5 * (lo + hi);
  double base = target - half;
  if (pp.alpha > 0.0 && base > 0.0) {
    // large-k form of the window: xi = base + a/base with a = L/(f alpha)
    double a = pp.L / (pp.f * pp.alpha);
    guess = (base + a / base) / pp.L;
  }
  if (!(guess > lo && guess < hi)) {
    double mid = 0.5 * (lo + hi);
    guess = (target - std::atan(pp.f * boundary_sigma(pp.alpha, pp.beta, mid))) / pp.L;
  }
  return newton_bracketed(pp, target, lo, hi, guess, tol);
}

}  // namespace

double boundary_sigma(double alpha, double beta, double k) {
  double s = alpha * k;
  if (std::isfinite(beta)) s -= 1.0 / (beta * k);
  return s;
}

double point_secular(const BoundaryParams& bp, double L, double k) {
  double x = k * L;
  double w = (bp.alpha / L) * x * x;
  if (std::isfinite(bp.beta)) w -= L / bp.beta;
  if (bp.far_end == EndKind::Short) return w * std::sin(x) - x * std::cos(x);
  return w * std::cos(x) + x * std::sin(x);
}

double galvanic_secular(const BoundaryParams& bp, double L, double k) {
  double x = k * L;
  double w = (bp.alpha / L) * x * x;
  if (std::isfinite(bp.beta)) w -= L / bp.beta;
  return x * std::cos(x) - 2.0 * w * std::sin(x);
}

std::vector<double> asymptotic_wavenumbers(double a, int n_first, int n_last) {
  if (n_first < 1)
    throw Error(ErrorCode::InvalidInput, "asymptotic index must be at least 1");
  std::vector<double> xi;
  for (int n = n_first; n <= n_last; ++n) {
    double npi = n * kPi;
    xi.push_back(npi + a / npi);
  }
  return xi;
}

WavenumberSet solve_point_secular(const BoundaryParams& bp, double L, int n_max,
                                  double tol) {
  check_params(bp, L);
  WavenumberSet ws;
  ws.n_max = n_max;
  ws.params = bp;
  ws.params.kind = ProblemKind::PointEnd;
  ws.length = L;

  // Targets: (m + 1/2) pi for a shorted far end, m pi for an open one. With
  // no inductive path phi(0+) = 0, so the zero-frequency root of the
  // open-open line is excluded.
  const bool shorted = bp.far_end == EndKind::Short;
  int m0 = 0;
  if (!shorted && !std::isfinite(bp.beta)) m0 = 1;

  const bool closed_form = bp.alpha == 0.0 && !std::isfinite(bp.beta);
  PhaseProblem pp{L, bp.alpha, bp.beta, 1.0};
  for (int n = 0; n < n_max; ++n) {
    double target = (n + m0) * kPi + (shorted ? 0.5 * kPi : 0.0);
    if (closed_form) {
      ws.k.push_back(target / L);
      ws.residual.push_back(0.0);
      ws.iterations.push_back(0);
    } else {
      Root r = solve_phase_root(pp, target, tol);
      ws.k.push_back(r.k);
      ws.residual.push_back(r.residual);
      ws.iterations.push_back(r.iterations);
    }
    ws.family.push_back(ModeFamily::Coupled);
  }
  return ws;
}

WavenumberSet solve_galvanic_secular(const BoundaryParams& bp, double L,
                                     int n_max, double tol) {
  check_params(bp, L);
  WavenumberSet ws;
  ws.n_max = n_max;
  ws.params = bp;
  ws.params.kind = ProblemKind::GalvanicMid;
  ws.length = L;

  // Coupled (odd) family: kL + atan(2 sigma) = (m + 1/2) pi.
  // Symmetric family: u'(0) = 0 and no jump, so cos(kL) = 0.
  PhaseProblem pp{L, bp.alpha, bp.beta, 2.0};
  const bool closed_form = bp.alpha == 0.0 && !std::isfinite(bp.beta);
  struct Entry {
    double k, res;
    int it;
    ModeFamily fam;
  };
  std::vector<Entry> all;
  for (int m = 0; static_cast<int>(all.size()) < 2 * n_max; ++m) {
    double target = (m + 0.5) * kPi;
    if (closed_form) {
      all.push_back({target / L, 0.0, 0, ModeFamily::Coupled});
    } else {
      Root r = solve_phase_root(pp, target, tol);
      all.push_back({r.k, r.residual, r.iterations, ModeFamily::Coupled});
    }
    all.push_back({target / L, 0.0, 0, ModeFamily::Uncoupled});
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const Entry& a, const Entry& b) { return a.k < b.k; });
  for (int n = 0; n < n_max; ++n) {
    ws.k.push_back(all[n].k);
    ws.residual.push_back(all[n].res);
    ws.iterations.push_back(all[n].it);
    ws.family.push_back(all[n].fam);
  }
  return ws;
}

double prufer_phase(const MultiPointProblem& p, double k) {
  double theta = p.near_end == EndKind::Open ? 0.5 * kPi : 0.0;
  double x = 0.0;
  for (const auto& a : p.attachments) {
    theta += k * (a.x - x);
    x = a.x;
    // reduce into the current band first so cot and the band agree
    double band = std::floor(theta / kPi);
    double local = theta - band * kPi;
    if (local > 0.0) {
      double c = std::cos(local) / std::sin(local) - boundary_sigma(a.alpha, a.beta, k);
      theta = band * kPi + (0.5 * kPi - std::atan(c));
    }
  }
  theta += k * (p.length - x);
  return theta - (p.far_end == EndKind::Open ? 0.5 * kPi : 0.0);
}

WavenumberSet solve_multi_point(const MultiPointProblem& p, int n_max,
                                double tol) {
  if (!(p.length > 0.0) || !std::isfinite(p.length))
    throw Error(ErrorCode::InvalidInput, "line length must be finite and positive");
  double prev = -1.0;
  for (const auto& a : p.attachments) {
    if (a.x < 0.0 || a.x > p.length || a.x <= prev)
      throw Error(ErrorCode::InvalidInput, "attachments must be strictly ordered inside the line");
    if (a.x == 0.0 && p.near_end == EndKind::Short)
      throw Error(ErrorCode::InvalidInput, "attachment on a shorted near end");
    if (a.x == p.length && p.far_end == EndKind::Short)
      throw Error(ErrorCode::InvalidInput, "attachment on a shorted far end");
    if (!(a.alpha >= 0.0) || !(a.beta > 0.0))
      throw Error(ErrorCode::InvalidInput, "attachment needs alpha >= 0 and beta > 0");
    prev = a.x;
  }

  WavenumberSet ws;
  ws.n_max = n_max;
  ws.length = p.length;
  ws.params.kind = ProblemKind::PointInsertion;

  const double k_tiny = 1e-9 * kPi / p.length;
  int j = static_cast<int>(std::floor(prufer_phase(p, k_tiny) / kPi)) + 1;
  double lo = k_tiny;
  const int bits = std::max(20, static_cast<int>(-std::log2(tol)) + 2);
  for (int n = 0; n < n_max; ++n, ++j) {
    const double target = j * kPi;
    auto g = [&](double k) { return prufer_phase(p, k) - target; };
    double hi = lo + 0.5 * kPi / p.length;
    double step = 0.5 * kPi / p.length;
    while (g(hi) <= 0.0) {
      lo = hi;
      step *= 2.0;
      hi += step;
    }
    boost::uintmax_t iters = 200;
    auto br = boost::math::tools::toms748_solve(
        g, lo, hi, boost::math::tools::eps_tolerance<double>(bits), iters);
    if (iters >= 200) {
      std::ostringstream os;
      os << "multi-point secular solve did not converge in bracket [" << lo
         << ", " << hi << "] rad/m";
      throw Error(ErrorCode::NonConvergence, os.str());
    }
    double k = 0.5 * (br.first + br.second);
    ws.k.push_back(k);
    ws.residual.push_back(std::abs(std::sin(g(k))));
    ws.iterations.push_back(static_cast<int>(iters));
    ws.family.push_back(ModeFamily::Coupled);
    lo = std::nextafter(br.second, kInf);
  }
  return ws;
}

WavenumberSet solve_point_insertion(const BoundaryParams& bp, double L,
                                    int n_max, double tol) {
  check_params(bp, L);
  if (!(bp.x0 > 0.0 && bp.x0 < L))
    throw Error(ErrorCode::InvalidInput, "insertion point must lie strictly inside the line");
  MultiPointProblem p;
  p.length = L;
  p.near_end = EndKind::Short;
  p.far_end = EndKind::Short;
  p.attachments.push_back({bp.x0, bp.alpha, bp.beta});
  WavenumberSet ws = solve_multi_point(p, n_max, tol);
  ws.params = bp;
  ws.params.kind = ProblemKind::PointInsertion;
  ws.unvalidated = true;
  return ws;
}

}  // namespace cqed
