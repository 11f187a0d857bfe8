#include "cqed/mode_basis.hpp"

#include <algorithm>
#include <cmath>

#include "cqed/errors.hpp"

namespace cqed {

namespace {

// int_0^d (u cos kt + w sin kt)^2 dt
double segment_square(double u, double w, double k, double d) {
  double s2 = std::sin(2.0 * k * d) / (4.0 * k);
  double sk = std::sin(k * d);
  return u * u * (0.5 * d + s2) + w * w * (0.5 * d - s2) + u * w * sk * sk / k;
}

bool same_params(const BoundaryParams& a, const BoundaryParams& b) {
  auto eq = [](double x, double y) {
    if (std::isinf(x) || std::isinf(y)) return x == y;
    return std::abs(x - y) <= 1e-14 * std::max(std::abs(x), std::abs(y));
  };
  return eq(a.alpha, b.alpha) && eq(a.beta, b.beta) && a.kind == b.kind &&
         (a.kind != ProblemKind::PointEnd || a.far_end == b.far_end) &&
         (a.kind != ProblemKind::PointInsertion || eq(a.x0, b.x0));
}

// Insertion modes: sin(kx) left of x0, propagated through the jump.
struct InsertionState {
  double u0, w_plus;
};

InsertionState insertion_state(const BoundaryParams& bp, double k) {
  double u0 = std::sin(k * bp.x0);
  double w = std::cos(k * bp.x0) - boundary_sigma(bp.alpha, bp.beta, k) * u0;
  return {u0, w};
}

}  // namespace

double LineParams::phase_velocity() const { return 1.0 / std::sqrt(l * c); }
double LineParams::impedance() const { return std::sqrt(l / c); }

double ModeBasis::omega(std::size_t n) const {
  return k[n] * line.phase_velocity();
}
double ModeBasis::frequency(std::size_t n) const {
  return omega(n) / (2.0 * kPi);
}
double MultiModeBasis::omega(std::size_t n) const {
  return k[n] * line.phase_velocity();
}

ModeBasis build_finite_modes(const WavenumberSet& ks, const BoundaryParams& bp,
                             const LineParams& line, double N_alpha) {
  if (!same_params(ks.params, bp))
    throw Error(ErrorCode::Mismatch, "wavenumbers were solved for different boundary parameters");
  if (std::abs(ks.length - line.length) > 1e-14 * line.length)
    throw Error(ErrorCode::Mismatch, "wavenumbers were solved for a different line length");
  if (!(N_alpha > 0.0) || !(line.c > 0.0) || !(line.l > 0.0))
    throw Error(ErrorCode::InvalidInput, "N_alpha, c and l must be positive");

  ModeBasis b;
  b.bp = bp;
  b.line = line;
  b.N_alpha = N_alpha;
  b.k = ks.k;
  b.family = ks.family;
  const double L = line.length;
  const double a = bp.alpha;
  for (std::size_t n = 0; n < ks.k.size(); ++n) {
    const double k = ks.k[n];
    double norm = 0.0, e = 0.0;
    switch (bp.kind) {
      case ProblemKind::PointEnd: {
        double s2 = std::sin(2.0 * k * L) / (4.0 * k);
        if (bp.far_end == EndKind::Short) {
          e = std::sin(k * L);
          norm = 0.5 * L - s2;
        } else {
          e = std::cos(k * L);
          norm = 0.5 * L + s2;
        }
        norm += a * e * e;
        break;
      }
      case ProblemKind::GalvanicMid: {
        if (ks.family[n] == ModeFamily::Uncoupled) {
          e = 0.0;
          norm = L;
        } else {
          double sk = std::sin(k * L);
          e = -2.0 * sk;
          norm = L - std::sin(2.0 * k * L) / (2.0 * k) + a * e * e;
        }
        break;
      }
      case ProblemKind::PointInsertion: {
        InsertionState st = insertion_state(bp, k);
        e = st.u0;
        norm = segment_square(0.0, 1.0, k, bp.x0) +
               segment_square(st.u0, st.w_plus, k, L - bp.x0) + a * e * e;
        break;
      }
    }
    double A = std::sqrt(N_alpha / (line.c * norm));
    b.amplitude.push_back(A);
    b.endpoint.push_back(A * e);
  }
  return b;
}

double mode_value(const ModeBasis& b, std::size_t n, double x) {
  const double k = b.k[n], A = b.amplitude[n], L = b.line.length;
  switch (b.bp.kind) {
    case ProblemKind::PointEnd:
      return b.bp.far_end == EndKind::Short ? A * std::sin(k * (L - x))
                                            : A * std::cos(k * (L - x));
    case ProblemKind::GalvanicMid:
      if (b.family[n] == ModeFamily::Uncoupled)
        return A * std::sin(k * (L - std::abs(x)));
      return x < 0.0 ? A * std::sin(k * (x + L)) : -A * std::sin(k * (L - x));
    case ProblemKind::PointInsertion: {
      if (x <= b.bp.x0) return A * std::sin(k * x);
      InsertionState st = insertion_state(b.bp, k);
      double t = k * (x - b.bp.x0);
      return A * (st.u0 * std::cos(t) + st.w_plus * std::sin(t));
    }
  }
  return 0.0;
}

double mode_slope(const ModeBasis& b, std::size_t n, double x) {
  const double k = b.k[n], A = b.amplitude[n], L = b.line.length;
  switch (b.bp.kind) {
    case ProblemKind::PointEnd:
      return b.bp.far_end == EndKind::Short ? -A * k * std::cos(k * (L - x))
                                            : A * k * std::sin(k * (L - x));
    case ProblemKind::GalvanicMid:
      if (b.family[n] == ModeFamily::Uncoupled) {
        double sgn = x < 0.0 ? 1.0 : -1.0;
        return sgn * A * k * std::cos(k * (L - std::abs(x)));
      }
      return A * k * std::cos(k * (x < 0.0 ? x + L : L - x));
    case ProblemKind::PointInsertion: {
      if (x <= b.bp.x0) return A * k * std::cos(k * x);
      InsertionState st = insertion_state(b.bp, k);
      double t = k * (x - b.bp.x0);
      return A * k * (-st.u0 * std::sin(t) + st.w_plus * std::cos(t));
    }
  }
  return 0.0;
}

namespace {

template <class F>
double integrate_line(const ModeBasis& b, std::size_t n, std::size_t m, F f,
                      double tol) {
  const double L = b.line.length;
  std::vector<std::pair<double, double>> spans;
  switch (b.bp.kind) {
    case ProblemKind::PointEnd: spans = {{0.0, L}}; break;
    case ProblemKind::GalvanicMid: spans = {{-L, 0.0}, {0.0, L}}; break;
    case ProblemKind::PointInsertion: spans = {{0.0, b.bp.x0}, {b.bp.x0, L}}; break;
  }
  QuadSpec q;
  q.tol = tol;
  q.max_depth = 12;
  double total = 0.0;
  for (auto [lo, hi] : spans) {
    // one panel per half oscillation keeps Gauss-Kronrod in its comfort zone
    double kk = b.k[n] + b.k[m];
    int panels = 1 + static_cast<int>(kk * (hi - lo) / kPi);
    double h = (hi - lo) / panels;
    for (int i = 0; i < panels; ++i) {
      double a = lo + i * h;
      double e = (i == panels - 1) ? hi : a + h;
      // nudge off the insertion point so one-sided values are used
      double eps = 1e-15 * L;
      total += integrate([&](double x) { return f(x); }, a + (i == 0 ? eps : 0.0),
                         e - (i == panels - 1 ? eps : 0.0), q)
                   .value;
    }
  }
  return total;
}

}  // namespace

double inner_alpha(const ModeBasis& b, std::size_t n, std::size_t m, double tol) {
  double I = integrate_line(
      b, n, m, [&](double x) { return mode_value(b, n, x) * mode_value(b, m, x); },
      tol);
  return b.line.c * (I + b.bp.alpha * b.endpoint[n] * b.endpoint[m]);
}

double inner_inv_beta(const ModeBasis& b, std::size_t n, std::size_t m,
                      double tol) {
  double I = integrate_line(
      b, n, m, [&](double x) { return mode_slope(b, n, x) * mode_slope(b, m, x); },
      tol);
  double ends = std::isfinite(b.bp.beta) ? b.endpoint[n] * b.endpoint[m] / b.bp.beta : 0.0;
  return (I + ends) / b.line.l;
}

double extrapolate_inverse_n(const std::vector<double>& running,
                             std::size_t n_lo, std::size_t n_hi) {
  n_lo = std::max<std::size_t>(n_lo, 1);
  n_hi = std::min(n_hi, running.size());
  if (n_hi <= n_lo) return running.empty() ? 0.0 : running.back();
  const int samples = 200;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  std::size_t last = 0;
  for (int i = 0; i < samples; ++i) {
    double t = static_cast<double>(i) / (samples - 1);
    auto N = static_cast<std::size_t>(
        std::llround(n_lo * std::pow(static_cast<double>(n_hi) / n_lo, t)));
    if (N == last) continue;
    last = N;
    double x = 1.0 / N, y = running[N - 1];
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  double den = cnt * sxx - sx * sx;
  if (den == 0.0) return running[n_hi - 1];
  double slope = (cnt * sxy - sx * sy) / den;
  return (sy - slope * sx) / cnt;
}

double second_sum_rule_limit(const BoundaryParams& bp, double L) {
  if (!std::isfinite(bp.beta)) return std::nan("");
  double shunt = kInf;
  switch (bp.kind) {
    case ProblemKind::PointEnd:
      if (bp.far_end == EndKind::Short) shunt = L;
      break;
    case ProblemKind::GalvanicMid: shunt = 2.0 * L; break;
    case ProblemKind::PointInsertion: shunt = bp.x0 * (L - bp.x0) / L; break;
  }
  if (!std::isfinite(shunt)) return 1.0;
  return shunt / (shunt + bp.beta);
}

SumRules verify_sum_rules(const ModeBasis& b, std::size_t N_trunc) {
  N_trunc = std::min(N_trunc, b.size());
  SumRules r;
  const double c = b.line.c, N = b.N_alpha;
  const bool has_beta = std::isfinite(b.bp.beta);
  std::vector<double> run2;
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < N_trunc; ++n) {
    double e2 = b.endpoint[n] * b.endpoint[n];
    s1 += b.bp.alpha * c * e2 / N;
    if (has_beta) s2 += c * e2 / (b.bp.beta * N * b.k[n] * b.k[n]);
    r.s1_running.push_back(s1);
    run2.push_back(s2);
  }
  r.s2_expected = second_sum_rule_limit(b.bp, b.line.length);
  r.s1_partial = s1;
  r.s2_partial = has_beta ? s2 : std::nan("");
  r.s1_extrapolated = extrapolate_inverse_n(r.s1_running, N_trunc / 10, N_trunc);
  r.s2_extrapolated =
      has_beta ? extrapolate_inverse_n(run2, N_trunc / 10, N_trunc) : std::nan("");
  return r;
}

double continuum_mode(double k, double x, double alpha, double beta) {
  double s = alpha * k * k;
  if (std::isfinite(beta)) s -= 1.0 / beta;
  return std::sqrt(2.0 / kPi) * (k * std::cos(k * x) - s * std::sin(k * x)) /
         std::hypot(k, s);
}

double continuum_mode_at_origin(double k, double alpha, double beta,
                                ProblemKind kind) {
  if (!(k > 0.0))
    throw Error(ErrorCode::InvalidInput, "continuum wavenumber must be positive");
  double s = alpha * k * k;
  if (std::isfinite(beta)) s -= 1.0 / beta;
  // The galvanic jump has the same shape with the boundary slope doubled;
  // this equals sqrt(2/pi) beta k / sqrt(beta k^2 (beta + 4 alpha (alpha beta k^2 - 2)) + 4).
  if (kind == ProblemKind::GalvanicMid) s *= 2.0;
  return std::sqrt(2.0 / kPi) * k / std::hypot(k, s);
}

ContinuumSumRules verify_continuum_sum_rules(double alpha, double beta,
                                             QuadSpec quad) {
  if (!(alpha >= 0.0) || !(beta > 0.0))
    throw Error(ErrorCode::InvalidInput, "continuum sum rules need alpha >= 0, beta > 0");
  ContinuumSumRules r;
  std::vector<double> br;
  if (alpha > 0.0) br.push_back(1.0 / alpha);
  if (std::isfinite(beta)) br.push_back(1.0 / beta);
  if (alpha > 0.0 && std::isfinite(beta)) br.push_back(1.0 / std::sqrt(alpha * beta));
  std::sort(br.begin(), br.end());

  auto piecewise = [&](auto f) {
    double total = 0.0, a = 0.0;
    for (double p : br) {
      total += integrate(f, a, p, quad).value;
      a = p;
    }
    QuadSpec q = quad;
    q.scale = a > 0.0 ? a : 1.0;
    total += integrate_tail(f, a, q).value;
    return total;
  };
  auto u2 = [&](double k) {
    double s = alpha * k * k;
    if (std::isfinite(beta)) s -= 1.0 / beta;
    return (2.0 / kPi) * k * k / (k * k + s * s);
  };
  auto u2k2 = [&](double k) {
    double s = alpha * k * k;
    if (std::isfinite(beta)) s -= 1.0 / beta;
    return (2.0 / kPi) / (k * k + s * s);
  };
  if (alpha > 0.0) {
    r.I1 = piecewise(u2);
    r.rel_err1 = std::abs(alpha * r.I1 - 1.0);
  } else {
    r.I1 = kInf;
  }
  if (std::isfinite(beta)) {
    r.I2 = piecewise(u2k2);
    r.rel_err2 = std::abs(r.I2 / beta - 1.0);
  } else {
    r.I2 = kInf;
  }
  return r;
}

MultiModeBasis build_multi_modes(const MultiPointProblem& p,
                                 const WavenumberSet& ks, const LineParams& line,
                                 double N_alpha) {
  if (std::abs(ks.length - p.length) > 1e-14 * p.length)
    throw Error(ErrorCode::Mismatch, "wavenumbers were solved for a different line");
  MultiModeBasis b;
  b.problem = p;
  b.line = line;
  b.N_alpha = N_alpha;
  b.k = ks.k;
  for (double k : ks.k) {
    double u = p.near_end == EndKind::Open ? 1.0 : 0.0;
    double w = p.near_end == EndKind::Open ? 0.0 : 1.0;
    double x = 0.0, norm = 0.0;
    std::vector<double> vals;
    for (const auto& a : p.attachments) {
      double d = a.x - x;
      norm += segment_square(u, w, k, d);
      double un = u * std::cos(k * d) + w * std::sin(k * d);
      double wn = -u * std::sin(k * d) + w * std::cos(k * d);
      u = un;
      w = wn - boundary_sigma(a.alpha, a.beta, k) * u;
      vals.push_back(u);
      norm += a.alpha * u * u;
      x = a.x;
    }
    norm += segment_square(u, w, k, p.length - x);
    double A = std::sqrt(N_alpha / (line.c * norm));
    for (double& v : vals) v *= A;
    b.at_attachment.push_back(std::move(vals));
  }
  return b;
}

}  // namespace cqed
