#include <doctest.h>

#include <cmath>

#include "cqed/constants.hpp"
#include "cqed/mode_basis.hpp"
#include "cqed/quadrature.hpp"

using namespace cqed;

namespace {

const LineParams kLine{249e-12, 623e-9, 4.7e-3};
// device-a dressing
const double kAlpha = (40.3e-15 * 5.13e-15 / (40.3e-15 + 5.13e-15)) / 249e-12;

ModeBasis basis(BoundaryParams bp, int n, LineParams line = kLine) {
  WavenumberSet ws = bp.kind == ProblemKind::GalvanicMid ? solve_galvanic_secular(bp, line.length, n)
                                                         : solve_point_secular(bp, line.length, n);
  return build_finite_modes(ws, bp, line, line.c * line.length);
}

}  // namespace

TEST_CASE("line constants") {
  CHECK(kLine.phase_velocity() == doctest::Approx(1.0 / std::sqrt(249e-12 * 623e-9)));
  CHECK(kLine.impedance() == doctest::Approx(std::sqrt(623e-9 / 249e-12)));
}

TEST_CASE("modes are orthonormal in the dressed inner products") {
  for (double beta : {kInf, 2e-3}) {
    ModeBasis b = basis(BoundaryParams{kAlpha, beta}, 12);
    for (std::size_t n = 0; n < 12; n += 3) {
      for (std::size_t m = 0; m < 12; m += 2) {
        const double na = inner_alpha(b, n, m);
        const double nb = inner_inv_beta(b, n, m);
        if (n == m) {
          CHECK(na == doctest::Approx(b.N_alpha).epsilon(1e-9));
          CHECK(nb == doctest::Approx(b.N_alpha * b.omega(n) * b.omega(n)).epsilon(1e-9));
        } else {
          CHECK(std::abs(na) < 1e-9 * b.N_alpha);
          CHECK(std::abs(nb) < 1e-9 * b.N_alpha * b.omega(n) * b.omega(m));
        }
      }
    }
  }
}

TEST_CASE("mode shapes satisfy the boundary conditions") {
  ModeBasis b = basis(BoundaryParams{kAlpha, kInf}, 50);
  for (std::size_t n = 0; n < b.size(); ++n) {
    CHECK(std::abs(mode_value(b, n, kLine.length)) < 1e-9 * std::abs(b.amplitude[n]));
    CHECK(mode_value(b, n, 0.0) == doctest::Approx(b.endpoint[n]));
    // charge balance at the capacitive end
    const double k = b.k[n];
    CHECK(std::abs(mode_slope(b, n, 0.0) + kAlpha * k * k * b.endpoint[n]) <
          1e-8 * std::abs(b.amplitude[n]) * k);
    CHECK(b.frequency(n) == doctest::Approx(k * kLine.phase_velocity() / (2 * kPi)));
  }
}

TEST_CASE("first sum rule converges to one") {
  ModeBasis b = basis(BoundaryParams{kAlpha, kInf}, 5000);
  SumRules s = verify_sum_rules(b, 5000);
  CHECK(s.s1_partial < 1.0);
  // tail: u_n(0)^2 c alpha/N_alpha ~ 2/(alpha k_n^2 L) with k_n ~ n pi/L
  const double tail = 2.0 * kLine.length / (kPi * kPi * kAlpha * 5000);
  CHECK(1.0 - s.s1_partial == doctest::Approx(tail).epsilon(0.02));
  CHECK(s.s1_extrapolated == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::isnan(s.s2_partial));
  for (std::size_t i = 1; i < s.s1_running.size(); ++i) CHECK(s.s1_running[i] >= s.s1_running[i - 1]);
}

TEST_CASE("second sum rule tends to the DC current split") {
  // open far end: no DC path through the line, limit one
  BoundaryParams open{kAlpha, 3e-3, ProblemKind::PointEnd, EndKind::Open};
  SumRules so = verify_sum_rules(basis(open, 3000), 3000);
  CHECK(second_sum_rule_limit(open, kLine.length) == doctest::Approx(1.0));
  // the s2 tail falls like 1/N^3, so the partial sum is already converged
  CHECK(so.s2_partial == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(so.s2_extrapolated == doctest::Approx(1.0).epsilon(1e-4));

  // shorted far end: the line shunts beta
  BoundaryParams shorted{kAlpha, 3e-3};
  SumRules ss = verify_sum_rules(basis(shorted, 3000), 3000);
  const double expect = kLine.length / (kLine.length + 3e-3);
  CHECK(second_sum_rule_limit(shorted, kLine.length) == doctest::Approx(expect));
  CHECK(ss.s2_partial == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("galvanic sum rule uses the jump") {
  BoundaryParams bp{1e-3, kInf, ProblemKind::GalvanicMid};
  ModeBasis b = basis(bp, 20000, LineParams{1.0, 1.0, 1.0});
  SumRules s = verify_sum_rules(b, 20000);
  CHECK(s.s1_partial < 1.0);
  CHECK(s.s1_extrapolated == doctest::Approx(1.0).epsilon(2e-4));
  for (std::size_t n = 0; n < b.size(); ++n)
    if (b.family[n] == ModeFamily::Uncoupled) CHECK(b.endpoint[n] == 0.0);
}

TEST_CASE("extrapolation recovers a 1/N tail") {
  std::vector<double> run;
  for (int n = 1; n <= 1000; ++n) run.push_back(2.0 - 3.0 / n);
  CHECK(extrapolate_inverse_n(run, 100, 1000) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("continuum sum rules") {
  for (auto [a, b] : {std::pair{1.0, 10.0}, std::pair{1e-4, 1e-3}, std::pair{2.0, 0.5}}) {
    ContinuumSumRules r = verify_continuum_sum_rules(a, b);
    CHECK(r.I1 == doctest::Approx(1.0 / a).epsilon(1e-6));
    CHECK(r.I2 == doctest::Approx(b).epsilon(1e-6));
  }
  // independent quadrature of the closed form at the origin
  const double a = 0.3, b = 2.0;
  QuadResult q = integrate_half_line(
      [&](double k) { return std::pow(continuum_mode_at_origin(k, a, b), 2); }, {1e-12, 20, 1.0 / a});
  CHECK(q.value == doctest::Approx(1.0 / a).epsilon(1e-8));
  CHECK(continuum_mode(1.7, 0.0, a, b) == doctest::Approx(continuum_mode_at_origin(1.7, a, b)));
}

TEST_CASE("multi-point basis with one end attachment reproduces the end basis") {
  MultiPointProblem p;
  p.length = kLine.length;
  p.near_end = EndKind::Open;
  p.attachments.push_back({0.0, kAlpha, kInf});
  WavenumberSet ws = solve_multi_point(p, 40);
  MultiModeBasis mb = build_multi_modes(p, ws, kLine, kLine.c * kLine.length);
  ModeBasis b = basis(BoundaryParams{kAlpha, kInf}, 40);
  for (std::size_t n = 0; n < 40; ++n) {
    CHECK(mb.k[n] == doctest::Approx(b.k[n]).epsilon(1e-10));
    CHECK(std::abs(mb.at_attachment[n][0]) == doctest::Approx(std::abs(b.endpoint[n])).epsilon(1e-8));
  }
}
