#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"
#include "cqed/mode_basis.hpp"
#include "cqed/quadrature.hpp"
#include "cqed/spectral_density.hpp"

using namespace cqed;

namespace {

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> w;
  for (int i = 0; i < n; ++i) w.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return w;
}

double fitted(const std::function<double(double)>& J, double lo, double hi) {
  std::vector<double> w = log_grid(lo, hi, 200), y;
  for (double x : w) y.push_back(J(x));
  return fit_asymptotic_exponent(w, y, lo, hi).slope;
}

}  // namespace

TEST_CASE("exponent fits on exact power laws") {
  std::vector<double> w = log_grid(1.0, 1e4, 300), y;
  for (double x : w) y.push_back(3.0 * std::pow(x, -1.5));
  ExponentFit f = fit_asymptotic_exponent(w, y, 1.0, 1e4);
  CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(f.decades == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(f.half_slope_gap < 1e-10);
  CHECK_THROWS_AS(fit_asymptotic_exponent(w, y, 1.0, 5.0), Error);

  // a knee inside the window is refused
  std::vector<double> k;
  for (double x : w) k.push_back(x < 100 ? x : 1e4 / x);
  CHECK_THROWS_AS(fit_asymptotic_exponent(w, k, 1.0, 1e4), Error);
}

TEST_CASE("argmax on a log axis") {
  CHECK(argmax_log([](double k) { return k * std::exp(-k); }, 1e-3, 1e3) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(argmax_log([](double k) { return k / (1 + k * k * 1e-8); }, 1, 1e8) ==
        doctest::Approx(1e4).epsilon(1e-6));
}

TEST_CASE("half-line closed forms obey the continuum sum rules") {
  const double alpha = 2e-5, beta = 3e-4, v = 1.2e8;
  HalflineDensity h = halfline_spectral(alpha, beta, v);
  const double wa = h.omega_alpha();
  // dk = d omega/v
  QuadResult I1 = integrate_half_line([&](double w) { return h.u0_squared(w) / v; }, {1e-11, 22, wa});
  QuadResult I2 = integrate_half_line([&](double w) { return h.u0_squared(w) * v / (w * w); },
                                      {1e-11, 22, wa});
  CHECK(I1.value == doctest::Approx(1.0 / alpha).epsilon(1e-8));
  CHECK(I2.value == doctest::Approx(beta).epsilon(1e-8));
  CHECK(h.u0_squared(3 * wa) ==
        doctest::Approx(std::pow(continuum_mode_at_origin(3 * wa / v, alpha, beta), 2)).epsilon(1e-12));
  CHECK_THROWS_AS(halfline_spectral(0.0, beta, v), Error);
}

TEST_CASE("half-line exponents") {
  const double alpha = 1e-4, v = 1e8;
  HalflineDensity sc = halfline_spectral(alpha, kInf, v);
  const double wa = sc.omega_alpha();
  auto JC = [&](double w) { return sc.JC(w); };
  CHECK(fitted(JC, 1e-5 * wa, 1e-3 * wa) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fitted(JC, 1e3 * wa, 1e5 * wa) == doctest::Approx(-1.0).epsilon(1e-3));

  HalflineDensity ind = halfline_spectral(alpha, 1e-2, v);
  auto JCi = [&](double w) { return ind.JC(w); };
  auto JL = [&](double w) { return ind.JL(w); };
  const double w0 = std::sqrt(alpha / 1e-2) * wa;  // lower crossover
  CHECK(fitted(JCi, 1e-5 * w0, 1e-3 * w0) == doctest::Approx(3.0).epsilon(1e-3));
  CHECK(fitted(JL, 1e-5 * w0, 1e-3 * w0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fitted(JL, 1e3 * wa, 1e5 * wa) == doctest::Approx(-3.0).epsilon(1e-3));
}

TEST_CASE("discrete comb approaches the half-line density on a long line") {
  const double alpha = 1e-3, L = 2.0;
  const LineParams line{1.0, 1.0, L};
  BoundaryParams bp{alpha, kInf};
  WavenumberSet ws = solve_point_secular(bp, L, 20000);
  ModeBasis b = build_finite_modes(ws, bp, line, line.c * L);
  SpectralDensity sd = spin_capacitive_spectral(b, 1.0);
  HalflineDensity h = halfline_spectral(alpha, kInf, 1.0);
  const double wa = h.omega_alpha();
  for (auto [lo, hi] : {std::pair{0.3, 0.6}, std::pair{1.0, 2.0}, std::pair{3.0, 6.0}}) {
    const double comb = sd.integral(lo * wa, hi * wa);
    const double cont = integrate([&](double w) { return h.JC(w); }, lo * wa, hi * wa).value;
    CHECK(comb == doctest::Approx(cont).epsilon(5e-3));
  }
  CHECK(sd.kind == DensityKind::SpinCapacitive);
}

TEST_CASE("inductive comb weights") {
  const LineParams line{249e-12, 623e-9, 4.7e-3};
  BoundaryParams bp{1.8e-5, 1e-3};
  WavenumberSet ws = solve_point_secular(bp, line.length, 30);
  ModeBasis b = build_finite_modes(ws, bp, line, line.c * line.length);
  const double L_g = 1e-3 * line.l;
  SpectralDensity sd = inductive_spectral(b, L_g);
  REQUIRE(sd.omega.size() == 30);
  for (std::size_t n = 0; n < 30; ++n)
    CHECK(sd.weight[n] == doctest::Approx(kPi / (2 * L_g) * b.endpoint[n] * b.endpoint[n] /
                                          (b.N_alpha * b.omega(n))));
  CHECK(inductive_spectral(b, kInf).empty());
  CHECK(sd.integral(0.0, kInf) == doctest::Approx(std::accumulate(sd.weight.begin(), sd.weight.end(), 0.0)));
}

TEST_CASE("galvanic couplings on the infinite line") {
  GalvanicDevice d;
  d.alpha = 0.3;
  d.beta = 2.0;
  d.c = d.l = 1.0;
  GalvanicDevice missing = d;
  CHECK_THROWS_AS(galvanic_infinite_couplings(missing), Error);
  d.r1 = 0.5;
  d.r2 = 1.0;
  d.r3 = 0.8;
  d.E_J = 1e-23;
  d.f_eps = 0.1;
  GalvanicCouplings g = galvanic_infinite_couplings(d);
  CHECK(g.gamma == doctest::Approx(0.8 / (0.5 + 0.8 + 0.4)));
  // each side of the jump carries half the weight
  QuadResult I1 = integrate_half_line([&](double k) { return std::pow(g.delta_u(k), 2); });
  QuadResult I2 = integrate_half_line([&](double k) { return std::pow(g.delta_u(k) / k, 2); });
  CHECK(I1.value == doctest::Approx(1.0 / (2 * d.alpha)).epsilon(1e-8));
  CHECK(I2.value == doctest::Approx(d.beta / 2).epsilon(1e-8));
  CHECK(g.gC2(1.3) == doctest::Approx(0.5 * g.gC1(1.3)));

  auto [a, b] = galvanic_device_alpha_beta(1e-15, 1e-10, 1e-6, 0.5, 1.0, 0.8, 0.2, 0.3, 1e-23, 0.0);
  CHECK(a == doctest::Approx(1e-5 * (0.5 + 0.4 / 1.7)));
  CHECK(b == doctest::Approx(kReducedFluxQuantum * kReducedFluxQuantum / (1e-6 * 1e-23 * 0.5)));
}

TEST_CASE("Caldeira-Leggett map preserves the dynamics") {
  BathMap cap;
  cap.m = 1.0;
  cap.kappa = 1.0;
  cap.masses = {1.0, 2.0, 0.5};
  cap.omegas = {0.7, 1.3, 2.1};
  cap.couplings = {0.2, 0.3, 0.1};
  BathMapResult r = caldeira_leggett_map(cap);
  const BathMap& ind = r.bath;
  CHECK(ind.inductive);
  double schur = 1.0;
  for (std::size_t a = 0; a < 3; ++a) schur -= cap.couplings[a] * cap.couplings[a] / cap.masses[a];
  CHECK(ind.m == doctest::Approx(schur));
  for (std::size_t a = 0; a < 3; ++a) {
    CHECK(ind.couplings[a] == doctest::Approx(cap.couplings[a] * cap.omegas[a] * cap.omegas[a]));
    CHECK(r.density.weight[a] ==
          doctest::Approx(std::pow(cap.couplings[a], 2) * std::pow(cap.omegas[a], 3) / cap.masses[a]));
  }
  // normal modes do not depend on the coordinates
  CHECK(bath_fundamental(ind) == doctest::Approx(bath_fundamental(cap)).epsilon(1e-12));

  BathState s0;
  s0.q = 1.0;
  s0.qd = 0.0;
  s0.x = {0.1, -0.2, 0.05};
  s0.xd = {0.0, 0.1, 0.0};
  std::vector<double> t;
  for (int i = 0; i <= 200; ++i) t.push_back(0.25 * i);
  std::vector<double> q1 = integrate_system_coordinate(cap, s0, t);
  std::vector<double> q2 = integrate_system_coordinate(ind, map_state(cap, s0), t);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::abs(q1[i] - q2[i]) < 1e-8);

  BathMapResult back = caldeira_leggett_map(ind, MapDirection::InductiveToCapacitive);
  CHECK(back.bath.m == doctest::Approx(cap.m).epsilon(1e-12));
  CHECK(back.bath.kappa == doctest::Approx(cap.kappa).epsilon(1e-12));
}
