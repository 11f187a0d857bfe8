#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "cqed/block_linalg.hpp"
#include "cqed/cli.hpp"
#include "cqed/constants.hpp"
#include "cqed/errors.hpp"
#include "cqed/foster_synthesis.hpp"
#include "cqed/hamiltonian_assembly.hpp"
#include "cqed/presets.hpp"

using namespace cqed;

namespace {

// omega^2 of H = p^T K p/2 + q^T P q/2
Eigen::VectorXd hamiltonian_spectrum(const Eigen::MatrixXd& K, const Eigen::MatrixXd& P) {
  Eigen::MatrixXd S = sym_sqrt(K);
  Eigen::VectorXd w = sym_eig(S * P * S, false).values;
  std::sort(w.data(), w.data() + w.size());
  return w;
}

// omega^2 of L = qd^T C qd/2 - q^T Linv q/2
Eigen::VectorXd lagrangian_spectrum(const Eigen::MatrixXd& C, const Eigen::MatrixXd& Linv) {
  Eigen::MatrixXd Ci = sym_inv_sqrt(C);
  Eigen::VectorXd w = sym_eig(Ci * Linv * Ci, false).values;
  std::sort(w.data(), w.data() + w.size());
  return w;
}

double spectrum_gap(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  REQUIRE(a.size() == b.size());
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

void random_stages(std::size_t N, std::vector<double>& caps, std::vector<double>& inds,
                   unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> cd(0.5e-12, 2e-12), ld(1e-9, 5e-9);
  caps.resize(N);
  inds.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    caps[i] = cd(rng);
    inds[i] = ld(rng);
  }
}

}  // namespace

TEST_CASE("two-port line synthesis") {
  const double c = 249e-12, l = 623e-9, L = 9.4e-3;
  FosterExpansion f = synthesize_tl_two_port(c, l, L, 6);
  REQUIRE(f.stage_caps.size() == 7);
  CHECK(f.port_count == 2);
  CHECK(f.virtual_first_stage);
  CHECK(f.stage_caps[0] == doctest::Approx(c * L));
  CHECK(std::isinf(f.stage_inds[0]));
  for (std::size_t k = 1; k <= 6; ++k) {
    CHECK(f.stage_caps[k] == doctest::Approx(c * L / 2));
    CHECK(f.stage_inds[k] == doctest::Approx(2 * l * L / std::pow(k * kPi, 2)));
    CHECK(f.turn_ratios[k][0] == 1.0);
    CHECK(f.turn_ratios[k][1] == (k % 2 ? -1.0 : 1.0));
    CHECK(tl_stage_frequency(c, l, L, k) ==
          doctest::Approx(1.0 / std::sqrt(f.stage_inds[k] * f.stage_caps[k])));
  }
}

TEST_CASE("synthesized impedance converges to the line") {
  const double c = 249e-12, l = 623e-9, L = 9.4e-3;
  FosterExpansion f = synthesize_tl_two_port(c, l, L, 4000);
  for (std::complex<double> s : {std::complex<double>(2 * kPi * 3e9, 0.0),
                                 std::complex<double>(2 * kPi * 1e9, 2 * kPi * 5e9)}) {
    Eigen::MatrixXcd Z = impedance_eval(f, s);
    Eigen::Matrix2cd ref = tl_two_port_impedance(c, l, L, s);
    CHECK(std::abs(Z(0, 0) - ref(0, 0)) < 5e-4 * std::abs(ref(0, 0)));
    CHECK(std::abs(Z(0, 1) - ref(0, 1)) < 5e-4 * std::abs(ref(0, 0)));
    CHECK(std::abs(Z(1, 1) - Z(0, 0)) < 1e-12 * std::abs(ref(0, 0)));
  }
  try {
    impedance_eval(f, std::complex<double>(0.0, tl_stage_frequency(c, l, L, 3)));
    FAIL("expected PoleProximity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PoleProximity);
  }
}

TEST_CASE("Foster-1 dressing preserves the normal modes") {
  std::vector<double> caps, inds;
  random_stages(60, caps, inds, 2);
  const double C_A = 0.7e-12, C_B = 1.3e-12;
  Foster1Result r = foster1_dress(C_A, C_B, caps, inds);
  HamiltonianMatrices lag = foster1_lagrangian(C_A, C_B, caps, inds);
  CHECK(spectrum_gap(hamiltonian_spectrum(r.kinetic, r.potential),
                     lagrangian_spectrum(lag.kinetic, lag.potential)) < 1e-10);
  CHECK(r.C_Sigma == doctest::Approx(C_A + C_B));
  CHECK(r.coupling_coefficient == doctest::Approx(C_B / (r.dressed.M0 * r.C_Sigma)));
  CHECK(r.dressed.M0 == caps[0]);
  CHECK(r.dressed.eig_residual < 1e-12);
  for (Eigen::Index i = 1; i < r.dressed.Omega.size(); ++i)
    CHECK(r.dressed.Omega(i) >= r.dressed.Omega(i - 1));

  HamiltonianMatrices three = foster1_three_step(C_A, C_B, caps, inds);
  CHECK((three.kinetic - r.kinetic).cwiseAbs().maxCoeff() < 1e-10 * r.kinetic.cwiseAbs().maxCoeff());
  CHECK((three.potential - r.potential).cwiseAbs().maxCoeff() <
        1e-10 * r.potential.cwiseAbs().maxCoeff());
}

TEST_CASE("Foster-2 dressing preserves the normal modes") {
  std::vector<double> caps, inds;
  random_stages(40, caps, inds, 9);
  Foster2Result r = foster2_dress(0.9e-12, caps, inds);
  HamiltonianMatrices lag = foster2_lagrangian(0.9e-12, caps, inds);
  CHECK(spectrum_gap(hamiltonian_spectrum(r.kinetic, r.potential),
                     lagrangian_spectrum(lag.kinetic, lag.potential)) < 1e-10);
  CHECK(r.coupling_coefficient == doctest::Approx(1.0 / 0.9e-12));
}

TEST_CASE("dressing norms grow monotonically toward their limits") {
  const double C_A = 1e-12, C_B = 2e-12, d = C_A * C_B / (C_A + C_B);
  DressOptions opt;
  opt.spectrum = false;
  double prev = 0.0;
  for (std::size_t N : {10u, 100u, 1000u, 3000u}) {
    std::vector<double> caps(N, d), inds(N, 1e-9);
    Foster1Result f = foster1_dress(C_A, C_B, caps, inds, opt);
    CHECK(f.dressed.norm > prev);
    CHECK(f.dressed.norm < f.dressed.norm_limit);
    prev = f.dressed.norm;
    if (N == 3000) {
      CHECK(f.dressed.norm * d == doctest::Approx(1.0).epsilon(1e-2));
      CHECK(f.eMe * d == doctest::Approx(1.0).epsilon(1e-2));
    }
  }
}

TEST_CASE("Foster-1 without C_A is singular and confirmed") {
  std::vector<double> caps, inds;
  for (int k = 0; k < 200; ++k) {
    caps.push_back(1e-12 * std::pow(0.85, k));
    inds.push_back(1e-9);
  }
  FosterPathology p = foster1_pathology(0.0, 1e-12, caps);
  CHECK(p.flagged);
  CHECK(p.confirmed);
  CHECK_THROWS_AS(foster1_dress(0.0, 1e-12, caps, inds), SingularBlockError);
  FosterPathology q = foster1_pathology(1e-13, 1e-12, caps);
  CHECK_FALSE(q.flagged);
}

TEST_CASE("multiport dressing") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 0.2);
  const Eigen::Index p = 2, M = 2, N = 30;
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(p, p) * 2.0;
  A(0, 1) = A(1, 0) = 0.3;
  Eigen::MatrixXd a(p, M), U(N, M);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  for (Eigen::Index i = 0; i < U.size(); ++i) U.data()[i] = g(rng);
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(N, N);
  MultiportResult r = multiport_dressing(A, C, a, U);
  CHECK(r.min_eig > 0.0);
  CHECK(r.identity_residual < 1e-10);
  Eigen::MatrixXd expect = C + U * (Eigen::MatrixXd::Identity(M, M) - a.transpose() * A.inverse() * a) *
                                   U.transpose();
  CHECK((r.M_alpha - expect).cwiseAbs().maxCoeff() < 1e-12);

  // a^T A^-1 a far above one turns M_alpha indefinite
  Eigen::MatrixXd big = a * 20.0;
  try {
    multiport_dressing(A, C, big, U * 5.0);
    FAIL("expected NotPositive");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotPositive);
  }
}

TEST_CASE("two-port example with one port left open reduces to a single qubit") {
  Example3Params p = fig9();
  p.C_g2 = 0.0;
  Example3Spectrum sp = example3_spectrum(p, 1500);
  CircuitSpec s = device_a_circuit();
  s.lines[0].length = p.L;
  s.lines[0].far_end = EndKind::Open;
  ModeBasis b = coupler_basis(s, 0, 12);
  QuantizedHamiltonian H = assemble(s, 0, b, 12);
  for (std::size_t n = 0; n < 10; ++n) {
    CHECK(sp.frequency(n) == doctest::Approx(H.frequencies[n]).epsilon(2e-3));
    CHECK(std::abs(sp.g(n, 0)) == doctest::Approx(std::abs(H.channels[0].g_cap[n])).epsilon(1e-2));
    CHECK(std::abs(sp.g(n, 1)) < 1e-9 * std::abs(sp.g(n, 0)));
  }
}
