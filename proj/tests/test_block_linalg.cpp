#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "cqed/block_linalg.hpp"
#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

using namespace cqed;

namespace {

Eigen::MatrixXd spd(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, n);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  return X * X.transpose() + static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd randm(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double s = 1.0) {
  std::normal_distribution<double> g(0.0, s);
  Eigen::MatrixXd X(r, c);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = g(rng);
  return X;
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("rank-one block inverse matches LU") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index p = 1 + trial % 4, N = 5 + 7 * trial;
    RankOneBlockMatrix m;
    m.A1 = spd(rng, p);
    m.v = randm(rng, p, 1, 0.3).col(0);
    m.u = randm(rng, N, 1, 0.3).col(0);
    m.D2 = (randm(rng, N, 1).array().abs() + 1.0).matrix().col(0);
    m.d = 0.7;
    const Eigen::MatrixXd dense = m.dense();
    BlockInverse inv = invert_rank_one_block(m);
    CHECK(rel(inv.dense(), dense.partialPivLu().inverse()) < 1e-10);
    CHECK((inv.dense() * dense - Eigen::MatrixXd::Identity(p + N, p + N)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("finite-rank block inverse matches LU and its coefficient identities") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index p = 2 + trial % 3, M = 1 + trial % 3, N = 30 + 10 * trial;
    FiniteRankBlockMatrix m;
    m.A = spd(rng, p);
    m.a = randm(rng, p, M, 0.2);
    m.C_alpha = spd(rng, N);
    m.U = randm(rng, N, M, 0.5);
    const Eigen::MatrixXd dense = m.dense();
    FiniteRankInverse inv = invert_finite_rank_block(m);
    CHECK(rel(inv.dense(), dense.inverse()) < 1e-10);
    CHECK(coefficient_residual(inv) < 1e-10);
    CHECK(rel(inv.mu, m.U.transpose() * m.C_alpha.llt().solve(m.U)) < 1e-12);
    CHECK(rel(inv.nu, m.a.transpose() * m.A.llt().solve(m.a)) < 1e-12);
  }
}

TEST_CASE("a singular rank-one block reports a null direction") {
  // A2 = 1 + 1 = 2, so A1 = v^2 u^2/A2 = 1/2 zeroes the Schur complement
  RankOneBlockMatrix m;
  m.A1 = Eigen::MatrixXd::Constant(1, 1, 0.5);
  m.v = Eigen::VectorXd::Constant(1, 1.0);
  m.u = Eigen::VectorXd::Constant(1, 1.0);
  m.D2 = Eigen::VectorXd::Constant(1, 1.0);
  m.d = 1.0;
  try {
    invert_rank_one_block(m);
    FAIL("expected SingularBlockError");
  } catch (const SingularBlockError& e) {
    CHECK(e.code() == ErrorCode::NotInvertible);
    const Eigen::VectorXd& w = e.witness();
    REQUIRE(w.size() == 2);
    CHECK((m.dense() * w).norm() < 1e-12 * w.norm());
  }
}

TEST_CASE("symmetric square roots and eigenvectors") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd S = spd(rng, 12);
  Eigen::MatrixXd R = sym_sqrt(S);
  CHECK(rel(R * R, S) < 1e-12);
  Eigen::MatrixXd Ri = sym_inv_sqrt(S);
  CHECK((Ri * S * Ri - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  SymEig e = sym_eig(S);
  for (Eigen::Index i = 1; i < 12; ++i) CHECK(e.values(i) >= e.values(i - 1));
  for (Eigen::Index j = 0; j < 12; ++j) {
    Eigen::Index first = 0;
    while (std::abs(e.vectors(first, j)) < 1e-14) ++first;
    CHECK(e.vectors(first, j) > 0.0);
    CHECK((S * e.vectors.col(j) - e.values(j) * e.vectors.col(j)).norm() < 1e-10 * e.values(11));
  }
}

TEST_CASE("null vector check") {
  Eigen::MatrixXd M(2, 2);
  M << 1, 1, 1, 1;
  NullCheck c = check_null_vector(M, Eigen::Vector2d(1, -1));
  CHECK(c.rayleigh < 1e-15);
  CHECK(c.residual < 1e-15);
  CHECK(std::abs(c.min_eig) < 1e-15);
  NullCheck d = check_null_vector(M, Eigen::Vector2d(1, 1));
  CHECK(d.rayleigh == doctest::Approx(1.0));
}

TEST_CASE("ladder modes") {
  LadderSpec s{249e-12, 623e-9, 4.7e-3, 200, EndKind::Short, {Attachment{0.0, 1.8e-5, kInf}}};
  LadderModes m = ladder_modes(s, 1e-12);
  REQUIRE(m.omega2.size() > 0);
  for (Eigen::Index i = 1; i < m.omega2.size(); ++i) CHECK(m.omega2(i) > m.omega2(i - 1));
  CHECK(m.omega2(0) > 0.0);
  // the resolvent is the attachment entry of the inverse stiffness
  double r = 0.0;
  for (Eigen::Index n = 0; n < m.omega2.size(); ++n)
    r += m.u(n, 0) * m.u(n, 0) / (m.N_alpha * m.omega2(n));
  CHECK(r == doctest::Approx(m.resolvent(0)).epsilon(1e-10));
  // the lowest mode tends to the continuum value of the dressed line
  const double v = 1.0 / std::sqrt(249e-12 * 623e-9);
  CHECK(std::sqrt(m.omega2(0)) / v == doctest::Approx(332.9).epsilon(0.01));

  LadderSpec bad = s;
  bad.attachments[0].alpha = 0.0;
  CHECK_THROWS_AS(ladder_modes(bad, 1e-12), Error);
}

TEST_CASE("dense assembly honours its cap") {
  ChannelSystem sys;
  sys.omega2 = Eigen::VectorXd::Ones(50);
  sys.N_alpha = 1.0;
  sys.c = 1.0;
  sys.l = 1.0;
  sys.nets.push_back({Eigen::MatrixXd::Identity(1, 1), Eigen::MatrixXd::Zero(1, 1),
                      Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)});
  Channel ch;
  ch.u = Eigen::VectorXd::Constant(50, 0.1);
  ch.C_c = ch.C_d = 0.5;
  ch.L_c = ch.L_d = kInf;
  ch.alpha = 0.5;
  ch.beta = kInf;
  sys.channels.push_back(ch);
  DenseSystem d = dense_truncated_assembly(sys);
  CHECK(d.p == 1);
  CHECK(d.N == 50);
  CHECK(rel(d.C, d.C.transpose()) < 1e-15);
  try {
    dense_truncated_assembly(sys, 10);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
}
