#include <doctest.h>

#include <cmath>

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"
#include "cqed/secular_solver.hpp"

using namespace cqed;

TEST_CASE("bare line roots are closed form") {
  BoundaryParams bp;
  WavenumberSet s = solve_point_secular(bp, 1.0, 6);
  for (int n = 0; n < 6; ++n) CHECK(s.k[n] == doctest::Approx((2 * n + 1) * kPi / 2).epsilon(1e-15));

  bp.far_end = EndKind::Open;
  WavenumberSet o = solve_point_secular(bp, 2.0, 4);
  for (int n = 0; n < 4; ++n) CHECK(o.k[n] == doctest::Approx((n + 1) * kPi / 2.0).epsilon(1e-15));
}

TEST_CASE("capacitive end: roots satisfy alpha k tan(kL) = 1 and interlace") {
  const double L = 4.7e-3;
  for (double alpha : {1e-6, 1.4e-4, 1e-2}) {
    BoundaryParams bp{alpha, kInf};
    WavenumberSet s = solve_point_secular(bp, L, 300);
    REQUIRE(s.k.size() == 300);
    for (int n = 0; n < 300; ++n) {
      const double x = s.k[n] * L;
      CHECK(x > n * kPi);
      CHECK(x < (n + 0.5) * kPi);
      // cos form avoids the tan pole
      const double r = alpha * s.k[n] * std::sin(x) - std::cos(x);
      CHECK(std::abs(r) < 1e-9 * (1.0 + alpha * s.k[n]));
      if (n > 0) CHECK(s.k[n] > s.k[n - 1]);
    }
  }
}

TEST_CASE("high modes approach n pi + a/(n pi)") {
  const double L = 1.0, alpha = 0.5;
  BoundaryParams bp{alpha, kInf};
  WavenumberSet s = solve_point_secular(bp, L, 2001);
  // x tan x = L/alpha, roots near n pi
  std::vector<double> xi = asymptotic_wavenumbers(L / alpha, 1000, 2000);
  for (int n = 1000; n <= 2000; n += 100) {
    const double x = s.k[n] * L;
    CHECK(std::abs(x - xi[n - 1000]) < 1e-8);
  }
  CHECK_THROWS_AS(asymptotic_wavenumbers(1.0, 0, 3), Error);
}

TEST_CASE("inductive path adds a low root and keeps the secular function at zero") {
  const double L = 1e-2;
  BoundaryParams bp{1e-4, 5e-3};
  bp.far_end = EndKind::Open;
  WavenumberSet s = solve_point_secular(bp, L, 50);
  for (double k : s.k) CHECK(std::abs(point_secular(bp, L, k)) < 1e-8 * (1.0 + k * L * k * L * 1e-2));
  // without the inductive path the open-open line has no zero-frequency root
  BoundaryParams nb{1e-4, kInf};
  nb.far_end = EndKind::Open;
  WavenumberSet t = solve_point_secular(nb, L, 50);
  CHECK(s.k[0] < t.k[0]);
}

TEST_CASE("galvanic families") {
  const double L = 1.0;
  BoundaryParams bp{0.05, kInf, ProblemKind::GalvanicMid};
  WavenumberSet s = solve_galvanic_secular(bp, L, 40);
  int coupled = 0;
  for (std::size_t n = 0; n < s.k.size(); ++n) {
    if (s.family[n] == ModeFamily::Uncoupled) {
      CHECK(std::abs(std::cos(s.k[n] * L)) < 1e-12);
    } else {
      ++coupled;
      CHECK(std::abs(galvanic_secular(bp, L, s.k[n])) < 1e-8 * (1.0 + s.k[n] * s.k[n] * 0.05));
    }
    if (n > 0) CHECK(s.k[n] >= s.k[n - 1]);
  }
  CHECK(coupled == 20);
}

TEST_CASE("single attachment in the multi-point solver matches the end problem") {
  const double L = 4.7e-3, alpha = 1.4e-4;
  MultiPointProblem p;
  p.length = L;
  p.near_end = EndKind::Open;
  p.far_end = EndKind::Short;
  p.attachments.push_back({0.0, alpha, kInf});
  WavenumberSet m = solve_multi_point(p, 100);
  WavenumberSet s = solve_point_secular(BoundaryParams{alpha, kInf}, L, 100);
  for (int n = 0; n < 100; ++n) CHECK(m.k[n] == doctest::Approx(s.k[n]).epsilon(1e-10));
}

TEST_CASE("a bare insertion leaves the shorted line untouched") {
  BoundaryParams bp{0.0, kInf, ProblemKind::PointInsertion, EndKind::Short, 0.3};
  WavenumberSet s = solve_point_insertion(bp, 1.0, 10);
  for (int n = 0; n < 10; ++n) CHECK(s.k[n] == doctest::Approx((n + 1) * kPi).epsilon(1e-10));
  CHECK(s.unvalidated);
}

TEST_CASE("insertion at the midpoint splits into even and odd families") {
  // odd modes have a node at the midpoint and do not see the attachment
  BoundaryParams bp{0.1, kInf, ProblemKind::PointInsertion, EndKind::Short, 0.5};
  WavenumberSet s = solve_point_insertion(bp, 1.0, 20);
  int untouched = 0;
  for (double k : s.k) {
    double r = k / (2 * kPi);
    if (std::abs(r - std::round(r)) < 1e-9) ++untouched;
  }
  CHECK(untouched == 10);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(solve_point_secular(BoundaryParams{-1.0, kInf}, 1.0, 3), Error);
  CHECK_THROWS_AS(solve_point_secular(BoundaryParams{1.0, kInf}, 0.0, 3), Error);
  BoundaryParams bp{0.1, kInf, ProblemKind::PointInsertion, EndKind::Short, 1.5};
  CHECK_THROWS_AS(solve_point_insertion(bp, 1.0, 3), Error);
  MultiPointProblem p;
  p.length = 1.0;
  p.attachments = {{0.5, 0.1, kInf}, {0.2, 0.1, kInf}};
  CHECK_THROWS_AS(solve_multi_point(p, 3), Error);
}
