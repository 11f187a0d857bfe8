#pragma once

#include <functional>

namespace cqed {

struct QuadSpec {
  double tol = 1e-10;   // relative
  unsigned max_depth = 18;
  double scale = 1.0;   // length scale for the tan substitution on (0, inf)
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive 61-point Gauss-Kronrod on [a, b].
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadSpec& spec = {});

// Integral over (0, inf) through k = scale * tan(theta).
QuadResult integrate_half_line(const std::function<double(double)>& f,
                               const QuadSpec& spec = {});

// Integral over (a, inf) through k = a + scale * tan(theta).
QuadResult integrate_tail(const std::function<double(double)>& f, double a,
                          const QuadSpec& spec = {});

}  // namespace cqed
