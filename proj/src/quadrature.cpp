#include "cqed/quadrature.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

namespace cqed {

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     const QuadSpec& spec) {
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  double v = gauss_kronrod<double, 61>::integrate(f, a, b, spec.max_depth,
                                                  spec.tol, &err);
  if (!std::isfinite(v))
    throw Error(ErrorCode::NonConvergence, "quadrature produced a non-finite value");
  return {v, err};
}

QuadResult integrate_tail(const std::function<double(double)>& f, double a,
                          const QuadSpec& spec) {
  const double s = spec.scale;
  auto g = [&](double th) {
    double c = std::cos(th);
    if (c <= 0.0) return 0.0;
    double k = a + s * std::tan(th);
    return f(k) * s / (c * c);
  };
  return integrate(g, 0.0, 0.5 * kPi, spec);
}

QuadResult integrate_half_line(const std::function<double(double)>& f,
                               const QuadSpec& spec) {
  return integrate_tail(f, 0.0, spec);
}

}  // namespace cqed
