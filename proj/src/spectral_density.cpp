#include "cqed/spectral_density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint.hpp>

#include "cqed/constants.hpp"
#include "cqed/errors.hpp"

namespace cqed {

const char* to_string(DensityKind k) {
  switch (k) {
    case DensityKind::Inductive: return "inductive";
    case DensityKind::SpinCapacitive: return "spin_capacitive";
    case DensityKind::ClosedFormJC: return "closed_form_JC";
    case DensityKind::ClosedFormJL: return "closed_form_JL";
    case DensityKind::CaldeiraLeggett: return "caldeira_leggett";
  }
  return "?";
}

double SpectralDensity::integral(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] >= lo && omega[i] < hi) s += weight[i];
  return s;
}

double SpectralDensity::smoothed(double w, double width) const {
  double s = 0.0;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    double d = w - omega[i];
    s += weight[i] * width / (kPi * (d * d + width * width));
  }
  return s;
}

SpectralDensity inductive_spectral(const ModeBasis& basis, double L_g) {
  SpectralDensity J;
  J.kind = DensityKind::Inductive;
  if (!(L_g > 0.0)) throw Error(ErrorCode::InvalidInput, "inductive_spectral: L_g must be positive");
  if (std::isinf(L_g)) return J;
  for (std::size_t n = 0; n < basis.size(); ++n) {
    const double w = basis.omega(n), u = basis.endpoint[n];
    J.omega.push_back(w);
    J.weight.push_back(kPi / (2.0 * L_g) * u * u / (basis.N_alpha * w));
  }
  return J;
}

SpectralDensity spin_capacitive_spectral(const ModeBasis& basis, double A) {
  SpectralDensity J;
  J.kind = DensityKind::SpinCapacitive;
  // unit-normalized mode value: u^2 c/N_alpha
  const double scale = basis.line.c / basis.N_alpha;
  for (std::size_t n = 0; n < basis.size(); ++n) {
    const double w = basis.omega(n), u = basis.endpoint[n];
    J.omega.push_back(w);
    J.weight.push_back(A * scale * u * u * w);
  }
  return J;
}

double HalflineDensity::denominator(double w) const {
  const double wa = omega_alpha();
  const double shift = std::isinf(beta) ? 0.0 : alpha * wa * wa / beta;
  const double a = w * w - shift;
  return a * a + w * w * wa * wa;
}

double HalflineDensity::u0_squared(double w) const {
  const double wa = omega_alpha();
  return 2.0 / kPi * w * w * wa * wa / denominator(w);
}

double HalflineDensity::JC(double w) const { return kC * w * u0_squared(w) / v; }
double HalflineDensity::JL(double w) const { return kL * u0_squared(w) / (w * v); }

HalflineDensity halfline_spectral(double alpha, double beta, double v_p) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidInput, "halfline_spectral: alpha must be positive");
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidInput, "halfline_spectral: beta must be positive");
  if (!(v_p > 0.0)) throw Error(ErrorCode::InvalidInput, "halfline_spectral: v_p must be positive");
  HalflineDensity h;
  h.alpha = alpha;
  h.beta = beta;
  h.v = v_p;
  return h;
}

HalflineDensity halfline_spectral(double alpha, double beta, const LineParams& line,
                                  double C_J, double Q, double F) {
  HalflineDensity h = halfline_spectral(alpha, beta, line.phase_velocity());
  const double gq = alpha * Q / C_J;
  h.kC = gq * gq * line.c / (2.0 * kHbar);
  const double gf = std::isinf(beta) ? 0.0 : F / (beta * line.l);
  h.kL = gf * gf / (2.0 * kHbar * line.c);
  return h;
}

namespace {

// cos(2 pi f), exactly zero at odd quarter periods.
double cos_2pi(double f) {
  const double q = 4.0 * f;
  const double r = std::round(q);
  if (std::abs(q - r) < 1e-12 && static_cast<long long>(r) % 2 != 0) return 0.0;
  return std::cos(2.0 * kPi * f);
}

}  // namespace

std::pair<double, double> galvanic_device_alpha_beta(double C, double c, double l, double r1,
                                                     double r2, double r3, double r4, double r5,
                                                     double E_J, double f_beta) {
  const double sum = r1 * r2 + r2 * r3 + r3 * r1;
  const double alpha = C / c * (r4 + r5 + r1 * r2 * r3 / sum);
  const double phi0 = kReducedFluxQuantum;
  const double beta = phi0 * phi0 / (l * E_J * (r4 + r5 * cos_2pi(f_beta)));
  return {alpha, beta};
}

double GalvanicCouplings::delta_u(double k) const {
  const double a = dev.alpha, b = dev.beta;
  k = std::abs(k);
  const double den = b * k * k * (b + 4.0 * a * (a * b * k * k - 2.0)) + 4.0;
  return std::sqrt(2.0 / kPi) * b * k / std::sqrt(den);
}

double GalvanicCouplings::gC1(double k) const {
  const double Z0 = std::sqrt(dev.l / dev.c), v = 1.0 / std::sqrt(dev.l * dev.c);
  return dev.r2 * gamma * v * std::sqrt(kPi * Z0 / kResistanceQuantum) * std::sqrt(k) * delta_u(k);
}

double GalvanicCouplings::gC2(double k) const { return dev.r1 / dev.r2 * gC1(k); }

double GalvanicCouplings::gL(double k) const {
  const double Z0 = std::sqrt(dev.l / dev.c);
  return dev.E_J / kHbar * dev.r3 * cos_2pi(dev.f_eps) *
         std::sqrt(Z0 / (kPi * kResistanceQuantum)) * delta_u(k) / std::sqrt(k);
}

GalvanicCouplings galvanic_infinite_couplings(const GalvanicDevice& dev) {
  for (double r : {dev.r1, dev.r2, dev.r3, dev.E_J, dev.f_eps})
    if (std::isnan(r))
      throw Error(ErrorCode::InvalidInput,
                  "galvanic couplings: device ratios r1, r2, r3, E_J and f_eps are required");
  if (!(dev.alpha > 0.0) || !(dev.beta > 0.0) || !(dev.c > 0.0) || !(dev.l > 0.0))
    throw Error(ErrorCode::InvalidInput, "galvanic couplings: alpha, beta, c, l must be positive");
  GalvanicCouplings g;
  g.dev = dev;
  g.gamma = dev.r3 / (dev.r1 * dev.r2 + dev.r2 * dev.r3 + dev.r3 * dev.r1);
  return g;
}

double argmax_log(const std::function<double(double)>& f, double k_lo, double k_hi) {
  const int n = 400;
  const double a = std::log(k_lo), b = std::log(k_hi);
  int best = 0;
  double fb = -kInf;
  for (int i = 0; i <= n; ++i) {
    double v = f(std::exp(a + (b - a) * i / n));
    if (v > fb) {
      fb = v;
      best = i;
    }
  }
  const double lo = a + (b - a) * std::max(best - 1, 0) / n;
  const double hi = a + (b - a) * std::min(best + 1, n) / n;
  auto neg = [&](double t) { return -f(std::exp(t)); };
  auto r = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
  return std::exp(r.first);
}

namespace {

struct LineFit {
  double slope = 0.0, stderr_ = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y,
                      std::size_t b, std::size_t e) {
  const double n = static_cast<double>(e - b);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = b; i < e; ++i) {
    double r = y[i] - my - f.slope * (x[i] - mx);
    sse += r * r;
  }
  f.stderr_ = n > 2.0 ? std::sqrt(sse / (n - 2.0) / sxx) : kInf;
  return f;
}

}  // namespace

ExponentFit fit_asymptotic_exponent(const std::vector<double>& omega,
                                    const std::vector<double>& w, double lo, double hi,
                                    double max_gap) {
  if (omega.size() != w.size())
    throw Error(ErrorCode::InvalidInput, "fit: omega and weight lengths differ");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < omega.size(); ++i)
    if (omega[i] >= lo && omega[i] <= hi && omega[i] > 0.0 && w[i] > 0.0)
      pts.emplace_back(std::log10(omega[i]), std::log10(w[i]));
  std::sort(pts.begin(), pts.end());
  ExponentFit fit;
  fit.samples = pts.size();
  fit.decades = pts.empty() ? 0.0 : pts.back().first - pts.front().first;
  if (fit.samples < 20 || fit.decades < 1.0) {
    std::ostringstream os;
    os << "fit: window [" << lo << ", " << hi << "] holds " << fit.samples
       << " positive samples spanning " << fit.decades
       << " decades; need at least 20 samples over one decade";
    throw Error(ErrorCode::InvalidInput, os.str());
  }
  std::vector<double> x, y;
  for (auto& p : pts) {
    x.push_back(p.first);
    y.push_back(p.second);
  }
  LineFit all = least_squares(x, y, 0, x.size());
  fit.slope = all.slope;
  fit.stderr_ = all.stderr_;
  // split at the midpoint in log omega
  const double mid = 0.5 * (x.front() + x.back());
  std::size_t cut = static_cast<std::size_t>(std::lower_bound(x.begin(), x.end(), mid) - x.begin());
  if (cut >= 3 && x.size() - cut >= 3) {
    LineFit a = least_squares(x, y, 0, cut), b = least_squares(x, y, cut, x.size());
    fit.half_slope_gap = std::abs(a.slope - b.slope);
  }
  if (fit.half_slope_gap > max_gap) {
    std::ostringstream os;
    os << "fit: window [" << lo << ", " << hi << "] spans " << fit.decades
       << " decades but its halves differ in slope by " << fit.half_slope_gap
       << "; the window crosses a crossover";
    throw Error(ErrorCode::InvalidInput, os.str());
  }
  return fit;
}

namespace {

void check_bath(const BathMap& b) {
  const std::size_t n = b.masses.size();
  if (b.omegas.size() != n || b.couplings.size() != n)
    throw Error(ErrorCode::InvalidInput, "bath: masses, omegas and couplings differ in length");
  if (!(b.m > 0.0)) throw Error(ErrorCode::InvalidInput, "bath: system mass must be positive");
  for (double m : b.masses)
    if (!(m > 0.0)) throw Error(ErrorCode::InvalidInput, "bath: zero or negative bath mass");
}

void mass_and_stiffness(const BathMap& b, Eigen::MatrixXd& M, Eigen::MatrixXd& K) {
  const auto n = static_cast<Eigen::Index>(b.masses.size());
  M = Eigen::MatrixXd::Zero(n + 1, n + 1);
  K = Eigen::MatrixXd::Zero(n + 1, n + 1);
  M(0, 0) = b.m;
  K(0, 0) = b.kappa;
  for (Eigen::Index a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    M(a + 1, a + 1) = b.masses[i];
    K(a + 1, a + 1) = b.masses[i] * b.omegas[i] * b.omegas[i];
    if (b.inductive) {
      K(0, a + 1) = K(a + 1, 0) = b.couplings[i];
    } else {
      M(0, a + 1) = M(a + 1, 0) = -b.couplings[i];
    }
  }
}

}  // namespace

BathMapResult caldeira_leggett_map(const BathMap& bath, MapDirection dir) {
  check_bath(bath);
  BathMapResult r;
  BathMap capacitive;
  if (dir == MapDirection::CapacitiveToInductive) {
    if (bath.inductive) throw Error(ErrorCode::InvalidInput, "bath is already in inductive form");
    capacitive = bath;
    BathMap& o = r.bath;
    o = bath;
    o.inductive = true;
    for (std::size_t a = 0; a < bath.masses.size(); ++a) {
      const double c = bath.couplings[a], m = bath.masses[a], w = bath.omegas[a];
      o.m -= c * c / m;
      o.kappa += c * c * w * w / m;
      o.couplings[a] = c * w * w;
    }
    if (!(o.m > 0.0))
      throw Error(ErrorCode::NotPositive, "bath: renormalized system mass is not positive");
  } else {
    if (!bath.inductive) throw Error(ErrorCode::InvalidInput, "bath is already in capacitive form");
    BathMap& o = r.bath;
    o = bath;
    o.inductive = false;
    for (std::size_t a = 0; a < bath.masses.size(); ++a) {
      const double m = bath.masses[a], w = bath.omegas[a];
      if (!(w > 0.0)) throw Error(ErrorCode::InvalidInput, "bath: zero frequency oscillator");
      const double c = bath.couplings[a] / (w * w);
      o.m += c * c / m;
      o.kappa -= c * c * w * w / m;
      o.couplings[a] = c;
    }
    capacitive = o;
  }
  r.density.kind = DensityKind::CaldeiraLeggett;
  for (std::size_t a = 0; a < capacitive.masses.size(); ++a) {
    const double c = capacitive.couplings[a], w = capacitive.omegas[a];
    r.density.omega.push_back(w);
    r.density.weight.push_back(c * c * w * w * w / capacitive.masses[a]);
  }
  return r;
}

BathState map_state(const BathMap& capacitive, const BathState& s0) {
  BathState s = s0;
  for (std::size_t a = 0; a < capacitive.masses.size(); ++a) {
    const double r = capacitive.couplings[a] / capacitive.masses[a];
    s.x[a] -= r * s0.q;
    s.xd[a] -= r * s0.qd;
  }
  return s;
}

double bath_fundamental(const BathMap& bath) {
  check_bath(bath);
  Eigen::MatrixXd M, K;
  mass_and_stiffness(bath, M, K);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success || !(es.eigenvalues()(0) > 0.0))
    throw Error(ErrorCode::NotPositive, "bath: coupled system is not stable");
  return std::sqrt(es.eigenvalues()(0));
}

std::vector<double> integrate_system_coordinate(const BathMap& bath, const BathState& s0,
                                                const std::vector<double>& times, double tol) {
  check_bath(bath);
  const std::size_t n = bath.masses.size();
  if (s0.x.size() != n || s0.xd.size() != n)
    throw Error(ErrorCode::InvalidInput, "bath: initial state size mismatch");
  Eigen::MatrixXd M, K;
  mass_and_stiffness(bath, M, K);
  const Eigen::MatrixXd D = M.ldlt().solve(K);
  const auto dim = static_cast<Eigen::Index>(n + 1);

  using State = std::vector<double>;
  State y(2 * (n + 1));
  y[0] = s0.q;
  y[n + 1] = s0.qd;
  for (std::size_t a = 0; a < n; ++a) {
    y[a + 1] = s0.x[a];
    y[n + 2 + a] = s0.xd[a];
  }
  auto rhs = [&](const State& s, State& ds, double) {
    Eigen::Map<const Eigen::VectorXd> pos(s.data(), dim), vel(s.data() + dim, dim);
    Eigen::Map<Eigen::VectorXd> dpos(ds.data(), dim), dvel(ds.data() + dim, dim);
    dpos = vel;
    dvel = -D * pos;
  };
  std::vector<double> out;
  out.reserve(times.size());
  auto obs = [&](const State& s, double) { out.push_back(s[0]); };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(tol, tol, ode::runge_kutta_dopri5<State>());
  if (times.empty()) return out;
  double dt = times.size() > 1 ? (times[1] - times[0]) / 10.0 : 1e-3;
  if (!(dt > 0.0)) dt = 1e-3;
  ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), dt, obs);
  return out;
}

}  // namespace cqed
