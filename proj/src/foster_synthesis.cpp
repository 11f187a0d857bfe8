#include "cqed/foster_synthesis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "cqed/constants.hpp"

namespace cqed {

namespace {

void check_stages(const std::vector<double>& caps, const std::vector<double>& inds,
                  const char* who) {
  if (caps.empty() || caps.size() != inds.size())
    throw Error(ErrorCode::InvalidInput,
                std::string(who) + ": need N >= 1 stages with one inductance each");
  for (std::size_t i = 0; i < caps.size(); ++i) {
    if (!(caps[i] > 0.0) || !std::isfinite(caps[i]))
      throw Error(ErrorCode::InvalidInput, std::string(who) + ": stage capacitance must be positive");
    if (!(inds[i] > 0.0))
      throw Error(ErrorCode::InvalidInput, std::string(who) + ": stage inductance must be positive or inf");
  }
}

Eigen::VectorXd inv_inductances(const std::vector<double>& inds) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(inds.size()));
  for (std::size_t i = 0; i < inds.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = std::isinf(inds[i]) ? 0.0 : 1.0 / inds[i];
  return v;
}

Eigen::VectorXd as_vector(const std::vector<double>& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Diagonalizes S = Minvsqrt Linv Minvsqrt and fills Omega, rotation, residual.
Eigen::MatrixXd diagonalize(const Eigen::MatrixXd& S, DressedImpedance& out) {
  SymEig e = sym_eig(S, true);
  out.Omega = e.values.cwiseMax(0.0).cwiseSqrt();
  out.rotation = e.vectors.transpose();
  Eigen::MatrixXd rec = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  double scale = max_abs(S);
  out.eig_residual = scale > 0.0 ? max_abs(S - rec) / scale : 0.0;
  return e.vectors;
}

Eigen::MatrixXd kinetic_with_port(double qq, const Eigen::MatrixXd& off, double inv_M0) {
  const auto N = off.rows();
  const auto p = off.cols();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(p + N, p + N);
  K.topLeftCorner(p, p).setConstant(qq);
  K.topRightCorner(p, N) = off.transpose();
  K.bottomLeftCorner(N, p) = off;
  K.bottomRightCorner(N, N).diagonal().setConstant(inv_M0);
  return K;
}

Eigen::MatrixXd potential_from(const Eigen::VectorXd& Omega, double M0, Eigen::Index p) {
  const auto N = Omega.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(p + N, p + N);
  P.bottomRightCorner(N, N).diagonal() = M0 * Omega.cwiseProduct(Omega);
  return P;
}

}  // namespace

HamiltonianMatrices foster1_lagrangian(double C_A, double C_B,
                                       const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds) {
  check_stages(stage_caps, stage_inds, "foster1");
  const auto N = static_cast<Eigen::Index>(stage_caps.size());
  HamiltonianMatrices h;
  h.kinetic = Eigen::MatrixXd::Zero(N + 1, N + 1);
  h.kinetic(0, 0) = C_A + C_B;
  h.kinetic.block(0, 1, 1, N).setConstant(-C_B);
  h.kinetic.block(1, 0, N, 1).setConstant(-C_B);
  h.kinetic.bottomRightCorner(N, N).setConstant(C_B);
  h.kinetic.bottomRightCorner(N, N).diagonal() += as_vector(stage_caps);
  h.potential = Eigen::MatrixXd::Zero(N + 1, N + 1);
  h.potential.bottomRightCorner(N, N).diagonal() = inv_inductances(stage_inds);
  return h;
}

Foster1Result foster1_dress(double C_A, double C_B, const std::vector<double>& stage_caps,
                            const std::vector<double>& stage_inds, const DressOptions& opt) {
  check_stages(stage_caps, stage_inds, "foster1");
  if (C_A < 0.0 || !(C_B > 0.0))
    throw Error(ErrorCode::InvalidInput, "foster1: need C_A >= 0 and C_B > 0");
  const auto N = static_cast<Eigen::Index>(stage_caps.size());
  Foster1Result r;
  r.C_Sigma = C_A + C_B;
  r.t = C_B / r.C_Sigma;
  r.d = C_A * C_B / r.C_Sigma;
  for (double c : stage_caps) r.s += 1.0 / c;

  if (C_A == 0.0 && r.s * C_B >= kFosterDivergence) {
    Eigen::VectorXd w(N + 1);
    w(0) = 1.0;
    for (Eigen::Index i = 0; i < N; ++i)
      w(i + 1) = 1.0 / (stage_caps[static_cast<std::size_t>(i)] * r.s);
    std::ostringstream os;
    os << "foster1: C_A = 0 with e^T C_alpha^-1 e = " << r.s
       << " 1/F counts a charge twice; the capacitance matrix has a zero mode";
    throw SingularBlockError(os.str(), w.normalized());
  }

  // Sherman-Morrison on diag(C) + d e e^T
  r.eMe = r.s / (1.0 + r.d * r.s);
  const double M0 = opt.M0.value_or(stage_caps.front());
  if (!(M0 > 0.0)) throw Error(ErrorCode::InvalidInput, "foster1: M0 must be positive");
  DressedImpedance& D = r.dressed;
  D.M0 = M0;
  D.norm = r.eMe;
  D.norm_limit = r.d > 0.0 ? 1.0 / r.d : kInf;
  r.q_coefficient = 1.0 / r.C_Sigma + r.t * r.t * r.eMe;
  r.coupling_coefficient = r.t / M0;

  if (!opt.spectrum) return r;

  Eigen::MatrixXd M = Eigen::MatrixXd::Constant(N, N, r.d);
  M.diagonal() += as_vector(stage_caps);
  D.M_alpha = M;
  Eigen::MatrixXd Mis = sym_inv_sqrt(M);
  Eigen::VectorXd f = std::sqrt(M0) * (Mis * Eigen::VectorXd::Ones(N));
  Eigen::MatrixXd S = Mis * inv_inductances(stage_inds).asDiagonal() * Mis;
  Eigen::MatrixXd V = diagonalize(S, D);
  D.coupling = V.transpose() * f;

  r.kinetic = kinetic_with_port(r.q_coefficient, r.coupling_coefficient * D.coupling, 1.0 / M0);
  r.potential = potential_from(D.Omega, M0, 1);
  return r;
}

HamiltonianMatrices foster1_three_step(double C_A, double C_B,
                                       const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds,
                                       std::optional<double> M0_opt) {
  HamiltonianMatrices lag = foster1_lagrangian(C_A, C_B, stage_caps, stage_inds);
  const auto N = static_cast<Eigen::Index>(stage_caps.size());
  const double t = C_B / (C_A + C_B);
  const double M0 = M0_opt.value_or(stage_caps.front());
  const Eigen::VectorXd e = Eigen::VectorXd::Ones(N);

  // Phi_A = eta + t e^T Phi_alpha
  Eigen::MatrixXd T1 = Eigen::MatrixXd::Identity(N + 1, N + 1);
  T1.block(0, 1, 1, N) = t * e.transpose();
  Eigen::MatrixXd Cx = T1.transpose() * lag.kinetic * T1;

  // x_alpha = M0^1/2 M^-1/2 y_alpha
  Eigen::MatrixXd Mis = sym_inv_sqrt(Cx.bottomRightCorner(N, N));
  Eigen::MatrixXd T2 = Eigen::MatrixXd::Identity(N + 1, N + 1);
  T2.bottomRightCorner(N, N) = std::sqrt(M0) * Mis;

  // eta = Phi_A - t e^T Phi_alpha, expressed in y
  Eigen::MatrixXd T3 = Eigen::MatrixXd::Identity(N + 1, N + 1);
  T3.block(0, 1, 1, N) = -t * std::sqrt(M0) * (e.transpose() * Mis);

  Eigen::MatrixXd T = T1 * T2 * T3;
  Eigen::MatrixXd Lz = T.transpose() * lag.potential * T;
  SymEig eg = sym_eig(Lz.bottomRightCorner(N, N), true);
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(N + 1, N + 1);
  R.bottomRightCorner(N, N) = eg.vectors;
  T = T * R;

  HamiltonianMatrices h;
  Eigen::MatrixXd Cz = T.transpose() * lag.kinetic * T;
  h.kinetic = Cz.partialPivLu().inverse();
  h.potential = T.transpose() * lag.potential * T;
  return h;
}

FosterPathology foster1_pathology(double C_A, double C_B,
                                  const std::vector<double>& stage_caps, double tol) {
  std::vector<double> inds(stage_caps.size(), kInf);
  HamiltonianMatrices lag = foster1_lagrangian(C_A, C_B, stage_caps, inds);
  const auto N = static_cast<Eigen::Index>(stage_caps.size());
  FosterPathology p;
  for (double c : stage_caps) p.s += 1.0 / c;
  p.flagged = C_A == 0.0 && p.s * C_B >= kFosterDivergence;
  p.witness.resize(N + 1);
  p.witness(0) = 1.0;
  for (Eigen::Index i = 0; i < N; ++i)
    p.witness(i + 1) = 1.0 / (stage_caps[static_cast<std::size_t>(i)] * p.s);
  p.check = check_null_vector(lag.kinetic, p.witness);
  SymEig e = sym_eig(lag.kinetic, false);
  p.scale = e.values(e.values.size() - 1);
  p.confirmed = std::abs(p.check.rayleigh) < tol && p.check.residual < tol;
  return p;
}

HamiltonianMatrices foster2_lagrangian(double C_A, const std::vector<double>& stage_caps,
                                       const std::vector<double>& stage_inds) {
  check_stages(stage_caps, stage_inds, "foster2");
  const auto N = static_cast<Eigen::Index>(stage_caps.size());
  Eigen::VectorXd c = as_vector(stage_caps);
  HamiltonianMatrices h;
  h.kinetic = Eigen::MatrixXd::Zero(N + 1, N + 1);
  h.kinetic(0, 0) = C_A + c.sum();
  h.kinetic.block(0, 1, 1, N) = -c.transpose();
  h.kinetic.block(1, 0, N, 1) = -c;
  h.kinetic.bottomRightCorner(N, N).diagonal() = c;
  h.potential = Eigen::MatrixXd::Zero(N + 1, N + 1);
  h.potential.bottomRightCorner(N, N).diagonal() = inv_inductances(stage_inds);
  return h;
}

Foster2Result foster2_dress(double C_A, const std::vector<double>& stage_caps,
                            const std::vector<double>& stage_inds, const DressOptions& opt) {
  check_stages(stage_caps, stage_inds, "foster2");
  if (!(C_A > 0.0)) throw Error(ErrorCode::InvalidInput, "foster2: C_A must be positive");
  const double C0 = stage_caps.front();
  const double M0 = opt.M0.value_or(C0);
  if (!(M0 > 0.0)) throw Error(ErrorCode::InvalidInput, "foster2: M0 must be positive");

  Foster2Result r;
  r.C_A = C_A;
  r.coupling_coefficient = 1.0 / C_A;
  DressedImpedance& D = r.dressed;
  D.M0 = M0;
  const double total = as_vector(stage_caps).sum();  // C0 |e|^2
  D.norm = total * C_A / (C_A + total) / M0;
  D.norm_limit = C_A / M0;
  if (!opt.spectrum) return r;

  Eigen::VectorXd e = (as_vector(stage_caps) / C0).cwiseSqrt();
  // M = (I/C0 + e e^T/C_A)^-1
  Eigen::MatrixXd M = -(C0 * C0 / (C_A + total)) * e * e.transpose();
  M.diagonal().array() += C0;
  D.M_alpha = M;
  Eigen::MatrixXd Ms = sym_sqrt(M);
  Eigen::MatrixXd Mis = sym_inv_sqrt(M);
  Eigen::VectorXd LI = C0 * inv_inductances(stage_inds).cwiseQuotient(as_vector(stage_caps));
  Eigen::MatrixXd S = Mis * LI.asDiagonal() * Mis;
  Eigen::MatrixXd V = diagonalize(S, D);
  D.coupling = V.transpose() * (Ms * e) / std::sqrt(M0);

  r.kinetic = kinetic_with_port(1.0 / C_A, D.coupling / C_A, 1.0 / M0);
  r.potential = potential_from(D.Omega, M0, 1);
  return r;
}

MultiportResult multiport_dressing(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C_alpha,
                                   const Eigen::MatrixXd& a, const Eigen::MatrixXd& U,
                                   const std::optional<Eigen::MatrixXd>& L_alpha_inv,
                                   std::optional<double> M0_opt) {
  const auto p = A.rows();
  const auto N = C_alpha.rows();
  const auto Mp = a.cols();
  if (A.cols() != p || C_alpha.cols() != N || a.rows() != p || U.rows() != N || U.cols() != Mp)
    throw Error(ErrorCode::InvalidInput, "multiport: inconsistent sizes");

  MultiportResult r;
  Eigen::MatrixXd nu = a.transpose() * A.ldlt().solve(a);
  Eigen::MatrixXd shift = Eigen::MatrixXd::Identity(Mp, Mp) - nu;
  r.M_alpha = C_alpha + U * shift * U.transpose();
  r.M_alpha = 0.5 * (r.M_alpha + r.M_alpha.transpose()).eval();
  SymEig me = sym_eig(r.M_alpha, false);
  r.min_eig = me.values(0);
  if (!(r.min_eig > 0.0)) {
    std::ostringstream os;
    os << "multiport: M_alpha is not positive-definite (smallest eigenvalue " << r.min_eig
       << " F)";
    throw Error(ErrorCode::NotPositive, os.str());
  }
  r.port_coupling = U.transpose() * r.M_alpha.ldlt().solve(U);
  r.inverse = invert_finite_rank_block({A, a, C_alpha, U});

  Eigen::MatrixXd Ms = sym_sqrt(r.M_alpha);
  Eigen::MatrixXd Mis = sym_inv_sqrt(r.M_alpha);
  r.identity_residual =
      max_abs(Ms * r.inverse.B22 * Ms - Eigen::MatrixXd::Identity(N, N));
  if (!L_alpha_inv) return r;

  const double M0 = M0_opt.value_or(C_alpha(0, 0));
  DressedImpedance& D = r.dressed;
  D.M0 = M0;
  D.M_alpha = r.M_alpha;
  Eigen::MatrixXd S = Mis * (*L_alpha_inv) * Mis;
  Eigen::MatrixXd V = diagonalize(S, D);
  D.coupling = std::sqrt(M0) * V.transpose() * (Mis * U);
  D.norm = r.port_coupling.diagonal().maxCoeff();

  // Phi_alpha = M0^1/2 M^-1/2 V z, so the inverse transforms with V^T M^1/2/M0^1/2.
  Eigen::MatrixXd Tinv = V.transpose() * Ms / std::sqrt(M0);
  r.kinetic.resize(p + N, p + N);
  r.kinetic.topLeftCorner(p, p) = r.inverse.B11;
  r.kinetic.topRightCorner(p, N) = r.inverse.B12 * Tinv.transpose();
  r.kinetic.bottomLeftCorner(N, p) = Tinv * r.inverse.B21;
  r.kinetic.bottomRightCorner(N, N) = Tinv * r.inverse.B22 * Tinv.transpose();
  r.potential = Eigen::MatrixXd::Zero(p + N, p + N);
  Eigen::MatrixXd T = std::sqrt(M0) * Mis * V;
  r.potential.bottomRightCorner(N, N) = T.transpose() * (*L_alpha_inv) * T;
  return r;
}

FosterExpansion synthesize_tl_two_port(double c, double l, double L, std::size_t N) {
  if (!(c > 0.0) || !(l > 0.0) || !(L > 0.0) || N < 1)
    throw Error(ErrorCode::InvalidInput, "tl two-port: need c, l, L > 0 and N >= 1");
  FosterExpansion f;
  f.form = FosterForm::Multiport;
  f.port_count = 2;
  f.virtual_first_stage = true;
  f.stage_caps.push_back(c * L);
  f.stage_inds.push_back(kInf);
  f.turn_ratios.push_back({1.0, 1.0});
  for (std::size_t k = 1; k <= N; ++k) {
    const double kk = static_cast<double>(k) * kPi;
    f.stage_caps.push_back(0.5 * c * L);
    f.stage_inds.push_back(2.0 * l * L / (kk * kk));
    f.turn_ratios.push_back({1.0, (k % 2 == 0) ? 1.0 : -1.0});
  }
  return f;
}

double tl_stage_frequency(double c, double l, double L, std::size_t k) {
  return static_cast<double>(k) * kPi / (std::sqrt(l * c) * L);
}

Eigen::MatrixXcd impedance_eval(const FosterExpansion& f, std::complex<double> s,
                                double pole_tol) {
  using cd = std::complex<double>;
  const std::size_t n = f.stage_caps.size();
  if (n == 0 || f.stage_inds.size() != n)
    throw Error(ErrorCode::InvalidInput, "impedance_eval: stage tables differ in length");
  auto near_pole = [&](double C, double Lk) {
    const double w2 = std::isinf(Lk) ? 0.0 : 1.0 / (Lk * C);
    return std::abs(s * s + w2) < pole_tol * std::max(std::norm(s), w2);
  };
  auto fail = [&](std::size_t k) {
    std::ostringstream os;
    os << "impedance_eval: s = " << s << " is within the pole tolerance of stage " << k;
    throw Error(ErrorCode::PoleProximity, os.str());
  };

  if (f.form == FosterForm::Foster2) {
    cd Y = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double C = f.stage_caps[k], Lk = f.stage_inds[k];
      cd y = std::isinf(Lk) ? s * C : s * C / (1.0 + s * s * Lk * C);
      Y += y;
      scale += std::abs(y);
    }
    if (std::abs(Y) < pole_tol * scale || scale == 0.0) fail(0);
    Eigen::MatrixXcd Z(1, 1);
    Z(0, 0) = 1.0 / Y;
    return Z;
  }

  const auto P = static_cast<Eigen::Index>(std::max<std::size_t>(f.port_count, 1));
  Eigen::MatrixXcd Z = Eigen::MatrixXcd::Zero(P, P);
  for (std::size_t k = 0; k < n; ++k) {
    const double C = f.stage_caps[k], Lk = f.stage_inds[k];
    if (near_pole(C, Lk)) fail(k);
    cd z = std::isinf(Lk) ? 1.0 / (s * C) : (s / C) / (s * s + 1.0 / (Lk * C));
    Eigen::VectorXd T = Eigen::VectorXd::Ones(P);
    if (k < f.turn_ratios.size())
      for (Eigen::Index i = 0; i < P; ++i) T(i) = f.turn_ratios[k][static_cast<std::size_t>(i)];
    Z += z * (T * T.transpose()).cast<cd>();
  }
  return Z;
}

Eigen::Matrix2cd tl_two_port_impedance(double c, double l, double L, std::complex<double> s) {
  const std::complex<double> x = s * std::sqrt(l * c) * L;
  const double Z0 = std::sqrt(l / c);
  const std::complex<double> sh = std::sinh(x);
  Eigen::Matrix2cd Z;
  Z(0, 0) = Z(1, 1) = Z0 * std::cosh(x) / sh;
  Z(0, 1) = Z(1, 0) = Z0 / sh;
  return Z;
}

double Example3Spectrum::frequency(std::size_t i) const {
  return Omega(static_cast<Eigen::Index>(i)) / (2.0 * kPi);
}

Example3Spectrum example3_spectrum(const Example3Params& p, std::size_t N) {
  if (N < 1 || N > 10000)
    throw Error(ErrorCode::InvalidInput, "example3: need 1 <= N <= 10000");
  if (!(p.C_g1 > 0.0) || p.C_g2 < 0.0 || !(p.C_J1 > 0.0) || !(p.C_J2 > 0.0))
    throw Error(ErrorCode::InvalidInput, "example3: port capacitances must be positive");
  const auto t0 = std::chrono::steady_clock::now();
  FosterExpansion fx = synthesize_tl_two_port(p.c, p.l, p.L, N);
  const auto n = static_cast<Eigen::Index>(N);

  const double Cg[2] = {p.C_g1, p.C_g2};
  const double CS[2] = {p.C_g1 + p.C_J1, p.C_g2 + p.C_J2};
  Eigen::VectorXd Ca = as_vector(fx.stage_caps);
  Eigen::MatrixXd U(n + 1, 2);
  for (Eigen::Index k = 0; k <= n; ++k)
    for (int s = 0; s < 2; ++s)
      U(k, s) = std::sqrt(Cg[s]) * fx.turn_ratios[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];

  // The mu off-diagonal carries the truncation parity through the turn ratios.
  Eigen::MatrixXd eta = Ca.cwiseInverse().asDiagonal() * U;
  Example3Spectrum out;
  out.N = N;
  out.mu = U.transpose() * eta;
  out.nu = Eigen::Matrix2d::Zero();
  for (int s = 0; s < 2; ++s) out.nu(s, s) = Cg[s] / CS[s];
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d K = (I + out.mu - out.nu * out.mu).inverse();
  out.beta = out.mu * K;
  out.lambda = K * (out.nu - I);
  out.rho = I + out.mu * out.lambda;

  Eigen::Matrix2d Y = Eigen::Matrix2d::Zero();
  for (int s = 0; s < 2; ++s) Y(s, s) = std::sqrt(Cg[s]) / CS[s];
  // coupling block Y rho eta^T, kept as (N+1) x 2
  Eigen::MatrixXd w = eta * (Y * out.rho).transpose();

  // drop the virtual stage (L_0 -> inf, Q_L0 conserved)
  Eigen::VectorXd sl(n);
  for (Eigen::Index k = 1; k <= n; ++k) sl(k - 1) = std::sqrt(1.0 / fx.stage_inds[static_cast<std::size_t>(k)]);
  Eigen::MatrixXd he = sl.asDiagonal() * eta.bottomRows(n);
  Eigen::MatrixXd S = he * out.lambda * he.transpose();
  S.diagonal() += sl.cwiseProduct(sl).cwiseQuotient(Ca.tail(n));
  Eigen::MatrixXd B = sl.asDiagonal() * w.bottomRows(n);
  SymEig e = sym_eig(S, true);
  S = Eigen::MatrixXd();
  out.Omega = e.values.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd xi = e.vectors.transpose() * B;

  out.g.resize(n, 2);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double zpf = out.Omega(a) > 0.0
                           ? 2.0 * kElectronCharge / std::sqrt(2.0 * kHbar * out.Omega(a))
                           : 0.0;
    for (int s = 0; s < 2; ++s) out.g(a, s) = std::abs(xi(a, s)) * zpf;
  }
  for (int s = 0; s < 2; ++s) {
    Eigen::Index i = 0;
    out.g.col(s).maxCoeff(&i);
    out.argmax[s] = static_cast<std::size_t>(i);
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace cqed
