#include "cqed/hamiltonian_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cqed/errors.hpp"

namespace cqed {

namespace {

double inv_or_zero(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

bool close(double a, double b, double rel = 1e-10) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

Eigen::MatrixXd network_inverse(const Eigen::MatrixXd& A) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error(ErrorCode::NotPositive, "network capacitance matrix is not positive-definite");
  return ldlt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
}

Eigen::VectorXd first_unit(Eigen::Index n, double scale) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  if (n > 0) v(0) = scale;
  return v;
}

struct ChannelSetup {
  ChannelConstants cc;
  Dressing dress;
  Eigen::MatrixXd Ainv;
  Eigen::VectorXd y;
  double q_red = 0.0, f_red = 0.0;
};

ChannelSetup setup_channel(const NetworkBlock& net, const CouplerSpec& cp,
                           const LineSegment& line, const MatrixElements& me) {
  ChannelSetup s;
  s.cc = channel_constants(cp);
  s.dress = optimal_alpha_beta(net, cp, line);
  s.Ainv = network_inverse(net.A);
  s.y = s.Ainv * net.a;
  const auto p = net.A.rows();
  Eigen::VectorXd Q = me.Q ? *me.Q : first_unit(p, 2.0 * kElectronCharge);
  Eigen::VectorXd F = me.F ? *me.F : first_unit(p, kReducedFluxQuantum);
  if (Q.size() != p || F.size() != p)
    throw Error(ErrorCode::Mismatch, "matrix elements must have the network order");
  s.q_red = Q.dot(s.y);
  s.f_red = F.dot(net.b);
  return s;
}

Eigen::MatrixXd emitted_cap_inv(const ChannelSetup& s, double c) {
  if (s.cc.C_c == 0.0) return s.Ainv;
  if (!(s.dress.alpha > 0.0))
    throw Error(ErrorCode::NotInvertible,
                "capacitance matrix is singular: optimal alpha is zero with C_c > 0");
  return s.Ainv + (s.cc.C_c * s.cc.C_c / (s.dress.alpha * c)) * s.y * s.y.transpose();
}

void fill_couplings(ChannelData& ch, const ChannelSetup& s, const std::vector<double>& omega,
                    const std::vector<double>& u, double N) {
  ch.g_cap.resize(omega.size());
  ch.g_ind.resize(omega.size());
  for (std::size_t n = 0; n < omega.size(); ++n) {
    double w = omega[n];
    ch.g_cap[n] = s.q_red * s.cc.C_c * u[n] * std::sqrt(w / (2.0 * kHbar * N));
    ch.g_ind[n] = std::isinf(s.cc.L_c)
                      ? 0.0
                      : s.f_red * u[n] / (s.cc.L_c * std::sqrt(2.0 * kHbar * N * w));
  }
}

}  // namespace

ChannelConstants channel_constants(const CouplerSpec& cp) {
  ChannelConstants c;
  if (cp.mode == CouplerMode::Point) {
    c.C_c = c.C_d = cp.C_g;
    c.L_c = c.L_d = cp.L_g;
  } else {
    c.C_c = cp.C_A;
    c.C_d = cp.C_g + cp.C_A;
    c.L_c = cp.L_B;
    // parallel combination, either branch may be open
    double g = inv_or_zero(cp.L_g) + inv_or_zero(cp.L_B);
    c.L_d = g > 0.0 ? 1.0 / g : kInf;
  }
  return c;
}

Dressing optimal_alpha_beta(const NetworkBlock& net, const CouplerSpec& cp,
                            const LineSegment& line) {
  if (net.a.size() != net.A.rows())
    throw Error(ErrorCode::Mismatch, "coupling vector a does not match A");
  ChannelConstants cc = channel_constants(cp);
  Dressing d;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(net.A);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
    throw Error(ErrorCode::NotPositive, "network capacitance matrix is not positive-definite");
  d.quad_form = net.a.dot(ldlt.solve(net.a));
  double num = cc.C_d - cc.C_c * cc.C_c * d.quad_form;
  if (num < -1e-12 * cc.C_d) {
    std::ostringstream os;
    os << "negative alpha: C_d - C_c^2 a^T A^-1 a = " << num
       << " F (a^T A^-1 a = " << d.quad_form << " 1/F); the network is over-coupled";
    throw Error(ErrorCode::NotPositive, os.str());
  }
  d.alpha = std::max(num, 0.0) / line.c;
  d.beta = std::isinf(cc.L_d) ? kInf : cc.L_d / line.l;
  return d;
}

std::vector<Dressing> optimal_alpha_beta(const CircuitSpec& spec) {
  std::vector<Dressing> out;
  for (const auto& cp : spec.couplers)
    out.push_back(optimal_alpha_beta(spec.blocks.at(cp.block), cp, spec.lines.at(cp.line)));
  return out;
}

QuantizedHamiltonian assemble(const CircuitSpec& spec, std::size_t coupler,
                              const ModeBasis& basis, std::size_t n_max,
                              const MatrixElements& me) {
  const CouplerSpec& cp = spec.couplers.at(coupler);
  const NetworkBlock& net = spec.blocks.at(cp.block);
  const LineSegment& line = spec.lines.at(cp.line);
  ChannelSetup s = setup_channel(net, cp, line, me);

  const bool galvanic = cp.mode == CouplerMode::Galvanic;
  if (galvanic != (basis.bp.kind == ProblemKind::GalvanicMid))
    throw Error(ErrorCode::Mismatch, "basis geometry does not match the coupler mode");
  if (!close(basis.bp.alpha, s.dress.alpha) || !close(basis.bp.beta, s.dress.beta)) {
    std::ostringstream os;
    os << "basis dressing (alpha = " << basis.bp.alpha << ", beta = " << basis.bp.beta
       << ") differs from the optimal (" << s.dress.alpha << ", " << s.dress.beta << ")";
    throw Error(ErrorCode::Mismatch, os.str());
  }
  if (!close(basis.line.c, line.c) || !close(basis.line.l, line.l))
    throw Error(ErrorCode::Mismatch, "basis was built for a different line");

  QuantizedHamiltonian H;
  H.N_alpha = basis.N_alpha;
  const std::size_t n = std::min(n_max, basis.size());
  std::vector<double> u(basis.endpoint.begin(), basis.endpoint.begin() + static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i) {
    H.omega.push_back(basis.omega(i));
    H.frequencies.push_back(basis.frequency(i));
  }
  H.network_cap_inv.push_back(emitted_cap_inv(s, line.c));
  H.network_ind_inv.push_back(net.Binv);

  ChannelData ch;
  ch.block = cp.block;
  ch.coupler = coupler;
  ch.x = cp.x;
  ch.dressing = s.dress;
  ch.channel_vector = s.y;
  ch.q_reduction = s.q_red;
  ch.f_reduction = s.f_red;
  fill_couplings(ch, s, H.omega, u, basis.N_alpha);
  H.channels.push_back(std::move(ch));
  return H;
}

QuantizedHamiltonian assemble(const CircuitSpec& spec,
                              const std::vector<std::size_t>& couplers,
                              const MultiModeBasis& basis, std::size_t n_max,
                              const MatrixElements& me) {
  QuantizedHamiltonian H;
  H.N_alpha = basis.N_alpha;
  const std::size_t n = std::min(n_max, basis.size());
  for (std::size_t i = 0; i < n; ++i) {
    H.omega.push_back(basis.omega(i));
    H.frequencies.push_back(H.omega.back() / (2.0 * kPi));
  }
  std::vector<std::size_t> seen_blocks;
  for (std::size_t id : couplers) {
    const CouplerSpec& cp = spec.couplers.at(id);
    if (cp.mode != CouplerMode::Point)
      throw Error(ErrorCode::InvalidInput, "multi-network assembly supports point couplers only");
    if (std::find(seen_blocks.begin(), seen_blocks.end(), cp.block) != seen_blocks.end())
      throw Error(ErrorCode::InvalidInput, "each block may carry one coupler in a multi-network line");
    seen_blocks.push_back(cp.block);
    const NetworkBlock& net = spec.blocks.at(cp.block);
    const LineSegment& line = spec.lines.at(cp.line);
    ChannelSetup s = setup_channel(net, cp, line, me);

    const auto& att = basis.problem.attachments;
    auto it = std::find_if(att.begin(), att.end(),
                           [&](const Attachment& a) { return close(a.x, cp.x, 1e-12); });
    if (it == att.end())
      throw Error(ErrorCode::Mismatch, "no basis attachment at the coupler position");
    if (!close(it->alpha, s.dress.alpha) || !close(it->beta, s.dress.beta))
      throw Error(ErrorCode::Mismatch, "basis attachment dressing differs from the optimal choice");
    const auto j = static_cast<std::size_t>(it - att.begin());
    std::vector<double> u(n);
    for (std::size_t m = 0; m < n; ++m) u[m] = basis.at_attachment[m][j];

    H.network_cap_inv.push_back(emitted_cap_inv(s, line.c));
    H.network_ind_inv.push_back(net.Binv);
    ChannelData ch;
    ch.block = cp.block;
    ch.coupler = id;
    ch.x = cp.x;
    ch.dressing = s.dress;
    ch.channel_vector = s.y;
    ch.q_reduction = s.q_red;
    ch.f_reduction = s.f_red;
    fill_couplings(ch, s, H.omega, u, basis.N_alpha);
    H.channels.push_back(std::move(ch));
  }
  return H;
}

QuantizedHamiltonian assemble_bare(const CircuitSpec& spec, std::size_t coupler,
                                   std::size_t n_max, const MatrixElements& me) {
  const CouplerSpec& cp = spec.couplers.at(coupler);
  const LineSegment& line = spec.lines.at(cp.line);
  if (cp.mode != CouplerMode::Point || cp.x != 0.0 || line.length_kind != LengthKind::Finite)
    throw Error(ErrorCode::InvalidInput,
                "the bare-basis approximation needs a point coupler at x = 0 of a finite line");
  const NetworkBlock& net = spec.blocks.at(cp.block);
  ChannelSetup s = setup_channel(net, cp, line, me);

  BoundaryParams bp{0.0, s.dress.beta, ProblemKind::PointEnd, line.far_end, 0.0};
  WavenumberSet ws = solve_point_secular(bp, line.length, static_cast<int>(n_max));
  ModeBasis basis = build_finite_modes(ws, bp, LineParams{line.c, line.l, line.length},
                                       line.c * line.length);
  QuantizedHamiltonian H;
  H.N_alpha = basis.N_alpha;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    H.omega.push_back(basis.omega(i));
    H.frequencies.push_back(basis.frequency(i));
  }
  H.network_cap_inv.push_back(emitted_cap_inv(s, line.c));
  H.network_ind_inv.push_back(net.Binv);
  ChannelData ch;
  ch.block = cp.block;
  ch.coupler = coupler;
  ch.dressing = s.dress;
  ch.channel_vector = s.y;
  ch.q_reduction = s.q_red;
  ch.f_reduction = s.f_red;
  fill_couplings(ch, s, H.omega, basis.endpoint, basis.N_alpha);
  H.channels.push_back(std::move(ch));
  return H;
}

double ChargeQubitParams::alpha() const { return C_g * C_J / (c * (C_g + C_J)); }

LineParams ChargeQubitParams::line() const { return LineParams{c, l, L}; }

namespace {

double charge_prefactor(const ChargeQubitParams& p) {
  LineParams ln = p.line();
  return ln.phase_velocity() * (p.C_g / (p.C_g + p.C_J)) *
         std::sqrt(ln.impedance() / kResistanceQuantum);
}

}  // namespace

CouplingTable charge_qubit_couplings_exact(const ChargeQubitParams& p, std::size_t n_max) {
  const double a = p.alpha();
  BoundaryParams bp{a, kInf, ProblemKind::PointEnd, EndKind::Short, 0.0};
  WavenumberSet ws = solve_point_secular(bp, p.L, static_cast<int>(n_max));
  const double pre = charge_prefactor(p), v = p.line().phase_velocity();
  CouplingTable t;
  for (double k : ws.k) {
    double D = 1.0 + a / p.L + (a * k) * (a * k);
    t.k.push_back(k);
    t.f.push_back(v * k / (2.0 * kPi));
    t.g.push_back(pre * std::sqrt(2.0 * kPi * k / (p.L * D)));
  }
  return t;
}

CouplingTable charge_qubit_couplings_approx(const ChargeQubitParams& p, std::size_t n_max) {
  const double pre = charge_prefactor(p), v = p.line().phase_velocity();
  CouplingTable t;
  for (std::size_t n = 0; n < n_max; ++n) {
    double k = (2.0 * static_cast<double>(n) + 1.0) * kPi / (2.0 * p.L);
    t.k.push_back(k);
    t.f.push_back(v * k / (2.0 * kPi));
    t.g.push_back(pre * std::sqrt(2.0 * kPi * k / p.L));
  }
  t.outside_window = !t.k.empty() && p.alpha() * t.k.back() > 0.1;
  return t;
}

CutoffPrediction predict_cutoff(double alpha, double L, const LineParams& line) {
  CutoffPrediction c;
  if (!(alpha > 0.0)) {
    c.bounded = false;
    return c;
  }
  c.k_c = std::sqrt(1.0 + alpha / L) / alpha;
  c.f_c = line.phase_velocity() * c.k_c / (2.0 * kPi);
  int n = static_cast<int>(std::ceil(c.k_c * L / kPi)) + 3;
  BoundaryParams bp{alpha, kInf, ProblemKind::PointEnd, EndKind::Short, 0.0};
  WavenumberSet ws = solve_point_secular(bp, L, n);
  double best = kInf;
  for (std::size_t i = 0; i < ws.k.size(); ++i) {
    double d = std::abs(ws.k[i] - c.k_c);
    if (d < best) {
      best = d;
      c.n_c = i;
    }
  }
  return c;
}

const char* to_string(TlTlPathology p) {
  switch (p) {
    case TlTlPathology::None: return "NONE";
    case TlTlPathology::CgZero: return "CG_ZERO";
    case TlTlPathology::CgrndZero: return "CGRND_ZERO";
    case TlTlPathology::LSigma: return "L_SIGMA";
  }
  return "?";
}

TlTlReport tl_tl_analyze(const TlTlParams& p, double tol) {
  TlTlReport r;
  const double c1 = p.line1.c, c2 = p.line2.c;
  const double CS = p.C_G + p.C_g;
  const double gS = inv_or_zero(p.L_G) + inv_or_zero(p.L_g);
  const double LS = gS > 0.0 ? 1.0 / gS : kInf;
  const double N1 = p.N_alpha1, N2 = p.N_alpha2;

  auto reference = [](double ref, double fallback) { return ref > 0.0 ? ref : fallback; };
  r.alpha1 = p.C_G / c1;
  if (!(r.alpha1 > 0.0)) {
    r.alpha1 = reference(p.ref_alpha1, CS > 0.0 ? CS / c1 : 1e-3 * p.line1.length);
    r.alpha1_reference = true;
  }
  r.alpha2 = CS > 0.0 ? p.C_G * p.C_g / (c2 * CS) : 0.0;
  if (!(r.alpha2 > 0.0)) {
    r.alpha2 = reference(p.ref_alpha2, p.C_g > 0.0 ? p.C_g / c2 : 1e-3 * p.line2.length);
    r.alpha2_reference = true;
  }
  r.beta1 = std::isinf(LS) ? kInf : LS / p.line1.l;
  r.beta2 = std::isinf(p.L_g) ? kInf : p.L_g / p.line2.l;

  const double x1 = c1 * r.alpha1, x2 = c2 * r.alpha2;
  if (p.C_G > 0.0 && p.C_g > 0.0) {
    r.delta1 = x1 * (x1 - p.C_G) / (p.C_G * N1 * N1);
    r.delta2 = x2 * (x2 * CS - p.C_g * p.C_G) / (p.C_g * p.C_G * N2 * N2);
    r.beta_coupling = x1 * x2 / (p.C_G * N1 * N2);
  } else {
    r.delta1 = r.delta2 = r.beta_coupling = std::nan("");
  }
  r.cap_condition = CS > 0.0 ? p.C_G / CS : 1.0;

  double S1 = std::nan(""), S2 = std::nan(""), e1 = 0.0, e2 = 0.0;
  if (std::isfinite(p.L_g) && std::isfinite(r.beta1) && std::isfinite(r.beta2)) {
    BoundaryParams b1{r.alpha1, r.beta1, ProblemKind::PointEnd, p.far1, 0.0};
    BoundaryParams b2{r.alpha2, r.beta2, ProblemKind::PointEnd, p.far2, 0.0};
    S1 = r.beta1 * p.line1.l * second_sum_rule_limit(b1, p.line1.length);
    S2 = r.beta2 * p.line2.l * second_sum_rule_limit(b2, p.line2.length);
    e1 = 1.0 / LS - 1.0 / (r.beta1 * p.line1.l);
    e2 = 1.0 / p.L_g - 1.0 / (r.beta2 * p.line2.l);
    r.ind_condition = (1.0 + e1 * S1) * (1.0 + e2 * S2) - S1 * S2 / (p.L_g * p.L_g);
  }

  if (p.C_g == 0.0) r.pathology = TlTlPathology::CgZero;
  else if (p.C_G == 0.0) r.pathology = TlTlPathology::CgrndZero;
  else if (std::abs(r.ind_condition) <= tol) r.pathology = TlTlPathology::LSigma;
  if (r.pathology == TlTlPathology::None) return r;

  // dense confirmation on complete ladder bases
  LadderSpec s1{p.line1.c, p.line1.l, p.line1.length, p.ladder_nodes, p.far1,
                {Attachment{0.0, r.alpha1, r.beta1}}};
  LadderSpec s2{p.line2.c, p.line2.l, p.line2.length, p.ladder_nodes, p.far2,
                {Attachment{0.0, r.alpha2, r.beta2}}};
  LadderModes m1 = ladder_modes(s1, N1), m2 = ladder_modes(s2, N2);
  const auto n1 = m1.omega2.size(), n2 = m2.omega2.size();
  Eigen::VectorXd u = m1.u.col(0), v = m2.u.col(0);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  C.topLeftCorner(n1, n1).diagonal().setConstant(N1);
  C.topLeftCorner(n1, n1) += (CS - x1) * u * u.transpose();
  C.bottomRightCorner(n2, n2).diagonal().setConstant(N2);
  C.bottomRightCorner(n2, n2) += (p.C_g - x2) * v * v.transpose();
  C.topRightCorner(n1, n2) = -p.C_g * u * v.transpose();
  C.bottomLeftCorner(n2, n1) = C.topRightCorner(n1, n2).transpose();

  Eigen::VectorXd w(n1 + n2);
  if (r.pathology == TlTlPathology::CgZero) {
    w << Eigen::VectorXd::Zero(n1), v;
    r.confirmation = check_null_vector(C, w);
  } else if (r.pathology == TlTlPathology::CgrndZero) {
    w << u / u.squaredNorm(), v / v.squaredNorm();
    r.confirmation = check_null_vector(C, w);
  } else {
    Eigen::VectorXd D1 = N1 * m1.omega2, D2 = N2 * m2.omega2;
    Eigen::MatrixXd Li = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    Li.topLeftCorner(n1, n1) = D1.asDiagonal();
    Li.topLeftCorner(n1, n1) += e1 * u * u.transpose();
    Li.bottomRightCorner(n2, n2) = D2.asDiagonal();
    Li.bottomRightCorner(n2, n2) += e2 * v * v.transpose();
    Li.topRightCorner(n1, n2) = -(1.0 / p.L_g) * u * v.transpose();
    Li.bottomLeftCorner(n2, n1) = Li.topRightCorner(n1, n2).transpose();
    // null vector of the 2x2 system for (u^T z1, v^T z2), using the ladder's
    // exact resolvents
    double s1x = m1.resolvent(0);
    double y1 = s1x / p.L_g, y2 = 1.0 + e1 * s1x;
    w << D1.cwiseInverse().cwiseProduct(u) * (-e1 * y1 + y2 / p.L_g),
        D2.cwiseInverse().cwiseProduct(v) * (-e2 * y2 + y1 / p.L_g);
    r.confirmation = check_null_vector(Li, w);
  }
  r.witness = w.normalized();
  r.confirmed = std::abs(r.confirmation.min_eig) < tol && std::abs(r.confirmation.rayleigh) < tol;
  return r;
}

DecouplingCertificate decoupling_certificate(const NetworkBlock& net, const CouplerSpec& cp,
                                             const LineSegment& line, double alpha_scale,
                                             std::size_t nodes, double N_alpha) {
  if (line.length_kind != LengthKind::Finite)
    throw Error(ErrorCode::InvalidInput, "decoupling certificate needs a finite line");
  MatrixElements me;
  ChannelSetup s = setup_channel(net, cp, line, me);
  if (!(s.dress.alpha > 0.0))
    throw Error(ErrorCode::InvalidInput, "decoupling certificate needs a positive optimal alpha");
  DecouplingCertificate out;
  out.alpha_used = s.dress.alpha * alpha_scale;

  LadderSpec ls{line.c, line.l, line.length, nodes, line.far_end,
                {Attachment{0.0, out.alpha_used, s.dress.beta}}};
  LadderModes lm = ladder_modes(ls, N_alpha);
  ChannelSystem sys;
  sys.nets.push_back({net.A, net.Binv, net.a, net.b});
  Channel ch;
  ch.u = lm.u.col(0);
  ch.C_c = s.cc.C_c;
  ch.C_d = s.cc.C_d;
  ch.L_c = s.cc.L_c;
  ch.L_d = s.cc.L_d;
  ch.alpha = out.alpha_used;
  ch.beta = s.dress.beta;
  sys.channels.push_back(ch);
  sys.N_alpha = N_alpha;
  sys.omega2 = lm.omega2;
  sys.c = line.c;
  sys.l = line.l;
  DenseSystem d = dense_truncated_assembly(sys);
  out.mode_mode = mode_mode_residual(d);

  Eigen::MatrixXd inv = d.C.partialPivLu().inverse();
  const auto p = static_cast<Eigen::Index>(d.p), N = static_cast<Eigen::Index>(d.N);
  Eigen::MatrixXd net_inv = emitted_cap_inv(s, line.c);
  out.network_block_err = (inv.topLeftCorner(p, p) - net_inv).cwiseAbs().maxCoeff() /
                          net_inv.cwiseAbs().maxCoeff();
  Eigen::MatrixXd cpl = (s.cc.C_c / N_alpha) * s.y * ch.u.transpose();
  double cs = cpl.cwiseAbs().maxCoeff();
  out.coupling_block_err =
      cs > 0.0 ? (inv.topRightCorner(p, N) - cpl).cwiseAbs().maxCoeff() / cs : 0.0;
  return out;
}

}  // namespace cqed
