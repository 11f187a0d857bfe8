#include "cqed/block_linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>

#include "cqed/constants.hpp"

namespace cqed {

namespace {

double inv_or_zero(double x) { return std::isinf(x) ? 0.0 : 1.0 / x; }

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& M, const char* what) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw Error(ErrorCode::NotInvertible, std::string(what) + " is not invertible");
  return lu.inverse();
}

}  // namespace

Eigen::MatrixXd RankOneBlockMatrix::dense() const {
  const auto p = A1.rows(), N = D2.size();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p + N, p + N);
  M.topLeftCorner(p, p) = A1;
  M.topRightCorner(p, N) = v * u.transpose();
  M.bottomLeftCorner(N, p) = u * v.transpose();
  M.bottomRightCorner(N, N) = D2.asDiagonal();
  M.bottomRightCorner(N, N) += d * u * u.transpose();
  return M;
}

Eigen::MatrixXd BlockInverse::dense() const {
  const auto p = B11.rows(), N = B22.rows();
  Eigen::MatrixXd M(p + N, p + N);
  M.topLeftCorner(p, p) = B11;
  M.topRightCorner(p, N) = B12;
  M.bottomLeftCorner(N, p) = B12.transpose();
  M.bottomRightCorner(N, N) = B22;
  return M;
}

BlockInverse invert_rank_one_block(const RankOneBlockMatrix& m, double singular_tol) {
  const auto p = m.A1.rows(), N = m.D2.size();
  if (m.v.size() != p || m.u.size() != N)
    throw Error(ErrorCode::InvalidInput, "rank-one block: inconsistent sizes");
  for (Eigen::Index i = 0; i < N; ++i)
    if (m.D2(i) == 0.0) throw Error(ErrorCode::NotInvertible, "rank-one block: zero diagonal in A2");

  Eigen::MatrixXd A1inv = checked_inverse(m.A1, "A1");
  Eigen::VectorXd Du = m.u.cwiseQuotient(m.D2);
  double den = 1.0 + m.d * m.u.dot(Du);
  if (std::abs(den) <= singular_tol)
    throw Error(ErrorCode::NotInvertible, "rank-one block: A2 is singular");
  Eigen::MatrixXd A2inv = m.D2.cwiseInverse().asDiagonal();
  A2inv -= (m.d / den) * Du * Du.transpose();
  Eigen::VectorXd w = Du / den;
  double tau = m.u.dot(w);
  Eigen::VectorXd y = A1inv * m.v;
  double nu = m.v.dot(y);

  BlockInverse r;
  r.trace_term = tau * nu;
  double g = 1.0 - r.trace_term;
  if (std::abs(g) <= singular_tol) {
    Eigen::VectorXd z(p + N);
    z.head(p) = y;
    z.tail(N) = -w / tau;
    std::ostringstream os;
    os << "rank-one block: trace term equals 1 (|1 - T| = " << std::abs(g) << ")";
    throw SingularBlockError(os.str(), z.normalized());
  }
  r.B11 = A1inv + (tau / g) * y * y.transpose();
  r.B12 = -(1.0 / g) * y * w.transpose();
  r.B22 = A2inv + (nu / g) * w * w.transpose();
  return r;
}

Eigen::MatrixXd FiniteRankBlockMatrix::dense() const {
  const auto p = A.rows(), N = C_alpha.rows();
  Eigen::MatrixXd M(p + N, p + N);
  M.topLeftCorner(p, p) = A;
  M.topRightCorner(p, N) = -a * U.transpose();
  M.bottomLeftCorner(N, p) = -U * a.transpose();
  M.bottomRightCorner(N, N) = C_alpha + U * U.transpose();
  return M;
}

Eigen::MatrixXd FiniteRankInverse::dense() const {
  const auto p = B11.rows(), N = B22.rows();
  Eigen::MatrixXd M(p + N, p + N);
  M.topLeftCorner(p, p) = B11;
  M.topRightCorner(p, N) = B12;
  M.bottomLeftCorner(N, p) = B21;
  M.bottomRightCorner(N, N) = B22;
  return M;
}

FiniteRankInverse invert_finite_rank_block(const FiniteRankBlockMatrix& m,
                                           double singular_tol) {
  const auto M = m.a.cols();
  if (m.U.cols() != M || m.a.rows() != m.A.rows() || m.U.rows() != m.C_alpha.rows())
    throw Error(ErrorCode::InvalidInput, "finite-rank block: inconsistent sizes");
  Eigen::MatrixXd Ainv = checked_inverse(m.A, "A");
  Eigen::MatrixXd Cinv = checked_inverse(m.C_alpha, "C_alpha");
  Eigen::MatrixXd X = Cinv * m.U;
  Eigen::MatrixXd Y = Ainv * m.a;

  FiniteRankInverse r;
  r.mu = m.U.transpose() * X;
  r.nu = m.a.transpose() * Y;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
  Eigen::MatrixXd Kinv = I + r.mu - r.nu * r.mu;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Kinv);
  const auto& sv = svd.singularValues();
  r.condition = sv(M - 1) > 0.0 ? sv(0) / sv(M - 1) : kInf;
  if (!(sv(M - 1) > singular_tol * std::max(1.0, sv(0)))) {
    std::ostringstream os;
    os << "finite-rank block: I + mu - nu mu is singular (condition number "
       << r.condition << ")";
    throw Error(ErrorCode::NotInvertible, os.str());
  }
  Eigen::MatrixXd K = Kinv.inverse();
  r.gamma = K;
  r.beta = r.mu * K;
  r.lambda = K * (r.nu - I);
  r.rho = I + r.mu * r.lambda;
  r.B11 = Ainv + Y * r.beta * Y.transpose();
  r.B12 = Y * r.rho * X.transpose();
  r.B21 = X * r.gamma * Y.transpose();
  r.B22 = Cinv + X * r.lambda * X.transpose();
  return r;
}

double coefficient_residual(const FiniteRankInverse& r) {
  const auto M = r.mu.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
  double scale = std::max({1.0, r.mu.norm(), r.nu.norm()});
  double e1 = (r.beta - r.mu * r.gamma).cwiseAbs().maxCoeff();
  double e2 = (r.rho - I - r.mu * r.lambda).cwiseAbs().maxCoeff();
  double e3 = ((I + r.mu) * r.gamma - r.nu * r.beta - I).cwiseAbs().maxCoeff();
  double e4 = ((I + r.mu) * r.lambda - r.nu * r.rho + I).cwiseAbs().maxCoeff();
  return std::max({e1, e2, e3, e4}) / scale;
}

std::size_t ChannelSystem::network_order() const {
  std::size_t p = 0;
  for (const auto& n : nets) p += static_cast<std::size_t>(n.A.rows());
  return p;
}

DenseSystem dense_truncated_assembly(const ChannelSystem& sys, std::size_t cap) {
  const std::size_t N = sys.modes();
  if (N > cap) {
    std::ostringstream os;
    os << "dense assembly of " << N << " modes exceeds the cap of " << cap;
    throw Error(ErrorCode::CapExceeded, os.str());
  }
  DenseSystem d;
  d.p = sys.network_order();
  d.N = N;
  const auto n = static_cast<Eigen::Index>(d.p + N);
  const auto p = static_cast<Eigen::Index>(d.p);
  const auto NN = static_cast<Eigen::Index>(N);
  d.C = Eigen::MatrixXd::Zero(n, n);
  d.Linv = Eigen::MatrixXd::Zero(n, n);

  std::vector<Eigen::Index> offset;
  Eigen::Index off = 0;
  for (const auto& net : sys.nets) {
    const auto q = net.A.rows();
    d.C.block(off, off, q, q) = net.A;
    d.Linv.block(off, off, q, q) = net.Binv;
    offset.push_back(off);
    off += q;
  }
  if (N == 0) return d;

  d.C.bottomRightCorner(NN, NN).diagonal().setConstant(sys.N_alpha);
  d.Linv.bottomRightCorner(NN, NN).diagonal() = sys.N_alpha * sys.omega2;
  for (const auto& ch : sys.channels) {
    if (ch.u.size() != NN)
      throw Error(ErrorCode::Mismatch, "channel mode vector does not match the basis size");
    const auto& net = sys.nets.at(ch.net);
    const auto o = offset[ch.net];
    const auto q = net.A.rows();
    d.C.bottomRightCorner(NN, NN) += (ch.C_d - ch.alpha * sys.c) * ch.u * ch.u.transpose();
    Eigen::MatrixXd cc = -ch.C_c * net.a * ch.u.transpose();
    d.C.block(o, p, q, NN) += cc;
    d.C.block(p, o, NN, q) += cc.transpose();

    double e = inv_or_zero(ch.L_d) - inv_or_zero(ch.beta * sys.l);
    d.Linv.bottomRightCorner(NN, NN) += e * ch.u * ch.u.transpose();
    Eigen::MatrixXd lc = -inv_or_zero(ch.L_c) * net.b * ch.u.transpose();
    d.Linv.block(o, p, q, NN) += lc;
    d.Linv.block(p, o, NN, q) += lc.transpose();
  }
  return d;
}

LadderModes ladder_modes(const LadderSpec& s, double N_alpha) {
  if (!(s.c > 0.0) || !(s.l > 0.0) || !(s.length > 0.0) || s.nodes < 2)
    throw Error(ErrorCode::InvalidInput, "ladder needs c, l, length > 0 and at least 2 nodes");
  const auto n = static_cast<Eigen::Index>(s.nodes);
  const double h = s.length / static_cast<double>(s.nodes);
  Eigen::VectorXd mass = Eigen::VectorXd::Constant(n, s.c * h);
  Eigen::VectorXd kd = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ko = Eigen::VectorXd::Constant(n - 1, -1.0 / (s.l * h));
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    kd(j) += 1.0 / (s.l * h);
    kd(j + 1) += 1.0 / (s.l * h);
  }
  if (s.far_end == EndKind::Short) kd(n - 1) += 1.0 / (s.l * h);

  LadderModes out;
  out.N_alpha = N_alpha;
  for (const auto& a : s.attachments) {
    if (!(a.alpha > 0.0))
      throw Error(ErrorCode::InvalidInput, "ladder attachments need alpha > 0 (use a reference alpha)");
    auto j = static_cast<Eigen::Index>(std::llround(a.x / h));
    j = std::clamp<Eigen::Index>(j, 0, n - 1);
    for (auto prev : out.node_of)
      if (static_cast<Eigen::Index>(prev) == j)
        throw Error(ErrorCode::InvalidInput, "two ladder attachments on one node");
    out.node_of.push_back(static_cast<std::size_t>(j));
    mass(j) = a.alpha * s.c;
    if (std::isfinite(a.beta)) kd(j) += 1.0 / (a.beta * s.l);
  }

  // symmetric tridiagonal form M^-1/2 K M^-1/2
  Eigen::VectorXd r = mass.cwiseSqrt().cwiseInverse();
  Eigen::VectorXd diag = kd.cwiseProduct(r).cwiseProduct(r);
  Eigen::VectorXd sub(n - 1);
  for (Eigen::Index j = 0; j + 1 < n; ++j) sub(j) = ko(j) * r(j) * r(j + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  out.omega2 = es.eigenvalues();
  const auto M = static_cast<Eigen::Index>(s.attachments.size());
  out.u.resize(n, M);
  out.resolvent.resize(M);
  for (Eigen::Index i = 0; i < M; ++i) {
    auto j = static_cast<Eigen::Index>(out.node_of[static_cast<std::size_t>(i)]);
    out.u.col(i) = std::sqrt(N_alpha) * r(j) * es.eigenvectors().row(j).transpose();
    double res = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      double w2 = out.omega2(m);
      res += w2 > 0.0 ? out.u(m, i) * out.u(m, i) / (N_alpha * w2) : kInf;
    }
    out.resolvent(i) = res;
  }
  return out;
}

NullCheck check_null_vector(const Eigen::MatrixXd& M, const Eigen::VectorXd& w) {
  SymEig e = sym_eig(M, false);
  double scale = std::max(std::abs(e.values(0)), std::abs(e.values(e.values.size() - 1)));
  NullCheck c;
  double ww = w.squaredNorm();
  c.rayleigh = w.dot(M * w) / (ww * scale);
  c.residual = (M * w).norm() / (scale * std::sqrt(ww));
  c.min_eig = e.values(0) / scale;
  return c;
}

namespace {

// Null direction of a rank-one channel in dense coordinates.
Eigen::VectorXd channel_witness(const ChannelSystem& sys, const Channel& ch,
                                const Eigen::MatrixXd& A1, const Eigen::VectorXd& v,
                                const Eigen::VectorXd& D2, double d) {
  const auto p = static_cast<Eigen::Index>(sys.network_order());
  const auto N = static_cast<Eigen::Index>(sys.modes());
  Eigen::Index off = 0;
  for (std::size_t k = 0; k < ch.net; ++k) off += sys.nets[k].A.rows();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(p + N);
  Eigen::VectorXd Du = ch.u.cwiseQuotient(D2);
  Eigen::VectorXd w = Du / (1.0 + d * ch.u.dot(Du));
  z.segment(off, A1.rows()) = A1.ldlt().solve(v);
  z.tail(N) = -w / ch.u.dot(w);
  return z;
}

}  // namespace

ZeroModeReport detect_zero_modes(const ChannelSystem& sys, double tol) {
  ZeroModeReport rep;
  bool have_cap = false, have_ind = false;
  for (const auto& ch : sys.channels) {
    const auto& net = sys.nets.at(ch.net);
    Eigen::MatrixXd Ainv = checked_inverse(net.A, "network capacitance matrix");
    double nu = net.a.dot(Ainv * net.a);
    double kc = 1.0;
    if (ch.C_c != 0.0) kc = ch.C_d > 0.0 ? 1.0 - ch.C_c * ch.C_c * nu / ch.C_d : -kInf;
    rep.cap_condition.push_back(kc);

    double kl = std::nan("");
    if (std::isinf(ch.L_c)) {
      kl = 1.0;
    } else if (std::isfinite(ch.beta)) {
      Eigen::FullPivLU<Eigen::MatrixXd> lu(net.Binv);
      if (lu.isInvertible()) {
        double bBb = net.b.dot(lu.solve(net.b));
        double S = ch.beta * sys.l * ch.rho;
        double e = inv_or_zero(ch.L_d) - 1.0 / (ch.beta * sys.l);
        kl = 1.0 - (S / (1.0 + e * S)) * bBb / (ch.L_c * ch.L_c);
      }
    }
    rep.ind_condition.push_back(kl);

    const bool N_ok = sys.modes() > 0;
    if (std::abs(kc) <= tol && !have_cap && N_ok) {
      have_cap = true;
      rep.cap_degenerate = true;
      Eigen::VectorXd D2 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sys.modes()), sys.N_alpha);
      rep.cap_witness = channel_witness(sys, ch, net.A, -ch.C_c * net.a, D2,
                                        ch.C_d - ch.alpha * sys.c);
    }
    if (std::isfinite(kl) && std::abs(kl) <= tol && !have_ind && N_ok) {
      have_ind = true;
      rep.ind_degenerate = true;
      Eigen::VectorXd D2 = sys.N_alpha * sys.omega2;
      double e = inv_or_zero(ch.L_d) - 1.0 / (ch.beta * sys.l);
      rep.ind_witness = channel_witness(sys, ch, net.Binv, -net.b / ch.L_c, D2, e);
    }
  }
  if (rep.cap_degenerate || rep.ind_degenerate) {
    DenseSystem d = dense_truncated_assembly(sys);
    if (rep.cap_degenerate) {
      NullCheck c = check_null_vector(d.C, rep.cap_witness);
      rep.cap_rayleigh = c.rayleigh;
      rep.cap_min_eig = c.min_eig;
      rep.cap_confirmed = std::abs(c.min_eig) < tol && std::abs(c.rayleigh) < tol;
    }
    if (rep.ind_degenerate) {
      NullCheck c = check_null_vector(d.Linv, rep.ind_witness);
      rep.ind_rayleigh = c.rayleigh;
      rep.ind_min_eig = c.min_eig;
      rep.ind_confirmed = std::abs(c.min_eig) < tol && std::abs(c.rayleigh) < tol;
    }
  }
  return rep;
}

double mode_mode_residual(const DenseSystem& d) {
  const auto N = static_cast<Eigen::Index>(d.N);
  if (N < 2) return 0.0;
  Eigen::MatrixXd inv = d.C.partialPivLu().inverse();
  Eigen::MatrixXd B = inv.bottomRightCorner(N, N);
  double diag = B.diagonal().cwiseAbs().maxCoeff();
  B.diagonal().setZero();
  return B.cwiseAbs().maxCoeff() / diag;
}

SymEig sym_eig(const Eigen::MatrixXd& S, bool vectors) {
  const auto n = static_cast<lapack_int>(S.rows());
  SymEig out;
  Eigen::MatrixXd a = 0.5 * (S + S.transpose());
  out.values.resize(n);
  if (n == 0) return out;
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, vectors ? 'V' : 'N', 'L', n,
                                   a.data(), n, out.values.data());
  if (info != 0) {
    std::ostringstream os;
    os << "dsyevd failed with info = " << info;
    throw Error(ErrorCode::NonConvergence, os.str());
  }
  if (vectors) {
    for (lapack_int j = 0; j < n; ++j) {
      auto col = a.col(j);
      double big = col.cwiseAbs().maxCoeff();
      for (lapack_int i = 0; i < n; ++i) {
        if (std::abs(col(i)) > 1e-12 * big) {
          if (col(i) < 0.0) col = -col;
          break;
        }
      }
    }
    out.vectors = std::move(a);
  }
  return out;
}

namespace {

Eigen::MatrixXd sym_power(const Eigen::MatrixXd& S, double power) {
  SymEig e = sym_eig(S, true);
  if (!(e.values(0) > 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive-definite, smallest eigenvalue " << e.values(0);
    throw Error(ErrorCode::NotPositive, os.str());
  }
  Eigen::VectorXd d = e.values.array().pow(power);
  return e.vectors * d.asDiagonal() * e.vectors.transpose();
}

}  // namespace

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& S) { return sym_power(S, 0.5); }
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& S) { return sym_power(S, -0.5); }

}  // namespace cqed
