#include "cqed/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "cqed/block_linalg.hpp"
#include "cqed/foster_synthesis.hpp"
#include "cqed/hamiltonian_assembly.hpp"
#include "cqed/mode_basis.hpp"
#include "cqed/presets.hpp"
#include "cqed/spectral_density.hpp"

namespace cqed {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs body(detail) and turns exceptions into failures.
template <class Body>
CheckResult timed(const std::string& name, Body body) {
  CheckResult r;
  r.name = name;
  std::ostringstream os;
  os.precision(6);
  auto t0 = Clock::now();
  try {
    r.pass = body(os);
  } catch (const std::exception& e) {
    os << (os.tellp() > 0 ? "; " : "") << "error: " << e.what();
    r.pass = false;
  }
  r.seconds = seconds_since(t0);
  r.detail = os.str();
  return r;
}

std::size_t argmax_abs(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

double rel_max(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double scale) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) G(i, j) = g(rng);
  Eigen::MatrixXd S = G * G.transpose() / static_cast<double>(n);
  S.diagonal().array() += 1.0;
  return scale * S;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = g(rng);
  return M;
}

// log-log fit with the expected slope; appends to detail
bool expect_slope(std::ostream& os, const char* label, const std::vector<double>& x,
                  const std::vector<double>& y, double lo, double hi, double expected) {
  ExponentFit f = fit_asymptotic_exponent(x, y, lo, hi);
  bool ok = std::abs(f.slope - expected) <= 0.05;
  os << label << " " << f.slope << " (" << expected << ", " << f.decades << " dec); ";
  return ok;
}

}  // namespace

CheckResult check_device_a_argmax(std::size_t n_max) {
  return timed("device-a argmax", [&](std::ostream& os) {
    auto t0 = Clock::now();
    CouplingTable t = charge_qubit_couplings_exact(device_a(), n_max);
    double dt = seconds_since(t0);
    std::size_t n = argmax_abs(t.g);
    double f = t.f[n];
    os << "argmax n = " << n << ", f = " << f / 1e9 << " GHz, " << dt << " s";
    return (n >= 80 && n <= 82) && std::abs(f / 702.5e9 - 1.0) <= 0.02 && dt < 1.0;
  });
}

CheckResult check_cutoff_predictor(std::size_t sets, std::uint64_t seed) {
  return timed("cutoff predictor", [&](std::ostream& os) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lg(-4.0, -1.0), lenl(-3.0, -1.3);
    const ChargeQubitParams a = device_a();
    std::size_t worst = 0, bad = 0;
    for (std::size_t i = 0; i < sets; ++i) {
      double L = std::pow(10.0, lenl(rng));
      double alpha = std::pow(10.0, lg(rng)) * L;
      ChargeQubitParams p = a;
      p.L = L;
      p.C_g = p.C_J = 2.0 * a.c * alpha;  // series combination gives alpha c
      CutoffPrediction cp = predict_cutoff(p.alpha(), L, p.line());
      auto n_max = static_cast<std::size_t>(3.0 * cp.k_c * L / kPi) + 20;
      CouplingTable t = charge_qubit_couplings_exact(p, n_max);
      std::size_t n = argmax_abs(t.g);
      std::size_t d = n > cp.n_c ? n - cp.n_c : cp.n_c - n;
      worst = std::max(worst, d);
      if (d > 1) ++bad;
    }
    os << sets << " sets, worst |n_c - argmax| = " << worst;
    return bad == 0;
  });
}

CheckResult check_approx_window() {
  return timed("approximation window", [&](std::ostream& os) {
    const ChargeQubitParams p = device_a();
    CutoffPrediction cp = predict_cutoff(p.alpha(), p.L, p.line());
    std::size_t n_max = cp.n_c + 1;
    CouplingTable ex = charge_qubit_couplings_exact(p, n_max);
    CouplingTable ap = charge_qubit_couplings_approx(p, n_max);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 10; ++n) worst = std::max(worst, std::abs(ap.g[n] / ex.g[n] - 1.0));
    double r = ap.g[cp.n_c] / ex.g[cp.n_c];
    os << "max |ratio - 1| for n <= 10: " << worst << ", ratio at n_c = " << cp.n_c << ": " << r;
    return worst <= 0.02 && std::abs(r / std::sqrt(2.0) - 1.0) <= 0.05;
  });
}

CheckResult check_sum_rules(std::size_t N_trunc, double partial_lo, double extrap_tol) {
  return timed("sum rules", [&](std::ostream& os) {
    const ChargeQubitParams p = device_a();
    BoundaryParams bp{p.alpha(), kInf, ProblemKind::PointEnd, EndKind::Short, 0.0};
    WavenumberSet ws = solve_point_secular(bp, p.L, static_cast<int>(N_trunc));
    ModeBasis b = build_finite_modes(ws, bp, p.line(), p.c * p.L);
    SumRules sr = verify_sum_rules(b, N_trunc);
    ContinuumSumRules cs = verify_continuum_sum_rules(p.alpha(), 10.0 * p.alpha());
    os << "s1(" << N_trunc << ") = " << sr.s1_partial << ", extrapolated "
       << sr.s1_extrapolated << ", continuum rel errors " << cs.rel_err1 << ", " << cs.rel_err2;
    return sr.s1_partial >= partial_lo && sr.s1_partial <= 1.0 &&
           std::abs(sr.s1_extrapolated - 1.0) <= extrap_tol && cs.rel_err1 <= 1e-6 &&
           cs.rel_err2 <= 1e-6;
  });
}

CheckResult check_inversion_oracles(std::size_t instances, std::size_t N_max,
                                    std::uint64_t seed) {
  return timed("inversion oracles", [&](std::ostream& os) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pd(1, 5), md(1, 3);
    std::uniform_int_distribution<std::size_t> nd(1, N_max);
    std::uniform_real_distribution<double> pos(0.5, 2.0);
    double worst1 = 0.0, worst2 = 0.0;
    for (std::size_t i = 0; i < instances; ++i) {
      // the first instance has the largest orders
      const Eigen::Index p = i == 0 ? 5 : pd(rng);
      const Eigen::Index N = static_cast<Eigen::Index>(i == 0 ? N_max : nd(rng));
      const Eigen::Index M = i == 0 ? 3 : md(rng);

      RankOneBlockMatrix r1;
      r1.A1 = random_spd(rng, p, 1.0);
      r1.v = random_matrix(rng, p, 1).col(0);
      r1.u = random_matrix(rng, N, 1).col(0) / std::sqrt(static_cast<double>(N));
      r1.D2.resize(N);
      for (Eigen::Index k = 0; k < N; ++k) r1.D2(k) = pos(rng);
      r1.d = pos(rng);
      Eigen::MatrixXd dense1 = r1.dense();
      worst1 = std::max(worst1, rel_max(invert_rank_one_block(r1).dense(),
                                        dense1.partialPivLu().inverse()));

      FiniteRankBlockMatrix fr;
      fr.A = random_spd(rng, p, 1.0);
      fr.a = random_matrix(rng, p, M);
      // keep a^T A^-1 a below the identity so the matrix stays invertible
      Eigen::MatrixXd nu = fr.a.transpose() * fr.A.ldlt().solve(fr.a);
      fr.a *= 0.7 / std::sqrt(std::max(1.0, nu.diagonal().maxCoeff() * static_cast<double>(M)));
      fr.C_alpha = Eigen::MatrixXd::Zero(N, N);
      for (Eigen::Index k = 0; k < N; ++k) fr.C_alpha(k, k) = pos(rng);
      fr.U = random_matrix(rng, N, M) / std::sqrt(static_cast<double>(N));
      Eigen::MatrixXd dense2 = fr.dense();
      worst2 = std::max(worst2, rel_max(invert_finite_rank_block(fr).dense(),
                                        dense2.partialPivLu().inverse()));
    }
    os << instances << " instances, rank-one " << worst1 << ", finite-rank " << worst2;
    return worst1 <= 1e-10 && worst2 <= 1e-10;
  });
}

CheckResult check_exponents() {
  return timed("asymptotic exponents", [&](std::ostream& os) {
    bool ok = true;
    // IR windows need a long line, UV windows many modes; two Device A
    // lengths cover both with two decades each
    ChargeQubitParams lo = device_a(), hi = device_a();
    lo.L = 470e-3;
    const double L_g = 10e-9;
    const double wc = lo.line().phase_velocity() * predict_cutoff(lo.alpha(), lo.L, lo.line()).k_c;
    const std::size_t nc_hi = predict_cutoff(hi.alpha(), hi.L, hi.line()).n_c;
    {
      CutoffPrediction cp = predict_cutoff(lo.alpha(), lo.L, lo.line());
      CouplingTable t = charge_qubit_couplings_exact(lo, cp.n_c);
      std::vector<double> g(t.g.size());
      std::transform(t.g.begin(), t.g.end(), g.begin(), [](double x) { return std::abs(x); });
      ok &= expect_slope(os, "g point low", t.f, g, t.f[1], t.f[cp.n_c / 5], 0.5);
    }
    {
      CouplingTable t = charge_qubit_couplings_exact(hi, 500 * nc_hi + 10);
      std::vector<double> g(t.g.size());
      std::transform(t.g.begin(), t.g.end(), g.begin(), [](double x) { return std::abs(x); });
      ok &= expect_slope(os, "g point high", t.f, g, t.f[4 * nc_hi], t.f[500 * nc_hi], -0.5);
    }
    // J^I needs the inductive path through L_g; J^SC is purely capacitive
    auto basis = [&](const ChargeQubitParams& p, std::size_t n, double beta) {
      BoundaryParams bp{p.alpha(), beta, ProblemKind::PointEnd, EndKind::Short, 0.0};
      WavenumberSet ws = solve_point_secular(bp, p.L, static_cast<int>(n));
      return build_finite_modes(ws, bp, p.line(), p.c * p.L);
    };
    {
      ModeBasis b = basis(lo, predict_cutoff(lo.alpha(), lo.L, lo.line()).n_c, kInf);
      SpectralDensity JS = spin_capacitive_spectral(b, 1.0);
      ok &= expect_slope(os, "J^SC low", JS.omega, JS.weight, JS.omega[1], 0.1 * wc, 1.0);
    }
    {
      ModeBasis b = basis(hi, 1000 * nc_hi + 10, L_g / hi.l);
      SpectralDensity JI = inductive_spectral(b, L_g);
      ok &= expect_slope(os, "J^I high", JI.omega, JI.weight, 9.0 * wc, 1000.0 * wc, -3.0);
      ModeBasis bc = basis(hi, 1000 * nc_hi + 10, kInf);
      SpectralDensity JS = spin_capacitive_spectral(bc, 1.0);
      ok &= expect_slope(os, "J^SC high", JS.omega, JS.weight, 9.0 * wc, 1000.0 * wc, -1.0);
    }

    // galvanic couplings on the infinite line
    GalvanicDevice dev;
    dev.alpha = 1e-6;
    dev.beta = 1e-4;
    dev.c = lo.c;
    dev.l = lo.l;
    dev.r1 = 0.5;
    dev.r2 = 1.0;
    dev.r3 = 0.8;
    dev.E_J = 1e-23;
    dev.f_eps = 0.1;
    GalvanicCouplings gc = galvanic_infinite_couplings(dev);
    std::vector<double> k, gC, gL;
    for (int i = 0; i <= 1100; ++i) {
      double kk = std::pow(10.0, i / 100.0);
      k.push_back(kk);
      gC.push_back(gc.gC1(kk));
      gL.push_back(std::abs(gc.gL(kk)));
    }
    ok &= expect_slope(os, "gC low", k, gC, 1e1, 1e3, 1.5);
    ok &= expect_slope(os, "gC high", k, gC, 4e7, 5e9, -0.5);
    ok &= expect_slope(os, "gL low", k, gL, 1e1, 1e3, 0.5);
    ok &= expect_slope(os, "gL high", k, gL, 4e7, 5e9, -1.5);
    double kL = argmax_log([&](double x) { return std::abs(gc.gL(x)); }, 1.0, 1e11);
    double kC = argmax_log([&](double x) { return gc.gC1(x); }, 1.0, 1e11);
    os << "argmax k: g^L " << kL << " < g^C " << kC;
    return ok && kL < kC;
  });
}

CheckResult check_foster_limits(std::size_t N) {
  return timed("foster limits", [&](std::ostream& os) {
    const double C_A = 1e-12, C_B = 2e-12;
    const double d = C_A * C_B / (C_A + C_B);
    std::vector<double> caps(N, d), inds(N, 1e-9);
    DressOptions opt;
    opt.spectrum = false;
    Foster1Result f1 = foster1_dress(C_A, C_B, caps, inds, opt);
    double r_norm = f1.dressed.norm * d;  // |f|^2/M0 against 1/d
    double r_eMe = f1.eMe * d;
    // undressed block C_alpha + C_B e e^T by Sherman-Morrison
    double s = 0.0;
    for (double c : caps) s += 1.0 / c;
    double raw = s - C_B * s * s / (1.0 + C_B * s);
    double r_raw = raw * C_B;

    std::vector<double> caps2(N, C_A);
    Foster2Result f2 = foster2_dress(C_A, caps2, inds, opt);
    double r2 = f2.dressed.norm * f2.dressed.M0 / C_A;
    os << "N = " << N << ": |f|^2 d/M0 " << r_norm << ", e^T M^-1 e d " << r_eMe
       << ", e^T (C_a + C_B ee^T)^-1 e C_B " << r_raw << ", foster-2 |f|^2 M0/C_A " << r2;
    auto within = [](double x) { return std::abs(x - 1.0) <= 0.01; };
    return within(r_norm) && within(r_eMe) && within(r_raw) && within(r2);
  });
}

CheckResult check_foster_equivalence(std::size_t N) {
  return timed("foster transform equivalence", [&](std::ostream& os) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> cd(0.5e-12, 2e-12), ld(1e-9, 5e-9);
    std::vector<double> caps(N), inds(N);
    for (std::size_t i = 0; i < N; ++i) {
      caps[i] = cd(rng);
      inds[i] = ld(rng);
    }
    Foster1Result one = foster1_dress(0.7e-12, 1.3e-12, caps, inds);
    HamiltonianMatrices three = foster1_three_step(0.7e-12, 1.3e-12, caps, inds);
    double ek = rel_max(one.kinetic, three.kinetic);
    double ep = rel_max(one.potential, three.potential);
    os << "N = " << N << ": kinetic " << ek << ", potential " << ep;
    return ek <= 1e-12 && ep <= 1e-12;
  });
}

CheckResult check_decoupling() {
  return timed("decoupling certificate", [&](std::ostream& os) {
    CircuitSpec spec = device_a_circuit();
    const auto& net = spec.blocks[0];
    const auto& cp = spec.couplers[0];
    const auto& line = spec.lines[0];
    DecouplingCertificate opt = decoupling_certificate(net, cp, line, 1.0);
    DecouplingCertificate off = decoupling_certificate(net, cp, line, 1.1);
    os << "optimal " << opt.mode_mode << ", +10% " << off.mode_mode << ", network block "
       << opt.network_block_err << ", coupling block " << opt.coupling_block_err;
    return opt.mode_mode <= 1e-10 && off.mode_mode > 1e-4 && opt.network_block_err <= 1e-10 &&
           opt.coupling_block_err <= 1e-10;
  });
}

CheckResult check_caldeira_leggett() {
  return timed("caldeira-leggett map", [&](std::ostream& os) {
    BathMap bath;
    bath.m = 1.0;
    bath.kappa = 1.0;
    bath.masses = {1.0, 2.0, 0.5};
    bath.omegas = {0.7, 1.3, 2.1};
    bath.couplings = {0.2, 0.3, 0.1};
    BathMapResult mapped = caldeira_leggett_map(bath);
    BathState s0;
    s0.q = 1.0;
    s0.qd = 0.3;
    s0.x = {0.1, -0.2, 0.05};
    s0.xd = {0.0, 0.1, -0.3};
    const double T = 2.0 * kPi / bath_fundamental(bath);
    std::vector<double> times;
    for (int i = 0; i <= 1000; ++i) times.push_back(10.0 * T * i / 1000.0);
    auto q1 = integrate_system_coordinate(bath, s0, times);
    auto q2 = integrate_system_coordinate(mapped.bath, map_state(bath, s0), times);
    double err = 0.0, amp = 0.0;
    for (std::size_t i = 0; i < q1.size(); ++i) {
      err = std::max(err, std::abs(q1[i] - q2[i]));
      amp = std::max(amp, std::abs(q1[i]));
    }
    os << "max |q - q'| over 10 periods = " << err << " (amplitude " << amp << ")";
    return q1.size() == times.size() && err <= 1e-8 * amp;
  });
}

CheckResult check_pathologies() {
  return timed("pathology detection", [&](std::ostream& os) {
    TlTlParams base;
    base.line1 = LineParams{249e-12, 623e-9, 5e-3};
    base.line2 = LineParams{249e-12, 623e-9, 7e-3};
    base.ladder_nodes = 200;
    TlTlParams a = base;
    a.C_g = 10e-15;
    a.C_G = 0.0;
    TlTlReport ra = tl_tl_analyze(a);
    TlTlParams b = base;
    b.C_g = 0.0;
    b.C_G = 50e-15;
    TlTlReport rb = tl_tl_analyze(b);

    std::vector<double> caps;
    for (int k = 0; k < 200; ++k) caps.push_back(1e-12 * std::pow(0.85, k));
    FosterPathology fp = foster1_pathology(0.0, 1e-12, caps);

    os << "C_G = 0: " << to_string(ra.pathology) << " eig " << ra.confirmation.min_eig
       << "; C_g = 0: " << to_string(rb.pathology) << " eig " << rb.confirmation.min_eig
       << "; foster-1 C_A = 0: flagged " << fp.flagged << " rayleigh " << fp.check.rayleigh
       << " eig " << fp.check.min_eig;
    return ra.pathology == TlTlPathology::CgrndZero && ra.confirmed &&
           rb.pathology == TlTlPathology::CgZero && rb.confirmed && fp.flagged && fp.confirmed;
  });
}

CheckResult check_example3(std::size_t N, double max_seconds) {
  return timed("two-port example", [&](std::ostream& os) {
    Example3Spectrum sp = example3_spectrum(fig9(), N);
    double f1 = sp.frequency(0);
    double fa = sp.frequency(sp.argmax[0]), fb = sp.frequency(sp.argmax[1]);
    os << "N = " << N << ": Omega_1/2pi = " << f1 / 1e9 << " GHz, argmax g1 " << fa / 1e9
       << " GHz, g2 " << fb / 1e9 << " GHz, eigensolve " << sp.seconds << " s";
    bool ok = std::abs(f1 / 4.26e9 - 1.0) <= 0.02 && sp.seconds < max_seconds;
    if (N >= 6000)
      ok = ok && std::abs(fa / 685.5e9 - 1.0) <= 0.03 && std::abs(fb / 1.35e12 - 1.0) <= 0.03;
    return ok;
  });
}

std::vector<Suite> validation_suites(bool quick) {
  std::vector<Suite> s;
  s.push_back({"device-a argmax", [] { return check_device_a_argmax(500); }});
  s.push_back({"cutoff predictor", [quick] { return check_cutoff_predictor(quick ? 5 : 20); }});
  s.push_back({"approximation window", [] { return check_approx_window(); }});
  s.push_back({"sum rules", [quick] {
                 return quick ? check_sum_rules(10000, 0.99, 1e-4) : check_sum_rules(100000, 0.999);
               }});
  s.push_back({"inversion oracles", [quick] {
                 return quick ? check_inversion_oracles(10, 100) : check_inversion_oracles(100, 500);
               }});
  s.push_back({"asymptotic exponents", [] { return check_exponents(); }});
  s.push_back({"foster limits", [quick] { return check_foster_limits(quick ? 1000 : 10000); }});
  s.push_back({"foster transform equivalence",
               [quick] { return check_foster_equivalence(quick ? 50 : 200); }});
  s.push_back({"decoupling certificate", [] { return check_decoupling(); }});
  s.push_back({"caldeira-leggett map", [] { return check_caldeira_leggett(); }});
  s.push_back({"pathology detection", [] { return check_pathologies(); }});
  s.push_back({"two-port example", [quick] { return check_example3(quick ? 1000 : 6000); }});
  return s;
}

}  // namespace cqed
