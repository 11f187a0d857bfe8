#include "cqed/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cqed/errors.hpp"
#include "cqed/foster_synthesis.hpp"
#include "cqed/hamiltonian_assembly.hpp"
#include "cqed/presets.hpp"
#include "cqed/spectral_density.hpp"
#include "cqed/validation.hpp"

// Present when the BLAS is OpenBLAS.
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace cqed {

using json = nlohmann::ordered_json;

namespace {

class FindingsError : public Error {
 public:
  explicit FindingsError(ValidationReport rep)
      : Error(ErrorCode::InvalidInput, "circuit failed validation"), rep_(std::move(rep)) {}
  const ValidationReport& report() const { return rep_; }

 private:
  ValidationReport rep_;
};

json num(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

json findings_json(const ValidationReport& rep) {
  json arr = json::array();
  for (const auto& f : rep.findings)
    arr.push_back({{"rule", f.rule}, {"where", f.where}, {"detail", f.detail}});
  return arr;
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

class Csv {
 public:
  explicit Csv(std::ostream& os) : os_(os) {}
  Csv& header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << '\n';
    return *this;
  }
  Csv& cell(double x) { return put(format_number(x)); }
  Csv& cell(std::size_t x) { return put(std::to_string(x)); }
  Csv& cell(int x) { return put(std::to_string(x)); }
  Csv& cell(const std::string& s) { return put(csv_text(s)); }
  Csv& cell(const char* s) { return put(csv_text(s)); }
  void end() {
    os_ << '\n';
    first_ = true;
  }

 private:
  Csv& put(const std::string& s) {
    os_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ostream& os_;
  bool first_ = true;
};

json preset_json(const std::string& name) {
  PresetInfo info = preset_info(name);
  json params = json::object();
  for (const auto& p : info.params) params[p.name] = {{"value", p.value}, {"unit", p.unit}};
  return {{"name", info.name}, {"description", info.description}, {"parameters", params}};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open input \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CircuitSpec load_circuit(const RunConfig& cfg) {
  if (!cfg.input.empty() && !cfg.preset.empty())
    throw Error(ErrorCode::InvalidInput, "give either --input or --preset, not both");
  CircuitSpec spec;
  if (!cfg.input.empty()) {
    spec = parse_circuit(read_file(cfg.input));
  } else if (cfg.preset == "device-a") {
    spec = device_a_circuit();
  } else if (!cfg.preset.empty()) {
    preset_info(cfg.preset);  // throws for unknown names
    throw Error(ErrorCode::InvalidInput,
                "preset \"" + cfg.preset + "\" is not a circuit preset for this command");
  } else {
    throw Error(ErrorCode::InvalidInput, "this command needs --input or --preset");
  }
  ValidationReport rep = validate_circuit(spec);
  if (!rep.ok()) throw FindingsError(rep);
  return spec;
}

std::vector<std::size_t> selected_couplers(const CircuitSpec& spec, const RunConfig& cfg) {
  if (spec.couplers.empty()) throw Error(ErrorCode::InvalidInput, "the circuit has no couplers");
  if (cfg.coupler) {
    if (*cfg.coupler >= spec.couplers.size())
      throw Error(ErrorCode::InvalidInput, "--coupler " + std::to_string(*cfg.coupler) +
                                               " is out of range");
    return {*cfg.coupler};
  }
  std::vector<std::size_t> ids(spec.couplers.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  return ids;
}

double parse_beta(const std::string& s) {
  if (s == "inf") return kInf;
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos == s.size() && v > 0.0) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidInput, "--beta must be a positive length in m or \"inf\"");
}

EndKind parse_end(const std::string& s) {
  if (s == "short") return EndKind::Short;
  if (s == "open") return EndKind::Open;
  throw Error(ErrorCode::InvalidInput, "--far-end must be short or open");
}

bool want_json(const RunConfig& cfg) {
  if (cfg.emit == "json") return true;
  if (cfg.emit == "csv") return false;
  throw Error(ErrorCode::InvalidInput, "--emit must be csv or json");
}

// ---------------------------------------------------------------------------

int cmd_modes(const RunConfig& cfg, std::ostream& out) {
  const std::size_t n_max = cfg.n_max ? cfg.n_max : 100;
  ModeBasis b;
  if (!cfg.input.empty() || !cfg.preset.empty()) {
    CircuitSpec spec = load_circuit(cfg);
    b = coupler_basis(spec, cfg.coupler.value_or(0), n_max, cfg.tol);
  } else {
    if (!(cfg.length > 0.0) || !(cfg.alpha >= 0.0) || !(cfg.c > 0.0) || !(cfg.l > 0.0))
      throw Error(ErrorCode::InvalidInput, "modes needs length, c, l > 0 and alpha >= 0");
    BoundaryParams bp{cfg.alpha, cfg.beta, ProblemKind::PointEnd, parse_end(cfg.far_end), 0.0};
    WavenumberSet ws;
    const int n = static_cast<int>(n_max);
    if (cfg.geometry == "point") {
      ws = solve_point_secular(bp, cfg.length, n, cfg.tol);
    } else if (cfg.geometry == "galvanic") {
      bp.kind = ProblemKind::GalvanicMid;
      bp.far_end = EndKind::Short;
      ws = solve_galvanic_secular(bp, cfg.length, n, cfg.tol);
    } else if (cfg.geometry == "insertion") {
      bp.kind = ProblemKind::PointInsertion;
      bp.far_end = EndKind::Short;
      bp.x0 = cfg.x0;
      ws = solve_point_insertion(bp, cfg.length, n, cfg.tol);
    } else {
      throw Error(ErrorCode::InvalidInput, "--geometry must be point, galvanic or insertion");
    }
    b = build_finite_modes(ws, bp, LineParams{cfg.c, cfg.l, cfg.length}, cfg.c * cfg.length);
  }

  const double pre1 = b.bp.alpha * b.line.c / b.N_alpha;
  const double pre2 = std::isinf(b.bp.beta) ? 0.0 : b.line.c / (b.bp.beta * b.N_alpha);
  double s1 = 0.0, s2 = 0.0;
  if (want_json(cfg)) {
    json rows = json::array();
    for (std::size_t n = 0; n < b.size(); ++n) {
      const double u = b.endpoint[n];
      s1 += pre1 * u * u;
      s2 += pre2 * u * u / (b.k[n] * b.k[n]);
      rows.push_back({{"n", n},
                      {"k_n", b.k[n]},
                      {"f_n_Hz", b.frequency(n)},
                      {"u_n0", u},
                      {"partial_sum_s1", s1},
                      {"partial_sum_s2", s2},
                      {"family", b.family[n] == ModeFamily::Coupled ? "coupled" : "uncoupled"}});
    }
    json doc = {{"command", "modes"},
                {"alpha_m", num(b.bp.alpha)},
                {"beta_m", num(b.bp.beta)},
                {"length_m", b.line.length},
                {"N_alpha_F", b.N_alpha},
                {"modes", rows}};
    if (!cfg.preset.empty()) doc["preset"] = preset_json(cfg.preset);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  Csv csv(out);
  csv.header({"n", "k_n", "f_n_Hz", "u_n0", "partial_sum_s1", "partial_sum_s2"});
  for (std::size_t n = 0; n < b.size(); ++n) {
    const double u = b.endpoint[n];
    s1 += pre1 * u * u;
    s2 += pre2 * u * u / (b.k[n] * b.k[n]);
    csv.cell(n).cell(b.k[n]).cell(b.frequency(n)).cell(u).cell(s1).cell(s2).end();
  }
  return kExitOk;
}

// Couplers sharing a line are solved together on a multi-point basis.
std::vector<QuantizedHamiltonian> quantize_exact(const CircuitSpec& spec,
                                                 const std::vector<std::size_t>& ids,
                                                 std::size_t n_max, double tol) {
  std::map<std::size_t, std::vector<std::size_t>> by_line;
  for (std::size_t id : ids) by_line[spec.couplers[id].line].push_back(id);
  std::vector<QuantizedHamiltonian> out;
  for (auto& [line_id, group] : by_line) {
    if (group.size() == 1) {
      ModeBasis b = coupler_basis(spec, group[0], n_max, tol);
      out.push_back(assemble(spec, group[0], b, n_max));
      continue;
    }
    const LineSegment& line = spec.lines[line_id];
    if (line.length_kind != LengthKind::Finite)
      throw Error(ErrorCode::InvalidInput, "quantize needs finite lines; use spectral instead");
    std::sort(group.begin(), group.end(), [&](std::size_t a, std::size_t b) {
      return spec.couplers[a].x < spec.couplers[b].x;
    });
    MultiPointProblem p;
    p.length = line.length;
    p.near_end = EndKind::Open;
    p.far_end = line.far_end;
    for (std::size_t id : group) {
      const CouplerSpec& cp = spec.couplers[id];
      Dressing d = optimal_alpha_beta(spec.blocks[cp.block], cp, line);
      p.attachments.push_back(Attachment{cp.x, d.alpha, d.beta});
    }
    WavenumberSet ws = solve_multi_point(p, static_cast<int>(n_max), tol);
    MultiModeBasis mb =
        build_multi_modes(p, ws, LineParams{line.c, line.l, line.length}, line.c * line.length);
    out.push_back(assemble(spec, group, mb, n_max));
  }
  return out;
}

int cmd_quantize(const RunConfig& cfg, std::ostream& out) {
  CircuitSpec spec = load_circuit(cfg);
  const std::size_t n_max = cfg.n_max ? cfg.n_max : 100;
  std::vector<std::size_t> ids = selected_couplers(spec, cfg);
  std::vector<QuantizedHamiltonian> Hs;
  if (cfg.approx) {
    for (std::size_t id : ids) Hs.push_back(assemble_bare(spec, id, n_max));
  } else {
    Hs = quantize_exact(spec, ids, n_max, cfg.tol);
  }
  const double to_hz = 1.0 / (2.0 * kPi);

  if (want_json(cfg)) {
    json channels = json::array();
    for (const auto& H : Hs) {
      for (std::size_t c = 0; c < H.channels.size(); ++c) {
        const ChannelData& ch = H.channels[c];
        json cv = json::array(), cap = json::array();
        for (Eigen::Index i = 0; i < ch.channel_vector.size(); ++i)
          cv.push_back(ch.channel_vector(i));
        const Eigen::MatrixXd& Ci = H.network_cap_inv[c];
        for (Eigen::Index i = 0; i < Ci.rows(); ++i) {
          json row = json::array();
          for (Eigen::Index j = 0; j < Ci.cols(); ++j) row.push_back(Ci(i, j));
          cap.push_back(row);
        }
        channels.push_back({{"channel_id", ch.coupler},
                            {"block", ch.block},
                            {"x_m", ch.x},
                            {"alpha_m", num(ch.dressing.alpha)},
                            {"beta_m", num(ch.dressing.beta)},
                            {"q_reduction", ch.q_reduction},
                            {"f_reduction", ch.f_reduction},
                            {"channel_vector", cv},
                            {"network_cap_inv_per_F", cap},
                            {"N_alpha_F", H.N_alpha},
                            {"f_n_Hz", H.frequencies},
                            {"g_capacitive_rad_s", ch.g_cap},
                            {"g_inductive_rad_s", ch.g_ind}});
      }
    }
    json doc = {{"command", "quantize"},
                {"route", cfg.approx ? "approx" : "exact"},
                {"channels", channels}};
    if (!cfg.preset.empty()) doc["preset"] = preset_json(cfg.preset);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  Csv csv(out);
  csv.header({"n", "f_n_Hz", "g_capacitive_Hz", "g_inductive_Hz", "channel_id"});
  for (const auto& H : Hs)
    for (const ChannelData& ch : H.channels)
      for (std::size_t n = 0; n < ch.g_cap.size(); ++n)
        csv.cell(n)
            .cell(H.frequencies[n])
            .cell(std::abs(ch.g_cap[n]) * to_hz)
            .cell(std::abs(ch.g_ind[n]) * to_hz)
            .cell(ch.coupler)
            .end();
  return kExitOk;
}

const char* form_name(FosterForm f) {
  switch (f) {
    case FosterForm::Foster1: return "foster1";
    case FosterForm::Foster2: return "foster2";
    case FosterForm::Multiport: return "multiport";
  }
  return "?";
}

int cmd_foster(const RunConfig& cfg, std::ostream& out) {
  std::vector<FosterExpansion> fs;
  if (!cfg.input.empty()) {
    fs = load_circuit(cfg).impedances;
    if (fs.empty()) throw Error(ErrorCode::InvalidInput, "the circuit declares no impedances");
  } else {
    double c = cfg.c, l = cfg.l, L = cfg.length;
    if (cfg.preset == "fig9") {
      Example3Params p = fig9();
      c = p.c;
      l = p.l;
      L = p.L;
    } else if (!cfg.preset.empty()) {
      preset_info(cfg.preset);
      throw Error(ErrorCode::InvalidInput, "foster accepts the fig9 preset only");
    }
    fs.push_back(synthesize_tl_two_port(c, l, L, cfg.n_max ? cfg.n_max : 10));
  }
  std::size_t ports = 1;
  for (const auto& f : fs) ports = std::max(ports, f.port_count);

  auto stage_f = [](double C, double Lk) {
    return std::isinf(Lk) ? 0.0 : 1.0 / (2.0 * kPi * std::sqrt(Lk * C));
  };
  if (want_json(cfg)) {
    json arr = json::array();
    for (const auto& f : fs) {
      json stages = json::array();
      for (std::size_t k = 0; k < f.stage_caps.size(); ++k)
        stages.push_back({{"C_F", f.stage_caps[k]},
                          {"L_H", num(f.stage_inds[k])},
                          {"f_Hz", stage_f(f.stage_caps[k], f.stage_inds[k])},
                          {"turns", f.turn_ratios.at(k)}});
      arr.push_back({{"form", form_name(f.form)},
                     {"ports", f.port_count},
                     {"virtual_first_stage", f.virtual_first_stage},
                     {"stages", stages}});
    }
    json doc = {{"command", "foster"}, {"impedances", arr}};
    if (!cfg.preset.empty()) doc["preset"] = preset_json(cfg.preset);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  out << "impedance,form,stage,C_F,L_H,f_Hz";
  for (std::size_t p = 0; p < ports; ++p) out << ",T_" << p + 1;
  out << '\n';
  Csv csv(out);
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const auto& f = fs[i];
    for (std::size_t k = 0; k < f.stage_caps.size(); ++k) {
      csv.cell(i).cell(form_name(f.form)).cell(k).cell(f.stage_caps[k]).cell(f.stage_inds[k]);
      csv.cell(stage_f(f.stage_caps[k], f.stage_inds[k]));
      for (std::size_t p = 0; p < ports; ++p)
        csv.cell(p < f.turn_ratios.at(k).size() ? f.turn_ratios[k][p] : 0.0);
      csv.end();
    }
  }
  return kExitOk;
}

int cmd_example3(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.input.empty())
    throw Error(ErrorCode::InvalidInput, "example3 takes --preset fig9, not a circuit file");
  if (!cfg.preset.empty() && cfg.preset != "fig9") {
    preset_info(cfg.preset);
    throw Error(ErrorCode::InvalidInput, "example3 accepts the fig9 preset only");
  }
  const std::size_t N = cfg.n_max ? cfg.n_max : 6000;
  Example3Spectrum sp = example3_spectrum(fig9(), N);
  const double to_hz = 1.0 / (2.0 * kPi);
  if (want_json(cfg)) {
    json modes = json::array();
    for (std::size_t a = 0; a < sp.N; ++a)
      modes.push_back({{"alpha", a + 1},
                       {"f_alpha_Hz", sp.frequency(a)},
                       {"g_alpha_port1_Hz", std::abs(sp.g(a, 0)) * to_hz},
                       {"g_alpha_port2_Hz", std::abs(sp.g(a, 1)) * to_hz}});
    json doc = {{"command", "example3"},
                {"preset", preset_json("fig9")},
                {"N", sp.N},
                {"fundamental_Hz", sp.frequency(0)},
                {"argmax_port1", {{"alpha", sp.argmax[0] + 1}, {"f_Hz", sp.frequency(sp.argmax[0])}}},
                {"argmax_port2", {{"alpha", sp.argmax[1] + 1}, {"f_Hz", sp.frequency(sp.argmax[1])}}},
                {"mu", {{sp.mu(0, 0), sp.mu(0, 1)}, {sp.mu(1, 0), sp.mu(1, 1)}}},
                {"nu", {{sp.nu(0, 0), sp.nu(0, 1)}, {sp.nu(1, 0), sp.nu(1, 1)}}},
                {"modes", modes}};
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  Csv csv(out);
  csv.header({"alpha", "f_alpha_Hz", "g_alpha_port1_Hz", "g_alpha_port2_Hz"});
  for (std::size_t a = 0; a < sp.N; ++a)
    csv.cell(a + 1)
        .cell(sp.frequency(a))
        .cell(std::abs(sp.g(a, 0)) * to_hz)
        .cell(std::abs(sp.g(a, 1)) * to_hz)
        .end();
  return kExitOk;
}

json fit_json(const std::vector<double>& w, const std::vector<double>& J, double lo, double hi) {
  try {
    ExponentFit f = fit_asymptotic_exponent(w, J, lo, hi);
    return {{"slope", f.slope},
            {"stderr", f.stderr_},
            {"samples", f.samples},
            {"decades", f.decades},
            {"window_Hz", {lo / (2.0 * kPi), hi / (2.0 * kPi)}}};
  } catch (const Error& e) {
    return {{"error", e.what()}, {"window_Hz", {lo / (2.0 * kPi), hi / (2.0 * kPi)}}};
  }
}

int cmd_spectral(const RunConfig& cfg, std::ostream& out) {
  CircuitSpec spec = load_circuit(cfg);
  const std::size_t id = cfg.coupler.value_or(0);
  if (id >= spec.couplers.size()) throw Error(ErrorCode::InvalidInput, "--coupler out of range");
  const CouplerSpec& cp = spec.couplers[id];
  const LineSegment& line = spec.lines.at(cp.line);
  const Dressing d = optimal_alpha_beta(spec.blocks.at(cp.block), cp, line);
  const LineParams lp{line.c, line.l, line.length};
  const double v = lp.phase_velocity();
  if (!(d.alpha > 0.0))
    throw Error(ErrorCode::InvalidInput, "spectral densities need a positive optimal alpha");
  const double wc = v / d.alpha;

  std::string kind = cfg.kind;
  if (kind.empty()) kind = std::isinf(cp.L_g) ? "spin-capacitive" : "inductive";

  std::vector<double> w, J;
  DensityKind dk;
  bool discrete = kind == "inductive" || kind == "spin-capacitive";
  if (discrete) {
    const std::size_t n_max = cfg.n_max ? cfg.n_max : 10000;
    ModeBasis b = coupler_basis(spec, id, n_max, cfg.tol);
    SpectralDensity sd;
    if (kind == "inductive") {
      if (std::isinf(cp.L_g))
        throw Error(ErrorCode::InvalidInput, "inductive density needs a finite L_g");
      sd = inductive_spectral(b, cp.L_g);
    } else {
      sd = spin_capacitive_spectral(b, cfg.amplitude);
    }
    dk = sd.kind;
    w = sd.omega;
    J = sd.weight;
  } else if (kind == "jc" || kind == "jl") {
    HalflineDensity h;
    if (cfg.preset == "device-a") {
      h = halfline_spectral(d.alpha, d.beta, lp, device_a().C_J, 2.0 * kElectronCharge,
                            kReducedFluxQuantum);
    } else {
      h = halfline_spectral(d.alpha, d.beta, v);
    }
    if (kind == "jl" && std::isinf(d.beta))
      throw Error(ErrorCode::InvalidInput, "J^L needs a finite beta (finite L_g)");
    dk = kind == "jc" ? DensityKind::ClosedFormJC : DensityKind::ClosedFormJL;
    const std::size_t n = std::max<std::size_t>(cfg.samples, 2);
    for (std::size_t i = 0; i < n; ++i) {
      double x = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n - 1);
      double om = wc * std::pow(10.0, x);
      w.push_back(om);
      J.push_back(kind == "jc" ? h.JC(om) : h.JL(om));
    }
  } else {
    throw Error(ErrorCode::InvalidInput,
                "--kind must be inductive, spin-capacitive, jc or jl");
  }

  if (want_json(cfg)) {
    const double span = discrete ? 10.0 : 100.0;
    json doc = {{"command", "spectral"},
                {"kind", to_string(dk)},
                {"coupler", id},
                {"alpha_m", num(d.alpha)},
                {"beta_m", num(d.beta)},
                {"cutoff_Hz", wc / (2.0 * kPi)},
                {"samples", w.size()}};
    if (!w.empty()) {
      doc["fits"] = {{"low", fit_json(w, J, w.front(), wc / span)},
                     {"high", fit_json(w, J, wc * span, w.back())}};
    }
    if (!cfg.preset.empty()) doc["preset"] = preset_json(cfg.preset);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  Csv csv(out);
  csv.header({"omega_Hz", "J_value", "kind"});
  for (std::size_t i = 0; i < w.size(); ++i)
    csv.cell(w[i] / (2.0 * kPi)).cell(J[i]).cell(to_string(dk)).end();
  return kExitOk;
}

struct InvertibilityRow {
  std::size_t coupler = 0;
  double alpha = kNaN, beta = kNaN;
  bool reference_alpha = false;
  double cap_condition = kNaN, ind_condition = kNaN;
  bool cap_zero = false, ind_zero = false;
  bool confirmed = false;
  double min_eig = kNaN;
  std::string note;
};

InvertibilityRow analyze_coupler(const CircuitSpec& spec, std::size_t id, double tol) {
  InvertibilityRow r;
  r.coupler = id;
  const CouplerSpec& cp = spec.couplers[id];
  const NetworkBlock& net = spec.blocks[cp.block];
  const LineSegment& line = spec.lines[cp.line];
  const ChannelConstants cc = channel_constants(cp);
  Dressing d;
  try {
    d = optimal_alpha_beta(net, cp, line);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositive) throw;
    r.note = e.what();
    r.cap_zero = true;
    Eigen::VectorXd y = net.A.ldlt().solve(net.a);
    r.cap_condition = 1.0 - cc.C_c * cc.C_c * net.a.dot(y) / cc.C_d;
    return r;
  }
  r.alpha = d.alpha;
  r.beta = d.beta;
  if (line.length_kind != LengthKind::Finite) {
    Eigen::VectorXd y = net.A.ldlt().solve(net.a);
    r.cap_condition = cc.C_c == 0.0 ? 1.0 : 1.0 - cc.C_c * cc.C_c * net.a.dot(y) / cc.C_d;
    r.cap_zero = std::abs(r.cap_condition) <= tol;
    r.note = "closed form only; no dense confirmation on an unbounded line";
    return r;
  }
  double alpha = d.alpha;
  if (!(alpha > 0.0)) {
    alpha = cc.C_d > 0.0 ? cc.C_d / line.c : 1e-3 * line.length;
    r.reference_alpha = true;
  }
  const double x = cp.mode == CouplerMode::Point ? cp.x : 0.0;
  LadderSpec ls{line.c, line.l, line.length, 200, line.far_end, {Attachment{x, alpha, d.beta}}};
  const double N_alpha = 1e-12;
  LadderModes lm = ladder_modes(ls, N_alpha);
  ChannelSystem sys;
  sys.nets.push_back({net.A, net.Binv, net.a, net.b});
  Channel ch;
  ch.u = lm.u.col(0);
  ch.C_c = cc.C_c;
  ch.C_d = cc.C_d;
  ch.L_c = cc.L_c;
  ch.L_d = cc.L_d;
  ch.alpha = alpha;
  ch.beta = d.beta;
  BoundaryParams bp{alpha, d.beta, x > 0.0 ? ProblemKind::PointInsertion : ProblemKind::PointEnd,
                    line.far_end, x};
  ch.rho = std::isinf(d.beta) ? 1.0 : second_sum_rule_limit(bp, line.length);
  sys.channels.push_back(ch);
  sys.N_alpha = N_alpha;
  sys.omega2 = lm.omega2;
  sys.c = line.c;
  sys.l = line.l;
  ZeroModeReport rep = detect_zero_modes(sys, tol);
  r.cap_condition = rep.cap_condition.at(0);
  r.ind_condition = rep.ind_condition.at(0);
  r.cap_zero = rep.cap_degenerate;
  r.ind_zero = rep.ind_degenerate;
  if (r.cap_zero || r.ind_zero) {
    r.confirmed = (!r.cap_zero || rep.cap_confirmed) && (!r.ind_zero || rep.ind_confirmed);
    r.min_eig = r.cap_zero ? rep.cap_min_eig : rep.ind_min_eig;
  }
  return r;
}

int cmd_check_invertibility(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  CircuitSpec spec;
  ValidationReport rep;
  try {
    spec = load_circuit(cfg);
  } catch (const FindingsError& e) {
    rep = e.report();
  }
  std::vector<InvertibilityRow> rows;
  if (rep.ok())
    for (std::size_t id : selected_couplers(spec, cfg)) rows.push_back(analyze_coupler(spec, id, cfg.tol));
  bool singular = std::any_of(rows.begin(), rows.end(),
                              [](const InvertibilityRow& r) { return r.cap_zero || r.ind_zero; });

  if (want_json(cfg)) {
    json arr = json::array();
    for (const auto& r : rows)
      arr.push_back({{"coupler", r.coupler},
                     {"alpha_m", num(r.alpha)},
                     {"beta_m", num(r.beta)},
                     {"reference_alpha", r.reference_alpha},
                     {"cap_condition", num(r.cap_condition)},
                     {"ind_condition", num(r.ind_condition)},
                     {"cap_zero_mode", r.cap_zero},
                     {"ind_zero_mode", r.ind_zero},
                     {"confirmed", r.confirmed},
                     {"min_eig", num(r.min_eig)},
                     {"note", r.note}});
    out << json{{"command", "check-invertibility"},
                {"findings", findings_json(rep)},
                {"couplers", arr}}
               .dump(2)
        << '\n';
  } else {
    for (const auto& f : rep.findings)
      err << "finding " << f.rule << " at " << f.where << ": " << f.detail << '\n';
    Csv csv(out);
    csv.header({"coupler", "alpha_m", "beta_m", "reference_alpha", "cap_condition",
                "ind_condition", "cap_zero_mode", "ind_zero_mode", "confirmed", "min_eig"});
    for (const auto& r : rows)
      csv.cell(r.coupler)
          .cell(r.alpha)
          .cell(r.beta)
          .cell(int(r.reference_alpha))
          .cell(r.cap_condition)
          .cell(r.ind_condition)
          .cell(int(r.cap_zero))
          .cell(int(r.ind_zero))
          .cell(int(r.confirmed))
          .cell(r.min_eig)
          .end();
  }
  return rep.ok() && !singular ? kExitOk : kExitValidation;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  std::vector<CheckResult> res;
  bool as_json = want_json(cfg);
  bool as_csv = cfg.emit == "csv" && !cfg.output.empty();
  if (!as_json && !as_csv) {
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %-6s %9s  %s\n", "suite", "status", "seconds", "detail");
    out << line;
  }
  for (const auto& s : validation_suites(cfg.quick)) {
    CheckResult r = s.run();
    if (!as_json && !as_csv) {
      char line[160];
      std::snprintf(line, sizeof line, "%-30s %-6s %9.3f  ", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.seconds);
      out << line << r.detail << '\n' << std::flush;
    }
    res.push_back(std::move(r));
  }
  std::size_t passed = std::count_if(res.begin(), res.end(), [](auto& r) { return r.pass; });
  if (as_json) {
    json arr = json::array();
    for (const auto& r : res)
      arr.push_back({{"suite", r.name}, {"pass", r.pass}, {"seconds", r.seconds}, {"detail", r.detail}});
    out << json{{"command", "validate"}, {"quick", cfg.quick}, {"suites", arr}}.dump(2) << '\n';
  } else if (as_csv) {
    Csv csv(out);
    csv.header({"suite", "status", "seconds", "detail"});
    for (const auto& r : res)
      csv.cell(r.name).cell(r.pass ? "PASS" : "FAIL").cell(r.seconds).cell(r.detail).end();
  } else {
    out << passed << "/" << res.size() << " suites passed\n";
  }
  return passed == res.size() ? kExitOk : kExitValidation;
}

void error_json(std::ostream& err, const std::string& code, const std::string& msg,
                const ValidationReport* rep = nullptr) {
  json e = {{"code", code}, {"message", msg}};
  if (rep) e["findings"] = findings_json(*rep);
  err << json{{"error", e}}.dump() << '\n';
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

int resolve_thread_budget(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("CQED_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 4096)
      throw Error(ErrorCode::InvalidInput,
                  std::string("CQED_THREADS must be a positive integer, got \"") + env + "\"");
    return static_cast<int>(v);
  }
  return 1;
}

ModeBasis coupler_basis(const CircuitSpec& spec, std::size_t id, std::size_t n_max, double tol) {
  const CouplerSpec& cp = spec.couplers.at(id);
  const LineSegment& line = spec.lines.at(cp.line);
  if (line.length_kind != LengthKind::Finite)
    throw Error(ErrorCode::InvalidInput,
                "a discrete mode basis needs a finite line; use the closed-form densities");
  const Dressing d = optimal_alpha_beta(spec.blocks.at(cp.block), cp, line);
  BoundaryParams bp{d.alpha, d.beta, ProblemKind::PointEnd, line.far_end, 0.0};
  const int n = static_cast<int>(n_max);
  WavenumberSet ws;
  if (cp.mode == CouplerMode::Galvanic) {
    bp.kind = ProblemKind::GalvanicMid;
    bp.far_end = EndKind::Short;
    ws = solve_galvanic_secular(bp, line.length, n, tol);
  } else if (cp.x == 0.0) {
    ws = solve_point_secular(bp, line.length, n, tol);
  } else if (cp.x < line.length && line.far_end == EndKind::Short) {
    bp.kind = ProblemKind::PointInsertion;
    bp.x0 = cp.x;
    ws = solve_point_insertion(bp, line.length, n, tol);
  } else {
    throw Error(ErrorCode::InvalidInput,
                "interior point couplers need a line shorted at its far end; end couplers sit at x = 0");
  }
  return build_finite_modes(ws, bp, LineParams{line.c, line.l, line.length},
                            line.c * line.length);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const int threads = resolve_thread_budget(cfg.threads);
  if (openblas_set_num_threads) openblas_set_num_threads(threads);

  std::ofstream file;
  std::ostream* os = &out;
  if (!cfg.output.empty()) {
    file.open(cfg.output, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidInput, "cannot open output \"" + cfg.output + "\"");
    os = &file;
  }
  switch (cfg.command) {
    case Command::Modes: return cmd_modes(cfg, *os);
    case Command::Quantize: return cmd_quantize(cfg, *os);
    case Command::Foster: return cmd_foster(cfg, *os);
    case Command::Example3: return cmd_example3(cfg, *os);
    case Command::Spectral: return cmd_spectral(cfg, *os);
    case Command::CheckInvertibility: return cmd_check_invertibility(cfg, *os, err);
    case Command::Validate: return cmd_validate(cfg, *os);
  }
  return kExitInternal;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string beta = "inf";
  std::size_t coupler = 0;

  CLI::App app{"Quantize superconducting networks coupled to transmission lines and impedances",
               "cqed"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto common = [&](CLI::App* s, bool circuit) {
    if (circuit) {
      s->add_option("--input", cfg.input, "Circuit JSON file")->check(CLI::ExistingFile);
      s->add_option("--preset", cfg.preset, "Built-in parameter set (device-a, fig9)");
      s->add_option("--coupler", coupler, "Coupler index (default: all, or the first)");
    }
    s->add_option("--output", cfg.output, "Write results here instead of stdout");
    s->add_option("--n-max", cfg.n_max, "Number of modes or stages")->check(CLI::PositiveNumber);
    s->add_option("--tol", cfg.tol, "Root and degeneracy tolerance")->check(CLI::PositiveNumber);
    s->add_option("--emit", cfg.emit, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--threads", cfg.threads, "Thread budget (falls back to CQED_THREADS)")
        ->check(CLI::PositiveNumber);
  };

  auto* modes = app.add_subcommand("modes", "Wavenumbers, frequencies and endpoint values");
  common(modes, true);
  modes->add_option("--alpha", cfg.alpha, "Dressing length alpha in m");
  modes->add_option("--beta", beta, "Dressing length beta in m, or inf");
  modes->add_option("--length", cfg.length, "Line length in m (half-length for galvanic)");
  modes->add_option("--c", cfg.c, "Capacitance per length in F/m");
  modes->add_option("--l", cfg.l, "Inductance per length in H/m");
  modes->add_option("--far-end", cfg.far_end, "short or open");
  modes->add_option("--geometry", cfg.geometry, "point, galvanic or insertion");
  modes->add_option("--x0", cfg.x0, "Insertion point in m");

  auto* quantize = app.add_subcommand("quantize", "Mode frequencies and coupling constants");
  common(quantize, true);
  auto* exact = quantize->add_flag("--exact", "Exact dressed basis (default)");
  quantize->add_flag("--approx", cfg.approx, "Bare-line approximation")->excludes(exact);

  auto* foster = app.add_subcommand("foster", "Foster stage tables");
  common(foster, true);
  foster->add_option("--c", cfg.c, "Capacitance per length in F/m");
  foster->add_option("--l", cfg.l, "Inductance per length in H/m");
  foster->add_option("--length", cfg.length, "Line length in m");

  auto* ex3 = app.add_subcommand("example3", "Two charge qubits at the ports of a line");
  common(ex3, true);

  auto* spectral = app.add_subcommand("spectral", "Spectral densities and fitted exponents");
  common(spectral, true);
  spectral->add_option("--kind", cfg.kind, "inductive, spin-capacitive, jc or jl");
  spectral->add_option("--amplitude", cfg.amplitude, "Prefactor A of the spin-capacitive density");
  spectral->add_option("--samples", cfg.samples, "Samples of the closed forms")
      ->check(CLI::PositiveNumber);

  auto* inv = app.add_subcommand("check-invertibility", "Validation and zero-mode detection");
  common(inv, true);

  auto* val = app.add_subcommand("validate", "Run the validation suites");
  common(val, false);
  val->add_flag("--quick", cfg.quick, "Reduced sizes, under a minute");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      CLI::App* shown = &app;
      for (CLI::App* s : app.get_subcommands()) shown = s;
      out << shown->help();
      return kExitOk;
    }
    error_json(err, "InvalidInput", e.what());
    return kExitInput;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "modes") cfg.command = Command::Modes;
    else if (name == "quantize") cfg.command = Command::Quantize;
    else if (name == "foster") cfg.command = Command::Foster;
    else if (name == "example3") cfg.command = Command::Example3;
    else if (name == "spectral") cfg.command = Command::Spectral;
    else if (name == "check-invertibility") cfg.command = Command::CheckInvertibility;
    else cfg.command = Command::Validate;
    if (sub->get_option_no_throw("--coupler") && sub->count("--coupler")) cfg.coupler = coupler;
    if (cfg.command == Command::Modes) cfg.beta = parse_beta(beta);
    return run(cfg, out, err);
  } catch (const FindingsError& e) {
    error_json(err, to_string(e.code()), e.what(), &e.report());
    return kExitInput;
  } catch (const Error& e) {
    error_json(err, to_string(e.code()), e.what());
    return kExitInput;
  } catch (const std::exception& e) {
    error_json(err, "internal", e.what());
    return kExitInternal;
  }
}

}  // namespace cqed
