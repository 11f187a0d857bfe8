#include "cqed/circuit_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "cqed/errors.hpp"

namespace cqed {

using nlohmann::json;

namespace {

struct Prefix {
  std::string_view sym;
  double scale;
};

constexpr Prefix kPrefixes[] = {
    {"", 1.0},     {"a", 1e-18}, {"f", 1e-15}, {"p", 1e-12},
    {"n", 1e-9},   {"u", 1e-6},  {"\xc2\xb5", 1e-6}, {"\xce\xbc", 1e-6},
    {"m", 1e-3},   {"c", 1e-2},  {"k", 1e3},   {"M", 1e6},
    {"G", 1e9},    {"T", 1e12},
};

const char* dim_name(Dimension d) {
  switch (d) {
    case Dimension::Capacitance: return "capacitance (F)";
    case Dimension::Inductance: return "inductance (H)";
    case Dimension::Length: return "length (m)";
    case Dimension::CapPerLength: return "capacitance per length (F/m)";
    case Dimension::IndPerLength: return "inductance per length (H/m)";
    case Dimension::InvInductance: return "inverse inductance (1/H)";
    case Dimension::Frequency: return "frequency (Hz)";
    case Dimension::Energy: return "energy (J)";
    case Dimension::Flux: return "flux (Wb)";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "?";
}

bool match_prefixed(std::string_view unit, std::string_view base, double& scale) {
  if (unit.size() < base.size() || unit.substr(unit.size() - base.size()) != base)
    return false;
  std::string_view pre = unit.substr(0, unit.size() - base.size());
  for (const auto& p : kPrefixes)
    if (p.sym == pre) {
      scale = p.scale;
      return true;
    }
  return false;
}

[[noreturn]] void fail(ErrorCode code, const std::string& where, const std::string& msg) {
  throw Error(code, where.empty() ? msg : where + ": " + msg);
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::Syntax, where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      fail(ErrorCode::UnknownElement, where, "unknown key \"" + it.key() + "\"");
  }
}

double number_or_inf(const json& v, const std::string& where, bool allow_inf) {
  if (v.is_number()) return v.get<double>();
  if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return kInf;
  fail(ErrorCode::Syntax, where, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

// {"value": x, "unit": "fF"}; a bare "inf" is accepted where allow_inf is set.
double quantity(const json& j, Dimension dim, const std::string& where,
                bool allow_inf = false) {
  if (allow_inf && j.is_string() && j.get<std::string>() == "inf") return kInf;
  if (dim == Dimension::Dimensionless && j.is_number()) return j.get<double>();
  check_keys(j, {"value", "unit"}, where);
  if (!j.contains("value") || !j.contains("unit"))
    fail(ErrorCode::Syntax, where, "quantity needs \"value\" and \"unit\"");
  if (!j["unit"].is_string()) fail(ErrorCode::Syntax, where, "unit must be a string");
  double v = number_or_inf(j["value"], where, allow_inf);
  if (std::isinf(v)) return v;
  return v * unit_scale(j["unit"].get<std::string>(), dim);
}

std::vector<double> quantity_list(const json& j, Dimension dim,
                                  const std::string& where, bool allow_inf = false) {
  check_keys(j, {"value", "unit"}, where);
  if (!j.contains("value") || !j["value"].is_array())
    fail(ErrorCode::Syntax, where, "expected \"value\" to be an array");
  double s = unit_scale(j.value("unit", ""), dim);
  std::vector<double> out;
  for (const auto& e : j["value"]) {
    double v = number_or_inf(e, where, allow_inf);
    out.push_back(std::isinf(v) ? v : v * s);
  }
  return out;
}

Eigen::MatrixXd matrix(const json& j, Dimension dim, const std::string& where) {
  check_keys(j, {"value", "unit"}, where);
  if (!j.contains("value") || !j["value"].is_array())
    fail(ErrorCode::Syntax, where, "matrix needs a nested \"value\" array");
  double s = unit_scale(j.value("unit", ""), dim);
  const json& rows = j["value"];
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n)
      fail(ErrorCode::Syntax, where, "matrix must be square");
    for (Eigen::Index c = 0; c < n; ++c)
      M(r, c) = number_or_inf(row[static_cast<std::size_t>(c)], where, false) * s;
  }
  return M;
}

Eigen::VectorXd vector(const json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::Syntax, where, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = number_or_inf(j[i], where, false);
  return v;
}

std::size_t resolve(const json& ref, const std::vector<std::string>& names,
                    const std::string& what, const std::string& where) {
  if (ref.is_number_integer()) {
    auto i = ref.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= names.size()) {
      std::ostringstream os;
      os << what << " index " << i << " does not exist (" << names.size() << " defined)";
      fail(ErrorCode::DanglingReference, where, os.str());
    }
    return static_cast<std::size_t>(i);
  }
  if (ref.is_string()) {
    auto it = std::find(names.begin(), names.end(), ref.get<std::string>());
    if (it == names.end())
      fail(ErrorCode::DanglingReference, where,
           what + " \"" + ref.get<std::string>() + "\" does not exist");
    return static_cast<std::size_t>(it - names.begin());
  }
  fail(ErrorCode::Syntax, where, what + " reference must be an index or a name");
}

NetworkBlock parse_block(const json& j, const std::string& where) {
  check_keys(j, {"name", "A", "Binv", "a", "b", "potential", "phi_ext"}, where);
  NetworkBlock b;
  b.name = j.value("name", "");
  if (!j.contains("A")) fail(ErrorCode::Syntax, where, "block needs \"A\"");
  b.A = matrix(j["A"], Dimension::Capacitance, where + ".A");
  const auto n = b.A.rows();
  b.Binv = j.contains("Binv") ? matrix(j["Binv"], Dimension::InvInductance, where + ".Binv")
                              : Eigen::MatrixXd::Zero(n, n);
  if (j.contains("a"))
    b.a = vector(j["a"], where + ".a");
  else if (n == 1)
    b.a = Eigen::VectorXd::Ones(1);
  else
    fail(ErrorCode::Syntax, where, "\"a\" is required for blocks of order > 1");
  b.b = j.contains("b") ? vector(j["b"], where + ".b") : Eigen::VectorXd::Zero(n);
  if (j.contains("potential")) {
    const json& p = j["potential"];
    check_keys(p, {"kind", "params"}, where + ".potential");
    b.potential = p.value("kind", "none");
    if (p.contains("params")) {
      const json& ps = p["params"];
      if (!ps.is_object()) fail(ErrorCode::Syntax, where + ".potential.params", "expected an object");
      for (auto it = ps.begin(); it != ps.end(); ++it)
        b.potential_params[it.key()] =
            quantity(it.value(), Dimension::Energy, where + ".potential." + it.key());
    }
  }
  if (j.contains("phi_ext")) b.phi_ext = quantity(j["phi_ext"], Dimension::Flux, where + ".phi_ext");
  return b;
}

LineSegment parse_line(const json& j, const std::string& where) {
  check_keys(j, {"name", "c", "l", "length", "far_end"}, where);
  LineSegment s;
  s.name = j.value("name", "");
  if (!j.contains("c") || !j.contains("l") || !j.contains("length"))
    fail(ErrorCode::Syntax, where, "line needs \"c\", \"l\" and \"length\"");
  s.c = quantity(j["c"], Dimension::CapPerLength, where + ".c");
  s.l = quantity(j["l"], Dimension::IndPerLength, where + ".l");
  const json& len = j["length"];
  if (len.is_string()) {
    std::string t = len.get<std::string>();
    if (t == "inf") s.length_kind = LengthKind::Infinite;
    else if (t == "semi-inf") s.length_kind = LengthKind::SemiInfinite;
    else fail(ErrorCode::Syntax, where + ".length", "expected a quantity, \"inf\" or \"semi-inf\"");
    s.length = kInf;
  } else {
    s.length = quantity(len, Dimension::Length, where + ".length");
  }
  std::string fe = j.value("far_end", "short");
  if (fe == "short") s.far_end = EndKind::Short;
  else if (fe == "open") s.far_end = EndKind::Open;
  else fail(ErrorCode::UnknownElement, where + ".far_end", "unknown end kind \"" + fe + "\"");
  return s;
}

CouplerSpec parse_coupler(const json& j, const std::vector<std::string>& blocks,
                          const std::vector<std::string>& lines, const std::string& where) {
  check_keys(j, {"block", "line", "mode", "C_g", "L_g", "x", "C_A", "L_B"}, where);
  CouplerSpec c;
  if (!j.contains("block") || !j.contains("line"))
    fail(ErrorCode::Syntax, where, "coupler needs \"block\" and \"line\"");
  c.block = resolve(j["block"], blocks, "block", where);
  c.line = resolve(j["line"], lines, "line", where);
  std::string mode = j.value("mode", "point");
  if (mode == "point") c.mode = CouplerMode::Point;
  else if (mode == "galvanic") c.mode = CouplerMode::Galvanic;
  else fail(ErrorCode::UnknownElement, where + ".mode", "unknown coupler mode \"" + mode + "\"");
  if (j.contains("C_g")) c.C_g = quantity(j["C_g"], Dimension::Capacitance, where + ".C_g");
  if (j.contains("L_g")) c.L_g = quantity(j["L_g"], Dimension::Inductance, where + ".L_g", true);
  if (j.contains("x")) c.x = quantity(j["x"], Dimension::Length, where + ".x");
  if (c.mode == CouplerMode::Point && (j.contains("C_A") || j.contains("L_B")))
    fail(ErrorCode::UnknownElement, where, "C_A and L_B belong to galvanic couplers");
  if (j.contains("C_A")) c.C_A = quantity(j["C_A"], Dimension::Capacitance, where + ".C_A");
  if (j.contains("L_B")) c.L_B = quantity(j["L_B"], Dimension::Inductance, where + ".L_B", true);
  return c;
}

FosterExpansion parse_impedance(const json& j, const std::string& where) {
  check_keys(j, {"form", "stage_caps", "stage_inds", "turn_ratios", "ports", "virtual_first_stage"},
             where);
  FosterExpansion f;
  std::string form = j.value("form", "foster1");
  if (form == "foster1") f.form = FosterForm::Foster1;
  else if (form == "foster2") f.form = FosterForm::Foster2;
  else if (form == "multiport") f.form = FosterForm::Multiport;
  else fail(ErrorCode::UnknownElement, where + ".form", "unknown Foster form \"" + form + "\"");
  if (!j.contains("stage_caps") || !j.contains("stage_inds"))
    fail(ErrorCode::Syntax, where, "impedance needs \"stage_caps\" and \"stage_inds\"");
  f.stage_caps = quantity_list(j["stage_caps"], Dimension::Capacitance, where + ".stage_caps");
  f.stage_inds = quantity_list(j["stage_inds"], Dimension::Inductance, where + ".stage_inds", true);
  f.port_count = j.value("ports", std::size_t{1});
  f.virtual_first_stage = j.value("virtual_first_stage", false);
  if (j.contains("turn_ratios")) {
    if (!j["turn_ratios"].is_array()) fail(ErrorCode::Syntax, where + ".turn_ratios", "expected rows");
    for (const auto& row : j["turn_ratios"]) {
      Eigen::VectorXd r = vector(row, where + ".turn_ratios");
      f.turn_ratios.emplace_back(r.data(), r.data() + r.size());
    }
  } else {
    f.turn_ratios.assign(f.stage_caps.size(), std::vector<double>(f.port_count, 1.0));
  }
  return f;
}

json quantity_json(double v, const char* unit) {
  if (std::isinf(v)) return "inf";
  return json{{"value", v}, {"unit", unit}};
}

json matrix_json(const Eigen::MatrixXd& M, const char* unit) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return json{{"value", rows}, {"unit", unit}};
}

json list_json(const std::vector<double>& v, const char* unit) {
  json arr = json::array();
  for (double x : v) arr.push_back(std::isinf(x) ? json("inf") : json(x));
  return json{{"value", arr}, {"unit", unit}};
}

}  // namespace

double unit_scale(std::string_view unit, Dimension dim) {
  double s = 1.0;
  bool ok = false;
  switch (dim) {
    case Dimension::Capacitance: ok = match_prefixed(unit, "F", s); break;
    case Dimension::Inductance: ok = match_prefixed(unit, "H", s); break;
    case Dimension::Length: ok = match_prefixed(unit, "m", s); break;
    case Dimension::CapPerLength: ok = match_prefixed(unit, "F/m", s); break;
    case Dimension::IndPerLength: ok = match_prefixed(unit, "H/m", s); break;
    case Dimension::Frequency: ok = match_prefixed(unit, "Hz", s); break;
    case Dimension::Energy: ok = match_prefixed(unit, "J", s); break;
    case Dimension::Flux: ok = match_prefixed(unit, "Wb", s); break;
    case Dimension::InvInductance:
      if (unit.starts_with("1/")) {
        ok = match_prefixed(unit.substr(2), "H", s);
        s = 1.0 / s;
      }
      break;
    case Dimension::Dimensionless:
      ok = unit.empty() || unit == "1";
      break;
  }
  if (!ok)
    throw Error(ErrorCode::UnitMismatch, "unit \"" + std::string(unit) +
                                             "\" is not a " + dim_name(dim));
  return s;
}

bool ValidationReport::has(std::string_view rule) const {
  return std::any_of(findings.begin(), findings.end(),
                     [&](const Finding& f) { return f.rule == rule; });
}

CircuitSpec parse_circuit(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte offset is 1-based and points just past the offending character
    std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << "syntax error at line " << line << ", column " << col << " (byte " << e.byte
       << "): " << e.what();
    throw Error(ErrorCode::Syntax, os.str());
  }

  check_keys(doc, {"blocks", "lines", "couplers", "impedances", "metadata"}, "document");
  CircuitSpec spec;
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_string()) fail(ErrorCode::Syntax, "metadata", "expected a string");
    spec.metadata = doc["metadata"].get<std::string>();
  }
  auto list = [&](const char* key) -> const json& {
    static const json empty = json::array();
    if (!doc.contains(key)) return empty;
    if (!doc[key].is_array()) fail(ErrorCode::Syntax, key, "expected an array");
    return doc[key];
  };

  std::vector<std::string> block_names, line_names;
  std::size_t i = 0;
  for (const auto& b : list("blocks")) {
    spec.blocks.push_back(parse_block(b, "blocks[" + std::to_string(i++) + "]"));
    block_names.push_back(spec.blocks.back().name);
  }
  i = 0;
  for (const auto& l : list("lines")) {
    spec.lines.push_back(parse_line(l, "lines[" + std::to_string(i++) + "]"));
    line_names.push_back(spec.lines.back().name);
  }
  i = 0;
  for (const auto& c : list("couplers"))
    spec.couplers.push_back(
        parse_coupler(c, block_names, line_names, "couplers[" + std::to_string(i++) + "]"));
  i = 0;
  for (const auto& z : list("impedances"))
    spec.impedances.push_back(parse_impedance(z, "impedances[" + std::to_string(i++) + "]"));
  return spec;
}

std::string serialize_circuit(const CircuitSpec& spec) {
  json doc;
  doc["metadata"] = spec.metadata;
  doc["blocks"] = json::array();
  for (const auto& b : spec.blocks) {
    json j;
    j["name"] = b.name;
    j["A"] = matrix_json(b.A, "F");
    j["Binv"] = matrix_json(b.Binv, "1/H");
    j["a"] = std::vector<double>(b.a.data(), b.a.data() + b.a.size());
    j["b"] = std::vector<double>(b.b.data(), b.b.data() + b.b.size());
    json params = json::object();
    for (const auto& [k, v] : b.potential_params) params[k] = quantity_json(v, "J");
    j["potential"] = json{{"kind", b.potential}, {"params", params}};
    j["phi_ext"] = quantity_json(b.phi_ext, "Wb");
    doc["blocks"].push_back(j);
  }
  doc["lines"] = json::array();
  for (const auto& l : spec.lines) {
    json j;
    j["name"] = l.name;
    j["c"] = quantity_json(l.c, "F/m");
    j["l"] = quantity_json(l.l, "H/m");
    switch (l.length_kind) {
      case LengthKind::Finite: j["length"] = quantity_json(l.length, "m"); break;
      case LengthKind::SemiInfinite: j["length"] = "semi-inf"; break;
      case LengthKind::Infinite: j["length"] = "inf"; break;
    }
    j["far_end"] = l.far_end == EndKind::Short ? "short" : "open";
    doc["lines"].push_back(j);
  }
  doc["couplers"] = json::array();
  for (const auto& c : spec.couplers) {
    json j;
    j["block"] = c.block;
    j["line"] = c.line;
    j["mode"] = c.mode == CouplerMode::Point ? "point" : "galvanic";
    j["C_g"] = quantity_json(c.C_g, "F");
    j["L_g"] = quantity_json(c.L_g, "H");
    j["x"] = quantity_json(c.x, "m");
    if (c.mode == CouplerMode::Galvanic) {
      j["C_A"] = quantity_json(c.C_A, "F");
      j["L_B"] = quantity_json(c.L_B, "H");
    }
    doc["couplers"].push_back(j);
  }
  doc["impedances"] = json::array();
  for (const auto& f : spec.impedances) {
    json j;
    j["form"] = f.form == FosterForm::Foster1   ? "foster1"
                : f.form == FosterForm::Foster2 ? "foster2"
                                                : "multiport";
    j["stage_caps"] = list_json(f.stage_caps, "F");
    j["stage_inds"] = list_json(f.stage_inds, "H");
    j["turn_ratios"] = f.turn_ratios;
    j["ports"] = f.port_count;
    j["virtual_first_stage"] = f.virtual_first_stage;
    doc["impedances"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

ValidationReport validate_circuit(const CircuitSpec& spec) {
  ValidationReport rep;
  auto add = [&](std::string rule, std::string where, std::string detail) {
    rep.findings.push_back({std::move(rule), std::move(where), std::move(detail)});
  };

  for (std::size_t i = 0; i < spec.blocks.size(); ++i) {
    const auto& b = spec.blocks[i];
    std::string w = "blocks[" + std::to_string(i) + "]";
    const auto n = b.A.rows();
    if (n == 0 || b.A.cols() != n) {
      add("A.shape", w, "A must be square and non-empty");
      continue;
    }
    double scale = b.A.cwiseAbs().maxCoeff();
    if ((b.A - b.A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      add("A.symmetric", w, "A is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b.A + b.A.transpose()),
                                                      Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues()(0);
    if (!(lmin > 0.0)) {
      std::ostringstream os;
      os << "A is not positive-definite, smallest eigenvalue " << lmin
         << " F; the network is not connected to ground through capacitors";
      add("A.positive", w, os.str());
    }
    if (b.Binv.rows() != n || b.Binv.cols() != n) {
      add("Binv.shape", w, "Binv must have the order of A");
    } else {
      double bs = b.Binv.cwiseAbs().maxCoeff();
      if ((b.Binv - b.Binv.transpose()).cwiseAbs().maxCoeff() > 1e-12 * bs)
        add("Binv.symmetric", w, "Binv is not symmetric");
      if (bs > 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(
            0.5 * (b.Binv + b.Binv.transpose()), Eigen::EigenvaluesOnly);
        if (eb.eigenvalues()(0) < -1e-12 * bs)
          add("Binv.semidefinite", w, "Binv has a negative eigenvalue");
      }
    }
    if (b.a.size() != n) add("a.size", w, "a must have the order of A");
    if (b.b.size() != n) add("b.size", w, "b must have the order of A");
  }

  for (std::size_t i = 0; i < spec.lines.size(); ++i) {
    const auto& l = spec.lines[i];
    std::string w = "lines[" + std::to_string(i) + "]";
    if (!(l.c > 0.0) || !std::isfinite(l.c)) add("line.c", w, "c must be positive");
    if (!(l.l > 0.0) || !std::isfinite(l.l)) add("line.l", w, "l must be positive");
    if (l.length_kind == LengthKind::Finite && (!(l.length > 0.0) || !std::isfinite(l.length)))
      add("line.length", w, "finite length must be positive");
  }

  for (std::size_t i = 0; i < spec.couplers.size(); ++i) {
    const auto& c = spec.couplers[i];
    std::string w = "couplers[" + std::to_string(i) + "]";
    if (c.block >= spec.blocks.size()) add("coupler.block", w, "dangling block reference");
    if (c.line >= spec.lines.size()) {
      add("coupler.line", w, "dangling line reference");
      continue;
    }
    if (!(c.C_g >= 0.0)) add("coupler.C_g", w, "C_g must be non-negative");
    if (!(c.L_g > 0.0)) add("coupler.L_g", w, "L_g must be positive or infinite");
    if (c.mode == CouplerMode::Galvanic) {
      if (!(c.C_A >= 0.0)) add("coupler.C_A", w, "C_A must be non-negative");
      if (!(c.L_B > 0.0)) add("coupler.L_B", w, "L_B must be positive or infinite");
    }
    const auto& line = spec.lines[c.line];
    if (line.length_kind == LengthKind::Finite && (c.x < 0.0 || c.x > line.length))
      add("coupler.position", w, "attach position outside the line");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = spec.couplers[j];
      if (o.line == c.line && o.x == c.x)
        add("coupler.overlap", w,
            "same attach position as couplers[" + std::to_string(j) + "]");
    }
  }

  for (std::size_t i = 0; i < spec.impedances.size(); ++i) {
    const auto& f = spec.impedances[i];
    std::string w = "impedances[" + std::to_string(i) + "]";
    if (f.stage_caps.size() != f.stage_inds.size())
      add("foster.stages", w, "stage_caps and stage_inds differ in length");
    for (double C : f.stage_caps)
      if (!(C > 0.0)) add("foster.C", w, "stage capacitances must be positive");
    for (double L : f.stage_inds)
      if (!(L > 0.0)) add("foster.L", w, "stage inductances must be positive or infinite");
    if (f.turn_ratios.size() != f.stage_caps.size())
      add("foster.turns", w, "one turn-ratio row per stage");
    for (const auto& r : f.turn_ratios)
      if (r.size() != f.port_count) add("foster.turns", w, "turn-ratio row length != ports");
  }
  return rep;
}

}  // namespace cqed
