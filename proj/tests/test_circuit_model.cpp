#include <doctest.h>

#include <string>

#include "cqed/circuit_model.hpp"
#include "cqed/errors.hpp"
#include "cqed/presets.hpp"

using namespace cqed;

namespace {

const char* kTwoNode = R"({
  "metadata": "two-node test",
  "blocks": [{
    "name": "q",
    "A": {"value": [[50, -5], [-5, 30]], "unit": "fF"},
    "Binv": {"value": [[0, 0], [0, 0]], "unit": "1/nH"},
    "a": [1, 0], "b": [0, 0],
    "potential": {"kind": "cosine", "params": {"E_J": {"value": 1e-23, "unit": "J"}}}
  }],
  "lines": [{"name": "tl", "c": {"value": 249, "unit": "pF/m"},
             "l": {"value": 623, "unit": "nH/m"},
             "length": {"value": 4.7, "unit": "mm"}, "far_end": "short"}],
  "couplers": [{"block": "q", "line": "tl", "C_g": {"value": 40.3, "unit": "fF"},
                "L_g": "inf", "x": {"value": 0, "unit": "m"}}],
  "impedances": [{"form": "foster1",
                  "stage_caps": {"value": [1, 2], "unit": "pF"},
                  "stage_inds": {"value": ["inf", 3], "unit": "nH"}}]
})";

ErrorCode parse_code(const std::string& text) {
  try {
    parse_circuit(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidInput;
}

}  // namespace

TEST_CASE("units are converted to SI on parse") {
  CircuitSpec s = parse_circuit(kTwoNode);
  REQUIRE(s.blocks.size() == 1);
  CHECK(s.blocks[0].A(0, 0) == doctest::Approx(50e-15).epsilon(1e-14));
  CHECK(s.blocks[0].A(0, 1) == doctest::Approx(-5e-15).epsilon(1e-14));
  CHECK(s.lines[0].c == doctest::Approx(249e-12).epsilon(1e-14));
  CHECK(s.lines[0].l == doctest::Approx(623e-9).epsilon(1e-14));
  CHECK(s.lines[0].length == doctest::Approx(4.7e-3).epsilon(1e-14));
  CHECK(s.couplers[0].C_g == doctest::Approx(40.3e-15).epsilon(1e-14));
  CHECK(std::isinf(s.couplers[0].L_g));
  CHECK(s.blocks[0].potential == "cosine");
  CHECK(s.blocks[0].potential_params.at("E_J") == doctest::Approx(1e-23));
  REQUIRE(s.impedances.size() == 1);
  CHECK(std::isinf(s.impedances[0].stage_inds[0]));
  CHECK(s.impedances[0].stage_inds[1] == doctest::Approx(3e-9));
  CHECK(validate_circuit(s).ok());
}

TEST_CASE("unit prefixes") {
  CHECK(unit_scale("fF", Dimension::Capacitance) == 1e-15);
  CHECK(unit_scale("pF/m", Dimension::CapPerLength) == 1e-12);
  CHECK(unit_scale("1/nH", Dimension::InvInductance) == doctest::Approx(1e9));
  CHECK(unit_scale("GHz", Dimension::Frequency) == 1e9);
  CHECK_THROWS_AS(unit_scale("nH", Dimension::Capacitance), Error);
}

TEST_CASE("serialize then parse reproduces the circuit") {
  CircuitSpec s = parse_circuit(kTwoNode);
  CircuitSpec r = parse_circuit(serialize_circuit(s));
  CHECK(r.metadata == s.metadata);
  CHECK((r.blocks[0].A - s.blocks[0].A).norm() == 0.0);
  CHECK(r.lines[0].length == s.lines[0].length);
  CHECK(r.lines[0].far_end == s.lines[0].far_end);
  CHECK(r.couplers[0].C_g == s.couplers[0].C_g);
  CHECK(r.impedances[0].stage_caps == s.impedances[0].stage_caps);
  CHECK(serialize_circuit(r) == serialize_circuit(s));

  CircuitSpec d = device_a_circuit();
  CHECK(serialize_circuit(parse_circuit(serialize_circuit(d))) == serialize_circuit(d));
}

TEST_CASE("parse errors carry codes and locations") {
  try {
    parse_circuit("{\n  \"blocks\": [\n    {,}\n  ]\n}");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Syntax);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK(parse_code(R"({"bogus": 1})") == ErrorCode::UnknownElement);
  CHECK(parse_code(R"({"lines": [{"c": {"value": 1, "unit": "nH/m"},
      "l": {"value": 1, "unit": "nH/m"}, "length": {"value": 1, "unit": "m"}}]})") ==
        ErrorCode::UnitMismatch);
  CHECK(parse_code(R"({"blocks": [{"name": "q", "A": {"value": [[1]], "unit": "fF"}, "a": [1]}],
      "couplers": [{"block": "q", "line": "missing"}]})") == ErrorCode::DanglingReference);
  CHECK(parse_code(R"({"lines": [{"c": {"value": 1, "unit": "F/m"},
      "l": {"value": 1, "unit": "H/m"}, "length": {"value": 1, "unit": "m"},
      "far_end": "grounded"}]})") == ErrorCode::UnknownElement);
}

TEST_CASE("validation findings") {
  CircuitSpec s = parse_circuit(kTwoNode);

  SUBCASE("asymmetric A") {
    s.blocks[0].A(0, 1) = 1e-15;
    CHECK(validate_circuit(s).has("A.symmetric"));
  }
  SUBCASE("A not positive-definite") {
    s.blocks[0].A(1, 1) = -1e-15;
    ValidationReport r = validate_circuit(s);
    CHECK(r.has("A.positive"));
    CHECK_FALSE(r.ok());
  }
  SUBCASE("channel vector of the wrong order") {
    s.blocks[0].a = Eigen::VectorXd::Ones(3);
    CHECK(validate_circuit(s).has("a.size"));
  }
  SUBCASE("attach point outside the line") {
    s.couplers[0].x = 1.0;
    CHECK(validate_circuit(s).has("coupler.position"));
  }
  SUBCASE("two couplers at the same point") {
    s.couplers.push_back(s.couplers[0]);
    CHECK(validate_circuit(s).has("coupler.overlap"));
  }
  SUBCASE("Foster stage lists differ") {
    s.impedances[0].stage_inds.pop_back();
    CHECK(validate_circuit(s).has("foster.stages"));
  }
  SUBCASE("non-positive line constants") {
    s.lines[0].l = 0.0;
    CHECK(validate_circuit(s).has("line.l"));
  }
}

TEST_CASE("device-a preset") {
  CircuitSpec s = device_a_circuit();
  CHECK(validate_circuit(s).ok());
  PresetInfo info = preset_info("device-a");
  CHECK(info.params.size() == 5);
  CHECK_THROWS_AS(preset_info("nope"), Error);
}
