#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cqed/cli.hpp"
#include "cqed/constants.hpp"

using namespace cqed;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> rows(const std::string& csv) {
  std::vector<std::vector<std::string>> r;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    r.push_back(cells);
  }
  return r;
}

std::string temp_file(const std::string& name, const std::string& body) {
  auto p = std::filesystem::temp_directory_path() / ("cqed_test_" + name);
  std::ofstream(p) << body;
  return p.string();
}

const char* kDeviceA = R"({
  "blocks": [{"name": "q", "A": {"value": [[45.43]], "unit": "fF"}, "a": [1]}],
  "lines": [{"name": "tl", "c": {"value": 249, "unit": "pF/m"}, "l": {"value": 623, "unit": "nH/m"},
             "length": {"value": 4.7, "unit": "mm"}}],
  "couplers": [{"block": "q", "line": "tl", "C_g": {"value": 40.3, "unit": "fF"}}]
})";

}  // namespace

TEST_CASE("modes of the bare line") {
  Run r = cli({"modes", "--alpha", "0", "--length", "1", "--n-max", "5"});
  REQUIRE(r.code == 0);
  auto t = rows(r.out);
  REQUIRE(t.size() == 6);
  CHECK(t[0] == std::vector<std::string>{"n", "k_n", "f_n_Hz", "u_n0", "partial_sum_s1",
                                         "partial_sum_s2"});
  for (int n = 0; n < 5; ++n)
    CHECK(std::stod(t[n + 1][1]) == doctest::Approx((2 * n + 1) * kPi / 2).epsilon(1e-15));
}

TEST_CASE("modes accept a circuit and report a rising first sum") {
  Run r = cli({"modes", "--input", temp_file("a.json", kDeviceA), "--n-max", "200"});
  REQUIRE(r.code == 0);
  auto t = rows(r.out);
  REQUIRE(t.size() == 201);
  double prev = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    double s = std::stod(t[i][4]);
    CHECK(s >= prev);
    CHECK(s < 1.0);
    prev = s;
  }
}

TEST_CASE("quantize on the device-a preset") {
  Run r = cli({"quantize", "--preset", "device-a", "--n-max", "200"});
  REQUIRE(r.code == 0);
  auto t = rows(r.out);
  CHECK(t[0] == std::vector<std::string>{"n", "f_n_Hz", "g_capacitive_Hz", "g_inductive_Hz",
                                         "channel_id"});
  std::size_t best = 1;
  for (std::size_t i = 1; i < t.size(); ++i)
    if (std::stod(t[i][2]) > std::stod(t[best][2])) best = i;
  CHECK(std::stoul(t[best][0]) == 82);
  CHECK(std::stod(t[best][1]) == doctest::Approx(702.5e9).epsilon(0.02));

  // the same circuit from a file gives the same table
  Run f = cli({"quantize", "--input", temp_file("b.json", kDeviceA), "--n-max", "200"});
  REQUIRE(f.code == 0);
  auto u = rows(f.out);
  REQUIRE(u.size() == t.size());
  for (std::size_t i = 1; i < t.size(); ++i)
    CHECK(std::stod(u[i][2]) == doctest::Approx(std::stod(t[i][2])).epsilon(1e-3));

  Run j = cli({"quantize", "--preset", "device-a", "--n-max", "20", "--emit", "json"});
  REQUIRE(j.code == 0);
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["preset"]["name"] == "device-a");
  CHECK(doc["channels"][0]["g_capacitive_rad_s"].size() == 20);
}

TEST_CASE("approximate route matches the exact one at low n") {
  Run e = cli({"quantize", "--preset", "device-a", "--n-max", "10"});
  Run a = cli({"quantize", "--preset", "device-a", "--n-max", "10", "--approx"});
  REQUIRE(e.code == 0);
  REQUIRE(a.code == 0);
  auto te = rows(e.out), ta = rows(a.out);
  for (std::size_t i = 1; i <= 10; ++i)
    CHECK(std::stod(ta[i][2]) == doctest::Approx(std::stod(te[i][2])).epsilon(0.02));
}

TEST_CASE("output is byte-identical across runs") {
  std::vector<std::string> args{"quantize", "--preset", "device-a", "--n-max", "50"};
  CHECK(cli(args).out == cli(args).out);
  std::vector<std::string> f{"foster", "--preset", "fig9", "--n-max", "8"};
  CHECK(cli(f).out == cli(f).out);
}

TEST_CASE("foster and example3 tables") {
  Run f = cli({"foster", "--preset", "fig9", "--n-max", "4"});
  REQUIRE(f.code == 0);
  auto t = rows(f.out);
  REQUIRE(t.size() == 6);
  CHECK(t[0].back() == "T_2");
  CHECK(t[1][5] == "0");  // the virtual first stage has no resonance
  CHECK(std::stod(t[2][3]) == doctest::Approx(249e-12 * 9.4e-3 / 2));

  Run e = cli({"example3", "--n-max", "300"});
  REQUIRE(e.code == 0);
  auto x = rows(e.out);
  CHECK(x[0] == std::vector<std::string>{"alpha", "f_alpha_Hz", "g_alpha_port1_Hz",
                                         "g_alpha_port2_Hz"});
  CHECK(x.size() == 301);
  CHECK(std::stod(x[1][1]) == doctest::Approx(4.26e9).epsilon(0.02));
}

TEST_CASE("spectral output") {
  Run r = cli({"spectral", "--preset", "device-a", "--kind", "jc", "--samples", "50"});
  REQUIRE(r.code == 0);
  auto t = rows(r.out);
  REQUIRE(t.size() == 51);
  CHECK(t[1][2] == "closed_form_JC");
  Run j = cli({"spectral", "--preset", "device-a", "--n-max", "20000", "--emit", "json"});
  REQUIRE(j.code == 0);
  auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["kind"] == "spin_capacitive");
  CHECK(doc["fits"]["high"]["slope"].get<double>() == doctest::Approx(-1.0).epsilon(0.01));
  // a 4.7 mm line has too few modes below the cutoff for a low-side fit
  CHECK(doc["fits"]["low"].contains("error"));
  Run bad = cli({"spectral", "--preset", "device-a", "--kind", "jl"});
  CHECK(bad.code == 2);
}

TEST_CASE("check-invertibility") {
  Run ok = cli({"check-invertibility", "--preset", "device-a"});
  CHECK(ok.code == 0);
  auto t = rows(ok.out);
  REQUIRE(t.size() == 2);
  CHECK(t[1][6] == "0");

  const char* asym = R"({
    "blocks": [{"A": {"value": [[2, 1], [0, 2]], "unit": "fF"}, "a": [1, 0]}],
    "lines": [{"c": {"value": 1, "unit": "pF/m"}, "l": {"value": 1, "unit": "nH/m"},
               "length": {"value": 1, "unit": "mm"}}],
    "couplers": [{"block": 0, "line": 0, "C_g": {"value": 1, "unit": "fF"}}]})";
  Run bad = cli({"check-invertibility", "--input", temp_file("asym.json", asym)});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("A.symmetric") != std::string::npos);
}

TEST_CASE("errors map to exit codes and JSON on stderr") {
  Run a = cli({"quantize", "--preset", "nope"});
  CHECK(a.code == 2);
  auto e = nlohmann::json::parse(a.err);
  CHECK(e["error"]["code"] == "invalid_input");

  Run b = cli({"quantize", "--input", "/nonexistent/circuit.json"});
  CHECK(b.code == 2);

  Run c = cli({"quantize", "--input", temp_file("syntax.json", "{\n  \"blocks\": [,]\n}")});
  CHECK(c.code == 2);
  auto ce = nlohmann::json::parse(c.err);
  CHECK(ce["error"]["code"] == "syntax_error");
  CHECK(ce["error"]["message"].get<std::string>().find("line 2") != std::string::npos);

  const char* asym = R"({
    "blocks": [{"A": {"value": [[2, 1], [0, 2]], "unit": "fF"}, "a": [1, 0]}],
    "lines": [{"c": {"value": 1, "unit": "pF/m"}, "l": {"value": 1, "unit": "nH/m"},
               "length": {"value": 1, "unit": "mm"}}],
    "couplers": [{"block": 0, "line": 0, "C_g": {"value": 1, "unit": "fF"}}]})";
  Run d = cli({"quantize", "--input", temp_file("asym2.json", asym)});
  CHECK(d.code == 2);
  auto de = nlohmann::json::parse(d.err);
  CHECK(de["error"]["findings"][0]["rule"] == "A.symmetric");

  CHECK(cli({"modes", "--beta", "-1"}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({}).code == 2);
}

TEST_CASE("help exits cleanly") {
  Run h = cli({"--help"});
  CHECK(h.code == 0);
  CHECK(h.out.find("quantize") != std::string::npos);
  Run s = cli({"quantize", "--help"});
  CHECK(s.code == 0);
  CHECK(s.out.find("--approx") != std::string::npos);
}

TEST_CASE("thread budget") {
  CHECK(resolve_thread_budget(3) == 3);
  ::setenv("CQED_THREADS", "2", 1);
  CHECK(resolve_thread_budget(0) == 2);
  ::setenv("CQED_THREADS", "two", 1);
  CHECK_THROWS(resolve_thread_budget(0));
  CHECK(cli({"modes", "--n-max", "2"}).code == 2);
  ::unsetenv("CQED_THREADS");
  CHECK(resolve_thread_budget(0) == 1);
}

TEST_CASE("number formatting") {
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(-kInf) == "-inf");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
