#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cqed/circuit_model.hpp"
#include "cqed/mode_basis.hpp"

namespace cqed {

enum class Command { Modes, Quantize, Foster, Example3, Spectral, CheckInvertibility, Validate };

struct RunConfig {
  Command command = Command::Validate;
  std::string input, output, preset;
  std::size_t n_max = 0;  // 0 selects the command default
  double tol = 1e-12;
  std::string emit = "csv";
  int threads = 0;        // 0 falls back to CQED_THREADS, then 1
  bool quick = false;
  bool approx = false;
  std::optional<std::size_t> coupler;

  // modes without a circuit
  std::string geometry = "point";  // point, galvanic, insertion
  std::string far_end = "short";
  double alpha = 0.0, beta = kInf, length = 1.0, x0 = 0.0;
  double c = 249e-12, l = 623e-9;

  // spectral
  std::string kind;  // inductive, spin-capacitive, jc, jl
  double amplitude = 1.0;
  std::size_t samples = 400;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitInternal = 3;

// Parses argv-style arguments (without the program name) and runs.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Throws cqed::Error on bad input; run_cli maps errors to exit codes.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Mode basis for one coupler, solved with its optimal dressing. The line
// must be finite. Point couplers at x = 0 use the point-end problem, interior
// ones the insertion problem (both ends shorted); galvanic couplers use the
// line length as the half-length of the (-L, L) geometry.
ModeBasis coupler_basis(const CircuitSpec& spec, std::size_t coupler, std::size_t n_max,
                        double tol = 1e-12);

// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double x);

// flag > 0 wins, then CQED_THREADS, then 1. Throws InvalidInput for a
// malformed environment value.
int resolve_thread_budget(int flag);

}  // namespace cqed
