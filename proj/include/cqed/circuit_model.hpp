#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cqed/constants.hpp"
#include "cqed/secular_solver.hpp"

namespace cqed {

// One lumped network, already reduced to the variables that touch the line.
struct NetworkBlock {
  std::string name;
  Eigen::MatrixXd A;     // F
  Eigen::MatrixXd Binv;  // 1/H
  Eigen::VectorXd a;
  Eigen::VectorXd b;
  std::string potential = "none";
  std::map<std::string, double> potential_params;  // SI
  double phi_ext = 0.0;  // Wb, constant offset only

  std::size_t order() const { return static_cast<std::size_t>(A.rows()); }
};

enum class LengthKind { Finite, SemiInfinite, Infinite };

struct LineSegment {
  std::string name;
  double c = 0.0;  // F/m
  double l = 0.0;  // H/m
  double length = 0.0;
  LengthKind length_kind = LengthKind::Finite;
  EndKind far_end = EndKind::Short;
};

enum class CouplerMode { Point, Galvanic };

struct CouplerSpec {
  std::size_t block = 0;
  std::size_t line = 0;
  CouplerMode mode = CouplerMode::Point;
  double C_g = 0.0;   // F, 0 disconnects
  double L_g = kInf;  // H, inf disconnects
  double x = 0.0;     // m
  // galvanic only: capacitance and inductance of the shared branch
  double C_A = 0.0;
  double L_B = kInf;
};

enum class FosterForm { Foster1, Foster2, Multiport };

struct FosterExpansion {
  FosterForm form = FosterForm::Foster1;
  std::vector<double> stage_caps;  // F
  std::vector<double> stage_inds;  // H, inf allowed
  std::vector<std::vector<double>> turn_ratios;  // one row of length ports per stage
  std::size_t port_count = 1;
  bool virtual_first_stage = false;  // L_0 -> inf taken downstream
};

struct CircuitSpec {
  std::vector<NetworkBlock> blocks;
  std::vector<LineSegment> lines;
  std::vector<CouplerSpec> couplers;
  std::vector<FosterExpansion> impedances;
  std::string metadata;
};

struct Finding {
  std::string rule;  // e.g. "A.symmetric", "coupler.overlap"
  std::string where;
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
  bool has(std::string_view rule) const;
};

CircuitSpec parse_circuit(std::string_view text);
std::string serialize_circuit(const CircuitSpec& spec);
ValidationReport validate_circuit(const CircuitSpec& spec);

enum class Dimension {
  Capacitance,
  Inductance,
  Length,
  CapPerLength,
  IndPerLength,
  InvInductance,
  Frequency,
  Energy,
  Flux,
  Dimensionless,
};

// Scale factor to SI for a unit string such as "fF", "nH/m", "1/nH", "GHz".
// Throws UnitMismatch when the unit does not carry the requested dimension.
double unit_scale(std::string_view unit, Dimension dim);

}  // namespace cqed
