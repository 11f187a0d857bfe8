#pragma once

#include <string>
#include <vector>

#include "cqed/circuit_model.hpp"
#include "cqed/foster_synthesis.hpp"
#include "cqed/hamiltonian_assembly.hpp"

namespace cqed {

// Charge qubit at the end of a line shorted at x = L.
ChargeQubitParams device_a();

// The same device as a circuit description: one node with C_g + C_J to
// ground, coupled through C_g to x = 0 of the line.
CircuitSpec device_a_circuit();

// Two charge qubits at the ports of a line open at both ends.
Example3Params fig9();

struct PresetParam {
  std::string name;
  double value = 0.0;  // SI
  std::string unit;
};

struct PresetInfo {
  std::string name;
  std::string description;
  std::vector<PresetParam> params;
};

std::vector<std::string> preset_names();
// Throws InvalidInput for an unknown name.
PresetInfo preset_info(const std::string& name);

}  // namespace cqed
