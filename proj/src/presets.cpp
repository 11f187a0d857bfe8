#include "cqed/presets.hpp"

#include "cqed/errors.hpp"

namespace cqed {

ChargeQubitParams device_a() {
  ChargeQubitParams p;
  p.C_g = 40.3e-15;
  p.C_J = 5.13e-15;
  p.c = 249e-12;
  p.l = 623e-9;
  p.L = 4.7e-3;
  return p;
}

CircuitSpec device_a_circuit() {
  const ChargeQubitParams p = device_a();
  CircuitSpec spec;
  NetworkBlock net;
  net.name = "qubit";
  net.A = Eigen::MatrixXd::Constant(1, 1, p.C_g + p.C_J);
  net.Binv = Eigen::MatrixXd::Zero(1, 1);
  net.a = Eigen::VectorXd::Ones(1);
  net.b = Eigen::VectorXd::Zero(1);
  net.potential = "cosine";
  spec.blocks.push_back(net);

  LineSegment line;
  line.name = "resonator";
  line.c = p.c;
  line.l = p.l;
  line.length = p.L;
  line.far_end = EndKind::Short;
  spec.lines.push_back(line);

  CouplerSpec cp;
  cp.C_g = p.C_g;
  spec.couplers.push_back(cp);
  spec.metadata = "preset device-a";
  return spec;
}

Example3Params fig9() { return Example3Params{}; }

std::vector<std::string> preset_names() { return {"device-a", "fig9"}; }

PresetInfo preset_info(const std::string& name) {
  if (name == "device-a") {
    const ChargeQubitParams p = device_a();
    return {name,
            "charge qubit capacitively coupled to the open end of a line shorted at its far end",
            {{"C_g", p.C_g, "F"},
             {"C_J", p.C_J, "F"},
             {"c", p.c, "F/m"},
             {"l", p.l, "H/m"},
             {"L", p.L, "m"}}};
  }
  if (name == "fig9") {
    const Example3Params p = fig9();
    return {name,
            "two charge qubits at the ports of a line open at both ends",
            {{"C_g1", p.C_g1, "F"},
             {"C_J1", p.C_J1, "F"},
             {"C_g2", p.C_g2, "F"},
             {"C_J2", p.C_J2, "F"},
             {"c", p.c, "F/m"},
             {"l", p.l, "H/m"},
             {"L", p.L, "m"}}};
  }
  throw Error(ErrorCode::InvalidInput, "unknown preset \"" + name + "\" (known: device-a, fig9)");
}

}  // namespace cqed
