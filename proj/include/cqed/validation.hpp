#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cqed {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Each check catches library errors and reports them as a failure.

// Device A couplings: argmax at 81 +- 1, f there within 2% of 702.5 GHz,
// runtime below one second.
CheckResult check_device_a_argmax(std::size_t n_max = 500);

// k_c against the numeric argmax on random alpha/L in [1e-4, 1e-1].
CheckResult check_cutoff_predictor(std::size_t sets = 20, std::uint64_t seed = 20240601);

// Approximate couplings within 2% for n <= 10; ratio sqrt(2) +- 5% at n_c.
CheckResult check_approx_window();

// alpha sum over N_trunc modes of Device A inside [partial_lo, 1],
// extrapolated limit within extrap_tol, continuum integrals within 1e-6.
CheckResult check_sum_rules(std::size_t N_trunc = 100000, double partial_lo = 0.999,
                            double extrap_tol = 1e-5);

// Closed-form block inverses against dense LU on random instances.
CheckResult check_inversion_oracles(std::size_t instances = 100, std::size_t N_max = 500,
                                    std::uint64_t seed = 7);

// Fitted UV and IR exponents of the coupling constants and densities.
CheckResult check_exponents();

// Dressing limits at N equal stages.
CheckResult check_foster_limits(std::size_t N = 10000);

// Three-step and single-rescaling Foster-1 transformations agree.
CheckResult check_foster_equivalence(std::size_t N = 200);

// Optimal alpha removes mode-mode terms; a 10% perturbation does not.
CheckResult check_decoupling();

// Original and transformed three-oscillator trajectories over ten periods.
CheckResult check_caldeira_leggett();

// TL-TL with C_G = 0 or C_g = 0 and Foster-1 with C_A = 0 on N = 200.
CheckResult check_pathologies();

// Two-port example: Omega_1 and argmax frequencies. Tolerances are only
// asserted for N >= 6000; smaller N reports the values and checks Omega_1.
CheckResult check_example3(std::size_t N = 6000, double max_seconds = 300.0);

using CheckFn = std::function<CheckResult()>;

struct Suite {
  std::string name;
  CheckFn run;
};

std::vector<Suite> validation_suites(bool quick);

}  // namespace cqed
