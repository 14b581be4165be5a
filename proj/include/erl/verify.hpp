#pragma once

// Self-check suites behind `erlwv verify`: closed forms against exact
// conditioning, weak-limit convergence laws, and the exactness properties
// of the coupling map.

#include <cstddef>
#include <string>
#include <vector>

namespace erl {

/// |a - b| / max(|a|, |b|, floor). The floor keeps values that are zero up
/// to rounding from producing spurious relative blow-ups.
double relative_deviation(double a, double b, double floor = 1e-6);

/// One parameter tuple of the closed-form/conditioning comparison grid.
struct OracleGridPoint {
  double g, sigma, delta_Q, omega, theta_A, theta_B, b, mu_q, mu_p;
};

/// g in {0.01, 0.1, 0.5, 1}; angles in {0, pi/8, pi/3, pi/2, 3pi/4};
/// sigma, delta_Q in {0.5, 1, 2}; omega in {-1, 0, 1}; b in {-1, 0, 1, mean of B}.
std::vector<OracleGridPoint> oracle_grid();

struct VerifyOptions {
  /// Relative perturbation applied to alpha (mutation testing only).
  double alpha_perturbation = 0.0;
};

struct SuiteResult {
  std::string name;
  bool pass = false;
  double max_deviation = 0.0;
  double threshold = 0.0;
  std::size_t cases = 0;
  std::string detail;
};

std::vector<SuiteResult> run_verification(const VerifyOptions& options = {});

/// Orders log2(r_k / r_{k+1}) from residuals at successively halved steps.
std::vector<double> halving_orders(const std::vector<double>& residuals);

}  // namespace erl
