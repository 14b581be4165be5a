#pragma once

// Where the first-order (weak) pointer shifts can be trusted. The condition
// g^2 delta_P^2 << bound is operationalized by ratio thresholds
// 0.01 / 0.1 / 1; these are conventions checked empirically, not derived.

#include <span>

#include "erl/gaussian_state.hpp"

namespace erl {

enum class Regime { deep_weak, weak, marginal, strong };

const char* to_string(Regime r) noexcept;

/// deep_weak < 0.01 <= weak < 0.1 <= marginal < 1 <= strong.
Regime classify_ratio(double ratio) noexcept;

struct RegimeMargin {
  double lhs = 0.0;  // g^2 delta_P^2
  double rhs = 0.0;  // bound, possibly +infinity
  double ratio = 0.0;
  Regime classification = Regime::deep_weak;
};

/// Bound (4 sigma^4 cos^2 tB + sin^2 tB) / (4 sigma^2 sin^2(tA - tB)) for a
/// Gaussian particle; +infinity when |sin(tA - tB)| <= 1e-12.
RegimeMargin gaussian_regime_margin(double g, double delta_P, double sigma, const Quadrature& theta_A,
                                    const Quadrature& theta_B);

/// Bound 1 / max (a_j - a_l)^2; +infinity without two distinct eigenvalues.
RegimeMargin discrete_regime_margin(double g, double delta_P, std::span<const double> eigenvalues);

}  // namespace erl
