#include "erl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "erl/errors.hpp"

namespace erl {

namespace {

RegimeMargin make_margin(double g, double delta_P, double rhs) {
  RegimeMargin m;
  m.lhs = g * g * delta_P * delta_P;
  m.rhs = rhs;
  m.ratio = std::isinf(rhs) ? 0.0 : m.lhs / rhs;
  m.classification = classify_ratio(m.ratio);
  return m;
}

}  // namespace

const char* to_string(Regime r) noexcept {
  switch (r) {
    case Regime::deep_weak:
      return "deep_weak";
    case Regime::weak:
      return "weak";
    case Regime::marginal:
      return "marginal";
    case Regime::strong:
      return "strong";
  }
  return "unknown";
}

Regime classify_ratio(double ratio) noexcept {
  if (ratio < 0.01) return Regime::deep_weak;
  if (ratio < 0.1) return Regime::weak;
  if (ratio < 1.0) return Regime::marginal;
  return Regime::strong;
}

RegimeMargin gaussian_regime_margin(double g, double delta_P, double sigma, const Quadrature& theta_A,
                                    const Quadrature& theta_B) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(delta_P >= 0.0)) throw DomainError("delta_P must be nonnegative");
  const double sin_d = std::sin(theta_A.theta() - theta_B.theta());
  if (std::abs(sin_d) <= 1e-12) return make_margin(g, delta_P, std::numeric_limits<double>::infinity());
  const double s2 = sigma * sigma;
  const double cB = theta_B.cos(), sB = theta_B.sin();
  const double rhs = (4.0 * s2 * s2 * cB * cB + sB * sB) / (4.0 * s2 * sin_d * sin_d);
  return make_margin(g, delta_P, rhs);
}

RegimeMargin discrete_regime_margin(double g, double delta_P, std::span<const double> eigenvalues) {
  if (!(delta_P >= 0.0)) throw DomainError("delta_P must be nonnegative");
  double max_gap = 0.0;
  if (!eigenvalues.empty()) {
    const auto [lo, hi] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
    max_gap = *hi - *lo;
  }
  if (max_gap == 0.0) return make_margin(g, delta_P, std::numeric_limits<double>::infinity());
  return make_margin(g, delta_P, 1.0 / (max_gap * max_gap));
}

}  // namespace erl
