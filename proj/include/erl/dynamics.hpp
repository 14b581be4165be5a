#pragma once

// Impulsive pointer coupling H = chi(t) P A as an exact linear map on the
// joint phase space (q, p, Q, P). Only the integrated strength
// g = int chi dt enters.

#include <Eigen/Dense>

#include "erl/gaussian_state.hpp"

namespace erl {

/// Ontic state of particle (q, p) and pointer (Q, P).
struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
  double Q = 0.0;
  double P = 0.0;

  Eigen::Vector4d as_vector() const { return {q, p, Q, P}; }
  static PhasePoint from_vector(const Eigen::Vector4d& v) { return {v(0), v(1), v(2), v(3)}; }
};

/// Two-mode symplectic form on (q, p, Q, P).
const Eigen::Matrix4d& two_mode_symplectic_form();

class SymplecticMap {
 public:
  /// Throws DomainError if M^T Sigma M deviates from Sigma by more than
  /// 1e-12 (scaled by the squared largest entry when that exceeds one).
  explicit SymplecticMap(const Eigen::Matrix4d& matrix);

  static SymplecticMap identity() { return SymplecticMap(Eigen::Matrix4d::Identity()); }

  const Eigen::Matrix4d& matrix() const noexcept { return matrix_; }

  /// max |M^T Sigma M - Sigma|.
  double symplectic_defect() const;

 private:
  Eigen::Matrix4d matrix_;
};

/// q' = q + g sin(tA) P,  p' = p - g cos(tA) P,
/// Q' = Q + g (cos(tA) q + sin(tA) p),  P' = P.
SymplecticMap coupling_map(double g, const Quadrature& measured);

/// mean' = M mean, cov' = M cov M^T. The state must have two modes.
GaussianState apply(const SymplecticMap& map, const GaussianState& joint);

PhasePoint apply(const SymplecticMap& map, const PhasePoint& pt);

/// Joint particle (x) device state after the coupling.
GaussianState evolve_joint(const GaussianState& particle, const GaussianState& device, double g,
                           const Quadrature& measured);

}  // namespace erl
