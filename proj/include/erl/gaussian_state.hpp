#pragma once

// Gaussian phase-space states (Liouville distributions, equivalently
// Wigner functions of Gaussian quantum states).
//
// Coordinates are ordered (q1, p1, q2, p2, ...) with hbar = 1. The stored
// covariance is the ordinary statistical one, Cov[x_i, x_j]. The
// epistemic restriction is usually written in terms of gamma = 2 * Cov:
//
//     gamma + i * Sigma >= 0,
//
// with Sigma the block-diagonal symplectic form. The factor 2 is applied
// only inside check_epistemic_restriction().

#include <cstddef>

#include <Eigen/Dense>

namespace erl {

/// Tolerance on the minimum eigenvalue of gamma + i*Sigma.
inline constexpr double kRestrictionTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kPsdTol = 1e-12;

/// The observable cos(theta) q + sin(theta) p of one mode.
class Quadrature {
 public:
  /// theta in radians; stored reduced to [0, 2*pi).
  explicit Quadrature(double theta);

  double theta() const noexcept { return theta_; }
  double cos() const noexcept { return cos_; }
  double sin() const noexcept { return sin_; }
  Eigen::Vector2d coefficients() const { return {cos_, sin_}; }

  double operator()(double q, double p) const noexcept { return cos_ * q + sin_ * p; }

 private:
  double theta_;
  double cos_;
  double sin_;
};

enum class Restriction { valid_strict, saturated, violated };

const char* to_string(Restriction r) noexcept;

struct RestrictionCheck {
  Restriction status;
  /// Minimum eigenvalue of 2*cov + i*Sigma.
  double margin;
};

class GaussianState {
 public:
  /// Throws DomainError unless the dimension is even and nonzero, cov is
  /// symmetric to kSymmetryTol and positive semidefinite to kPsdTol
  /// (relative to the largest entry when that exceeds one).
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  std::size_t n_modes() const noexcept { return static_cast<std::size_t>(mean_.size() / 2); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& cov() const noexcept { return cov_; }

  const RestrictionCheck& restriction() const noexcept { return restriction_; }
  bool restricted() const noexcept { return restriction_.status != Restriction::violated; }

  /// Single-mode marginal.
  GaussianState marginal(std::size_t mode) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  RestrictionCheck restriction_;
};

/// Block-diagonal symplectic form for n modes.
Eigen::MatrixXd symplectic_form(std::size_t n_modes);

/// Pure particle state: mean (mu_q, mu_p), cov diag(sigma^2, 1/(4 sigma^2)).
GaussianState make_particle(double mu_q, double mu_p, double sigma);

/// Pure pointer state with position spread delta_Q, mean momentum mu_P and
/// position-momentum covariance omega/2; Var[P] = (1 + omega^2) / (4 delta_Q^2).
GaussianState make_pure_device(double delta_Q, double mu_P, double omega);

/// Momentum spread of the pure device, sqrt(1 + omega^2) / (2 delta_Q).
double device_delta_P(double delta_Q, double omega);
/// Inverse of device_delta_P.
double device_delta_Q(double delta_P, double omega);

RestrictionCheck check_epistemic_restriction(const Eigen::MatrixXd& cov);
RestrictionCheck check_epistemic_restriction(const GaussianState& state);

/// Product state a (x) b; a's modes come first.
GaussianState tensor(const GaussianState& a, const GaussianState& b);

struct Moments {
  double mean;
  double variance;
};

/// Mean and variance of quad applied to the given mode.
Moments quadrature_moments(const GaussianState& state, std::size_t mode, const Quadrature& quad);

/// Quadrature coefficients embedded at a mode's coordinates in a dim-vector.
Eigen::VectorXd embed_quadrature(std::size_t dim, std::size_t mode, const Quadrature& quad);

}  // namespace erl
