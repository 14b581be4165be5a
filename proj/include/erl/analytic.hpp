#pragma once

// Closed-form weak values and postselected pointer means, plus exact
// Gaussian conditioning used as the independent reference for them.

#include <complex>
#include <cstddef>
#include <vector>

#include "erl/gaussian_state.hpp"

namespace erl {

struct WeakValue {
  double re = 0.0;
  double im = 0.0;

  std::complex<double> as_complex() const { return {re, im}; }
};

/// Pure Gaussian particle with zero position-momentum covariance.
struct ParticleParams {
  double mu_q = 0.0;
  double mu_p = 0.0;
  double sigma = 1.0;

  GaussianState state() const { return make_particle(mu_q, mu_p, sigma); }
  bool operator==(const ParticleParams&) const = default;
};

/// Pure Gaussian pointer; omega is twice the position-momentum covariance.
struct DeviceParams {
  double delta_Q = 1.0;
  double mu_P = 0.0;
  double omega = 0.0;

  double delta_P() const { return device_delta_P(delta_Q, omega); }
  GaussianState state() const { return make_pure_device(delta_Q, mu_P, omega); }
  bool operator==(const DeviceParams&) const = default;
};

/// Pre-selected state sum_j alpha_j |a_j> together with the postselection
/// overlaps <b|a_j> and the eigenvalues a_j of the measured observable.
struct DiscreteSpectrumInput {
  std::vector<std::complex<double>> amplitudes;
  std::vector<std::complex<double>> overlaps;
  std::vector<double> eigenvalues;

  /// Throws DomainError on empty or mismatched lists.
  void validate() const;
  std::size_t size() const noexcept { return eigenvalues.size(); }
  bool operator==(const DiscreteSpectrumInput&) const = default;
};

struct DeviceMeans {
  double mean_Q = 0.0;
  double mean_P = 0.0;
};

struct FirstOrderShifts {
  double q_shift = 0.0;
  double p_shift = 0.0;
};

/// Weak value of cos(tA) q + sin(tA) p for a Gaussian particle postselected
/// on cos(tB) q + sin(tB) p = b.
WeakValue weak_value_gaussian(const ParticleParams& particle, const Quadrature& theta_A,
                              const Quadrature& theta_B, double b);

/// <b|A|Psi> / <b|Psi>. Throws DegeneratePostselection if <b|Psi> vanishes.
WeakValue weak_value_discrete(const DiscreteSpectrumInput& input);

/// Exact postselected pointer means for a discrete-spectrum observable and a
/// pure Gaussian pointer, from the double sums over eigenvalue pairs with
/// Gaussian damping exp(-(a_j - a_l)^2 delta_P^2 g^2 / 2) and the phase
/// exp(-i g (a_j - a_l) mu_P).
DeviceMeans postselected_means_discrete(const DiscreteSpectrumInput& input, double g, double delta_P,
                                        double mu_P, double omega);

/// Numerator and denominator of the closed-form postselected pointer means
/// (pointer prepared with zero mean momentum):
///   <Q>_b = alpha / beta,   <P>_b = momentum_numerator / beta.
struct PostselectionCoefficients {
  double alpha = 0.0;
  double beta = 0.0;
  double momentum_numerator = 0.0;
};

PostselectionCoefficients postselection_coefficients(const ParticleParams& particle, double delta_Q,
                                                     double omega, double g, const Quadrature& theta_A,
                                                     const Quadrature& theta_B, double b);

/// Closed form; requires a pointer with zero mean momentum. Throws
/// DegeneratePostselection when beta vanishes.
DeviceMeans postselected_means_gaussian(const ParticleParams& particle, double delta_Q, double omega,
                                        double g, const Quadrature& theta_A, const Quadrature& theta_B,
                                        double b);

/// Leading order in g: (g Re + g omega Im, 2 g delta_P^2 Im).
FirstOrderShifts first_order_shifts(const WeakValue& weak_value, double g, double delta_P, double omega);

/// Conditions a Gaussian on the linear functional quad(mode) = b.
/// Throws SingularConditioning when that functional has zero variance.
GaussianState gaussian_condition(const GaussianState& joint, std::size_t mode, const Quadrature& quad,
                                 double b);

/// E[A | B = b] on the particle mode (mode 0) of an evolved joint state.
double conditional_expectation_A(const GaussianState& joint_evolved, const Quadrature& theta_A,
                                 const Quadrature& theta_B, double b);

/// Postselected means obtained by conditioning the evolved joint state.
struct ConditionedMeans {
  double mean_Q = 0.0;
  double mean_P = 0.0;
  double mean_A = 0.0;
};

ConditionedMeans conditioned_means(const ParticleParams& particle, const DeviceParams& device, double g,
                                   const Quadrature& theta_A, const Quadrature& theta_B, double b);

}  // namespace erl
