#include "erl/analytic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "erl/dynamics.hpp"
#include "erl/errors.hpp"

namespace erl {

namespace {

using cplx = std::complex<double>;

constexpr double kImagResidueTol = 1e-10;

double real_part_checked(cplx z, const char* what) {
  if (std::abs(z.imag()) > kImagResidueTol * std::max(1.0, std::abs(z.real()))) {
    throw std::runtime_error(std::string(what) + " has imaginary residue " + std::to_string(z.imag()));
  }
  return z.real();
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError(std::string(name) + " must be positive");
}

}  // namespace

void DiscreteSpectrumInput::validate() const {
  if (eigenvalues.empty()) throw DomainError("discrete input needs at least one eigenvalue");
  if (amplitudes.size() != eigenvalues.size() || overlaps.size() != eigenvalues.size()) {
    throw DomainError("amplitudes, overlaps and eigenvalues must have the same length");
  }
}

WeakValue weak_value_gaussian(const ParticleParams& particle, const Quadrature& theta_A,
                              const Quadrature& theta_B, double b) {
  require_positive(particle.sigma, "sigma");
  const double s2 = particle.sigma * particle.sigma;
  const double s4 = s2 * s2;
  const double cA = theta_A.cos(), sA = theta_A.sin();
  const double cB = theta_B.cos(), sB = theta_B.sin();
  const double sin_d = std::sin(theta_B.theta() - theta_A.theta());
  const double denom = 4.0 * s4 * cB * cB + sB * sB;

  const double re = (4.0 * s4 * cB * (b * cA - particle.mu_p * sin_d) + sB * (particle.mu_q * sin_d + b * sA)) / denom;
  const double im = 2.0 * s2 * (-b + particle.mu_q * cB + particle.mu_p * sB) * sin_d / denom;
  return {re, im};
}

WeakValue weak_value_discrete(const DiscreteSpectrumInput& input) {
  input.validate();
  cplx num{0.0, 0.0};
  cplx den{0.0, 0.0};
  double scale = 0.0;
  for (std::size_t j = 0; j < input.size(); ++j) {
    const cplx c = input.amplitudes[j] * input.overlaps[j];
    num += c * input.eigenvalues[j];
    den += c;
    scale += std::abs(c);
  }
  if (!(std::abs(den) > 1e-14 * scale)) throw DegeneratePostselection("<b|Psi> vanishes");
  const cplx w = num / den;
  return {w.real(), w.imag()};
}

DeviceMeans postselected_means_discrete(const DiscreteSpectrumInput& input, double g, double delta_P,
                                        double mu_P, double omega) {
  input.validate();
  require_positive(delta_P, "delta_P");
  const std::size_t n = input.size();
  std::vector<cplx> c(n);
  double scale = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    c[j] = input.amplitudes[j] * input.overlaps[j];
    scale += std::abs(c[j]);
  }

  const double dp2 = delta_P * delta_P;
  cplx den{0.0, 0.0};
  cplx num_Q{0.0, 0.0};
  cplx num_P{0.0, 0.0};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t l = 0; l < n; ++l) {
      const double aj = input.eigenvalues[j];
      const double al = input.eigenvalues[l];
      const double gap = aj - al;
      const cplx kernel = std::exp(cplx(-0.5 * gap * gap * dp2 * g * g, -g * gap * mu_P));
      const cplx w = c[j] * std::conj(c[l]) * kernel;
      den += w;
      num_Q += w * cplx(0.5 * g * (aj + al), -0.5 * g * omega * gap);
      num_P += w * cplx(0.0, -g * dp2 * gap);
    }
  }
  const double norm = real_part_checked(den, "postselection norm");
  if (!(norm > 1e-14 * scale * scale)) throw DegeneratePostselection("postselected pointer state vanishes");
  return {real_part_checked(num_Q / den, "<Q>_b"), mu_P + real_part_checked(num_P / den, "<P>_b")};
}

PostselectionCoefficients postselection_coefficients(const ParticleParams& particle, double delta_Q,
                                                     double omega, double g, const Quadrature& theta_A,
                                                     const Quadrature& theta_B, double b) {
  require_positive(particle.sigma, "sigma");
  require_positive(delta_Q, "delta_Q");
  const double s2 = particle.sigma * particle.sigma;
  const double s4 = s2 * s2;
  const double dq2 = delta_Q * delta_Q;
  const double cA = theta_A.cos(), sA = theta_A.sin();
  const double cB = theta_B.cos(), sB = theta_B.sin();
  const double sin_d = std::sin(theta_B.theta() - theta_A.theta());
  const double mean_A = particle.mu_q * cA + particle.mu_p * sA;
  const double mean_B = particle.mu_q * cB + particle.mu_p * sB;
  const double one_om2 = 1.0 + omega * omega;

  PostselectionCoefficients out;
  out.alpha = g * g * g * mean_A * one_om2 * s2 * sin_d * sin_d +
              g * dq2 *
                  (4.0 * s4 * cB * (b * cA - particle.mu_p * sin_d) + sB * (particle.mu_q * sin_d + b * sA) +
                   2.0 * omega * s2 * sin_d * (mean_B - b));
  out.beta = g * g * one_om2 * s2 * sin_d * sin_d + dq2 * (4.0 * s4 * cB * cB + sB * sB);
  // The momentum bias is driven by the postselected quadrature's innovation
  // (mean of B minus b); exact conditioning fixes this form.
  out.momentum_numerator = g * one_om2 * s2 * (mean_B - b) * sin_d;
  return out;
}

DeviceMeans postselected_means_gaussian(const ParticleParams& particle, double delta_Q, double omega,
                                        double g, const Quadrature& theta_A, const Quadrature& theta_B,
                                        double b) {
  const PostselectionCoefficients k =
      postselection_coefficients(particle, delta_Q, omega, g, theta_A, theta_B, b);
  if (!(k.beta > 0.0)) throw DegeneratePostselection("beta vanishes");
  return {k.alpha / k.beta, k.momentum_numerator / k.beta};
}

FirstOrderShifts first_order_shifts(const WeakValue& weak_value, double g, double delta_P, double omega) {
  return {g * weak_value.re + g * omega * weak_value.im, 2.0 * g * delta_P * delta_P * weak_value.im};
}

GaussianState gaussian_condition(const GaussianState& joint, std::size_t mode, const Quadrature& quad,
                                 double b) {
  const Eigen::VectorXd v = embed_quadrature(joint.dim(), mode, quad);
  const Eigen::VectorXd cv = joint.cov() * v;
  const double var = v.dot(cv);
  const double scale = joint.cov().cwiseAbs().maxCoeff();
  if (!(var > 1e-14 * scale)) throw SingularConditioning("conditioning functional has zero variance");
  const double innovation = b - v.dot(joint.mean());
  Eigen::VectorXd mean = joint.mean() + cv * (innovation / var);
  Eigen::MatrixXd cov = joint.cov() - cv * cv.transpose() / var;
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(std::move(mean), std::move(cov));
}

double conditional_expectation_A(const GaussianState& joint_evolved, const Quadrature& theta_A,
                                 const Quadrature& theta_B, double b) {
  const GaussianState post = gaussian_condition(joint_evolved, 0, theta_B, b);
  return quadrature_moments(post, 0, theta_A).mean;
}

ConditionedMeans conditioned_means(const ParticleParams& particle, const DeviceParams& device, double g,
                                   const Quadrature& theta_A, const Quadrature& theta_B, double b) {
  const GaussianState joint = evolve_joint(particle.state(), device.state(), g, theta_A);
  const GaussianState post = gaussian_condition(joint, 0, theta_B, b);
  return {post.mean()(2), post.mean()(3), quadrature_moments(post, 0, theta_A).mean};
}

}  // namespace erl
