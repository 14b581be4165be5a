#include "erl/gaussian_state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "erl/errors.hpp"

namespace erl {

Quadrature::Quadrature(double theta) {
  if (!std::isfinite(theta)) throw DomainError("quadrature angle must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  theta_ = t;
  cos_ = std::cos(t);
  sin_ = std::sin(t);
}

const char* to_string(Restriction r) noexcept {
  switch (r) {
    case Restriction::valid_strict:
      return "valid_strict";
    case Restriction::saturated:
      return "saturated";
    case Restriction::violated:
      return "violated";
  }
  return "unknown";
}

Eigen::MatrixXd symplectic_form(std::size_t n_modes) {
  const auto dim = static_cast<Eigen::Index>(2 * n_modes);
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; k += 2) {
    sigma(k, k + 1) = 1.0;
    sigma(k + 1, k) = -1.0;
  }
  return sigma;
}

RestrictionCheck check_epistemic_restriction(const Eigen::MatrixXd& cov) {
  const auto dim = cov.rows();
  if (dim == 0 || dim % 2 != 0 || cov.cols() != dim) {
    throw DomainError("restriction check needs a square covariance of even dimension");
  }
  const Eigen::MatrixXcd h = (2.0 * cov).cast<std::complex<double>>() +
                             std::complex<double>(0.0, 1.0) *
                                 symplectic_form(static_cast<std::size_t>(dim / 2)).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  const double m = solver.eigenvalues().minCoeff();
  Restriction status = Restriction::valid_strict;
  if (m < -kRestrictionTol) {
    status = Restriction::violated;
  } else if (std::abs(m) <= kRestrictionTol) {
    status = Restriction::saturated;
  }
  return {status, m};
}

RestrictionCheck check_epistemic_restriction(const GaussianState& state) {
  return check_epistemic_restriction(state.cov());
}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)), restriction_{Restriction::violated, 0.0} {
  const auto dim = mean_.size();
  if (dim == 0 || dim % 2 != 0) throw DomainError("state dimension must be a positive even number");
  if (cov_.rows() != dim || cov_.cols() != dim) throw DomainError("covariance shape does not match mean");
  if (!mean_.allFinite() || !cov_.allFinite()) throw DomainError("state has non-finite entries");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol) {
    throw DomainError("covariance is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov_, Eigen::EigenvaluesOnly);
  const double min_eig = solver.eigenvalues().minCoeff();
  if (min_eig < -kPsdTol * std::max(1.0, cov_.cwiseAbs().maxCoeff())) {
    throw DomainError("covariance is not positive semidefinite (min eigenvalue " + std::to_string(min_eig) + ")");
  }
  restriction_ = check_epistemic_restriction(cov_);
}

GaussianState GaussianState::marginal(std::size_t mode) const {
  if (mode >= n_modes()) throw DomainError("mode index out of range");
  const auto k = static_cast<Eigen::Index>(2 * mode);
  return GaussianState(mean_.segment<2>(k), cov_.block<2, 2>(k, k));
}

GaussianState make_particle(double mu_q, double mu_p, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("particle sigma must be positive");
  Eigen::Vector2d mean(mu_q, mu_p);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  cov(0, 0) = sigma * sigma;
  cov(1, 1) = 1.0 / (4.0 * sigma * sigma);
  return GaussianState(mean, cov);
}

double device_delta_P(double delta_Q, double omega) {
  if (!(delta_Q > 0.0)) throw DomainError("device delta_Q must be positive");
  return std::sqrt(1.0 + omega * omega) / (2.0 * delta_Q);
}

double device_delta_Q(double delta_P, double omega) {
  if (!(delta_P > 0.0)) throw DomainError("device delta_P must be positive");
  return std::sqrt(1.0 + omega * omega) / (2.0 * delta_P);
}

GaussianState make_pure_device(double delta_Q, double mu_P, double omega) {
  if (!(delta_Q > 0.0) || !std::isfinite(delta_Q)) throw DomainError("device delta_Q must be positive");
  if (!std::isfinite(omega) || !std::isfinite(mu_P)) throw DomainError("device parameters must be finite");
  Eigen::Vector2d mean(0.0, mu_P);
  Eigen::Matrix2d cov;
  cov << delta_Q * delta_Q, 0.5 * omega,
         0.5 * omega, (1.0 + omega * omega) / (4.0 * delta_Q * delta_Q);
  return GaussianState(mean, cov);
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
  const auto na = static_cast<Eigen::Index>(a.dim());
  const auto nb = static_cast<Eigen::Index>(b.dim());
  Eigen::VectorXd mean(na + nb);
  mean << a.mean(), b.mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov();
  cov.bottomRightCorner(nb, nb) = b.cov();
  return GaussianState(std::move(mean), std::move(cov));
}

Eigen::VectorXd embed_quadrature(std::size_t dim, std::size_t mode, const Quadrature& quad) {
  if (2 * mode + 1 >= dim) throw DomainError("mode index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(2 * mode)) = quad.cos();
  v(static_cast<Eigen::Index>(2 * mode + 1)) = quad.sin();
  return v;
}

Moments quadrature_moments(const GaussianState& state, std::size_t mode, const Quadrature& quad) {
  if (mode >= state.n_modes()) throw DomainError("mode index out of range");
  const auto k = static_cast<Eigen::Index>(2 * mode);
  const Eigen::Vector2d v = quad.coefficients();
  const double mean = v.dot(state.mean().segment<2>(k));
  const double var = v.dot(state.cov().block<2, 2>(k, k) * v);
  return {mean, std::max(var, 0.0)};
}

}  // namespace erl
