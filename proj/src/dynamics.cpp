#include "erl/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "erl/errors.hpp"

namespace erl {

const Eigen::Matrix4d& two_mode_symplectic_form() {
  static const Eigen::Matrix4d sigma = [] {
    Eigen::Matrix4d s = Eigen::Matrix4d::Zero();
    s(0, 1) = 1.0;
    s(1, 0) = -1.0;
    s(2, 3) = 1.0;
    s(3, 2) = -1.0;
    return s;
  }();
  return sigma;
}

SymplecticMap::SymplecticMap(const Eigen::Matrix4d& matrix) : matrix_(matrix) {
  if (!matrix_.allFinite()) throw DomainError("symplectic map has non-finite entries");
  const double scale = std::max(1.0, matrix_.cwiseAbs().maxCoeff());
  if (symplectic_defect() > 1e-12 * scale * scale) throw DomainError("matrix is not symplectic");
}

double SymplecticMap::symplectic_defect() const {
  const Eigen::Matrix4d& sigma = two_mode_symplectic_form();
  return (matrix_.transpose() * sigma * matrix_ - sigma).cwiseAbs().maxCoeff();
}

SymplecticMap coupling_map(double g, const Quadrature& measured) {
  if (!std::isfinite(g)) throw DomainError("coupling strength must be finite");
  const double c = measured.cos();
  const double s = measured.sin();
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 3) = g * s;
  m(1, 3) = -g * c;
  m(2, 0) = g * c;
  m(2, 1) = g * s;
  return SymplecticMap(m);
}

GaussianState apply(const SymplecticMap& map, const GaussianState& joint) {
  if (joint.n_modes() != 2) throw DomainError("coupling map acts on a two-mode (particle, device) state");
  const Eigen::Matrix4d& m = map.matrix();
  Eigen::VectorXd mean = m * joint.mean();
  Eigen::MatrixXd cov = m * joint.cov() * m.transpose();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianState(std::move(mean), std::move(cov));
}

PhasePoint apply(const SymplecticMap& map, const PhasePoint& pt) {
  return PhasePoint::from_vector(map.matrix() * pt.as_vector());
}

GaussianState evolve_joint(const GaussianState& particle, const GaussianState& device, double g,
                           const Quadrature& measured) {
  if (particle.n_modes() != 1 || device.n_modes() != 1) {
    throw DomainError("particle and device must be single-mode states");
  }
  return apply(coupling_map(g, measured), tensor(particle, device));
}

}  // namespace erl
