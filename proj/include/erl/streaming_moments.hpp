#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace erl {

/// Running mean and co-moment matrix (Welford), mergeable with Chan's
/// pairwise rule. Merging in a fixed order gives bit-identical results.
template <int D>
class StreamingMoments {
 public:
  using Vec = Eigen::Matrix<double, D, 1>;
  using Mat = Eigen::Matrix<double, D, D>;

  void add(const Vec& x) {
    ++n_;
    const Vec delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    comoment_.noalias() += delta * (x - mean_).transpose();
  }

  void merge(const StreamingMoments& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
      *this = other;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    const Vec delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    comoment_ += other.comoment_ + delta * delta.transpose() * (na * nb / n);
    n_ += other.n_;
  }

  std::uint64_t count() const noexcept { return n_; }
  const Vec& mean() const noexcept { return mean_; }

  /// Unbiased (n - 1) covariance; requires count() >= 2.
  Mat covariance() const { return comoment_ / static_cast<double>(n_ - 1); }

  /// Standard error of the i-th mean.
  double standard_error(int i) const {
    return std::sqrt(comoment_(i, i) / static_cast<double>(n_ - 1) / static_cast<double>(n_));
  }

  double correlation(int i, int j) const {
    return comoment_(i, j) / std::sqrt(comoment_(i, i) * comoment_(j, j));
  }

 private:
  std::uint64_t n_ = 0;
  Vec mean_ = Vec::Zero();
  Mat comoment_ = Mat::Zero();
};

}  // namespace erl
