#pragma once

// Classical-ontology simulation of weak measurement with postselection.
//
// Phase points are drawn from the restricted Liouville distributions,
// pushed through the exact coupling map and postselected on a hard window
// |B - b| <= epsilon. Sampling is split into fixed chunks of kChunkSize
// points; chunk k draws from its own engine seeded by (seed, k) and partial
// results are reduced in chunk order, so output does not depend on the
// number of worker threads.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "erl/analytic.hpp"
#include "erl/gaussian_state.hpp"

namespace erl {

inline constexpr std::size_t kChunkSize = std::size_t{1} << 16;

/// Relative window width used by adaptive_epsilon().
inline constexpr double kAdaptiveEpsilonFraction = 0.05;

/// Everything needed to sample coupled (particle, pointer) points.
struct CouplingSetup {
  ParticleParams particle;
  DeviceParams device;
  double g = 0.0;
  Quadrature theta_A{0.0};
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  /// Worker threads; 0 means hardware concurrency. Never affects results.
  unsigned threads = 0;

  /// Throws DomainError on non-positive widths, n_samples == 0 or a
  /// particle/device state that violates the epistemic restriction.
  void validate() const;
  GaussianState joint_initial() const;
  GaussianState joint_evolved() const;
};

struct ExperimentConfig : CouplingSetup {
  Quadrature theta_B{0.0};
  double b = 0.0;
  double epsilon = 0.0;

  void validate() const;
};

struct PostselectedEstimate {
  double mean_Q = 0.0;
  double mean_P = 0.0;
  double mean_A_particle = 0.0;
  double se_Q = 0.0;
  double se_P = 0.0;
  double se_A = 0.0;
  std::size_t n_accepted = 0;
  std::size_t n_samples = 0;
  double acceptance_rate = 0.0;
  /// max |P' - P| over all points; the coupling leaves P unchanged.
  double max_momentum_change = 0.0;
  /// max |A(q', p') - A(q, p)| over all points.
  double max_repeatability_defect = 0.0;
};

/// Draws n points from the state. Columns are points. Throws
/// FactorizationError unless the covariance is positive definite.
Eigen::MatrixXd sample_state(const GaussianState& state, std::size_t n, std::uint64_t seed,
                             unsigned threads = 0);

/// kAdaptiveEpsilonFraction times the standard deviation of B after coupling.
double adaptive_epsilon(const ExperimentConfig& config);

/// Probability that an evolved point falls in the window.
double window_acceptance_probability(const ExperimentConfig& config);

/// Exact bias of the hard-window conditional means relative to conditioning
/// on B = b exactly, for (Q, P, A). O(epsilon^2).
ConditionedMeans expected_window_bias(const ExperimentConfig& config);

/// Throws InsufficientAcceptance when fewer than two points are accepted.
PostselectedEstimate run_weak_experiment(const ExperimentConfig& config);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Counts of (particle momentum after coupling, pointer momentum). Bins are
/// half-open [lo, hi); points outside either range go to overflow.
struct Histogram2D {
  Range p_range;
  Range P_range;
  std::size_t bins = 0;
  std::vector<std::uint64_t> counts;  // counts[i * bins + j], i over p, j over P
  std::uint64_t overflow = 0;

  std::uint64_t count(std::size_t i, std::size_t j) const { return counts[i * bins + j]; }
  std::uint64_t total() const;
  double p_edge(std::size_t i) const;
  double P_edge(std::size_t j) const;
  /// Mean pointer momentum over a particle-momentum slice (bin centres);
  /// NaN for an empty slice.
  double slice_mean_P(std::size_t i) const;
  std::uint64_t slice_count(std::size_t i) const;

  /// Header p_lo,p_hi,P_lo,P_hi,count; one row per bin.
  void write_csv(std::ostream& os) const;
};

/// Throws DomainError if bins < 2 or either range is empty.
Histogram2D joint_momentum_histogram(const CouplingSetup& setup, std::size_t bins, Range p_range,
                                     Range P_range);

struct CorrelationEstimate {
  double delta_Q = 0.0;
  double sample = 0.0;  // Pearson r between Q' and A
  double exact = 0.0;   // from the evolved covariance
  /// Standard error of atanh(r) (Fisher), 1 / sqrt(n - 3).
  double fisher_se = 0.0;
};

/// Pointer-observable correlation for a strictly decreasing sequence of
/// positive pointer widths, each with a pure pointer of the setup's mu_P and
/// omega. Uses the same seed for every width.
std::vector<CorrelationEstimate> strong_measurement_correlation(std::span<const double> delta_Q_sequence,
                                                                const CouplingSetup& setup);

}  // namespace erl
