#include "erl/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "erl/dynamics.hpp"
#include "erl/errors.hpp"
#include "erl/streaming_moments.hpp"

namespace erl {

namespace {

std::mt19937_64 chunk_engine(std::uint64_t seed, std::uint64_t chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  return std::mt19937_64(seq);
}

std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

std::size_t chunk_length(std::size_t n, std::size_t chunk) {
  return std::min(kChunkSize, n - chunk * kChunkSize);
}

// Runs fn(chunk) for every chunk on a pool of workers. fn must only touch
// per-chunk state.
template <typename Fn>
void for_each_chunk(std::size_t n_chunks, unsigned threads, Fn&& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t c = next++; c < n_chunks; c = next++) fn(c);
    });
  }
}

Eigen::MatrixXd cholesky_factor(const GaussianState& state) {
  Eigen::LLT<Eigen::MatrixXd> llt(state.cov());
  if (llt.info() != Eigen::Success) {
    throw FactorizationError("covariance is not positive definite; cannot sample");
  }
  return llt.matrixL();
}

// Calls visit(x) for each point of one chunk, x = mean + L z.
template <typename Visit>
void draw_chunk(const Eigen::VectorXd& mean, const Eigen::MatrixXd& lower, std::uint64_t seed,
                std::size_t chunk, std::size_t count, Visit&& visit) {
  auto engine = chunk_engine(seed, chunk);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto dim = mean.size();
  Eigen::VectorXd z(dim);
  Eigen::VectorXd x(dim);
  for (std::size_t i = 0; i < count; ++i) {
    for (Eigen::Index k = 0; k < dim; ++k) z(k) = normal(engine);
    x.noalias() = lower.triangularView<Eigen::Lower>() * z;
    x += mean;
    visit(x);
  }
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// Probability mass of N(0,1) on [lo, hi], using the tail that avoids
// cancellation.
double normal_mass(double lo, double hi) {
  if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

struct WindowGeometry {
  double mean_B;
  double sd_B;
  Eigen::Vector3d slope;  // Cov[X, B] / Var[B] for X = Q', P', A
};

WindowGeometry window_geometry(const ExperimentConfig& config) {
  const GaussianState evolved = config.joint_evolved();
  const Eigen::VectorXd vB = embed_quadrature(4, 0, config.theta_B);
  const Eigen::VectorXd vA = embed_quadrature(4, 0, config.theta_A);
  const Eigen::VectorXd cB = evolved.cov() * vB;
  const double var_B = vB.dot(cB);
  if (!(var_B > 0.0)) throw SingularConditioning("postselected quadrature has zero variance");
  WindowGeometry geo;
  geo.mean_B = vB.dot(evolved.mean());
  geo.sd_B = std::sqrt(var_B);
  geo.slope = Eigen::Vector3d(cB(2), cB(3), vA.dot(cB)) / var_B;
  return geo;
}

}  // namespace

void CouplingSetup::validate() const {
  if (!std::isfinite(g)) throw DomainError("g must be finite");
  if (n_samples == 0) throw DomainError("n_samples must be at least 1");
  const GaussianState p = particle.state();
  const GaussianState d = device.state();
  if (!p.restricted()) throw DomainError("particle state violates the epistemic restriction");
  if (!d.restricted()) throw DomainError("device state violates the epistemic restriction");
}

GaussianState CouplingSetup::joint_initial() const { return tensor(particle.state(), device.state()); }

GaussianState CouplingSetup::joint_evolved() const {
  return evolve_joint(particle.state(), device.state(), g, theta_A);
}

void ExperimentConfig::validate() const {
  CouplingSetup::validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  if (!std::isfinite(b)) throw DomainError("b must be finite");
}

Eigen::MatrixXd sample_state(const GaussianState& state, std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n == 0) throw DomainError("sample count must be at least 1");
  const Eigen::MatrixXd lower = cholesky_factor(state);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(state.dim()), static_cast<Eigen::Index>(n));
  for_each_chunk(chunk_count(n), threads, [&](std::size_t c) {
    auto col = static_cast<Eigen::Index>(c * kChunkSize);
    draw_chunk(state.mean(), lower, seed, c, chunk_length(n, c), [&](const Eigen::VectorXd& x) {
      out.col(col++) = x;
    });
  });
  return out;
}

double adaptive_epsilon(const ExperimentConfig& config) {
  const GaussianState evolved = config.joint_evolved();
  return kAdaptiveEpsilonFraction * std::sqrt(quadrature_moments(evolved, 0, config.theta_B).variance);
}

double window_acceptance_probability(const ExperimentConfig& config) {
  const WindowGeometry geo = window_geometry(config);
  return normal_mass((config.b - config.epsilon - geo.mean_B) / geo.sd_B,
                     (config.b + config.epsilon - geo.mean_B) / geo.sd_B);
}

ConditionedMeans expected_window_bias(const ExperimentConfig& config) {
  const WindowGeometry geo = window_geometry(config);
  const double lo = (config.b - config.epsilon - geo.mean_B) / geo.sd_B;
  const double hi = (config.b + config.epsilon - geo.mean_B) / geo.sd_B;
  const double mass = normal_mass(lo, hi);
  if (!(mass > 0.0)) throw DegeneratePostselection("postselection window has zero probability");
  // Truncated-normal mean of B over the window, minus b.
  const double shift = geo.mean_B - config.b + geo.sd_B * (normal_pdf(lo) - normal_pdf(hi)) / mass;
  const Eigen::Vector3d bias = geo.slope * shift;
  return {bias(0), bias(1), bias(2)};
}

PostselectedEstimate run_weak_experiment(const ExperimentConfig& config) {
  config.validate();
  const GaussianState joint = config.joint_initial();
  const Eigen::MatrixXd lower = cholesky_factor(joint);
  const SymplecticMap map = coupling_map(config.g, config.theta_A);
  const std::size_t n = config.n_samples;
  const std::size_t n_chunks = chunk_count(n);

  struct ChunkResult {
    StreamingMoments<3> moments;
    double max_dP = 0.0;
    double max_dA = 0.0;
  };
  std::vector<ChunkResult> results(n_chunks);

  for_each_chunk(n_chunks, config.threads, [&](std::size_t c) {
    ChunkResult& r = results[c];
    draw_chunk(joint.mean(), lower, config.seed, c, chunk_length(n, c), [&](const Eigen::VectorXd& x) {
      const PhasePoint before{x(0), x(1), x(2), x(3)};
      const PhasePoint after = apply(map, before);
      r.max_dP = std::max(r.max_dP, std::abs(after.P - before.P));
      const double a_after = config.theta_A(after.q, after.p);
      r.max_dA = std::max(r.max_dA, std::abs(a_after - config.theta_A(before.q, before.p)));
      if (std::abs(config.theta_B(after.q, after.p) - config.b) <= config.epsilon) {
        r.moments.add(Eigen::Vector3d(after.Q, after.P, a_after));
      }
    });
  });

  StreamingMoments<3> total;
  PostselectedEstimate est;
  for (const ChunkResult& r : results) {
    total.merge(r.moments);
    est.max_momentum_change = std::max(est.max_momentum_change, r.max_dP);
    est.max_repeatability_defect = std::max(est.max_repeatability_defect, r.max_dA);
  }
  est.n_samples = n;
  est.n_accepted = static_cast<std::size_t>(total.count());
  est.acceptance_rate = static_cast<double>(est.n_accepted) / static_cast<double>(n);
  if (est.n_accepted < 2) throw InsufficientAcceptance(est.n_accepted, est.acceptance_rate);
  est.mean_Q = total.mean()(0);
  est.mean_P = total.mean()(1);
  est.mean_A_particle = total.mean()(2);
  est.se_Q = total.standard_error(0);
  est.se_P = total.standard_error(1);
  est.se_A = total.standard_error(2);
  return est;
}

std::uint64_t Histogram2D::total() const {
  std::uint64_t sum = overflow;
  for (auto c : counts) sum += c;
  return sum;
}

double Histogram2D::p_edge(std::size_t i) const {
  return p_range.lo + (p_range.hi - p_range.lo) * static_cast<double>(i) / static_cast<double>(bins);
}

double Histogram2D::P_edge(std::size_t j) const {
  return P_range.lo + (P_range.hi - P_range.lo) * static_cast<double>(j) / static_cast<double>(bins);
}

std::uint64_t Histogram2D::slice_count(std::size_t i) const {
  std::uint64_t sum = 0;
  for (std::size_t j = 0; j < bins; ++j) sum += count(i, j);
  return sum;
}

double Histogram2D::slice_mean_P(std::size_t i) const {
  double weighted = 0.0;
  std::uint64_t sum = 0;
  for (std::size_t j = 0; j < bins; ++j) {
    weighted += static_cast<double>(count(i, j)) * 0.5 * (P_edge(j) + P_edge(j + 1));
    sum += count(i, j);
  }
  return sum == 0 ? std::numeric_limits<double>::quiet_NaN() : weighted / static_cast<double>(sum);
}

void Histogram2D::write_csv(std::ostream& os) const {
  char buf[128];
  os << "p_lo,p_hi,P_lo,P_hi,count\n";
  for (std::size_t i = 0; i < bins; ++i) {
    for (std::size_t j = 0; j < bins; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", p_edge(i), p_edge(i + 1), P_edge(j),
                    P_edge(j + 1));
      os << buf << count(i, j) << '\n';
    }
  }
}

Histogram2D joint_momentum_histogram(const CouplingSetup& setup, std::size_t bins, Range p_range,
                                     Range P_range) {
  if (bins < 2) throw DomainError("histogram needs at least 2 bins per axis");
  if (!(p_range.hi > p_range.lo) || !(P_range.hi > P_range.lo)) throw DomainError("histogram range is empty");
  setup.validate();
  const GaussianState joint = setup.joint_initial();
  const Eigen::MatrixXd lower = cholesky_factor(joint);
  const SymplecticMap map = coupling_map(setup.g, setup.theta_A);
  const std::size_t n = setup.n_samples;
  const std::size_t n_chunks = chunk_count(n);

  auto bin_of = [bins](double x, Range r) -> long {
    if (!(x >= r.lo) || !(x < r.hi)) return -1;
    const auto k = static_cast<long>(std::floor((x - r.lo) / (r.hi - r.lo) * static_cast<double>(bins)));
    return std::min<long>(k, static_cast<long>(bins) - 1);
  };

  struct ChunkCounts {
    std::vector<std::uint64_t> counts;
    std::uint64_t overflow = 0;
  };
  std::vector<ChunkCounts> partial(n_chunks);
  for_each_chunk(n_chunks, setup.threads, [&](std::size_t c) {
    ChunkCounts& part = partial[c];
    part.counts.assign(bins * bins, 0);
    draw_chunk(joint.mean(), lower, setup.seed, c, chunk_length(n, c), [&](const Eigen::VectorXd& x) {
      const PhasePoint after = apply(map, PhasePoint{x(0), x(1), x(2), x(3)});
      const long i = bin_of(after.p, p_range);
      const long j = bin_of(after.P, P_range);
      if (i < 0 || j < 0) {
        ++part.overflow;
      } else {
        ++part.counts[static_cast<std::size_t>(i) * bins + static_cast<std::size_t>(j)];
      }
    });
  });

  Histogram2D h{p_range, P_range, bins, std::vector<std::uint64_t>(bins * bins, 0), 0};
  for (const ChunkCounts& part : partial) {
    for (std::size_t k = 0; k < part.counts.size(); ++k) h.counts[k] += part.counts[k];
    h.overflow += part.overflow;
  }
  return h;
}

std::vector<CorrelationEstimate> strong_measurement_correlation(std::span<const double> delta_Q_sequence,
                                                                const CouplingSetup& setup) {
  if (delta_Q_sequence.empty()) throw DomainError("delta_Q sequence is empty");
  for (std::size_t k = 0; k < delta_Q_sequence.size(); ++k) {
    if (!(delta_Q_sequence[k] > 0.0)) throw DomainError("delta_Q values must be positive");
    if (k > 0 && !(delta_Q_sequence[k] < delta_Q_sequence[k - 1])) {
      throw DomainError("delta_Q sequence must be strictly decreasing");
    }
  }
  if (setup.n_samples < 4) throw DomainError("correlation estimate needs at least 4 samples");

  std::vector<CorrelationEstimate> out;
  out.reserve(delta_Q_sequence.size());
  for (const double delta_Q : delta_Q_sequence) {
    CouplingSetup s = setup;
    s.device.delta_Q = delta_Q;
    s.validate();
    const GaussianState joint = s.joint_initial();
    const GaussianState evolved = s.joint_evolved();
    const Eigen::MatrixXd lower = cholesky_factor(joint);
    const SymplecticMap map = coupling_map(s.g, s.theta_A);
    const std::size_t n = s.n_samples;
    const std::size_t n_chunks = chunk_count(n);

    std::vector<StreamingMoments<2>> partial(n_chunks);
    for_each_chunk(n_chunks, s.threads, [&](std::size_t c) {
      draw_chunk(joint.mean(), lower, s.seed, c, chunk_length(n, c), [&](const Eigen::VectorXd& x) {
        const PhasePoint after = apply(map, PhasePoint{x(0), x(1), x(2), x(3)});
        partial[c].add(Eigen::Vector2d(after.Q, s.theta_A(after.q, after.p)));
      });
    });
    StreamingMoments<2> total;
    for (const auto& m : partial) total.merge(m);

    const Eigen::VectorXd vA = embed_quadrature(4, 0, s.theta_A);
    const Eigen::VectorXd cA = evolved.cov() * vA;
    const double var_A = vA.dot(cA);
    const double var_Q = evolved.cov()(2, 2);
    if (!(var_A > 0.0) || !(var_Q > 0.0)) throw DomainError("degenerate variance in correlation");
    const double r = total.correlation(0, 1);
    if (!std::isfinite(r)) throw DomainError("degenerate sample variance in correlation");

    out.push_back({delta_Q, r, cA(2) / std::sqrt(var_A * var_Q),
                   1.0 / std::sqrt(static_cast<double>(n) - 3.0)});
  }
  return out;
}

}  // namespace erl
