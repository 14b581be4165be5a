#include "erl/montecarlo.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "erl/dynamics.hpp"
#include "erl/errors.hpp"
#include "erl/streaming_moments.hpp"

using namespace erl;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

ExperimentConfig fig2_config(double g, std::size_t n) {
  ExperimentConfig c;
  c.particle = {0.0, 0.0, 1.0};
  c.device = {1.0, 0.0, 0.0};
  c.g = g;
  c.theta_A = Quadrature(0.0);
  c.theta_B = Quadrature(pi / 2);
  c.b = 1.0;
  c.n_samples = n;
  c.seed = 7;
  c.epsilon = adaptive_epsilon(c);
  return c;
}

bool within(double estimate, double se, double reference, double bias) {
  return std::abs(estimate - reference) <= 3.0 * se + std::abs(bias);
}

}  // namespace

TEST_CASE("sample_state moments") {
  const std::size_t n = 1000000;
  const Eigen::MatrixXd x = sample_state(make_particle(0.0, 0.0, 1.0), n, 42);
  REQUIRE(x.cols() == static_cast<Eigen::Index>(n));
  const double mean_q = x.row(0).mean();
  const double mean_p = x.row(1).mean();
  CHECK(std::abs(mean_q) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(mean_p) < 4.0 * 0.5 / std::sqrt(double(n)));
  const double var_q = (x.row(0).array() - mean_q).square().mean();
  const double var_p = (x.row(1).array() - mean_p).square().mean();
  CHECK(var_q == Approx(1.0).epsilon(0.01));
  CHECK(var_p == Approx(0.25).epsilon(0.01));
}

TEST_CASE("sampling is deterministic and independent of thread count") {
  const GaussianState joint = tensor(make_particle(0.2, 0.1, 0.9), make_pure_device(1.1, 0.3, -0.4));
  const std::size_t n = 3 * kChunkSize + 123;
  const Eigen::MatrixXd a = sample_state(joint, n, 99, 1);
  const Eigen::MatrixXd b = sample_state(joint, n, 99, 4);
  CHECK(a == b);
  CHECK(sample_state(joint, n, 100, 1) != a);
}

TEST_CASE("degenerate covariance is rejected") {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  cov(0, 0) = 1.0;
  const GaussianState flat(Eigen::Vector2d::Zero(), cov);
  CHECK_THROWS_AS(sample_state(flat, 10, 1), FactorizationError);
  CHECK_THROWS_AS(sample_state(make_particle(0, 0, 1), 0, 1), DomainError);
}

TEST_CASE("streaming moments merge equals a single pass") {
  StreamingMoments<2> all, left, right;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector2d x(std::sin(k * 0.37), std::cos(k * 0.11) + 0.01 * k);
    all.add(x);
    (k < 377 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count() == all.count());
  CHECK((left.mean() - all.mean()).norm() < 1e-12);
  CHECK((left.covariance() - all.covariance()).norm() < 1e-12);
}

TEST_CASE("run_weak_experiment: no coupling, no shift") {
  ExperimentConfig c = fig2_config(0.0, 400000);
  c.device.mu_P = 0.3;
  c.epsilon = adaptive_epsilon(c);
  const PostselectedEstimate e = run_weak_experiment(c);
  CHECK(within(e.mean_Q, e.se_Q, 0.0, 0.0));
  CHECK(within(e.mean_P, e.se_P, 0.3, 0.0));
  CHECK(e.max_momentum_change == 0.0);
}

TEST_CASE("run_weak_experiment: postselection biases the pointer momentum") {
  const ExperimentConfig c = fig2_config(0.1, 1000000);
  const PostselectedEstimate e = run_weak_experiment(c);
  const ConditionedMeans oracle = conditioned_means(c.particle, c.device, c.g, c.theta_A, c.theta_B, c.b);
  const ConditionedMeans bias = expected_window_bias(c);
  CHECK(oracle.mean_P < 0.0);
  CHECK(e.mean_P < 0.0);
  CHECK(within(e.mean_P, e.se_P, oracle.mean_P, bias.mean_P));
  CHECK(within(e.mean_Q, e.se_Q, oracle.mean_Q, bias.mean_Q));
  CHECK(within(e.mean_A_particle, e.se_A, oracle.mean_A, bias.mean_A));
  CHECK(e.max_momentum_change == 0.0);
  CHECK(e.max_repeatability_defect < 1e-12);
  CHECK(e.n_accepted <= e.n_samples);
}

TEST_CASE("run_weak_experiment: postselecting the measured quadrature gives no momentum bias") {
  for (double g : {0.2, 0.8}) {
    ExperimentConfig c = fig2_config(g, 300000);
    c.theta_B = c.theta_A;
    c.b = 0.4;
    c.epsilon = adaptive_epsilon(c);
    const PostselectedEstimate e = run_weak_experiment(c);
    CHECK(within(e.mean_P, e.se_P, 0.0, 0.0));
  }
}

TEST_CASE("run_weak_experiment is reproducible across thread counts") {
  ExperimentConfig c = fig2_config(0.3, 5 * kChunkSize + 17);
  c.threads = 1;
  const PostselectedEstimate a = run_weak_experiment(c);
  c.threads = 3;
  const PostselectedEstimate b = run_weak_experiment(c);
  CHECK(a.mean_Q == b.mean_Q);
  CHECK(a.mean_P == b.mean_P);
  CHECK(a.se_A == b.se_A);
  CHECK(a.n_accepted == b.n_accepted);
}

TEST_CASE("acceptance rate matches the window probability") {
  const ExperimentConfig c = fig2_config(0.5, 1000000);
  const PostselectedEstimate e = run_weak_experiment(c);
  const double p = window_acceptance_probability(c);
  const double se = std::sqrt(p * (1.0 - p) / double(c.n_samples));
  CHECK(std::abs(e.acceptance_rate - p) <= 3.0 * se);
  // Roughly 2 epsilon times the density of B at b.
  const GaussianState ev = c.joint_evolved();
  const Moments mb = quadrature_moments(ev, 0, c.theta_B);
  const double density = std::exp(-0.5 * (c.b - mb.mean) * (c.b - mb.mean) / mb.variance) /
                         std::sqrt(2.0 * pi * mb.variance);
  CHECK(p == Approx(2.0 * c.epsilon * density).epsilon(1e-3));
}

TEST_CASE("window bias is second order in epsilon") {
  ExperimentConfig c = fig2_config(0.4, 10);
  c.particle = {0.2, -0.5, 0.9};
  c.device.omega = 0.6;
  std::vector<double> bias;
  for (double eps : {0.2, 0.1, 0.05, 0.025}) {
    c.epsilon = eps;
    bias.push_back(expected_window_bias(c).mean_P);
  }
  const double r1 = bias[0] / bias[1], r2 = bias[1] / bias[2], r3 = bias[2] / bias[3];
  CHECK(std::abs(r3 - 4.0) < std::abs(r2 - 4.0));
  CHECK(std::abs(r2 - 4.0) < std::abs(r1 - 4.0));
  CHECK(r3 == Approx(4.0).epsilon(0.01));
}

TEST_CASE("too narrow or too remote a window is reported") {
  ExperimentConfig c = fig2_config(0.1, 1000);
  c.b = 40.0;
  try {
    run_weak_experiment(c);
    FAIL("expected InsufficientAcceptance");
  } catch (const InsufficientAcceptance& e) {
    CHECK(e.accepted() < 2);
    CHECK(e.acceptance_rate() < 0.01);
  }
  c.epsilon = 0.0;
  CHECK_THROWS_AS(run_weak_experiment(c), DomainError);
  ExperimentConfig bad = fig2_config(0.1, 1000);
  bad.n_samples = 0;
  CHECK_THROWS_AS(run_weak_experiment(bad), DomainError);
}

TEST_CASE("joint momentum histogram") {
  CouplingSetup s;
  s.particle = {0.0, 0.0, 1.0};
  s.device = {1.0, 0.0, 0.0};
  s.theta_A = Quadrature(0.0);
  s.n_samples = 400000;
  s.seed = 5;

  SUBCASE("counts add up") {
    s.g = 0.5;
    const Histogram2D h = joint_momentum_histogram(s, 20, {-1.0, 1.0}, {-1.0, 1.0});
    CHECK(h.total() == s.n_samples);
    CHECK(h.overflow > 0);
    std::ostringstream os;
    h.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.rfind("p_lo,p_hi,P_lo,P_hi,count\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 20 * 20 + 1);
  }

  SUBCASE("no coupling: product structure") {
    s.g = 0.0;
    const Histogram2D h = joint_momentum_histogram(s, 12, {-1.5, 1.5}, {-2.0, 2.0});
    for (std::size_t i = 2; i < 10; ++i) {
      const double se = 0.5 / std::sqrt(double(h.slice_count(i)));
      CHECK(std::abs(h.slice_mean_P(i)) < 4.0 * se + 0.01);
    }
  }

  SUBCASE("coupling: slice means follow the regression of P on p'") {
    s.g = 1.0;
    const GaussianState ev = s.joint_evolved();
    const double slope = ev.cov()(1, 3) / ev.cov()(1, 1);
    CHECK(slope < 0.0);
    const Histogram2D h = joint_momentum_histogram(s, 30, {-1.5, 1.5}, {-3.0, 3.0});
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t i = 5; i < 25; i += 4) {
      const double centre = 0.5 * (h.p_edge(i) + h.p_edge(i + 1));
      const double m = h.slice_mean_P(i);
      CHECK(m < prev);
      CHECK(m == Approx(slope * centre).epsilon(0.1).scale(0.05));
      prev = m;
    }
  }

  CHECK_THROWS_AS(joint_momentum_histogram(s, 1, {-1, 1}, {-1, 1}), DomainError);
  CHECK_THROWS_AS(joint_momentum_histogram(s, 10, {1, 1}, {-1, 1}), DomainError);
}

TEST_CASE("strong measurement correlation") {
  CouplingSetup s;
  s.particle = {0.0, 0.0, 1.0};
  s.device = {1.0, 0.0, 0.0};
  s.g = 1.0;
  s.theta_A = Quadrature(0.0);
  s.n_samples = 100000;
  s.seed = 11;
  const std::vector<double> widths{10.0, 1.0, 0.1};
  const auto est = strong_measurement_correlation(widths, s);
  REQUIRE(est.size() == 3);
  // rho^2 = g^2 Var A / (dQ^2 + g^2 Var A), Var A = 1.
  CHECK(est[0].exact == Approx(1.0 / std::sqrt(101.0)));
  for (const auto& e : est) CHECK(std::abs(std::atanh(e.sample) - std::atanh(e.exact)) <= 3.0 * e.fisher_se);
  CHECK(est[0].sample < est[1].sample);
  CHECK(est[1].sample < est[2].sample);

  s.g = 0.0;
  const auto none = strong_measurement_correlation(widths, s);
  for (const auto& e : none) {
    CHECK(e.exact == 0.0);
    CHECK(std::abs(e.sample) < 3.0 / std::sqrt(double(s.n_samples)));
  }
  const std::vector<double> rising{0.1, 1.0};
  CHECK_THROWS_AS(strong_measurement_correlation(rising, s), DomainError);
}
