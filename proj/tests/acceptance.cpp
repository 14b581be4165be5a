// Acceptance gate: one PASS/FAIL line per criterion, each with its runtime
// budget. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "erl/analytic.hpp"
#include "erl/bounds.hpp"
#include "erl/dynamics.hpp"
#include "erl/montecarlo.hpp"
#include "erl/verify.hpp"

using namespace erl;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> check;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  const auto grid = oracle_grid();
  for (const OracleGridPoint& pt : grid) {
    const ParticleParams particle{pt.mu_q, pt.mu_p, pt.sigma};
    const DeviceParams device{pt.delta_Q, 0.0, pt.omega};
    const Quadrature qa(pt.theta_A), qb(pt.theta_B);
    const DeviceMeans closed = postselected_means_gaussian(particle, pt.delta_Q, pt.omega, pt.g, qa, qb, pt.b);
    const ConditionedMeans cond = conditioned_means(particle, device, pt.g, qa, qb, pt.b);
    worst = std::max({worst, relative_deviation(closed.mean_Q, cond.mean_Q),
                      relative_deviation(closed.mean_P, cond.mean_P)});
  }
  return {grid.size() >= 200 && worst <= 1e-9,
          fmt("max relative deviation %.3g (limit 1e-9) over %zu grid points", worst, grid.size())};
}

Outcome weak_coupling_law() {
  const ParticleParams particle{0.0, 0.0, 1.0};
  const Quadrature qa(0.0), qb(pi / 2);
  double worst = std::numeric_limits<double>::infinity();
  int sequences = 0, skipped = 0;
  for (const double omega : {0.0, 1.0}) {
    const DeviceParams device{1.0, 0.0, omega};
    const WeakValue wv = weak_value_gaussian(particle, qa, qb, 1.0);
    std::vector<double> res_Q, res_P;
    for (const double g : {0.2, 0.1, 0.05, 0.025}) {
      const DeviceMeans m = postselected_means_gaussian(particle, 1.0, omega, g, qa, qb, 1.0);
      const FirstOrderShifts f = first_order_shifts(wv, g, device.delta_P(), omega);
      res_Q.push_back(std::abs(m.mean_Q - f.q_shift));
      res_P.push_back(std::abs(m.mean_P - f.p_shift));
    }
    for (const auto* res : {&res_Q, &res_P}) {
      // A residual that is zero up to rounding at every g has no order.
      if (*std::max_element(res->begin(), res->end()) <= 1e-14) {
        ++skipped;
        continue;
      }
      ++sequences;
      for (double order : halving_orders(*res)) worst = std::min(worst, order);
    }
  }
  return {sequences > 0 && worst >= 2.5,
          fmt("min estimated order %.3f (limit 2.5) over %d residual sequences, %d identically zero", worst,
              sequences, skipped)};
}

Outcome delta_P_limit() {
  const ParticleParams particle{0.3, -0.2, 1.0};
  const Quadrature qa(pi / 6), qb(pi / 3);
  const double g = 0.05, b = 0.7;
  const WeakValue wv = weak_value_gaussian(particle, qa, qb, b);
  double prev_Q = std::numeric_limits<double>::infinity(), prev_P = prev_Q;
  bool monotone = true;
  std::vector<double> mean_P;
  for (double delta_P = 0.4; delta_P >= 0.025 - 1e-15; delta_P /= 2.0) {
    const DeviceMeans m = postselected_means_gaussian(particle, device_delta_Q(delta_P, 0.0), 0.0, g, qa, qb, b);
    const double dev_Q = std::abs(m.mean_Q - g * wv.re);
    const double dev_P = std::abs(m.mean_P);
    monotone = monotone && dev_Q < prev_Q && dev_P < prev_P;
    prev_Q = dev_Q;
    prev_P = dev_P;
    mean_P.push_back(m.mean_P);
  }
  const double last_ratio = mean_P[mean_P.size() - 2] / mean_P.back();
  const bool pass = monotone && prev_Q <= 1e-4 * g && std::abs(last_ratio - 4.0) < 0.05;
  return {pass, fmt("final |<Q>_b - g Re| = %.3g (limit %.3g), final |<P>_b| = %.3g shrinking by %.4f per halving, %s",
                    prev_Q, 1e-4 * g, prev_P, last_ratio, monotone ? "monotone" : "NOT monotone")};
}

Outcome conditional_expectation() {
  const ParticleParams particle{0.3, -0.2, 1.0};
  const double g = 0.05;
  const DeviceParams device{device_delta_Q(0.025, 0.0), 0.0, 0.0};
  double worst = 0.0;
  int tuples = 0;
  for (const double ta : {0.0, pi / 8, pi / 4, pi / 3, 2 * pi / 3}) {
    for (const double tb : {pi / 6, 5 * pi / 6}) {
      for (const double b : {0.7, -1.2}) {
        const Quadrature qa(ta), qb(tb);
        const GaussianState evolved = evolve_joint(particle.state(), device.state(), g, qa);
        const double cond = conditional_expectation_A(evolved, qa, qb, b);
        const double re = weak_value_gaussian(particle, qa, qb, b).re;
        worst = std::max(worst, relative_deviation(cond, re));
        ++tuples;
      }
    }
  }
  return {tuples == 20 && worst <= 1e-3,
          fmt("max relative deviation %.3g (limit 1e-3) over %d (theta_A, theta_B, b) tuples", worst, tuples)};
}

ExperimentConfig mc_config(double g, double theta_A, double theta_B, double b, ParticleParams particle,
                           DeviceParams device) {
  ExperimentConfig c;
  c.particle = particle;
  c.device = device;
  c.g = g;
  c.theta_A = Quadrature(theta_A);
  c.theta_B = Quadrature(theta_B);
  c.b = b;
  c.n_samples = 1000000;
  c.seed = 20261015;
  c.epsilon = adaptive_epsilon(c);
  return c;
}

Outcome monte_carlo_consistency() {
  const ParticleParams unit{0.0, 0.0, 1.0};
  const DeviceParams pointer{1.0, 0.0, 0.0};
  const std::vector<ExperimentConfig> suite{
      mc_config(0.1, 0.0, pi / 2, 1.0, unit, pointer),
      mc_config(0.5, 0.0, pi / 2, 1.0, unit, pointer),
      mc_config(0.0, 0.0, pi / 2, 1.0, unit, pointer),
      mc_config(0.3, pi / 4, pi / 4, 0.5, unit, pointer),
      mc_config(0.3, 0.0, pi / 2, 1.0, unit, {1.0, 0.0, 1.0}),
      mc_config(0.3, pi / 8, pi / 3, 0.2, {0.3, -0.7, 1.0}, pointer),
      mc_config(0.3, 0.0, pi / 2, 1.0, unit, {1.0, 0.4, 0.0}),
      mc_config(1.0, 0.0, pi / 2, 1.0, unit, pointer),
      mc_config(0.3, 0.0, pi / 2, 0.5, {0.0, 0.0, 0.5}, pointer),
      mc_config(0.3, 0.0, pi / 3, 1.0, unit, {0.5, 0.0, 0.0}),
      mc_config(0.3, pi / 8, 3 * pi / 4, -0.5, {0.0, 0.0, 2.0}, {1.0, 0.0, 1.0}),
      mc_config(0.3, 5 * pi / 4, pi / 2, 1.0, unit, pointer),
  };
  int within = 0, total = 0;
  double worst_z = 0.0, bias_z = 0.0, max_dP = 0.0;
  for (std::size_t k = 0; k < suite.size(); ++k) {
    const ExperimentConfig& c = suite[k];
    const PostselectedEstimate e = run_weak_experiment(c);
    const ConditionedMeans oracle = conditioned_means(c.particle, c.device, c.g, c.theta_A, c.theta_B, c.b);
    const ConditionedMeans bias = expected_window_bias(c);
    const double est[] = {e.mean_Q, e.mean_P, e.mean_A_particle};
    const double se[] = {e.se_Q, e.se_P, e.se_A};
    const double ref[] = {oracle.mean_Q, oracle.mean_P, oracle.mean_A};
    const double allowance[] = {bias.mean_Q, bias.mean_P, bias.mean_A};
    for (int i = 0; i < 3; ++i) {
      ++total;
      const double excess = std::max(0.0, std::abs(est[i] - ref[i]) - std::abs(allowance[i]));
      worst_z = std::max(worst_z, excess / se[i]);
      if (excess <= 3.0 * se[i]) ++within;
    }
    max_dP = std::max(max_dP, e.max_momentum_change);
    if (k == 1) bias_z = e.mean_P / e.se_P;
  }
  const bool pass = within == total && std::abs(bias_z) > 5.0 && max_dP == 0.0;
  return {pass, fmt("%d/%d means within 3 SE + window bias (worst %.2f SE); g=0.5 momentum z = %.1f; "
                    "max |P'-P| = %g",
                    within, total, worst_z, bias_z, max_dP)};
}

Outcome repeatability() {
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> coupling(-2.0, 2.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * pi);
  std::normal_distribution<double> coord(0.0, 2.0);
  double dA = 0.0, dP = 0.0, defect = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const Quadrature qa(angle(rng));
    const SymplecticMap map = coupling_map(coupling(rng), qa);
    const PhasePoint pt{coord(rng), coord(rng), coord(rng), coord(rng)};
    const PhasePoint out = apply(map, pt);
    dA = std::max(dA, std::abs(qa(out.q, out.p) - qa(pt.q, pt.p)));
    dP = std::max(dP, std::abs(out.P - pt.P));
    defect = std::max(defect, map.symplectic_defect());
  }
  return {std::max({dA, dP, defect}) <= 1e-12,
          fmt("max |A'-A| = %.3g, max |P'-P| = %.3g, max symplectic defect = %.3g (limit 1e-12) over 1e5 triples", dA,
              dP, defect)};
}

Outcome strong_limit() {
  CouplingSetup s;
  s.particle = {0.0, 0.0, 1.0};
  s.device = {1.0, 0.0, 0.0};
  s.g = 1.0;
  s.theta_A = Quadrature(0.0);
  s.n_samples = 100000;
  s.seed = 20261015;
  const std::vector<double> widths{10.0, 1.0, 0.1, 0.01, 0.001};
  const auto est = strong_measurement_correlation(widths, s);
  bool match = true;
  double worst = 0.0;
  for (const auto& e : est) {
    const double z = std::abs(std::atanh(e.sample) - std::atanh(e.exact)) / e.fisher_se;
    worst = std::max(worst, z);
    match = match && z <= 3.0;
  }
  const double last = est.back().sample;
  return {match && last > 0.999,
          fmt("r(Q',A) = %.7f at delta_Q = 1e-3 (limit 0.999); worst Fisher z against exact = %.2f (limit 3)", last,
              worst)};
}

Outcome regime_bounds() {
  int checked = 0, failed = 0;
  double worst = 0.0;
  const double angles[] = {0.0, pi / 8, pi / 3, pi / 2, 3 * pi / 4};
  const ParticleParams base{0.0, 0.0, 1.0};
  for (const double g : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
    for (const double sigma : {0.5, 1.0, 2.0}) {
      for (const double dq : {0.5, 1.0, 2.0}) {
        for (const double omega : {-1.0, 0.0, 1.0}) {
          for (const double ta : angles) {
            for (const double tb : angles) {
              for (const double b : {-1.0, 0.5, 1.0}) {
                const ParticleParams particle{base.mu_q, base.mu_p, sigma};
                const Quadrature qa(ta), qb(tb);
                const double delta_P = device_delta_P(dq, omega);
                const RegimeMargin m = gaussian_regime_margin(g, delta_P, sigma, qa, qb);
                if (m.classification != Regime::weak && m.classification != Regime::deep_weak) continue;
                const DeviceMeans exact = postselected_means_gaussian(particle, dq, omega, g, qa, qb, b);
                const FirstOrderShifts f =
                    first_order_shifts(weak_value_gaussian(particle, qa, qb, b), g, delta_P, omega);
                const double err = std::abs(f.q_shift - exact.mean_Q);
                const double scale = std::abs(exact.mean_Q);
                ++checked;
                if (err <= 0.1 * scale || err <= 1e-15) {
                  if (scale > 0.0) worst = std::max(worst, err / scale);
                } else {
                  ++failed;
                }
              }
            }
          }
        }
      }
    }
  }
  // Hand-computed discrete bounds: rhs = 1 / (max gap)^2.
  const double ev1[] = {-1.0, 1.0};
  const double ev2[] = {0.0, 1.0, 3.0};
  const RegimeMargin d1 = discrete_regime_margin(0.1, 0.5, ev1);
  const RegimeMargin d2 = discrete_regime_margin(0.2, 0.5, ev2);
  const bool discrete_ok = d1.rhs == 0.25 && std::abs(d1.ratio - 0.01) < 1e-15 && d2.rhs == 1.0 / 9.0 &&
                           std::abs(d2.ratio - 0.09) < 1e-15 && d2.classification == Regime::weak;
  return {failed == 0 && checked > 0 && discrete_ok,
          fmt("%d/%d weak-or-better grid points within 10%% (worst %.4f); discrete bounds %s", checked - failed,
              checked, worst, discrete_ok ? "exact" : "WRONG")};
}

Outcome discrete_kernel() {
  using cplx = std::complex<double>;
  const double phi = pi / 8;
  const double h = 1.0 / std::numbers::sqrt2;
  const DiscreteSpectrumInput in{{h, h}, {std::cos(phi), cplx(0.0, std::sin(phi))}, {1.0, -1.0}};
  const WeakValue wv = weak_value_discrete(in);
  const double dev = std::abs(wv.as_complex() - std::exp(cplx(0.0, -2.0 * phi)));
  const double delta_P = 0.8, omega = 0.5;
  std::vector<double> res;
  for (const double g : {0.2, 0.1, 0.05, 0.025}) {
    const DeviceMeans m = postselected_means_discrete(in, g, delta_P, 0.0, omega);
    const FirstOrderShifts f = first_order_shifts(wv, g, delta_P, omega);
    res.push_back(std::max(std::abs(m.mean_Q - f.q_shift), std::abs(m.mean_P - f.p_shift)));
  }
  const auto orders = halving_orders(res);
  const double worst = *std::min_element(orders.begin(), orders.end());
  return {dev <= 1e-12 && worst >= 2.5,
          fmt("|A_w - exp(-2i phi)| = %.3g (limit 1e-12); min g->0 residual order %.3f (limit 2.5)", dev, worst)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"AC1", "oracle equivalence", 1.0, oracle_equivalence},
      {"AC2", "weak-coupling law", 1.0, weak_coupling_law},
      {"AC3", "delta_P -> 0 law", 1.0, delta_P_limit},
      {"AC4", "conditional expectation", 1.0, conditional_expectation},
      {"AC5", "Monte Carlo consistency", 60.0, monte_carlo_consistency},
      {"AC6", "repeatability and symplecticity", 5.0, repeatability},
      {"AC7", "strong-measurement limit", 10.0, strong_limit},
      {"AC8", "regime bounds", 1.0, regime_bounds},
      {"AC9", "discrete kernel", 1.0, discrete_kernel},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = o.pass && seconds < c.budget_seconds;
    failures += pass ? 0 : 1;
    std::printf("%s %s %s: %s [%.2f s, budget %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                seconds, c.budget_seconds);
  }
  std::fflush(stdout);
  return failures == 0 ? 0 : 1;
}
