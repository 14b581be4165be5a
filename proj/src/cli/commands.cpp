#include "erl/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "erl/analytic.hpp"
#include "erl/bounds.hpp"
#include "erl/cli/config.hpp"
#include "erl/cli/csv.hpp"
#include "erl/errors.hpp"
#include "erl/montecarlo.hpp"
#include "erl/verify.hpp"
#include "json.hpp"

namespace erl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool mc = false;
  bool quiet = false;
  double mutate_alpha = 0.0;
};

/// ISO 8601 UTC time; SOURCE_DATE_EPOCH pins it for reproducible output.
std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end != env && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Running maximum of absolute and relative deviations from a reference.
struct DeviationSummary {
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::size_t count = 0;

  void add(double value, double reference) {
    if (!std::isfinite(value) || !std::isfinite(reference)) return;
    max_abs = std::max(max_abs, std::abs(value - reference));
    max_rel = std::max(max_rel, relative_deviation(value, reference));
    ++count;
  }

  json to_json() const {
    if (count == 0) return nullptr;
    return {{"max_abs_deviation", max_abs}, {"max_rel_deviation", max_rel}, {"comparisons", count}};
  }
};

class Run {
 public:
  Run(std::string command, const Options& opts, std::ostream& err)
      : command_(std::move(command)), opts_(opts), err_(err), started_(timestamp()) {}

  RunConfig load() {
    RunConfig c = load_config(opts_.config_path);
    if (opts_.seed) c.seed = *opts_.seed;
    return c;
  }

  void save(const CsvTable& table, const std::string& name) { save_text(table.text(), name); }

  void save_text(const std::string& text, const std::string& name) {
    fs::create_directories(opts_.out_dir);
    const fs::path path = fs::path(opts_.out_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    outputs_.push_back(path.generic_string());
    note("wrote " + path.generic_string());
  }

  void write_manifest(const RunConfig& config, const std::vector<double>& epsilons, json oracle) {
    json echo = to_json(config);
    if (epsilons.size() == 1) echo["postselection"]["epsilon"] = epsilons.front();
    json m;
    m["tool"] = "erlwv";
    m["version"] = ERL_VERSION;
    m["command"] = command_;
    m["seed"] = config.seed;
    m["config"] = echo;
    m["resolved_epsilon"] = epsilons;
    m["started_utc"] = started_;
    m["finished_utc"] = timestamp();
    m["outputs"] = outputs_;
    m["oracle_comparison"] = std::move(oracle);
    const fs::path path = fs::path(opts_.out_dir) / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + path.string());
    note("wrote " + path.generic_string());
  }

  void note(const std::string& line) {
    if (!opts_.quiet) err_ << line << '\n';
  }

 private:
  std::string command_;
  const Options& opts_;
  std::ostream& err_;
  std::string started_;
  std::vector<std::string> outputs_;
};

int cmd_weakvalue(const Options& opts, std::ostream& out, std::ostream& err) {
  Run run("weakvalue", opts, err);
  const RunConfig c = run.load();
  const double delta_P = c.device.delta_P();
  WeakValue wv;
  RegimeMargin regime;
  if (c.discrete) {
    wv = weak_value_discrete(*c.discrete);
    regime = discrete_regime_margin(c.g, delta_P, c.discrete->eigenvalues);
  } else {
    const Quadrature tA(c.theta_A), tB(c.theta_B);
    wv = weak_value_gaussian(c.particle, tA, tB, c.b);
    regime = gaussian_regime_margin(c.g, delta_P, c.particle.sigma, tA, tB);
  }
  const FirstOrderShifts shift = first_order_shifts(wv, c.g, delta_P, c.device.omega);
  out << "weak_value.re = " << format_real(wv.re) << '\n'
      << "weak_value.im = " << format_real(wv.im) << '\n'
      << "first_order.q_shift = " << format_real(shift.q_shift) << '\n'
      << "first_order.p_shift = " << format_real(shift.p_shift) << '\n'
      << "regime.lhs = " << format_real(regime.lhs) << '\n'
      << "regime.rhs = " << format_real(regime.rhs) << '\n'
      << "regime.ratio = " << format_real(regime.ratio) << '\n'
      << "regime = " << to_string(regime.classification) << '\n';
  return kExitOk;
}

struct McColumns {
  PostselectedEstimate estimate;
  std::string error;

  static PostselectedEstimate missing(std::size_t n, std::size_t accepted) {
    PostselectedEstimate e;
    e.mean_Q = e.mean_P = e.mean_A_particle = kNaN;
    e.se_Q = e.se_P = e.se_A = kNaN;
    e.n_samples = n;
    e.n_accepted = accepted;
    return e;
  }
};

McColumns run_point(const ExperimentConfig& e) {
  try {
    return {run_weak_experiment(e), ""};
  } catch (const InsufficientAcceptance& ex) {
    return {McColumns::missing(e.n_samples, ex.accepted()), "insufficient_acceptance"};
  }
}

int cmd_simulate(const Options& opts, std::ostream& err) {
  Run run("simulate", opts, err);
  const RunConfig c = run.load();
  if (c.discrete) throw ConfigError("discrete", "simulate samples the Gaussian model only");
  CsvTable table({"g", "theta_A", "theta_B", "b", "epsilon", "n", "accepted", "mean_Q", "se_Q", "mean_P",
                  "se_P", "mean_A", "se_A", "oracle_Q", "oracle_P", "oracle_A", "error"});
  DeviationSummary summary;
  std::vector<double> epsilons;
  bool failed = false;
  for (const GridPoint& pt : expand_grid(c)) {
    const ExperimentConfig e = experiment_at(c, pt);
    const ConditionedMeans oracle = conditioned_means(e.particle, e.device, e.g, e.theta_A, e.theta_B, e.b);
    const McColumns mc = run_point(e);
    const PostselectedEstimate& r = mc.estimate;
    failed = failed || !mc.error.empty();
    epsilons.push_back(e.epsilon);
    summary.add(r.mean_Q, oracle.mean_Q);
    summary.add(r.mean_P, oracle.mean_P);
    summary.add(r.mean_A_particle, oracle.mean_A);
    table.add(pt.g).add(pt.theta_A).add(pt.theta_B).add(pt.b).add(e.epsilon);
    table.add(std::uint64_t{r.n_samples}).add(std::uint64_t{r.n_accepted});
    table.add(r.mean_Q).add(r.se_Q).add(r.mean_P).add(r.se_P).add(r.mean_A_particle).add(r.se_A);
    table.add(oracle.mean_Q).add(oracle.mean_P).add(oracle.mean_A).add(mc.error);
    table.end_row();
  }
  run.save(table, "simulate.csv");
  run.write_manifest(c, epsilons, {{"monte_carlo_vs_conditioning", summary.to_json()}});
  if (failed) err << "erlwv: some rows had too few accepted points\n";
  return failed ? kExitFailure : kExitOk;
}

int cmd_sweep(const Options& opts, std::ostream& err) {
  Run run("sweep", opts, err);
  const RunConfig c = run.load();
  if (opts.mc && c.discrete) throw ConfigError("discrete", "--mc samples the Gaussian model only");
  std::vector<std::string> header{"g",       "delta_Q", "delta_P", "omega",   "theta_A",    "theta_B",
                                  "b",       "wv_re",   "wv_im",   "exact_Q", "exact_P",    "first_Q",
                                  "first_P", "residual_Q", "residual_P", "regime_ratio", "regime"};
  if (opts.mc) {
    for (const char* h : {"epsilon", "n", "accepted", "mc_Q", "se_Q", "mc_P", "se_P", "mc_A", "se_A", "error"})
      header.emplace_back(h);
  }
  CsvTable table(std::move(header));
  DeviationSummary closed_vs_conditioning, mc_vs_exact;
  std::vector<double> epsilons;
  bool failed = false;
  const double omega = c.device.omega;
  const double mu_P = c.device.mu_P;

  for (const GridPoint& pt : expand_grid(c)) {
    const double delta_P = device_delta_P(pt.delta_Q, omega);
    const Quadrature tA(pt.theta_A), tB(pt.theta_B);
    WeakValue wv;
    DeviceMeans exact;
    RegimeMargin regime;
    if (c.discrete) {
      wv = weak_value_discrete(*c.discrete);
      exact = postselected_means_discrete(*c.discrete, pt.g, delta_P, mu_P, omega);
      regime = discrete_regime_margin(pt.g, delta_P, c.discrete->eigenvalues);
    } else {
      wv = weak_value_gaussian(c.particle, tA, tB, pt.b);
      DeviceParams device = c.device;
      device.delta_Q = pt.delta_Q;
      const ConditionedMeans cond = conditioned_means(c.particle, device, pt.g, tA, tB, pt.b);
      if (mu_P == 0.0) {
        exact = postselected_means_gaussian(c.particle, pt.delta_Q, omega, pt.g, tA, tB, pt.b);
        closed_vs_conditioning.add(exact.mean_Q, cond.mean_Q);
        closed_vs_conditioning.add(exact.mean_P, cond.mean_P);
      } else {
        exact = {cond.mean_Q, cond.mean_P};
      }
      regime = gaussian_regime_margin(pt.g, delta_P, c.particle.sigma, tA, tB);
    }
    const FirstOrderShifts shift = first_order_shifts(wv, pt.g, delta_P, omega);
    const double first_Q = shift.q_shift;
    const double first_P = mu_P + shift.p_shift;

    table.add(pt.g).add(pt.delta_Q).add(delta_P).add(omega).add(pt.theta_A).add(pt.theta_B).add(pt.b);
    table.add(wv.re).add(wv.im).add(exact.mean_Q).add(exact.mean_P).add(first_Q).add(first_P);
    table.add(exact.mean_Q - first_Q).add(exact.mean_P - first_P).add(regime.ratio);
    table.add(to_string(regime.classification));
    if (opts.mc) {
      const ExperimentConfig e = experiment_at(c, pt);
      const McColumns mc = run_point(e);
      const PostselectedEstimate& r = mc.estimate;
      failed = failed || !mc.error.empty();
      epsilons.push_back(e.epsilon);
      mc_vs_exact.add(r.mean_Q, exact.mean_Q);
      mc_vs_exact.add(r.mean_P, exact.mean_P);
      table.add(e.epsilon).add(std::uint64_t{r.n_samples}).add(std::uint64_t{r.n_accepted});
      table.add(r.mean_Q).add(r.se_Q).add(r.mean_P).add(r.se_P).add(r.mean_A_particle).add(r.se_A);
      table.add(mc.error);
    }
    table.end_row();
  }
  run.save(table, "sweep.csv");
  json oracle = {{"closed_form_vs_conditioning", closed_vs_conditioning.to_json()}};
  if (opts.mc) oracle["monte_carlo_vs_exact"] = mc_vs_exact.to_json();
  run.write_manifest(c, epsilons, std::move(oracle));
  if (failed) err << "erlwv: some rows had too few accepted points\n";
  return failed ? kExitFailure : kExitOk;
}

int cmd_histogram(const Options& opts, std::ostream& err) {
  Run run("histogram", opts, err);
  const RunConfig c = run.load();
  if (!c.histogram) throw ConfigError("histogram", "missing");
  CouplingSetup s;
  s.particle = c.particle;
  s.device = c.device;
  s.g = c.g;
  s.theta_A = Quadrature(c.theta_A);
  s.n_samples = c.n_samples;
  s.seed = c.seed;
  s.threads = c.threads;
  const HistogramSpec& spec = *c.histogram;
  const Histogram2D h =
      joint_momentum_histogram(s, spec.bins, {spec.p_lo, spec.p_hi}, {spec.P_lo, spec.P_hi});

  // Slice means against the exact regression of P on the particle momentum.
  const GaussianState ev = s.joint_evolved();
  const double slope = ev.cov()(1, 3) / ev.cov()(1, 1);
  DeviationSummary summary;
  for (std::size_t i = 0; i < h.bins; ++i) {
    if (h.slice_count(i) < 100) continue;
    const double centre = 0.5 * (h.p_edge(i) + h.p_edge(i + 1));
    summary.add(h.slice_mean_P(i), ev.mean()(3) + slope * (centre - ev.mean()(1)));
  }
  std::ostringstream csv;
  h.write_csv(csv);
  run.save_text(csv.str(), "histogram.csv");
  run.write_manifest(c, {}, {{"slice_means_vs_regression", summary.to_json()}, {"overflow", h.overflow}});
  return kExitOk;
}

int cmd_verify(const Options& opts, std::ostream& out) {
  VerifyOptions vo;
  vo.alpha_perturbation = opts.mutate_alpha;
  bool all = true;
  for (const SuiteResult& r : run_verification(vo)) {
    all = all && r.pass;
    out << (r.pass ? "PASS " : "FAIL ") << r.name << "  max_deviation=" << format_real(r.max_deviation)
        << "  threshold=" << format_real(r.threshold) << "  cases=" << r.cases;
    if (!r.detail.empty()) out << "  " << r.detail;
    out << '\n';
  }
  return all ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weak measurement and postselection in epistemically restricted Liouville mechanics"};
  app.name("erlwv");
  app.set_version_flag("--version", ERL_VERSION);
  app.require_subcommand(1);
  Options opts;

  auto add_run_options = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--seed", opts.seed, "Override the configured seed");
    sub->add_flag("--quiet", opts.quiet, "Suppress progress notes");
  };
  CLI::App* weakvalue = app.add_subcommand("weakvalue", "Weak value, first-order shifts and regime");
  weakvalue->add_option("--config", opts.config_path, "JSON run configuration")->required();
  weakvalue->add_flag("--quiet", opts.quiet, "Suppress progress notes");
  CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo postselected pointer means");
  add_run_options(simulate);
  CLI::App* sweep = app.add_subcommand("sweep", "Exact and first-order means over a parameter grid");
  add_run_options(sweep);
  sweep->add_flag("--mc", opts.mc, "Add Monte Carlo estimates to every row");
  CLI::App* histogram = app.add_subcommand("histogram", "Joint histogram of particle and pointer momenta");
  add_run_options(histogram);
  CLI::App* verify = app.add_subcommand("verify", "Run the self-verification suites");
  verify->add_flag("--quiet", opts.quiet, "Suppress progress notes");
  verify->add_option("--mutate-alpha", opts.mutate_alpha)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*weakvalue) return cmd_weakvalue(opts, out, err);
    if (*simulate) return cmd_simulate(opts, err);
    if (*sweep) return cmd_sweep(opts, err);
    if (*histogram) return cmd_histogram(opts, err);
    return cmd_verify(opts, out);
  } catch (const ConfigError& e) {
    err << "erlwv: config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "erlwv: invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "erlwv: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace erl::cli
