#pragma once

// JSON run configuration for erlwv. Every parameter is explicit; the only
// derived value is the adaptive postselection window.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "erl/analytic.hpp"
#include "erl/montecarlo.hpp"
#include "json.hpp"

namespace erl::cli {

/// Malformed or out-of-range configuration. field() is the dotted path of
/// the offending entry, or empty for document-level syntax errors.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Parameter lists for sweep. Unset axes keep the base configuration value.
struct SweepSpec {
  std::optional<std::vector<double>> g;
  std::optional<std::vector<double>> delta_P;
  std::optional<std::vector<double>> delta_Q;
  std::optional<std::vector<double>> theta_A;
  std::optional<std::vector<double>> theta_B;
  std::optional<std::vector<double>> b;

  bool operator==(const SweepSpec&) const = default;
};

struct HistogramSpec {
  std::size_t bins = 0;
  double p_lo = 0.0, p_hi = 0.0;
  double P_lo = 0.0, P_hi = 0.0;

  bool operator==(const HistogramSpec&) const = default;
};

struct RunConfig {
  ParticleParams particle;
  DeviceParams device;
  double g = 0.0;
  double theta_A = 0.0;
  double theta_B = 0.0;
  double b = 0.0;
  /// Window half-width; empty means the adaptive rule.
  std::optional<double> epsilon;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  unsigned threads = 0;

  std::optional<DiscreteSpectrumInput> discrete;
  std::optional<SweepSpec> sweep;
  std::optional<HistogramSpec> histogram;

  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError naming the field on any missing, mistyped, unknown or
/// out-of-range entry.
RunConfig parse_config(const nlohmann::json& doc);

/// Parses text; syntax errors are reported with line and column.
RunConfig parse_config_text(const std::string& text);

RunConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

/// One point of a parameter grid.
struct GridPoint {
  double g = 0.0;
  double delta_Q = 0.0;
  double theta_A = 0.0;
  double theta_B = 0.0;
  double b = 0.0;
};

/// Cartesian product of the sweep axes (g outermost, b innermost), or the
/// single base point when there is no sweep section.
std::vector<GridPoint> expand_grid(const RunConfig& config);

/// Experiment at a grid point; epsilon resolved from the adaptive rule when
/// the configuration does not fix it.
ExperimentConfig experiment_at(const RunConfig& config, const GridPoint& point);

}  // namespace erl::cli
