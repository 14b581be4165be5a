#include "erl/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "erl/errors.hpp"

namespace erl::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

const json& section(const json& doc, const std::string& parent, const std::string& key) {
  const std::string field = join(parent, key);
  if (!doc.contains(key)) throw ConfigError(field, "missing");
  const json& s = doc.at(key);
  if (!s.is_object()) throw ConfigError(field, "expected an object");
  return s;
}

void reject_unknown(const json& obj, const std::string& field, std::initializer_list<const char*> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (const char* k : known) found = found || key == k;
    if (!found) throw ConfigError(join(field, key), "unknown entry");
  }
}

double as_real(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

double real(const json& obj, const std::string& parent, const std::string& key) {
  const std::string field = join(parent, key);
  if (!obj.contains(key)) throw ConfigError(field, "missing");
  return as_real(obj.at(key), field);
}

double positive(const json& obj, const std::string& parent, const std::string& key) {
  const double x = real(obj, parent, key);
  if (!(x > 0.0)) throw ConfigError(join(parent, key), "must be positive");
  return x;
}

std::uint64_t unsigned_integer(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be non-negative");
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  throw ConfigError(field, "expected a non-negative integer");
}

std::vector<double> real_list(const json& v, const std::string& field) {
  if (v.is_array()) {
    if (v.empty()) throw ConfigError(field, "empty list");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      out.push_back(as_real(v[i], field + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (v.is_object()) {
    reject_unknown(v, field, {"halve_from", "steps"});
    const double start = real(v, field, "halve_from");
    if (!v.contains("steps")) throw ConfigError(field + ".steps", "missing");
    const std::uint64_t steps = unsigned_integer(v.at("steps"), field + ".steps");
    if (steps == 0) throw ConfigError(field + ".steps", "empty list");
    std::vector<double> out;
    double x = start;
    for (std::uint64_t k = 0; k < steps; ++k, x *= 0.5) out.push_back(x);
    return out;
  }
  throw ConfigError(field, "expected a list of numbers or {halve_from, steps}");
}

std::complex<double> complex_entry(const json& v, const std::string& field) {
  if (v.is_number()) return {as_real(v, field), 0.0};
  if (v.is_array() && v.size() == 2) return {as_real(v[0], field + "[0]"), as_real(v[1], field + "[1]")};
  throw ConfigError(field, "expected a number or [re, im]");
}

std::vector<std::complex<double>> complex_list(const json& obj, const std::string& parent, const std::string& key) {
  const std::string field = join(parent, key);
  if (!obj.contains(key)) throw ConfigError(field, "missing");
  const json& v = obj.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a non-empty list");
  std::vector<std::complex<double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(complex_entry(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void check_positive_list(const std::optional<std::vector<double>>& list, const std::string& field) {
  if (!list) return;
  for (double x : *list)
    if (!(x > 0.0)) throw ConfigError(field, "entries must be positive");
}

void check_non_negative_list(const std::optional<std::vector<double>>& list, const std::string& field) {
  if (!list) return;
  for (double x : *list)
    if (x < 0.0) throw ConfigError(field, "entries must be non-negative");
}

json complex_json(const std::vector<std::complex<double>>& v) {
  json out = json::array();
  for (const auto& z : v) out.push_back({z.real(), z.imag()});
  return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  reject_unknown(doc, "",
                 {"particle", "device", "coupling", "postselection", "sampling", "discrete", "sweep", "histogram"});
  RunConfig c;

  const json& particle = section(doc, "", "particle");
  reject_unknown(particle, "particle", {"mu_q", "mu_p", "sigma"});
  c.particle = {real(particle, "particle", "mu_q"), real(particle, "particle", "mu_p"),
                positive(particle, "particle", "sigma")};

  const json& device = section(doc, "", "device");
  reject_unknown(device, "device", {"delta_Q", "mu_P", "omega"});
  c.device = {positive(device, "device", "delta_Q"), real(device, "device", "mu_P"),
              real(device, "device", "omega")};

  const json& coupling = section(doc, "", "coupling");
  reject_unknown(coupling, "coupling", {"g", "theta_A"});
  c.g = real(coupling, "coupling", "g");
  if (c.g < 0.0) throw ConfigError("coupling.g", "must be non-negative");
  c.theta_A = real(coupling, "coupling", "theta_A");

  const json& post = section(doc, "", "postselection");
  reject_unknown(post, "postselection", {"theta_B", "b", "epsilon"});
  c.theta_B = real(post, "postselection", "theta_B");
  c.b = real(post, "postselection", "b");
  if (!post.contains("epsilon")) throw ConfigError("postselection.epsilon", "missing");
  if (const json& eps = post.at("epsilon"); eps.is_string()) {
    if (eps.get<std::string>() != "adaptive")
      throw ConfigError("postselection.epsilon", "expected a positive number or \"adaptive\"");
  } else {
    c.epsilon = as_real(eps, "postselection.epsilon");
    if (!(*c.epsilon > 0.0)) throw ConfigError("postselection.epsilon", "must be positive");
  }

  const json& sampling = section(doc, "", "sampling");
  reject_unknown(sampling, "sampling", {"n_samples", "seed", "threads"});
  if (!sampling.contains("n_samples")) throw ConfigError("sampling.n_samples", "missing");
  c.n_samples = unsigned_integer(sampling.at("n_samples"), "sampling.n_samples");
  if (c.n_samples == 0) throw ConfigError("sampling.n_samples", "must be positive");
  if (!sampling.contains("seed")) throw ConfigError("sampling.seed", "missing");
  c.seed = unsigned_integer(sampling.at("seed"), "sampling.seed");
  if (sampling.contains("threads")) {
    const std::uint64_t t = unsigned_integer(sampling.at("threads"), "sampling.threads");
    if (t > std::numeric_limits<unsigned>::max()) throw ConfigError("sampling.threads", "too large");
    c.threads = static_cast<unsigned>(t);
  }

  if (doc.contains("discrete")) {
    const json& d = section(doc, "", "discrete");
    reject_unknown(d, "discrete", {"amplitudes", "overlaps", "eigenvalues"});
    DiscreteSpectrumInput in;
    in.amplitudes = complex_list(d, "discrete", "amplitudes");
    in.overlaps = complex_list(d, "discrete", "overlaps");
    if (!d.contains("eigenvalues")) throw ConfigError("discrete.eigenvalues", "missing");
    in.eigenvalues = real_list(d.at("eigenvalues"), "discrete.eigenvalues");
    if (in.amplitudes.size() != in.eigenvalues.size() || in.overlaps.size() != in.eigenvalues.size())
      throw ConfigError("discrete", "amplitudes, overlaps and eigenvalues must have equal length");
    c.discrete = std::move(in);
  }

  if (doc.contains("sweep")) {
    const json& s = section(doc, "", "sweep");
    reject_unknown(s, "sweep", {"g", "delta_P", "delta_Q", "theta_A", "theta_B", "b"});
    SweepSpec sw;
    auto axis = [&](const char* key, std::optional<std::vector<double>>& dst) {
      if (s.contains(key)) dst = real_list(s.at(key), std::string("sweep.") + key);
    };
    axis("g", sw.g);
    axis("delta_P", sw.delta_P);
    axis("delta_Q", sw.delta_Q);
    axis("theta_A", sw.theta_A);
    axis("theta_B", sw.theta_B);
    axis("b", sw.b);
    if (sw.delta_P && sw.delta_Q) throw ConfigError("sweep", "give delta_P or delta_Q, not both");
    check_non_negative_list(sw.g, "sweep.g");
    check_positive_list(sw.delta_P, "sweep.delta_P");
    check_positive_list(sw.delta_Q, "sweep.delta_Q");
    c.sweep = std::move(sw);
  }

  if (doc.contains("histogram")) {
    const json& h = section(doc, "", "histogram");
    reject_unknown(h, "histogram", {"bins", "p_range", "P_range"});
    HistogramSpec hs;
    if (!h.contains("bins")) throw ConfigError("histogram.bins", "missing");
    hs.bins = unsigned_integer(h.at("bins"), "histogram.bins");
    if (hs.bins < 2) throw ConfigError("histogram.bins", "must be at least 2");
    auto range = [&](const char* key, double& lo, double& hi) {
      const std::string field = std::string("histogram.") + key;
      if (!h.contains(key)) throw ConfigError(field, "missing");
      const json& r = h.at(key);
      if (!r.is_array() || r.size() != 2) throw ConfigError(field, "expected [lo, hi]");
      lo = as_real(r[0], field + "[0]");
      hi = as_real(r[1], field + "[1]");
      if (!(hi > lo)) throw ConfigError(field, "hi must exceed lo");
    };
    range("p_range", hs.p_lo, hs.p_hi);
    range("P_range", hs.P_lo, hs.P_hi);
    c.histogram = hs;
  }

  try {
    c.particle.state();
    c.device.state();
  } catch (const DomainError& e) {
    throw ConfigError("particle/device", e.what());
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("", "JSON syntax error at line " + std::to_string(line) + ", column " +
                              std::to_string(column));
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

json to_json(const RunConfig& c) {
  json doc;
  doc["particle"] = {{"mu_q", c.particle.mu_q}, {"mu_p", c.particle.mu_p}, {"sigma", c.particle.sigma}};
  doc["device"] = {{"delta_Q", c.device.delta_Q}, {"mu_P", c.device.mu_P}, {"omega", c.device.omega}};
  doc["coupling"] = {{"g", c.g}, {"theta_A", c.theta_A}};
  doc["postselection"] = {{"theta_B", c.theta_B}, {"b", c.b}};
  doc["postselection"]["epsilon"] = c.epsilon ? json(*c.epsilon) : json("adaptive");
  doc["sampling"] = {{"n_samples", c.n_samples}, {"seed", c.seed}, {"threads", c.threads}};
  if (c.discrete) {
    doc["discrete"] = {{"amplitudes", complex_json(c.discrete->amplitudes)},
                       {"overlaps", complex_json(c.discrete->overlaps)},
                       {"eigenvalues", c.discrete->eigenvalues}};
  }
  if (c.sweep) {
    json s = json::object();
    if (c.sweep->g) s["g"] = *c.sweep->g;
    if (c.sweep->delta_P) s["delta_P"] = *c.sweep->delta_P;
    if (c.sweep->delta_Q) s["delta_Q"] = *c.sweep->delta_Q;
    if (c.sweep->theta_A) s["theta_A"] = *c.sweep->theta_A;
    if (c.sweep->theta_B) s["theta_B"] = *c.sweep->theta_B;
    if (c.sweep->b) s["b"] = *c.sweep->b;
    doc["sweep"] = s;
  }
  if (c.histogram) {
    doc["histogram"] = {{"bins", c.histogram->bins},
                        {"p_range", {c.histogram->p_lo, c.histogram->p_hi}},
                        {"P_range", {c.histogram->P_lo, c.histogram->P_hi}}};
  }
  return doc;
}

std::vector<GridPoint> expand_grid(const RunConfig& c) {
  const auto axis = [](const std::optional<std::vector<double>>& list, double base) {
    return list ? *list : std::vector<double>{base};
  };
  const SweepSpec sw = c.sweep.value_or(SweepSpec{});
  std::vector<double> widths = axis(sw.delta_Q, c.device.delta_Q);
  if (sw.delta_P) {
    widths.clear();
    for (double dP : *sw.delta_P) widths.push_back(device_delta_Q(dP, c.device.omega));
  }
  std::vector<GridPoint> grid;
  for (double g : axis(sw.g, c.g))
    for (double dQ : widths)
      for (double tA : axis(sw.theta_A, c.theta_A))
        for (double tB : axis(sw.theta_B, c.theta_B))
          for (double b : axis(sw.b, c.b)) grid.push_back({g, dQ, tA, tB, b});
  return grid;
}

ExperimentConfig experiment_at(const RunConfig& c, const GridPoint& point) {
  ExperimentConfig e;
  e.particle = c.particle;
  e.device = c.device;
  e.device.delta_Q = point.delta_Q;
  e.g = point.g;
  e.theta_A = Quadrature(point.theta_A);
  e.theta_B = Quadrature(point.theta_B);
  e.b = point.b;
  e.n_samples = c.n_samples;
  e.seed = c.seed;
  e.threads = c.threads;
  e.epsilon = c.epsilon ? *c.epsilon : adaptive_epsilon(e);
  return e;
}

}  // namespace erl::cli
