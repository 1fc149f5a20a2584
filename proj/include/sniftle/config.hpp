/**
 * @file config.hpp
 * @brief Structured key-value run configuration with strict validation.
 *
 * Format: INI-style sections of `key = value` lines, `#` comments. Unknown
 * sections and unknown keys are rejected outright; a typo in eps or delta
 * must never pass silently. Re-serialization is canonical (fixed key order,
 * 17-significant-digit numbers), so parse -> serialize is idempotent after
 * the first normalization pass.
 */
#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "sniftle/covariance.hpp"
#include "sniftle/errors.hpp"
#include "sniftle/fieldscan.hpp"
#include "sniftle/flowfield.hpp"
#include "sniftle/gridded.hpp"
#include "sniftle/io.hpp"
#include "sniftle/montecarlo.hpp"

namespace sniftle {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool key_allowed(const std::string& section, const std::string& key) {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"model",
       {"type", "rate", "omega", "amplitude", "perturbation", "dimension", "path",
        "out_of_domain", "diffusion", "diffusion_scale"}},
      {"scales", {"eps", "delta"}},
      {"integrator", {"step", "jacobian_inverse", "defect_threshold"}},
      {"scan", {"times", "failure_policy"}},
      {"montecarlo", {"samples", "em_step", "domain_exit"}},
      {"study", {"axis", "levels", "r_orders"}},
      {"validate", {"cov_rel_tol", "proj_sup_tol"}},
      {"run", {"seed", "workers"}},
      {"output", {"path", "format"}},
  };
  auto it = schema.find(section);
  if (it == schema.end()) return false;
  if (it->second.count(key)) return true;
  // variable-count keys
  auto numbered = [&](const std::string& prefix) {
    if (key.size() <= prefix.size() || key.compare(0, prefix.size(), prefix) != 0)
      return false;
    for (std::size_t i = prefix.size(); i < key.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
    return true;
  };
  if (section == "scales" && numbered("xi0_row_")) return true;
  if (section == "scan" && numbered("axis_")) return true;
  return false;
}

inline bool section_known(const std::string& section) {
  static const std::set<std::string> sections = {"model",      "scales", "integrator",
                                                 "scan",       "montecarlo", "study",
                                                 "validate",   "run",    "output"};
  return sections.count(section) > 0;
}

}  // namespace detail

class RunConfig {
 public:
  static RunConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file", path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), path);
  }

  static RunConfig parse_string(const std::string& text, const std::string& where = "<string>") {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const std::string loc = where + ":" + std::to_string(lineno);
      if (line.front() == '[') {
        if (line.back() != ']') throw ConfigError("malformed section header", loc);
        section = detail::trim(line.substr(1, line.size() - 2));
        if (!detail::section_known(section))
          throw ConfigError("unknown section [" + section + "]", loc);
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("expected key = value", loc);
      if (section.empty()) throw ConfigError("key outside any section", loc);
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (!detail::key_allowed(section, key))
        throw ConfigError("unknown key '" + key + "' in section [" + section + "]", loc);
      if (cfg.values_[section].count(key))
        throw ConfigError("duplicate key '" + key + "' in section [" + section + "]", loc);
      cfg.values_[section][key] = value;
    }
    cfg.validate();
    return cfg;
  }

  // -- typed access ---------------------------------------------------------

  bool has(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key) const {
    auto s = values_.find(section);
    if (s == values_.end() || !s->second.count(key))
      throw ConfigError("missing required key '" + key + "' in section [" + section + "]");
    return s->second.at(key);
  }

  std::string get_string_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
  }

  double get_double(const std::string& section, const std::string& key) const {
    return parse_number(get_string(section, key), section, key);
  }

  double get_double_or(const std::string& section, const std::string& key,
                       double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                           std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    try {
      return std::stoull(get_string(section, key));
    } catch (const std::exception&) {
      throw ConfigError("invalid integer for '" + key + "' in [" + section + "]");
    }
  }

  std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
    std::istringstream in(get_string(section, key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(tok, section, key));
    if (out.empty())
      throw ConfigError("empty value for '" + key + "' in [" + section + "]");
    return out;
  }

  // -- derived objects ------------------------------------------------------

  DiffusionSpec diffusion_spec() const {
    const std::string kind = get_string_or("model", "diffusion", "identity");
    if (kind == "identity") return DiffusionSpec::identity();
    if (kind == "constant")
      return DiffusionSpec::constant(get_double_or("model", "diffusion_scale", 1.0));
    throw ConfigError("model.diffusion must be 'identity' or 'constant'");
  }

  SystemModel make_model() const {
    const std::string type = get_string("model", "type");
    DiffusionSpec diff = diffusion_spec();
    if (type == "zero") {
      const std::size_t n = std::size_t(get_double_or("model", "dimension", 2));
      return make_zero_model(n, diff);
    }
    if (type == "linear_saddle") return make_linear_saddle(get_double("model", "rate"), diff);
    if (type == "rigid_rotation")
      return make_rigid_rotation(get_double("model", "omega"), diff);
    if (type == "double_gyre")
      return make_double_gyre(get_double_or("model", "amplitude", 0.1),
                              get_double_or("model", "perturbation", 0.1),
                              get_double_or("model", "omega", std::numbers::pi / 5.0),
                              diff);
    if (type == "gridded") {
      const std::string policy = get_string_or("model", "out_of_domain", "error");
      if (policy != "error" && policy != "clamp")
        throw ConfigError("model.out_of_domain must be 'error' or 'clamp'");
      return model_from_grid(load_gridded_text(get_string("model", "path")),
                             policy == "clamp" ? OutOfDomain::kClamp : OutOfDomain::kError);
    }
    throw ConfigError("unknown model.type '" + type + "'");
  }

  SpdMat xi_cov(std::size_t n) const {
    Mat m = Mat::identity(n);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::string key = "xi0_row_" + std::to_string(i + 1);
      if (!has("scales", key)) continue;
      any = true;
      const auto row = get_doubles("scales", key);
      if (row.size() != n)
        throw ConfigError("scales." + key + " must have " + std::to_string(n) + " entries");
      for (std::size_t j = 0; j < n; ++j) m(i, j) = row[j];
    }
    if (any) {
      for (std::size_t i = 0; i < n; ++i)
        if (!has("scales", "xi0_row_" + std::to_string(i + 1)))
          throw ConfigError("scales.xi0_row_" + std::to_string(i + 1) + " is missing");
    }
    try {
      return SpdMat(m);
    } catch (const InvalidInputError& e) {
      throw ConfigError(std::string("scales.xi0_row_*: ") + e.what());
    }
  }

  UncertaintyScales scales(std::size_t n) const {
    return UncertaintyScales(get_double_or("scales", "eps", 0.0),
                             get_double_or("scales", "delta", 0.0), xi_cov(n));
  }

  IntegratorConfig integrator() const {
    IntegratorConfig cfg;
    cfg.step_size = get_double_or("integrator", "step", 1e-3);
    const std::string mode = get_string_or("integrator", "jacobian_inverse", "adjoint_ode");
    if (mode == "adjoint_ode")
      cfg.jacobian_inverse_mode = JacobianInverseMode::kAdjointOde;
    else if (mode == "direct_invert")
      cfg.jacobian_inverse_mode = JacobianInverseMode::kDirectInvert;
    else
      throw ConfigError("integrator.jacobian_inverse must be adjoint_ode or direct_invert");
    cfg.defect_threshold = get_double_or("integrator", "defect_threshold", 1e-6);
    return cfg;
  }

  ScanSpec scan_spec(const SystemModel& model) const {
    ScanSpec spec;
    for (std::size_t d = 0; d < model.n; ++d) {
      const std::string key = "axis_" + std::to_string(d + 1);
      const auto v = get_doubles("scan", key);
      if (v.size() != 3)
        throw ConfigError("scan." + key + " must be: min max count");
      spec.axes.push_back({v[0], v[1], std::size_t(v[2])});
    }
    spec.times = get_doubles("scan", "times");
    spec.xi_cov = xi_cov(model.n).mat();
    spec.integrator = integrator();
    const std::string policy = get_string_or("scan", "failure_policy", "record_nan");
    if (policy == "record_nan")
      spec.failure_policy = ScanFailurePolicy::kRecordNan;
    else if (policy == "abort")
      spec.failure_policy = ScanFailurePolicy::kAbort;
    else
      throw ConfigError("scan.failure_policy must be record_nan or abort");
    return spec;
  }

  McConfig mc_config(std::size_t n, std::uint64_t seed_override,
                     bool has_seed_override) const {
    McConfig cfg{std::size_t(get_double_or("montecarlo", "samples", 10000)),
                 get_double_or("montecarlo", "em_step",
                               get_double_or("integrator", "step", 1e-3)),
                 has_seed_override ? seed_override : get_u64_or("run", "seed", 0),
                 scales(n)};
    const std::string policy = get_string_or("montecarlo", "domain_exit", "abort");
    if (policy == "abort")
      cfg.domain_exit = DomainExitPolicy::kAbort;
    else if (policy == "skip")
      cfg.domain_exit = DomainExitPolicy::kSkipAndCount;
    else
      throw ConfigError("montecarlo.domain_exit must be abort or skip");
    return cfg;
  }

  // -- canonical serialization and hash -------------------------------------

  std::string serialize() const {
    std::string out;
    for (const auto& [section, kv] : values_) {
      out += "[" + section + "]\n";
      for (const auto& [key, value] : kv)
        out += key + " = " + normalize_value(value) + "\n";
    }
    return out;
  }

  std::string hash_hex() const {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (char c : serialize()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001B3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

 private:
  void validate() const {
    if (values_.count("model")) {
      const auto& m = values_.at("model");
      if (!m.count("type")) throw ConfigError("section [model] needs a 'type' key");
    }
  }

  static double parse_number(const std::string& tok, const std::string& section,
                             const std::string& key) {
    try {
      std::size_t pos = 0;
      const double v = std::stod(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("invalid number '" + tok + "' for '" + key + "' in [" +
                        section + "]");
    }
  }

  /// Reformats numeric tokens with 17 significant digits; leaves
  /// non-numeric tokens as-is.
  static std::string normalize_value(const std::string& value) {
    std::istringstream in(value);
    std::string tok, out;
    while (in >> tok) {
      if (!out.empty()) out += " ";
      try {
        std::size_t pos = 0;
        const double v = std::stod(tok, &pos);
        out += pos == tok.size() ? format_double(v) : tok;
      } catch (const std::exception&) {
        out += tok;
      }
    }
    return out;
  }

  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace sniftle
