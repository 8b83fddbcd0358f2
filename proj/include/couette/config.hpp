#pragma once

// Run configuration: YAML in, validated RunConfig out, and a canonical YAML
// form for provenance (serialize(parse(x)) is a fixed point).

#include <yaml-cpp/yaml.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/grid.hpp"

namespace couette {

enum class Mode { simulate, linear, fp_decay, picard, probe };

inline std::string to_string(Mode m) {
  switch (m) {
    case Mode::simulate: return "simulate";
    case Mode::linear: return "linear";
    case Mode::fp_decay: return "fp-decay";
    case Mode::picard: return "picard";
    case Mode::probe: return "probe";
  }
  return "?";
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "simulate") return Mode::simulate;
  if (s == "linear") return Mode::linear;
  if (s == "fp-decay") return Mode::fp_decay;
  if (s == "picard") return Mode::picard;
  if (s == "probe") return Mode::probe;
  throw ValidationError("mode", "unknown mode '" + s + "'");
}

/// Catalog entry and its parameters; which keys apply depends on `kind`.
struct InitialDataSpec {
  std::string kind = "gaussian";
  // gaussian
  double amplitude = 1.0;
  std::array<double, 2> center{0.0, 0.0};
  std::array<double, 2> widths{2.0, 2.0};
  // dipole
  double separation = 2.0;
  double strength = 1.0;
  double width = 1.0;
  // point_vortex_approx
  double circulation = 1.0;
  double epsilon = 0.5;
  // random_localized (amplitude is the sup norm)
  double correlation_length = 1.0;
  double envelope = 2.0;
  bool mean_zero = false;
  // eigenfunction
  int a = 1, b = 0;
  // optional rescaling: none, L1 (||f||_1 = value) or L2m (||f||_{L^2(m)} = value)
  std::string scale_norm = "none";
  double scale_m = 6.0;
  double scale_value = 1.0;
};

struct RunConfig {
  Mode mode = Mode::simulate;
  double nu = 1.0;
  double half_width = 16.0;
  int n = 128;
  double selfsim_half_width = 16.0;  // auxiliary self-similar grid of physical-frame modes
  double t_init = 1.0;
  double t_end = 100.0;
  double tau_step = 2e-3;
  int samples_per_decade = 20;
  InitialDataSpec initial_data{};
  std::uint64_t seed = 0;
  std::string output_dir;
  std::vector<double> weights{3.0};
  bool energy = false;
  double energy_scale = 10.0;
  std::string resolution_policy = "warn";
  bool snapshots = true;
  int picard_times = 8;
  int picard_max_iter = 30;
  double picard_tol = 1e-10;
  std::string probe_id = "biot_savart_linf";
  int probe_ensemble = 4;
  std::vector<double> probe_times{1.0, 10.0, 100.0};
  double probe_m = 2.0;
  double probe_sigma = 0.25;
  double probe_p = 1.0;
  double probe_q = std::numeric_limits<double>::infinity();
  double fp_tau_end = 4.0;

  Frame frame() const { return mode == Mode::picard || (mode == Mode::probe && probe_id == "semigroup_Lp")
                                   ? Frame::physical
                                   : Frame::selfsim; }
  GridSpec grid() const { return make_grid(half_width, n, frame()); }
  GridSpec selfsim_grid() const { return make_grid(selfsim_half_width, n, Frame::selfsim); }
};

inline const std::set<std::string>& catalog_kinds() {
  static const std::set<std::string> k{"gaussian", "dipole", "point_vortex_approx", "random_localized", "eigenfunction"};
  return k;
}

namespace detail {

inline const std::map<std::string, std::set<std::string>>& kind_keys() {
  static const std::map<std::string, std::set<std::string>> k{
      {"gaussian", {"amplitude", "center", "widths"}},
      {"dipole", {"separation", "strength", "width"}},
      {"point_vortex_approx", {"circulation", "epsilon"}},
      {"random_localized", {"amplitude", "correlation_length", "envelope", "mean_zero"}},
      {"eigenfunction", {"a", "b"}},
  };
  return k;
}

inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? ".inf" : "-.inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt_list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

inline double as_double(const YAML::Node& n, const std::string& field) {
  try {
    const std::string s = n.as<std::string>();
    if (s == "inf" || s == ".inf" || s == "+inf" || s == "Infinity") return std::numeric_limits<double>::infinity();
    return n.as<double>();
  } catch (const YAML::Exception&) {
    throw ValidationError(field, "expected a number");
  }
}

inline long long as_int(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<long long>();
  } catch (const YAML::Exception&) {
    throw ValidationError(field, "expected an integer");
  }
}

inline bool as_bool(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ValidationError(field, "expected true or false");
  }
}

inline std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n.IsScalar()) throw ValidationError(field, "expected a scalar");
  return n.as<std::string>();
}

inline std::vector<double> as_list(const YAML::Node& n, const std::string& field) {
  if (!n.IsSequence()) throw ValidationError(field, "expected a list of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < n.size(); ++i) v.push_back(as_double(n[i], field + "[" + std::to_string(i) + "]"));
  return v;
}

using Handler = std::function<void(const YAML::Node&, const std::string&)>;

inline void walk_map(const YAML::Node& node, const std::string& prefix, const std::map<std::string, Handler>& handlers) {
  if (!node.IsMap()) throw ValidationError(prefix.empty() ? "<document>" : prefix, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    const std::string field = prefix.empty() ? key : prefix + "." + key;
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ValidationError(field, "unknown key");
    it->second(kv.second, field);
  }
}

}  // namespace detail

/// Checks every invariant of a RunConfig; throws ValidationError naming the field.
inline void validate(const RunConfig& c) {
  if (!(c.nu > 0.0) || !std::isfinite(c.nu)) throw ValidationError("nu", "must be positive");
  try {
    (void)c.grid();
  } catch (const ConfigError& e) {
    throw ValidationError("grid", e.what());
  }
  if (!(c.selfsim_half_width > 0.0)) throw ValidationError("grid.selfsim_half_width", "must be positive");
  if (!(c.t_init > 0.0)) throw ValidationError("time.t_init", "must be positive");
  if (c.mode == Mode::simulate && c.t_init < 1.0) throw ValidationError("time.t_init", "simulate mode needs t_init >= 1");
  if (!(c.t_end >= c.t_init)) throw ValidationError("time.t_end", "must be >= t_init");
  if (!(c.tau_step > 0.0)) throw ValidationError("time.tau_step", "must be positive");
  if (c.samples_per_decade < 4) throw ValidationError("time.samples_per_decade", "must be >= 4");
  if (!catalog_kinds().count(c.initial_data.kind))
    throw ValidationError("initial_data.kind", "unknown catalog entry '" + c.initial_data.kind + "'");
  const auto& d = c.initial_data;
  if (d.kind == "gaussian" && !(d.widths[0] > 0 && d.widths[1] > 0))
    throw ValidationError("initial_data.widths", "must be positive");
  if (d.kind == "dipole" && !(d.width > 0)) throw ValidationError("initial_data.width", "must be positive");
  if (d.kind == "point_vortex_approx" && !(d.epsilon > 0)) throw ValidationError("initial_data.epsilon", "must be positive");
  if (d.kind == "random_localized" && !(d.correlation_length > 0 && d.envelope > 0))
    throw ValidationError("initial_data", "correlation_length and envelope must be positive");
  if (d.kind == "eigenfunction" && (d.a < 0 || d.b < 0 || d.a + d.b > 4))
    throw ValidationError("initial_data.a", "need a, b >= 0 and a + b <= 4");
  if (d.scale_norm != "none" && d.scale_norm != "L1" && d.scale_norm != "L2m")
    throw ValidationError("initial_data.scale_to.norm", "must be none, L1 or L2m");
  if (d.scale_norm != "none" && !(d.scale_value > 0)) throw ValidationError("initial_data.scale_to.value", "must be positive");
  if (d.scale_norm == "L2m" && !(d.scale_m >= 0)) throw ValidationError("initial_data.scale_to.m", "must be >= 0");
  for (double m : c.weights)
    if (!(m >= 0)) throw ValidationError("diagnostics.weights", "weights must be >= 0");
  if (!(c.energy_scale > 1.0)) throw ValidationError("diagnostics.energy_scale", "must exceed 1");
  if (c.resolution_policy != "warn" && c.resolution_policy != "error")
    throw ValidationError("resolution_policy", "must be warn or error");
  if (c.picard_times < 2) throw ValidationError("picard.n_times", "must be >= 2");
  if (c.picard_max_iter < 1) throw ValidationError("picard.max_iter", "must be >= 1");
  if (!(c.picard_tol > 0)) throw ValidationError("picard.tol", "must be positive");
  if (c.probe_id != "biot_savart_linf" && c.probe_id != "anisotropic_sigma" && c.probe_id != "semigroup_Lp")
    throw ValidationError("probe.id", "must be biot_savart_linf, anisotropic_sigma or semigroup_Lp");
  if (c.probe_ensemble < 1) throw ValidationError("probe.ensemble", "must be >= 1");
  if (c.probe_times.empty()) throw ValidationError("probe.times", "must not be empty");
  for (double t : c.probe_times)
    if (!(t > 0)) throw ValidationError("probe.times", "times must be positive");
  if (!(c.probe_m > 1)) throw ValidationError("probe.m", "must exceed 1");
  if (!(c.probe_sigma > 0 && c.probe_sigma < 0.5)) throw ValidationError("probe.sigma", "must lie in (0, 1/2)");
  if (!(c.probe_p >= 1 && c.probe_q >= c.probe_p)) throw ValidationError("probe.p", "need 1 <= p <= q");
  if (!(c.fp_tau_end > 0)) throw ValidationError("fp.tau_end", "must be positive");
}

/// Parses a YAML document. Syntax problems raise ParseError with line and
/// column (1-based); unknown keys and bad values raise ValidationError.
inline RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  RunConfig c;
  if (!root || root.IsNull()) {
    validate(c);
    return c;
  }
  using namespace detail;
  std::string kind_seen;
  std::set<std::string> data_keys;
  const std::map<std::string, Handler> data_handlers{
      {"kind", [&](const YAML::Node& n, const std::string& f) { c.initial_data.kind = as_string(n, f); }},
      {"amplitude", [&](const YAML::Node& n, const std::string& f) { c.initial_data.amplitude = as_double(n, f); data_keys.insert("amplitude"); }},
      {"center", [&](const YAML::Node& n, const std::string& f) {
         const auto v = as_list(n, f);
         if (v.size() != 2) throw ValidationError(f, "expected two numbers");
         c.initial_data.center = {v[0], v[1]};
         data_keys.insert("center");
       }},
      {"widths", [&](const YAML::Node& n, const std::string& f) {
         const auto v = as_list(n, f);
         if (v.size() != 2) throw ValidationError(f, "expected two numbers");
         c.initial_data.widths = {v[0], v[1]};
         data_keys.insert("widths");
       }},
      {"separation", [&](const YAML::Node& n, const std::string& f) { c.initial_data.separation = as_double(n, f); data_keys.insert("separation"); }},
      {"strength", [&](const YAML::Node& n, const std::string& f) { c.initial_data.strength = as_double(n, f); data_keys.insert("strength"); }},
      {"width", [&](const YAML::Node& n, const std::string& f) { c.initial_data.width = as_double(n, f); data_keys.insert("width"); }},
      {"circulation", [&](const YAML::Node& n, const std::string& f) { c.initial_data.circulation = as_double(n, f); data_keys.insert("circulation"); }},
      {"epsilon", [&](const YAML::Node& n, const std::string& f) { c.initial_data.epsilon = as_double(n, f); data_keys.insert("epsilon"); }},
      {"correlation_length", [&](const YAML::Node& n, const std::string& f) { c.initial_data.correlation_length = as_double(n, f); data_keys.insert("correlation_length"); }},
      {"envelope", [&](const YAML::Node& n, const std::string& f) { c.initial_data.envelope = as_double(n, f); data_keys.insert("envelope"); }},
      {"mean_zero", [&](const YAML::Node& n, const std::string& f) { c.initial_data.mean_zero = as_bool(n, f); data_keys.insert("mean_zero"); }},
      {"a", [&](const YAML::Node& n, const std::string& f) { c.initial_data.a = static_cast<int>(as_int(n, f)); data_keys.insert("a"); }},
      {"b", [&](const YAML::Node& n, const std::string& f) { c.initial_data.b = static_cast<int>(as_int(n, f)); data_keys.insert("b"); }},
      {"scale_to", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"norm", [&](const YAML::Node& m, const std::string& g) { c.initial_data.scale_norm = as_string(m, g); }},
             {"m", [&](const YAML::Node& m, const std::string& g) { c.initial_data.scale_m = as_double(m, g); }},
             {"value", [&](const YAML::Node& m, const std::string& g) { c.initial_data.scale_value = as_double(m, g); }},
         });
       }},
  };
  const std::map<std::string, Handler> top{
      {"mode", [&](const YAML::Node& n, const std::string& f) { c.mode = mode_from_string(as_string(n, f)); }},
      {"nu", [&](const YAML::Node& n, const std::string& f) { c.nu = as_double(n, f); }},
      {"seed", [&](const YAML::Node& n, const std::string& f) {
         const long long s = as_int(n, f);
         if (s < 0) throw ValidationError(f, "must be >= 0");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"output_dir", [&](const YAML::Node& n, const std::string& f) { c.output_dir = as_string(n, f); }},
      {"resolution_policy", [&](const YAML::Node& n, const std::string& f) { c.resolution_policy = as_string(n, f); }},
      {"snapshots", [&](const YAML::Node& n, const std::string& f) { c.snapshots = as_bool(n, f); }},
      {"grid", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"half_width", [&](const YAML::Node& m, const std::string& g) { c.half_width = as_double(m, g); }},
             {"n", [&](const YAML::Node& m, const std::string& g) { c.n = static_cast<int>(as_int(m, g)); }},
             {"selfsim_half_width", [&](const YAML::Node& m, const std::string& g) { c.selfsim_half_width = as_double(m, g); }},
         });
       }},
      {"time", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"t_init", [&](const YAML::Node& m, const std::string& g) { c.t_init = as_double(m, g); }},
             {"t_end", [&](const YAML::Node& m, const std::string& g) { c.t_end = as_double(m, g); }},
             {"tau_step", [&](const YAML::Node& m, const std::string& g) { c.tau_step = as_double(m, g); }},
             {"samples_per_decade", [&](const YAML::Node& m, const std::string& g) { c.samples_per_decade = static_cast<int>(as_int(m, g)); }},
         });
       }},
      {"initial_data", [&](const YAML::Node& n, const std::string& f) { walk_map(n, f, data_handlers); }},
      {"diagnostics", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"weights", [&](const YAML::Node& m, const std::string& g) { c.weights = as_list(m, g); }},
             {"energy", [&](const YAML::Node& m, const std::string& g) { c.energy = as_bool(m, g); }},
             {"energy_scale", [&](const YAML::Node& m, const std::string& g) { c.energy_scale = as_double(m, g); }},
         });
       }},
      {"picard", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"n_times", [&](const YAML::Node& m, const std::string& g) { c.picard_times = static_cast<int>(as_int(m, g)); }},
             {"max_iter", [&](const YAML::Node& m, const std::string& g) { c.picard_max_iter = static_cast<int>(as_int(m, g)); }},
             {"tol", [&](const YAML::Node& m, const std::string& g) { c.picard_tol = as_double(m, g); }},
         });
       }},
      {"probe", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {
             {"id", [&](const YAML::Node& m, const std::string& g) { c.probe_id = as_string(m, g); }},
             {"ensemble", [&](const YAML::Node& m, const std::string& g) { c.probe_ensemble = static_cast<int>(as_int(m, g)); }},
             {"times", [&](const YAML::Node& m, const std::string& g) { c.probe_times = as_list(m, g); }},
             {"m", [&](const YAML::Node& m, const std::string& g) { c.probe_m = as_double(m, g); }},
             {"sigma", [&](const YAML::Node& m, const std::string& g) { c.probe_sigma = as_double(m, g); }},
             {"p", [&](const YAML::Node& m, const std::string& g) { c.probe_p = as_double(m, g); }},
             {"q", [&](const YAML::Node& m, const std::string& g) { c.probe_q = as_double(m, g); }},
         });
       }},
      {"fp", [&](const YAML::Node& n, const std::string& f) {
         walk_map(n, f, {{"tau_end", [&](const YAML::Node& m, const std::string& g) { c.fp_tau_end = as_double(m, g); }}});
       }},
  };
  walk_map(root, "", top);
  const auto kk = kind_keys().find(c.initial_data.kind);
  if (kk == kind_keys().end())
    throw ValidationError("initial_data.kind", "unknown catalog entry '" + c.initial_data.kind + "'");
  for (const auto& k : data_keys)
    if (!kk->second.count(k))
      throw ValidationError("initial_data." + k, "not a parameter of " + c.initial_data.kind);
  validate(c);
  return c;
}

/// Canonical YAML: every key, fixed order, 17 significant digits.
inline std::string serialize(const RunConfig& c) {
  using detail::fmt;
  std::ostringstream o;
  o << "mode: " << to_string(c.mode) << "\n";
  o << "nu: " << fmt(c.nu) << "\n";
  o << "seed: " << c.seed << "\n";
  if (!c.output_dir.empty()) o << "output_dir: \"" << c.output_dir << "\"\n";
  o << "resolution_policy: " << c.resolution_policy << "\n";
  o << "snapshots: " << (c.snapshots ? "true" : "false") << "\n";
  o << "grid:\n  half_width: " << fmt(c.half_width) << "\n  n: " << c.n
    << "\n  selfsim_half_width: " << fmt(c.selfsim_half_width) << "\n";
  o << "time:\n  t_init: " << fmt(c.t_init) << "\n  t_end: " << fmt(c.t_end) << "\n  tau_step: " << fmt(c.tau_step)
    << "\n  samples_per_decade: " << c.samples_per_decade << "\n";
  const auto& d = c.initial_data;
  o << "initial_data:\n  kind: " << d.kind << "\n";
  if (d.kind == "gaussian")
    o << "  amplitude: " << fmt(d.amplitude) << "\n  center: " << detail::fmt_list({d.center[0], d.center[1]})
      << "\n  widths: " << detail::fmt_list({d.widths[0], d.widths[1]}) << "\n";
  else if (d.kind == "dipole")
    o << "  separation: " << fmt(d.separation) << "\n  strength: " << fmt(d.strength) << "\n  width: " << fmt(d.width)
      << "\n";
  else if (d.kind == "point_vortex_approx")
    o << "  circulation: " << fmt(d.circulation) << "\n  epsilon: " << fmt(d.epsilon) << "\n";
  else if (d.kind == "random_localized")
    o << "  amplitude: " << fmt(d.amplitude) << "\n  correlation_length: " << fmt(d.correlation_length)
      << "\n  envelope: " << fmt(d.envelope) << "\n  mean_zero: " << (d.mean_zero ? "true" : "false") << "\n";
  else if (d.kind == "eigenfunction")
    o << "  a: " << d.a << "\n  b: " << d.b << "\n";
  o << "  scale_to:\n    norm: " << d.scale_norm << "\n    m: " << fmt(d.scale_m) << "\n    value: " << fmt(d.scale_value)
    << "\n";
  o << "diagnostics:\n  weights: " << detail::fmt_list(c.weights) << "\n  energy: " << (c.energy ? "true" : "false")
    << "\n  energy_scale: " << fmt(c.energy_scale) << "\n";
  o << "picard:\n  n_times: " << c.picard_times << "\n  max_iter: " << c.picard_max_iter << "\n  tol: " << fmt(c.picard_tol)
    << "\n";
  o << "probe:\n  id: " << c.probe_id << "\n  ensemble: " << c.probe_ensemble << "\n  times: "
    << detail::fmt_list(c.probe_times) << "\n  m: " << fmt(c.probe_m) << "\n  sigma: " << fmt(c.probe_sigma)
    << "\n  p: " << fmt(c.probe_p) << "\n  q: " << fmt(c.probe_q) << "\n";
  o << "fp:\n  tau_end: " << fmt(c.fp_tau_end) << "\n";
  return o.str();
}

}  // namespace couette
