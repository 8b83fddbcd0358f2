#pragma once

// Time-series diagnostics, exponent fits, the weighted energy functionals
// E(t), D(t), and empirical-constant probes for the basic inequalities.

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "couette/errors.hpp"
#include "couette/fokker_planck.hpp"
#include "couette/linear_propagator.hpp"
#include "couette/selfsim.hpp"
#include "couette/spectral.hpp"

namespace couette {

/// Ordering constants c1..c7 of the weighted energy functional.
struct EnergyCoefficients {
  std::array<double, 7> c{};
  double t0 = 1.0;
  double m = 3.0;

  /// (A^-3, A^-5, A^-6, A^-5, A^-9, A^-11, A^-12).
  static EnergyCoefficients from_scale(double A = 10.0, double t0 = 1.0, double m = 3.0) {
    if (!(A > 1.0)) throw DomainError("energy coefficient scale must exceed 1");
    EnergyCoefficients e;
    const int powers[7] = {3, 5, 6, 5, 9, 11, 12};
    for (int i = 0; i < 7; ++i) e.c[i] = std::pow(A, -powers[i]);
    e.t0 = t0;
    e.m = m;
    e.validate();
    return e;
  }

  /// Strong orderings and the product conditions, each with a margin of 10.
  /// Throws DomainError naming the first violated relation.
  void validate() const {
    if (!(t0 > 0.0)) throw DomainError("energy anchor time must be positive");
    for (double v : c)
      if (!(v > 0.0)) throw DomainError("energy coefficients must be positive");
    const double slack = 1.0 + 1e-12;
    auto need = [&](bool ok, const char* what) {
      if (!ok) throw DomainError(std::string("energy coefficients violate ") + what);
    };
    const auto [c1, c2, c3, c4, c5, c6, c7] = std::tuple{c[0], c[1], c[2], c[3], c[4], c[5], c[6]};
    need(10.0 * c1 <= slack, "1 >> c1");
    need(10.0 * c2 <= slack * c1, "c1 >> c2");
    need(c2 == c4, "c2 = c4");
    need(10.0 * c3 <= slack * c2, "c2 >> c3");
    need(10.0 * c5 <= slack * c3, "c3 >> c5");
    need(10.0 * c6 <= slack * c5, "c5 >> c6");
    need(10.0 * c7 <= slack * c6, "c6 >> c7");
    need(10.0 * c1 * c1 <= slack * c2, "c1^2 << c2");
    need(10.0 * c2 * c2 <= slack * c1 * c3, "c2^2 << c1 c3");
    need(10.0 * c5 * c5 <= slack * c3 * c6, "c5^2 << c3 c6");
    need(10.0 * c6 * c6 <= slack * c5 * c7, "c6^2 << c5 c7");
  }
};

struct EnergyValues {
  double E = 0.0;
  double D = 0.0;
};

/// E(t) and D(t) with every ln(t/t0) power and <t>^{-2} factor.
inline EnergyValues energy_functionals(const Field& w, double t, const EnergyCoefficients& k) {
  if (!(t >= k.t0)) throw DomainError("energy functionals need t >= t0");
  const WeightSpec ws(k.m);
  const double l = std::log(t / k.t0);
  const double it2 = 1.0 / (1.0 + t * t);
  auto n2 = [&](int a, int b) {
    const double v = weighted_norm(w, ws, a, b);
    return v * v;
  };
  auto inner = [&](int a1, int b1, int a2, int b2) {
    return weighted_inner(derivative(w, a1, b1), derivative(w, a2, b2), ws);
  };
  const auto& c = k.c;
  EnergyValues r;
  r.E = n2(0, 0) + c[0] * l * n2(0, 1) + c[1] * l * l * inner(1, 0, 0, 1) + c[2] * std::pow(l, 3) * n2(1, 0) +
        c[3] * l * l * n2(0, 2) + c[4] * std::pow(l, 4) * n2(1, 1) + c[5] * std::pow(l, 5) * inner(2, 0, 1, 1) +
        c[6] * std::pow(l, 6) * n2(2, 0);
  r.D = it2 * n2(1, 0) + n2(0, 1) + c[0] * l * (it2 * n2(1, 1) + n2(0, 2)) + c[1] * l * l * n2(1, 0) +
        c[2] * std::pow(l, 3) * (it2 * n2(2, 0) + n2(1, 1)) + c[3] * l * l * (it2 * n2(1, 2) + n2(0, 3)) +
        c[4] * std::pow(l, 4) * (it2 * n2(2, 1) + n2(1, 2)) + c[5] * std::pow(l, 5) * n2(2, 0) +
        c[6] * std::pow(l, 6) * (it2 * n2(3, 0) + n2(2, 1));
  return r;
}

/// One sample of a run. Lebesgue norms are those of the physical vorticity,
/// obtained from the self-similar field through ||w||_p = J^{1-1/p} ||W||_p.
/// Weighted norms live in the self-similar frame. The L^1 distance to the
/// Oseen profile is frame independent, so it is measured on W directly.
struct DiagnosticsRecord {
  double t = 1.0;
  double tau = 0.0;
  double mass = 0.0;
  std::map<double, double> lp_norms;                        // p -> ||w||_p
  std::map<std::tuple<double, int, int>, double> weighted;  // (m, a, b) -> ||<X>^m d W||
  std::map<double, double> convergence_L2m;                 // m -> ||W - alpha G||_{L^2(m)}
  double convergence_L1_phys = 0.0;
  std::optional<EnergyValues> energy;
};

struct RecordOptions {
  std::vector<double> p_values{1.0, 4.0 / 3.0, 2.0, kInf};
  std::vector<double> convergence_m{3.0};
  std::vector<std::tuple<double, int, int>> weighted;
  std::optional<EnergyCoefficients> energy;
  /// When false the Lebesgue norms are those of W itself (Fokker-Planck runs).
  bool physical_norms = true;
};

inline DiagnosticsRecord record(const SelfSimilarState& s, const RecordOptions& opts = {}) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.tau = std::log(s.t);
  r.mass = mass(s.omega);
  const double J = opts.physical_norms ? selfsim_jacobian(s.t, s.nu) : 1.0;
  for (double p : opts.p_values) {
    const double e = std::isinf(p) ? 1.0 : 1.0 - 1.0 / p;
    r.lp_norms[p] = std::pow(J, e) * lp_norm(s.omega, p);
  }
  for (const auto& key : opts.weighted) {
    const auto [m, a, b] = key;
    r.weighted[key] = weighted_norm(s.omega, m, a, b);
  }
  const Field diff = s.omega - s.alpha * gaussian_G(s.omega.grid());
  for (double m : opts.convergence_m) r.convergence_L2m[m] = weighted_norm(diff, m);
  r.convergence_L1_phys = lp_norm(diff, 1);
  if (opts.energy && s.t >= opts.energy->t0) r.energy = energy_functionals(s.omega, s.t, *opts.energy);
  return r;
}

struct RateFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

/// Least-squares slope of log(value) against log(t) over samples with t in [ta, tb].
inline RateFit rate_fit(const std::vector<std::pair<double, double>>& series, double ta, double tb) {
  std::vector<double> x, y;
  for (const auto& [t, v] : series) {
    if (t < ta || t > tb) continue;
    if (!(v > 0.0)) throw DomainError("rate_fit needs positive values, got " + std::to_string(v));
    if (!(t > 0.0)) throw DomainError("rate_fit needs positive times");
    x.push_back(std::log(t));
    y.push_back(std::log(v));
  }
  if (x.size() < 5) throw FitError("rate_fit needs at least 5 samples in the window, got " + std::to_string(x.size()));
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n, my = pairwise_sum(y) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("rate_fit window has no spread in t");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - f.intercept - f.slope * x[i];
    ssr += e * e;
  }
  f.stderr_ = x.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  f.samples = x.size();
  return f;
}

enum class ProbeId { biot_savart_linf, anisotropic_sigma, semigroup_lp };

inline std::string to_string(ProbeId id) {
  switch (id) {
    case ProbeId::biot_savart_linf: return "biot_savart_linf";
    case ProbeId::anisotropic_sigma: return "anisotropic_sigma";
    case ProbeId::semigroup_lp: return "semigroup_Lp";
  }
  return "?";
}

inline ProbeId probe_from_string(const std::string& s) {
  if (s == "biot_savart_linf") return ProbeId::biot_savart_linf;
  if (s == "anisotropic_sigma") return ProbeId::anisotropic_sigma;
  if (s == "semigroup_Lp" || s == "semigroup_lp") return ProbeId::semigroup_lp;
  throw ConfigError("unknown probe id '" + s + "'");
}

struct ProbeOptions {
  double m = 2.0;             // weight exponent of the Biot-Savart bound, m > 1
  double sigma = 0.25;        // anisotropic exponent, 0 < sigma < 1/2
  double nu = 1.0;            // viscosity of the semigroup probe
  double p = 1.0, q = kInf;   // Lebesgue pair of the semigroup probe, p <= q
  GridSpec selfsim_grid{};    // grid for the semigroup probe beyond t = 1
};

struct ProbeReport {
  ProbeId id{};
  std::vector<double> ratios;  // row-major over (field, time); NaN when skipped
  double max = 0.0;
  double mean = 0.0;
  std::size_t argmax_field = 0;
  double argmax_time = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline double stream_gradient_lhs(const Field& f, double t) {
  const Field psi = delta_t_inverse(f, t);
  const double bracket = std::sqrt(1.0 + t * t);
  return lp_norm(derivative(psi, 1, 0), kInf) + bracket * lp_norm(derivative(psi, 0, 1), kInf);
}

// ||S(t) f||_q via the self-similar frame once t > 1, where the physical
// support of S(t) f would outgrow any fixed box.
inline double semigroup_norm(const Field& f, double t, const ProbeOptions& o) {
  if (t <= 1.0) return lp_norm(apply_S(f, o.nu, t), o.q);
  GridSpec gs = o.selfsim_grid;
  gs.frame = Frame::selfsim;
  const Field w1 = apply_S(f, o.nu, 1.0);
  const SelfSimilarState s = phys_to_selfsim(w1, 1.0, o.nu, gs);
  const Field W = selfsim_linear_step(s.omega, 1.0, t, o.nu);
  const double e = std::isinf(o.q) ? 1.0 : 1.0 - 1.0 / o.q;
  return std::pow(selfsim_jacobian(t, o.nu), e) * lp_norm(W, o.q);
}

}  // namespace detail

/// Ratio LHS / RHS of an inequality (constants stripped) over an ensemble and
/// a list of times. biot_savart_linf and anisotropic_sigma read each field as
/// a self-similar profile; semigroup_lp reads it as physical initial data.
inline ProbeReport inequality_probe(ProbeId id, const std::vector<Field>& ensemble, const std::vector<double>& times,
                                    const ProbeOptions& o = {}) {
  if (ensemble.empty()) throw EmptyInputError("inequality_probe needs a nonempty ensemble");
  if (times.empty()) throw EmptyInputError("inequality_probe needs at least one time");
  if (id == ProbeId::biot_savart_linf && !(o.m > 1.0)) throw DomainError("Biot-Savart probe needs m > 1");
  if (id == ProbeId::anisotropic_sigma && !(o.sigma > 0.0 && o.sigma < 0.5))
    throw DomainError("anisotropic probe needs 0 < sigma < 1/2");
  if (id == ProbeId::semigroup_lp && !(o.p >= 1.0 && o.q >= o.p)) throw DomainError("semigroup probe needs 1 <= p <= q");
  ProbeReport rep;
  rep.id = id;
  double sum = 0.0;
  std::size_t count = 0;
  bool first = true;
  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const Field& f = ensemble[i];
    if (lp_norm(f, kInf) == 0.0) {
      rep.warnings.push_back("field " + std::to_string(i) + " is zero; skipped");
      for (std::size_t k = 0; k < times.size(); ++k) rep.ratios.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    for (double t : times) {
      if (!(t > 0.0)) throw DomainError("probe times must be positive");
      const double bracket = std::sqrt(1.0 + t * t);
      double ratio = 0.0;
      switch (id) {
        case ProbeId::biot_savart_linf: {
          const double hi = 2.0 * o.m / (o.m - 1.0), lo = 2.0 * o.m / (o.m + 1.0);
          const double rhs = std::pow(bracket, 1.5) * std::sqrt(lp_norm(f, hi) * lp_norm(f, lo));
          ratio = detail::stream_gradient_lhs(f, t) / rhs;
          break;
        }
        case ProbeId::anisotropic_sigma: {
          const double rhs = std::pow(bracket, 1.0 + o.sigma) * std::pow(weighted_norm(f, 1.0), 0.5 + o.sigma) *
                             std::pow(weighted_norm(f, 1.0, 1, 0), 0.5 - o.sigma);
          ratio = detail::stream_gradient_lhs(f, t) / rhs;
          break;
        }
        case ProbeId::semigroup_lp: {
          const double e = (std::isinf(o.q) ? 0.0 : 1.0 / o.q) - 1.0 / o.p;
          const double rhs = std::pow(o.nu * t * bracket, e) * lp_norm(f, o.p);
          ratio = detail::semigroup_norm(f, t, o) / rhs;
          break;
        }
      }
      if (!std::isfinite(ratio)) throw Error("inequality probe produced a non-finite ratio");
      rep.ratios.push_back(ratio);
      sum += ratio;
      ++count;
      if (first || ratio > rep.max) {
        rep.max = ratio;
        rep.argmax_field = i;
        rep.argmax_time = t;
        first = false;
      }
    }
  }
  rep.mean = count ? sum / static_cast<double>(count) : 0.0;
  return rep;
}

}  // namespace couette
