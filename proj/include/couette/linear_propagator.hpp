#pragma once

// Linearized Couette dynamics  d_t w - nu Lap w + y d_x w = 0  in the physical
// frame, its fundamental solution, the Duhamel bilinear term and the Picard
// construction of mild solutions.
//
// In Fourier variables the linear flow is exact: the coefficient at (xi, eta)
// is transported from (xi, eta + t xi) and damped by
//   exp(-nu [xi^2 t + xi eta t^2 + eta^2 t + xi^2 t^3 / 3]).
// apply_S realizes this with an exact off-lattice evaluation (see remap.hpp),
// so the semigroup law holds to roundoff for every t.

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/remap.hpp"
#include "couette/spectral.hpp"

namespace couette {

struct LinearSymbol {
  double nu = 1.0;
  double t = 0.0;

  LinearSymbol(double nu_, double t_) : nu(nu_), t(t_) {
    if (!(nu_ > 0.0)) throw DomainError("viscosity must be positive");
    if (!(t_ >= 0.0)) throw DomainError("elapsed time must be >= 0");
  }

  /// Exponent Q with value = exp(-nu Q).
  double exponent(double xi, double eta) const {
    return xi * xi * t + xi * eta * t * t + eta * eta * t + xi * xi * t * t * t / 3.0;
  }
  double value(double xi, double eta) const { return std::exp(-nu * exponent(xi, eta)); }
};

inline double linear_symbol_value(const LinearSymbol& s, double xi, double eta) { return s.value(xi, eta); }

/// Fundamental solution of the linearized equation (initial datum a unit Dirac mass at the origin).
inline double green_kernel(double nu, double t, double x, double y) {
  if (!(t > 0.0)) throw DomainError("green_kernel needs t > 0");
  if (!(nu > 0.0)) throw DomainError("viscosity must be positive");
  const double a = 1.0 + t * t / 3.0;
  const double b = 1.0 + t * t / 12.0;
  const double r = a * y - 0.5 * t * x;
  return std::exp(-x * x / (4.0 * nu * t * a) - r * r / (4.0 * nu * t * a * b)) /
         (4.0 * std::numbers::pi * nu * t * std::sqrt(b));
}

/// Samples of green_kernel on a grid.
inline Field green_kernel_field(const GridSpec& grid, double nu, double t) {
  return Field::sample(grid, [&](double x, double y) { return green_kernel(nu, t, x, y); });
}

inline constexpr double kAliasTolerance = 1e-10;

/// S(t) f without resolution checks; see apply_S.
inline Field shear_evolve(const Field& f, double nu, double t, RemapReport* report = nullptr) {
  const LinearSymbol s(nu, t);
  if (t == 0.0) return f;
  return remap(f, f.grid(), Mat2{1.0, 0.0, t, 1.0}, 1.0,
               [&](double xi, double eta) { return s.value(xi, eta); }, report);
}

/// S(t) f: exact linear evolution of a physical-frame field over elapsed time t.
///
/// Throws AliasingError when the characteristic shift reads frequencies beyond
/// the resolved band of f at a level exceeding `tolerance` times the peak of
/// the result, or when the result itself reaches the band edge.
inline Field apply_S(const Field& f, double nu, double t, double tolerance = kAliasTolerance) {
  if (t == 0.0) {
    (void)LinearSymbol(nu, t);
    return f;
  }
  const GridSpec& g = f.grid();
  RemapReport report;
  const Field out = shear_evolve(f, nu, t, &report);
  const double edge_in = edge_shell_ratio(f) * spectral_peak_and_tail(f).first;
  const double peak_out = spectral_peak_and_tail(out).first;
  if (peak_out > 0.0 && report.masked_weight * edge_in > tolerance * peak_out)
    throw AliasingError("characteristic shift leaves the resolved band at mode (" +
                            std::to_string(report.masked_mode_x) + ", " +
                            std::to_string(report.masked_mode_y) + ")",
                        report.masked_mode_x, report.masked_mode_y);
  if (peak_out > 0.0 && edge_shell_ratio(out) > tolerance) {
    // Report the strongest mode on the outer shell of the result.
    const Field spec = to_spectral(out);
    const auto& c = spec.coefficients();
    int bx = 0, by = 0;
    double best = -1.0;
    for (int p = 0; p < g.n; ++p)
      for (int q = 0; q < g.n; ++q) {
        const int sp = g.signed_index(p), sq = g.signed_index(q);
        if (std::abs(sp) < g.n / 2 - 1 && std::abs(sq) < g.n / 2 - 1) continue;
        const double a = std::abs(c[static_cast<std::size_t>(p) * g.n + q]);
        if (a > best) best = a, bx = sp, by = sq;
      }
    throw AliasingError("sheared field reaches the band edge at mode (" + std::to_string(bx) + ", " +
                            std::to_string(by) + ")",
                        bx, by);
  }
  return out;
}

/// Time-indexed fields on one grid.
struct Trajectory {
  std::vector<double> times;
  std::vector<Field> fields;
  double nu = 1.0;

  Trajectory() = default;
  Trajectory(std::vector<double> ts, std::vector<Field> fs, double nu_)
      : times(std::move(ts)), fields(std::move(fs)), nu(nu_) {
    if (times.size() != fields.size()) throw ShapeError("trajectory times and fields differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw DomainError("trajectory times must be strictly increasing");
    for (std::size_t i = 1; i < fields.size(); ++i) require_same_grid(fields[0], fields[i]);
  }

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  const GridSpec& grid() const { return fields.front().grid(); }

  Trajectory scaled(double c) const {
    std::vector<Field> fs;
    fs.reserve(fields.size());
    for (const auto& f : fields) fs.push_back(c * f);
    return Trajectory(times, std::move(fs), nu);
  }

  /// Cubic Lagrange interpolation through the (up to) four nearest samples.
  Field at(double t) const {
    if (empty()) throw EmptyInputError("empty trajectory");
    const double span = times.back() - times.front();
    const double slack = 1e-12 * std::max(1.0, std::abs(span));
    if (t < times.front() - slack || t > times.back() + slack)
      throw RangeError("time " + std::to_string(t) + " outside trajectory range");
    if (size() == 1) return fields[0];
    std::size_t hi = std::upper_bound(times.begin(), times.end(), t) - times.begin();
    hi = std::clamp<std::size_t>(hi, 1, size() - 1);
    const std::size_t count = std::min<std::size_t>(4, size());
    std::size_t first = hi >= 2 ? hi - 2 : 0;
    first = std::min(first, size() - count);
    Field out;
    bool started = false;
    for (std::size_t a = first; a < first + count; ++a) {
      double w = 1.0;
      for (std::size_t b = first; b < first + count; ++b)
        if (b != a) w *= (t - times[b]) / (times[a] - times[b]);
      out = started ? combine(1.0, out, w, fields[a]) : w * fields[a];
      started = true;
    }
    return out;
  }
};

/// sup over samples of (nu t <t>)^{1/4} ||w(t)||_{L^{4/3}}, <t> = (1 + t^2)^{1/2}.
inline double kato_norm(const Trajectory& traj) {
  if (traj.empty()) throw EmptyInputError("kato_norm of an empty trajectory");
  double best = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double t = traj.times[i];
    if (!(t > 0.0)) throw DomainError("kato_norm needs sample times > 0");
    const double w = std::pow(traj.nu * t * std::sqrt(1.0 + t * t), 0.25);
    best = std::max(best, w * lp_norm(traj.fields[i], 4.0 / 3.0));
  }
  return best;
}

/// Time quadrature of the Duhamel integral: 8-point Gauss-Legendre on each
/// sample interval; the interval ending at the evaluation time is further
/// split geometrically towards its right end.
struct QuadratureSpec {
  int grading_levels = 3;
  double grading_ratio = 0.25;
};

namespace detail {

/// Nodes and weights of the 8-point Gauss-Legendre rule on [a, b].
inline std::vector<std::pair<double, double>> gauss8(double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, 8>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.emplace_back(mid - half * x[i], half * w[i]);
    out.emplace_back(mid + half * x[i], half * w[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Quadrature nodes on [a, b] with geometric grading towards b when `graded`.
inline std::vector<std::pair<double, double>> interval_rule(double a, double b, bool graded,
                                                            const QuadratureSpec& q) {
  if (!graded || q.grading_levels <= 0) return gauss8(a, b);
  std::vector<double> cuts{a};
  double len = b - a;
  for (int k = 0; k < q.grading_levels; ++k) {
    len *= q.grading_ratio;
    cuts.push_back(b - len);
  }
  cuts.push_back(b);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const auto part = gauss8(cuts[i], cuts[i + 1]);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

/// -div(u1 w2) with u1 the Biot-Savart velocity of w1.
inline Field transport_flux(const Field& w1, const Field& w2) {
  const auto [u1, u2] = biot_savart(w1);
  const Field a = multiply(u1, w2), b = multiply(u2, w2);
  return -1.0 * divergence(a, b);
}

}  // namespace detail

/// B(w1, w2)(t) = -int_{t0}^{t} S(t - s) div(u1(s) w2(s)) ds, with t0 the common
/// start of both trajectories and u1 the velocity of w1.
inline Field duhamel_B(const Trajectory& traj1, const Trajectory& traj2, double t,
                       const QuadratureSpec& quad = {}) {
  if (traj1.empty() || traj2.empty()) throw EmptyInputError("duhamel_B of an empty trajectory");
  require_same_grid(traj1.fields.front(), traj2.fields.front());
  const double t0 = std::max(traj1.times.front(), traj2.times.front());
  const double t1 = std::min(traj1.times.back(), traj2.times.back());
  if (t < t0 || t > t1) throw RangeError("time " + std::to_string(t) + " outside both trajectories");
  const double nu = traj1.nu;
  Field acc(traj1.grid());
  if (t == t0) return acc;
  // Breakpoints: every sample of the first trajectory inside (t0, t), then t.
  std::vector<double> cuts{t0};
  for (double s : traj1.times)
    if (s > t0 && s < t) cuts.push_back(s);
  cuts.push_back(t);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const bool last = i + 2 == cuts.size();
    for (const auto& [s, w] : detail::interval_rule(cuts[i], cuts[i + 1], last, quad)) {
      const Field flux = detail::transport_flux(traj1.at(s), traj2.at(s));
      acc = combine(1.0, acc, w, shear_evolve(flux, nu, t - s));
    }
  }
  return acc;
}

struct PicardResult {
  Trajectory trajectory;          // samples at t_1 .. t_N (t > 0)
  Field initial;                  // w0 at t = 0
  std::vector<double> history;    // Kato-norm distance between successive iterates
  int iterations = 0;
};

/// Fixed point of  w = S(t) w0 + B(w, w)  on [0, T] at n_times equispaced
/// samples. The iterates are represented through their Duhamel part
/// b = w - S(t) w0, which is interpolated in time; S(t) w0 is always exact.
inline PicardResult picard_solve(const Field& w0, double nu, double T, int n_times, int max_iter,
                                 double tol, const QuadratureSpec& quad = {}) {
  if (!(T > 0.0)) throw DomainError("Picard horizon must be positive");
  if (n_times < 2) throw DomainError("Picard needs at least two time samples");
  if (max_iter < 1) throw DomainError("Picard needs max_iter >= 1");
  const GridSpec& g = w0.grid();
  std::vector<double> times(n_times + 1);
  for (int i = 0; i <= n_times; ++i) times[i] = T * i / n_times;
  const double dt = T / n_times;

  std::vector<Field> linear(n_times + 1);
  for (int i = 0; i <= n_times; ++i) linear[i] = to_physical(shear_evolve(w0, nu, times[i]));
  std::vector<Field> duhamel(n_times + 1, Field(g));

  auto iterate_at = [&](const Trajectory& b, double s) {
    return to_physical(shear_evolve(w0, nu, s) + b.at(s));
  };

  PicardResult result;
  result.initial = w0;
  double prev = -1.0;
  int growth = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Trajectory b(times, duhamel, nu);
    std::vector<Field> next(n_times + 1, Field(g));
    for (int i = 1; i <= n_times; ++i) {
      Field acc = shear_evolve(next[i - 1], nu, dt);
      for (const auto& [s, w] : detail::interval_rule(times[i - 1], times[i], true, quad)) {
        const Field ws = iterate_at(b, s);
        acc = combine(1.0, acc, w, shear_evolve(detail::transport_flux(ws, ws), nu, times[i] - s));
      }
      next[i] = to_physical(acc);
    }
    std::vector<Field> diff;
    for (int i = 1; i <= n_times; ++i) diff.push_back(next[i] - duhamel[i]);
    const double dist = kato_norm(Trajectory(std::vector<double>(times.begin() + 1, times.end()), diff, nu));
    result.history.push_back(dist);
    result.iterations = it;
    duhamel = std::move(next);
    if (dist < tol) {
      std::vector<Field> fs;
      for (int i = 1; i <= n_times; ++i) fs.push_back(to_physical(linear[i] + duhamel[i]));
      result.trajectory = Trajectory(std::vector<double>(times.begin() + 1, times.end()), std::move(fs), nu);
      return result;
    }
    growth = (prev >= 0.0 && dist > prev) ? growth + 1 : 0;
    if (growth >= 3)
      throw DivergenceError("Picard iteration is not contracting (distance ratio " +
                                std::to_string(dist / prev) + ")",
                            dist / prev);
    prev = dist;
  }
  throw NoConvergenceError("Picard iteration did not reach tolerance in " + std::to_string(max_iter) +
                               " iterations",
                           result.history.size() >= 2
                               ? result.history.back() / result.history[result.history.size() - 2]
                               : 1.0);
}

}  // namespace couette
