#pragma once

// Self-similar frame. With
//   X = x / sqrt(nu t (1 + t^2/3)),
//   Y = ((1 + t^2/3) y - (t/2) x) / sqrt(nu t (1 + t^2/3)(1 + t^2/12)),
//   w(t, x, y) = J(t) W(t, X, Y),   J(t) = 1 / (nu t sqrt(1 + t^2/12)),
// the fundamental solution becomes the fixed Gaussian G and the vorticity
// equation becomes  t d_t W = L_t W + N_t W.
//
// The coordinate map is x -> A_t x with A_t lower triangular, so every frame
// change is a single triangular remap: hat W(K) = hat w(A_t^T K).

#include <cmath>
#include <algorithm>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/linear_propagator.hpp"
#include "couette/remap.hpp"
#include "couette/spectral.hpp"

namespace couette {

/// A_t, the linear map (x, y) -> (X, Y).
inline Mat2 selfsim_matrix(double t, double nu) {
  if (!(t > 0.0)) throw DomainError("self-similar coordinates need t > 0");
  if (!(nu > 0.0)) throw DomainError("viscosity must be positive");
  const double a = 1.0 + t * t / 3.0, b = 1.0 + t * t / 12.0;
  const double sx = std::sqrt(nu * t * a), sy = std::sqrt(nu * t * a * b);
  return {1.0 / sx, 0.0, -0.5 * t / sy, a / sy};
}

/// det A_t = 1 / (nu t sqrt(1 + t^2/12)); also the amplitude factor J(t).
inline double selfsim_jacobian(double t, double nu) {
  if (!(t > 0.0)) throw DomainError("self-similar coordinates need t > 0");
  return 1.0 / (nu * t * std::sqrt(1.0 + t * t / 12.0));
}

inline std::pair<double, double> selfsim_coords(double t, double nu, double x, double y) {
  return selfsim_matrix(t, nu).apply(x, y);
}

/// Scalar coefficients of Delta_t and L_t at time t.
struct FrameCoefficients {
  double t = 0.0;
  double c_diff1 = 1.0;   // (1 + t^2/3)^{-1}
  double c_mix = 0.0;     // (t/2)(1 + t^2/12)^{-1/2}
  double c_diff2 = 1.0;   // (1 + t^2/3)(1 + t^2/12)^{-1}
  double drift_mixed = 0.5;  // coefficient of (X - c_mix Y)(d_X - c_mix d_Y)
  double drift_y = 0.5;      // coefficient of Y d_Y
  double rotation = 0.0;     // coefficient of X d_Y - Y d_X
  double constant = 1.0;

  static FrameCoefficients at(double t) {
    FrameCoefficients c;
    c.t = t;
    const double a = 1.0 + t * t / 3.0, b = 1.0 + t * t / 12.0;
    c.c_diff1 = 1.0 / a;
    c.c_mix = 0.5 * t / std::sqrt(b);
    c.c_diff2 = a / b;
    c.drift_mixed = 0.5 * c.c_diff1;
    c.drift_y = 0.5 * c.c_diff2;
    c.rotation = 0.25 * t / std::sqrt(b) * (9.0 + t * t) / (3.0 + t * t);
    c.constant = (12.0 + 2.0 * t * t) / (12.0 + t * t);
    return c;
  }

  /// t -> infinity limits; the surviving terms are those of L_infinity.
  static FrameCoefficients limit() {
    FrameCoefficients c;
    c.t = std::numeric_limits<double>::infinity();
    c.c_diff1 = 0.0;
    c.c_mix = std::sqrt(3.0);
    c.c_diff2 = 4.0;
    c.drift_mixed = 0.0;
    c.drift_y = 2.0;
    c.rotation = std::sqrt(3.0) / 2.0;
    c.constant = 2.0;
    return c;
  }

  /// Fourier symbol of Delta_t.
  double laplacian_symbol(double xi, double eta) const {
    const double s = xi - c_mix * eta;
    return -(c_diff1 * s * s + c_diff2 * eta * eta);
  }
};

/// Vorticity in the self-similar frame together with its physical time.
struct SelfSimilarState {
  Field omega;
  double t = 1.0;
  double nu = 1.0;
  double alpha = 0.0;

  SelfSimilarState() = default;
  SelfSimilarState(Field w, double t_, double nu_, double alpha_)
      : omega(std::move(w)), t(t_), nu(nu_), alpha(alpha_) {
    if (!(t_ > 0.0)) throw DomainError("self-similar state needs t > 0");
    if (!(nu_ > 0.0)) throw DomainError("viscosity must be positive");
  }
  /// State whose alpha is the mass of `w`.
  static SelfSimilarState from_field(Field w, double t, double nu) {
    const double a = mass(w);
    return SelfSimilarState(std::move(w), t, nu, a);
  }
};

inline constexpr double kTailTolerance = 1e-6;

namespace detail {

inline void check_tail(const Field& f, const char* what) {
  const double tail = tail_mass_fraction(f);
  if (tail > kTailTolerance)
    throw TruncationError(std::string(what) + ": tail mass fraction " + std::to_string(tail) +
                              " outside the half-box",
                          tail);
}

}  // namespace detail

/// W at time t from the physical vorticity w, resampled on `target`.
inline SelfSimilarState phys_to_selfsim(const Field& w, double t, double nu, const GridSpec& target) {
  detail::check_tail(w, "physical field not localized");
  const Mat2 A = selfsim_matrix(t, nu);
  GridSpec dst = target;
  dst.frame = Frame::selfsim;
  Field out = remap(w, dst, A.transpose());
  detail::check_tail(out, "self-similar image does not fit the target box");
  return SelfSimilarState(std::move(out), t, nu, mass(w));
}

/// Physical vorticity w(t) on `target` from a self-similar state.
inline Field selfsim_to_phys(const SelfSimilarState& s, const GridSpec& target) {
  detail::check_tail(s.omega, "self-similar field not localized");
  const Mat2 A = selfsim_matrix(s.t, s.nu);
  GridSpec dst = target;
  dst.frame = Frame::physical;
  Field out = remap(s.omega, dst, A.inverse().transpose());
  detail::check_tail(out, "physical image does not fit the target box");
  return out;
}

/// Delta_t^{-1} f with the zero mode set to 0.
inline Field delta_t_inverse(const Field& f, double t) {
  const FrameCoefficients c = FrameCoefficients::at(t);
  const GridSpec& g = f.grid();
  return detail::multiply_symbol(f, [&](int p, int q) -> cplx {
    if (p == 0 && q == 0) return 0.0;
    return 1.0 / c.laplacian_symbol(g.wavenumber(p), g.wavenumber(q));
  });
}

namespace detail {

// Delta f + drift and rotation terms + constant, for a given coefficient set.
inline Field apply_frame_operator(const Field& f, const FrameCoefficients& c) {
  const GridSpec& g = f.grid();
  const Field lap = to_physical(multiply_symbol(f, [&](int p, int q) -> cplx {
    return c.laplacian_symbol(g.wavenumber(p), g.wavenumber(q));
  }));
  const Field fx = to_physical(derivative(f, 1, 0));
  const Field fy = to_physical(derivative(f, 0, 1));
  const Field fp = to_physical(f);
  const auto &L = lap.samples(), &Fx = fx.samples(), &Fy = fy.samples(), &F = fp.samples();
  std::vector<double> v(g.size());
  for (int i = 0; i < g.n; ++i) {
    const double X = g.coordinate(i);
    for (int j = 0; j < g.n; ++j) {
      const double Y = g.coordinate(j);
      const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
      v[k] = L[k] + c.drift_mixed * (X - c.c_mix * Y) * (Fx[k] - c.c_mix * Fy[k]) +
             c.drift_y * Y * Fy[k] + c.rotation * (X * Fy[k] - Y * Fx[k]) + c.constant * F[k];
    }
  }
  return Field::from_samples(g, std::move(v));
}

}  // namespace detail

/// L_t f, pseudo-spectrally.
inline Field apply_Lt(const Field& f, double t) {
  return detail::apply_frame_operator(f, FrameCoefficients::at(t));
}

/// L_infinity f = 4 d_Y^2 f + 2 Y d_Y f + 2 f + (sqrt 3 / 2)(X d_Y - Y d_X) f.
inline Field apply_Linf(const Field& f) { return detail::apply_frame_operator(f, FrameCoefficients::limit()); }

/// N_t f = nu^{-1} (1 + t^2/12)^{-1} (d_Y psi d_X f - d_X psi d_Y f), psi = Delta_t^{-1} f.
/// The input is 2/3-truncated first; the product itself is not truncated.
/// When `max_speed` is given it receives the largest speed of the advecting
/// field, for step-size control.
inline Field apply_Nt(const Field& f, double t, double nu, double* max_speed = nullptr) {
  const Field fd = dealias(f);
  const Field psi = delta_t_inverse(fd, t);
  const Field px = to_physical(derivative(psi, 1, 0)), py = to_physical(derivative(psi, 0, 1));
  const Field fx = to_physical(derivative(fd, 1, 0)), fy = to_physical(derivative(fd, 0, 1));
  const double k = 1.0 / (nu * (1.0 + t * t / 12.0));
  const auto &Px = px.samples(), &Py = py.samples(), &Fx = fx.samples(), &Fy = fy.samples();
  std::vector<double> v(Px.size());
  double vmax = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = k * (Py[i] * Fx[i] - Px[i] * Fy[i]);
    vmax = std::max(vmax, k * std::hypot(Px[i], Py[i]));
  }
  if (max_speed) *max_speed = vmax;
  return Field::from_samples(f.grid(), std::move(v));
}

/// Exact solution operator of  t d_t W = L_t W  from t1 to t2 (t2 >= t1 > 0).
///
/// Follows from the physical-frame characteristics: with D = t2 - t1,
///   hat W(K, t2) = exp(-nu Q_D(A_{t2}^T K)) hat W(A_{t1}^{-T} S_D A_{t2}^T K, t1),
/// S_D = [[1, 0], [D, 1]]. Long spans are split so that each remap stays close
/// to the identity.
inline Field selfsim_linear_step(const Field& w, double t1, double t2, double nu) {
  if (!(t1 > 0.0) || !(t2 >= t1)) throw DomainError("selfsim_linear_step needs t2 >= t1 > 0");
  if (t2 == t1) return w;
  const double max_log_step = 0.25;
  const int pieces = std::max(1, static_cast<int>(std::ceil(std::log(t2 / t1) / max_log_step)));
  Field cur = w;
  for (int i = 0; i < pieces; ++i) {
    const double a = t1 * std::exp(std::log(t2 / t1) * i / pieces);
    const double b = i + 1 == pieces ? t2 : t1 * std::exp(std::log(t2 / t1) * (i + 1) / pieces);
    const Mat2 A2t = selfsim_matrix(b, nu).transpose();
    const Mat2 M = selfsim_matrix(a, nu).inverse().transpose() * Mat2{1.0, 0.0, b - a, 1.0} * A2t;
    const LinearSymbol sym(nu, b - a);
    cur = remap(cur, cur.grid(), M, 1.0, [&](double k1, double k2) {
      const auto [xi, eta] = A2t.apply(k1, k2);
      return sym.value(xi, eta);
    });
  }
  return cur;
}

/// What the evolver does when the spectrum reaches beyond the 2/3 band or
/// the field approaches the box boundary.
enum class ResolutionPolicy { warn, error };

struct StepControl {
  double dtau = 2e-3;
  double min_dtau = 1e-7;
  double cfl = 0.5;                 // bound on dtau * max speed * Nyquist wavenumber
  double growth_limit = 10.0;       // L2 growth over one step treated as blow-up
  double resolution_tol = 1e-6;     // spectral tail / peak beyond the 2/3 band
  ResolutionPolicy policy = ResolutionPolicy::warn;
  int monitor_every = 16;
};

/// Raised when the step size falls below StepControl::min_dtau; carries the last accepted state.
class BlowUpError : public DivergenceError {
 public:
  BlowUpError(const std::string& what, double ratio, SelfSimilarState last)
      : DivergenceError(what, ratio), last_(std::move(last)) {}
  const SelfSimilarState& last_state() const noexcept { return last_; }

 private:
  SelfSimilarState last_;
};

/// Raised under ResolutionPolicy::error; carries the offending state.
class UnderResolvedError : public ResolutionError {
 public:
  UnderResolvedError(const std::string& what, SelfSimilarState state)
      : ResolutionError(what), state_(std::move(state)) {}
  const SelfSimilarState& state() const noexcept { return state_; }

 private:
  SelfSimilarState state_;
};

struct EvolveOptions {
  StepControl step{};
  bool nonlinear = true;
  /// Physical times at which `observer` is called; steps are shortened to hit them.
  std::vector<double> sample_times;
  std::function<void(const SelfSimilarState&)> observer;
  /// Called after every accepted step.
  std::function<void(const SelfSimilarState&)> on_step;
};

struct EvolveResult {
  SelfSimilarState state;
  long steps = 0;
  long rejected = 0;
  double final_dtau = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

// Nonlinear term with the output projected onto the 2/3 band and zero mean.
inline Field nonlinear_rhs(const Field& w, double t, double nu, double* vmax) {
  const Field n = to_spectral(dealias(apply_Nt(w, t, nu, vmax)));
  auto c = n.coefficients();
  c[0] = 0.0;
  return Field::from_coefficients(n.grid(), std::move(c));
}

inline std::string resolution_problem(const Field& w, const StepControl& ctl) {
  const auto [peak, tail] = spectral_peak_and_tail(w);
  if (peak > 0.0 && tail > ctl.resolution_tol * peak)
    return "spectral tail " + std::to_string(tail / peak) + " of peak beyond the 2/3 band";
  const double m = tail_mass_fraction(w);
  if (m > kTailTolerance) return "tail mass fraction " + std::to_string(m) + " outside the half-box";
  return {};
}

}  // namespace detail

/// Integrates  d_tau W = L_t W + N_t W,  t = e^tau, from state.t to t_end.
///
/// Integrating-factor RK2 (Lawson): the linear part is propagated exactly by
/// selfsim_linear_step, the nonlinear part by Heun's method, so Ω = alpha G is
/// preserved to roundoff when the nonlinearity is off. Mass is held exactly
/// because both pieces leave the zero mode untouched.
inline EvolveResult evolve(const SelfSimilarState& start, double t_end, const EvolveOptions& opts = {}) {
  if (!(t_end >= start.t)) throw DomainError("evolve needs t_end >= state.t");
  const StepControl& ctl = opts.step;
  if (!(ctl.dtau > 0.0)) throw DomainError("tau step must be positive");
  EvolveResult res;
  res.state = start;
  res.state.omega = to_spectral(start.omega);
  const double nu = start.nu;
  const double tau_end = std::log(t_end);
  double tau = std::log(start.t);
  double h = ctl.dtau;

  std::vector<double> samples;
  for (double s : opts.sample_times)
    if (s >= start.t && s <= t_end) samples.push_back(s);
  std::sort(samples.begin(), samples.end());
  std::size_t next_sample = 0;
  auto observe = [&]() {
    while (next_sample < samples.size() && samples[next_sample] <= res.state.t * (1.0 + 1e-12)) {
      if (opts.observer) opts.observer(res.state);
      ++next_sample;
    }
  };
  bool warned = false;
  auto monitor = [&]() {
    const std::string problem = detail::resolution_problem(res.state.omega, ctl);
    if (problem.empty()) return;
    if (ctl.policy == ResolutionPolicy::error)
      throw UnderResolvedError("under-resolved at t = " + std::to_string(res.state.t) + ": " + problem,
                               res.state);
    if (!warned) res.warnings.push_back("t = " + std::to_string(res.state.t) + ": " + problem);
    warned = true;
  };

  monitor();
  observe();
  while (tau < tau_end - 1e-14 * std::max(1.0, std::abs(tau_end))) {
    double target = std::min(tau + h, tau_end);
    if (next_sample < samples.size()) target = std::min(target, std::log(samples[next_sample]));
    if (target <= tau) target = std::min(tau + h, tau_end);
    const double step = target - tau;
    const double t0 = res.state.t;
    const double t1 = target >= tau_end ? t_end
                      : (next_sample < samples.size() && target == std::log(samples[next_sample]))
                          ? samples[next_sample]
                          : std::exp(target);
    const Field& u = res.state.omega;
    Field next;
    if (opts.nonlinear) {
      double vmax = 0.0;
      const Field k1 = detail::nonlinear_rhs(u, t0, nu, &vmax);
      const double knyq = u.grid().nyquist();
      if (step * vmax * knyq > ctl.cfl) {
        h = 0.5 * std::min(h, step);
        ++res.rejected;
        if (h < ctl.min_dtau)
          throw BlowUpError("step size collapsed under the advective stability bound at t = " +
                                std::to_string(t0),
                            step * vmax * knyq, res.state);
        continue;
      }
      const Field a = selfsim_linear_step(combine(1.0, u, step, k1), t0, t1, nu);
      const Field k2 = detail::nonlinear_rhs(a, t1, nu, nullptr);
      const Field half = selfsim_linear_step(combine(1.0, u, 0.5 * step, k1), t0, t1, nu);
      next = to_spectral(combine(1.0, half, 0.5 * step, k2));
    } else {
      next = to_spectral(selfsim_linear_step(u, t0, t1, nu));
    }
    const double before = lp_norm(u, 2), after = lp_norm(next, 2);
    if (!std::isfinite(after) || (before > 0.0 && after > ctl.growth_limit * before)) {
      h = 0.5 * std::min(h, step);
      ++res.rejected;
      if (h < ctl.min_dtau)
        throw BlowUpError("solution blew up at t = " + std::to_string(t0), before > 0 ? after / before : after,
                          res.state);
      continue;
    }
    // Exact mass bookkeeping.
    auto c = next.coefficients();
    c[0] = res.state.alpha / next.grid().box_area();
    res.state.omega = Field::from_coefficients(next.grid(), std::move(c));
    res.state.t = t1;
    tau = target;
    ++res.steps;
    if (ctl.monitor_every > 0 && res.steps % ctl.monitor_every == 0) monitor();
    if (opts.on_step) opts.on_step(res.state);
    observe();
  }
  res.state.t = t_end;
  monitor();
  observe();
  res.final_dtau = h;
  return res;
}

}  // namespace couette
