#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/grid.hpp"

namespace couette {

/// Polynomial weight exponent m of the space L^2(m), weight (1 + X^2 + Y^2)^m.
struct WeightSpec {
  double m = 0.0;
  explicit WeightSpec(double m_ = 0.0) : m(m_) {
    if (!(m_ >= 0.0)) throw DomainError("weight exponent must be >= 0");
  }
};

inline constexpr int kMaxDerivativeOrder = 4;

/// Sum in a fixed pairwise order; reproducible and accurate to O(log n) ulps.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 16) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace detail {

// (i k)^a with the Nyquist mode removed for odd a, since its derivative is not
// representable as a real field.
inline cplx derivative_factor(const GridSpec& g, int p, int order) {
  if (order == 0) return 1.0;
  if ((order & 1) && p == g.n / 2) return 0.0;
  const cplx ik(0.0, g.wavenumber(p));
  cplx r = 1.0;
  for (int i = 0; i < order; ++i) r *= ik;
  return r;
}

template <class Symbol>
Field multiply_symbol(const Field& f, Symbol&& symbol) {
  const Field s = to_spectral(f);
  const GridSpec& g = s.grid();
  const auto& c = s.coefficients();
  std::vector<cplx> out(c.size());
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q) {
      const std::size_t k = static_cast<std::size_t>(p) * g.n + q;
      out[k] = c[k] * symbol(p, q);
    }
  return Field::from_coefficients(g, std::move(out));
}

}  // namespace detail

/// d^a/dx1^a d^b/dx2^b f by spectral multiplication; spectral representation only.
inline Field derivative(const Field& f, int a, int b) {
  if (a < 0 || b < 0 || a + b > kMaxDerivativeOrder)
    throw UnsupportedOrderError("derivative order (" + std::to_string(a) + "," + std::to_string(b) +
                                ") outside supported range a+b <= 4");
  if (a == 0 && b == 0) return to_spectral(f);
  const GridSpec& g = f.grid();
  std::vector<cplx> fx(g.n), fy(g.n);
  for (int p = 0; p < g.n; ++p) {
    fx[p] = detail::derivative_factor(g, p, a);
    fy[p] = detail::derivative_factor(g, p, b);
  }
  return detail::multiply_symbol(f, [&](int p, int q) { return fx[p] * fy[q]; });
}

/// Inverse Laplacian with the zero mode set to 0.
inline Field inverse_laplacian(const Field& f) {
  const GridSpec& g = f.grid();
  return detail::multiply_symbol(f, [&](int p, int q) -> cplx {
    if (p == 0 && q == 0) return 0.0;
    const double k1 = g.wavenumber(p), k2 = g.wavenumber(q);
    return -1.0 / (k1 * k1 + k2 * k2);
  });
}

/// Velocity u = (-d_y psi, d_x psi) with psi the mean-zero solution of Lap psi = omega.
inline std::pair<Field, Field> biot_savart(const Field& omega) {
  const Field psi = inverse_laplacian(omega);
  Field u1 = -1.0 * derivative(psi, 0, 1);
  Field u2 = derivative(psi, 1, 0);
  return {std::move(u1), std::move(u2)};
}

/// Spectral divergence d_x u1 + d_y u2.
inline Field divergence(const Field& u1, const Field& u2) {
  return derivative(u1, 1, 0) + derivative(u2, 0, 1);
}

/// Spectral scalar curl d_x u2 - d_y u1.
inline Field curl(const Field& u1, const Field& u2) {
  return derivative(u2, 1, 0) - derivative(u1, 0, 1);
}

/// Integral of f over the box.
inline double mass(const Field& f) {
  return to_spectral(f).coefficients()[0].real() * f.grid().box_area();
}

/// L^p norm by the rectangle rule; p = infinity gives the grid maximum of |f|.
inline double lp_norm(const Field& f, double p) {
  if (!(p >= 1.0)) throw DomainError("L^p exponent must be >= 1");
  const Field f_phys = to_physical(f);
  const auto& v = f_phys.samples();
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  std::vector<double> w(v.size());
  if (p == 1.0) {
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::abs(v[i]);
  } else if (p == 2.0) {
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = v[i] * v[i];
  } else {
    for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::pow(std::abs(v[i]), p);
  }
  const double integral = pairwise_sum(w) * f.grid().cell_area();
  return p == 1.0 ? integral : std::pow(integral, 1.0 / p);
}

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Samples of (1 + X^2 + Y^2)^{m}, with X, Y the box coordinates.
inline std::vector<double> weight_samples(const GridSpec& g, double m) {
  std::vector<double> w(g.size());
  for (int i = 0; i < g.n; ++i) {
    const double x = g.coordinate(i);
    for (int j = 0; j < g.n; ++j) {
      const double y = g.coordinate(j);
      const double r2 = 1.0 + x * x + y * y;
      w[static_cast<std::size_t>(i) * g.n + j] = m == 0.0 ? 1.0 : std::pow(r2, m);
    }
  }
  return w;
}

/// Weighted inner product of L^2(m): integral of f g (1 + X^2 + Y^2)^m.
inline double weighted_inner(const Field& f, const Field& h, const WeightSpec& w) {
  require_same_grid(f, h);
  const Field f_phys = to_physical(f);
  const auto& a = f_phys.samples();
  const Field h_phys = to_physical(h);
  const auto& b = h_phys.samples();
  const auto weight = weight_samples(f.grid(), w.m);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = a[i] * b[i] * weight[i];
  return pairwise_sum(prod) * f.grid().cell_area();
}

/// || <X,Y>^m d^a_X d^b_Y f ||_{L^2}.
inline double weighted_norm(const Field& f, const WeightSpec& w, int a = 0, int b = 0) {
  if (a < 0 || b < 0 || a + b > 3)
    throw UnsupportedOrderError("weighted_norm supports derivative orders a+b <= 3");
  const Field d = to_physical(derivative(f, a, b));
  const auto& v = d.samples();
  const auto weight = weight_samples(f.grid(), w.m);
  std::vector<double> prod(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) prod[i] = v[i] * v[i] * weight[i];
  return std::sqrt(pairwise_sum(prod) * f.grid().cell_area());
}

inline double weighted_norm(const Field& f, double m, int a = 0, int b = 0) {
  return weighted_norm(f, WeightSpec(m), a, b);
}

/// Fraction of the L^1 mass of f lying outside the centred half-box |x|,|y| < L/2.
inline double tail_mass_fraction(const Field& f) {
  const GridSpec& g = f.grid();
  const Field f_phys = to_physical(f);
  const auto& v = f_phys.samples();
  std::vector<double> all(v.size()), tail(v.size(), 0.0);
  const double half = 0.5 * g.half_width;
  for (int i = 0; i < g.n; ++i) {
    const bool out_x = std::abs(g.coordinate(i)) >= half;
    for (int j = 0; j < g.n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
      all[k] = std::abs(v[k]);
      if (out_x || std::abs(g.coordinate(j)) >= half) tail[k] = all[k];
    }
  }
  const double total = pairwise_sum(all);
  return total > 0.0 ? pairwise_sum(tail) / total : 0.0;
}

/// True when mode (p, q) survives 2/3-rule truncation.
inline bool inside_two_thirds(const GridSpec& g, int p, int q) {
  const int cut = g.n / 3;
  return std::abs(g.signed_index(p)) <= cut && std::abs(g.signed_index(q)) <= cut &&
         p != g.n / 2 && q != g.n / 2;
}

/// Zeroes every mode outside the 2/3 band.
inline Field dealias(const Field& f) {
  const GridSpec& g = f.grid();
  return detail::multiply_symbol(f, [&](int p, int q) -> cplx {
    return inside_two_thirds(g, p, q) ? 1.0 : 0.0;
  });
}

/// Largest |c| over the whole spectrum and over modes outside the 2/3 band.
inline std::pair<double, double> spectral_peak_and_tail(const Field& f) {
  const GridSpec& g = f.grid();
  const Field f_spec = to_spectral(f);
  const auto& c = f_spec.coefficients();
  double peak = 0.0, tail = 0.0;
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q) {
      const double a = std::abs(c[static_cast<std::size_t>(p) * g.n + q]);
      peak = std::max(peak, a);
      if (!inside_two_thirds(g, p, q)) tail = std::max(tail, a);
    }
  return {peak, tail};
}

/// Largest |c| on the outermost shell of modes (|p| or |q| >= n/2 - 1) relative to the peak.
inline double edge_shell_ratio(const Field& f) {
  const GridSpec& g = f.grid();
  const Field f_spec = to_spectral(f);
  const auto& c = f_spec.coefficients();
  double peak = 0.0, edge = 0.0;
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q) {
      const double a = std::abs(c[static_cast<std::size_t>(p) * g.n + q]);
      peak = std::max(peak, a);
      if (std::abs(g.signed_index(p)) >= g.n / 2 - 1 || std::abs(g.signed_index(q)) >= g.n / 2 - 1)
        edge = std::max(edge, a);
    }
  return peak > 0.0 ? edge / peak : 0.0;
}

/// Pointwise product of physical samples.
inline Field multiply(const Field& a, const Field& b) {
  require_same_grid(a, b);
  const Field a_phys = to_physical(a);
  const auto& x = a_phys.samples();
  const Field b_phys = to_physical(b);
  const auto& y = b_phys.samples();
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = x[i] * y[i];
  return Field::from_samples(a.grid(), std::move(v));
}

/// Multiplies f by the first (axis 0) or second (axis 1) box coordinate.
inline Field multiply_coordinate(const Field& f, int axis) {
  const GridSpec& g = f.grid();
  const Field f_phys = to_physical(f);
  const auto& x = f_phys.samples();
  std::vector<double> v(x.size());
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * g.n + j;
      v[k] = x[k] * g.coordinate(axis == 0 ? i : j);
    }
  return Field::from_samples(g, std::move(v));
}

}  // namespace couette
