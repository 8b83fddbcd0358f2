#pragma once

// The limiting semigroup exp(tau L_inf). On the Fourier side L_inf is a
// transport in frequency plus the damping -4 eta^2, so
//   hat u(tau, xi, eta) = exp(Phi(tau, xi, eta)) hat u_0(xi_0, eta_0)
// with (xi_0, eta_0) the backward characteristics, a linear map of (xi, eta).

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/remap.hpp"
#include "couette/spectral.hpp"

namespace couette {

/// Backward characteristic map (xi, eta) -> (xi_0, eta_0) at semigroup time tau.
struct FPChars {
  double tau = 0.0;
  Mat2 map{};

  static FPChars at(double tau) {
    if (!(tau >= 0.0)) throw DomainError("semigroup time must be nonnegative");
    constexpr double r = std::numbers::sqrt3 / 2.0;
    const double a = std::exp(-0.5 * tau), b = std::exp(-1.5 * tau);
    return {tau, Mat2{1.5 * a - 0.5 * b, -r * a + r * b, r * a - r * b, -0.5 * a + 1.5 * b}};
  }
  double determinant() const { return map.det(); }
};

inline std::pair<double, double> fp_backward_chars(double tau, double xi, double eta) {
  return FPChars::at(tau).map.apply(xi, eta);
}

/// Phi(tau, xi, eta) <= 0, the accumulated damping along a characteristic.
inline double fp_phi(double tau, double xi, double eta) {
  if (!(tau >= 0.0)) throw DomainError("semigroup time must be nonnegative");
  const double e = std::exp(-tau), d = -std::expm1(-tau);
  return -d * d * d * xi * xi - 2.0 * std::numbers::sqrt3 * e * d * d * xi * eta -
         d * (1.0 + 3.0 * e * e) * eta * eta;
}

/// G(X, Y) = exp(-(X^2 + Y^2)/4) / (4 pi).
inline Field gaussian_G(const GridSpec& grid) {
  return Field::sample(grid, [](double x, double y) {
    return std::exp(-0.25 * (x * x + y * y)) / (4.0 * std::numbers::pi);
  });
}

/// psi_{a,b} = (d_X - sqrt3 d_Y)^a (sqrt3 d_X - d_Y)^b G, eigenvalue -(3a + b)/2.
inline Field eigenfunction_psi(int a, int b, const GridSpec& grid) {
  if (a < 0 || b < 0) throw DomainError("eigenfunction indices must be nonnegative");
  if (a + b > kMaxDerivativeOrder) throw UnsupportedOrderError("eigenfunction order a + b exceeds 4");
  const Field g = gaussian_G(grid);
  if (a + b == 0) return g;
  const double s3 = std::numbers::sqrt3;
  const int half = grid.n / 2;
  return detail::multiply_symbol(g, [&](int p, int q) -> cplx {
    if (p == half || q == half) return 0.0;
    const double xi = grid.wavenumber(p), eta = grid.wavenumber(q);
    const cplx u(0.0, xi - s3 * eta), v(0.0, s3 * xi - eta);
    return std::pow(u, a) * std::pow(v, b);
  });
}

/// Spectral decay required of fp_apply inputs: outer shell / peak.
inline constexpr double kFPEdgeTolerance = 1e-10;

/// exp(tau L_inf) f.
inline Field fp_apply(const Field& f, double tau) {
  const FPChars ch = FPChars::at(tau);
  const double edge = edge_shell_ratio(f);
  if (edge > kFPEdgeTolerance)
    throw InterpolationAccuracyError("spectrum of fp_apply input does not decay before the band edge (ratio " +
                                         std::to_string(edge) + ")",
                                     edge);
  if (tau == 0.0) return f;
  return remap(f, f.grid(), ch.map, 1.0, [&](double xi, double eta) { return std::exp(fp_phi(tau, xi, eta)); });
}

}  // namespace couette
