#pragma once

// Initial-data catalog.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "couette/config.hpp"
#include "couette/errors.hpp"
#include "couette/field.hpp"
#include "couette/fokker_planck.hpp"
#include "couette/selfsim.hpp"
#include "couette/spectral.hpp"

namespace couette {

/// amplitude / (pi w1 w2) exp(-(x-c1)^2/w1^2 - (y-c2)^2/w2^2); mass = amplitude.
/// gaussian(1, origin, (2, 2)) is G.
inline Field catalog_gaussian(const GridSpec& g, double amplitude, std::array<double, 2> c, std::array<double, 2> w) {
  const double area = std::numbers::pi * w[0] * w[1];
  return Field::sample(g, [&](double x, double y) {
    const double u = (x - c[0]) / w[0], v = (y - c[1]) / w[1];
    return amplitude * std::exp(-(u * u + v * v)) / area;
  });
}

/// Two opposite blobs of width `width` at (+-separation/2, 0); zero total mass.
inline Field catalog_dipole(const GridSpec& g, double separation, double strength, double width) {
  const double k = strength / (std::numbers::pi * width * width), s = 0.5 * separation;
  return Field::sample(g, [&](double x, double y) {
    const double a = ((x - s) * (x - s) + y * y) / (width * width);
    const double b = ((x + s) * (x + s) + y * y) / (width * width);
    return k * (std::exp(-a) - std::exp(-b));
  });
}

/// Mollified point vortex of circulation `circulation` and width epsilon.
inline Field catalog_point_vortex(const GridSpec& g, double circulation, double epsilon) {
  if (epsilon < 2.0 * g.spacing())
    throw ResolutionError("point vortex width " + std::to_string(epsilon) + " is below two grid spacings (" +
                          std::to_string(2.0 * g.spacing()) + ")");
  return catalog_gaussian(g, circulation, {0.0, 0.0}, {epsilon, epsilon});
}

/// Gaussian-filtered white noise under the envelope exp(-r^2/R^2), scaled to sup norm
/// `amplitude`. Deterministic for a given seed.
inline Field catalog_random_localized(const GridSpec& g, std::uint64_t seed, double amplitude, double correlation_length,
                                      double envelope, bool mean_zero) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  const double l2 = correlation_length * correlation_length;
  const Field smooth = detail::multiply_symbol(Field::from_samples(g, std::move(v)), [&](int p, int q) -> cplx {
    const double k2 = g.wavenumber(p) * g.wavenumber(p) + g.wavenumber(q) * g.wavenumber(q);
    return std::exp(-0.25 * k2 * l2);
  });
  auto s = samples_of(smooth);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coordinate(i), y = g.coordinate(j);
      s[static_cast<std::size_t>(i) * g.n + j] *= std::exp(-(x * x + y * y) / (envelope * envelope));
    }
  Field f = Field::from_samples(g, std::move(s));
  if (mean_zero) {
    const Field G = gaussian_G(g);
    f = f - (mass(f) / mass(G)) * G;
  }
  const double sup = lp_norm(f, kInf);
  return sup > 0.0 ? (amplitude / sup) * f : f;
}

/// Samples the configured catalog entry on `g`, applies the optional
/// rescaling, and checks that the result is localized.
inline Field initial_data(const InitialDataSpec& d, const GridSpec& g, std::uint64_t seed) {
  Field f(g);
  if (d.kind == "gaussian")
    f = catalog_gaussian(g, d.amplitude, d.center, d.widths);
  else if (d.kind == "dipole")
    f = catalog_dipole(g, d.separation, d.strength, d.width);
  else if (d.kind == "point_vortex_approx")
    f = catalog_point_vortex(g, d.circulation, d.epsilon);
  else if (d.kind == "random_localized")
    f = catalog_random_localized(g, seed, d.amplitude, d.correlation_length, d.envelope, d.mean_zero);
  else if (d.kind == "eigenfunction")
    f = eigenfunction_psi(d.a, d.b, g);
  else
    throw ValidationError("initial_data.kind", "unknown catalog entry '" + d.kind + "'");
  if (d.scale_norm == "L1")
    f = (d.scale_value / lp_norm(f, 1)) * f;
  else if (d.scale_norm == "L2m")
    f = (d.scale_value / weighted_norm(f, d.scale_m)) * f;
  detail::check_tail(f, ("initial data '" + d.kind + "' not localized").c_str());
  return f;
}

}  // namespace couette
