#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "couette/errors.hpp"

namespace couette {

enum class Frame { physical, selfsim };

inline const char* to_string(Frame f) { return f == Frame::physical ? "physical" : "selfsim"; }

inline Frame frame_from_string(const std::string& s) {
  if (s == "physical") return Frame::physical;
  if (s == "selfsim") return Frame::selfsim;
  throw ConfigError("unknown frame '" + s + "'");
}

/// Uniform doubly periodic grid on [-L, L)^2 with n points per axis.
///
/// Sample (i, j) sits at (-L + i h, -L + j h); the first index runs along the
/// first axis (x or X). Fourier index p in FFT order carries the wavenumber
/// wavenumber(p) = (p < n/2 ? p : p - n) * pi / L.
struct GridSpec {
  double half_width = 16.0;
  int n = 128;
  Frame frame = Frame::selfsim;

  double spacing() const { return 2.0 * half_width / n; }
  double box_area() const { return 4.0 * half_width * half_width; }
  double cell_area() const { return spacing() * spacing(); }
  double coordinate(int i) const { return -half_width + i * spacing(); }
  double wavenumber_step() const { return std::numbers::pi / half_width; }
  int signed_index(int p) const { return p < n / 2 ? p : p - n; }
  double wavenumber(int p) const { return signed_index(p) * wavenumber_step(); }
  /// Largest representable |k| along an axis (the Nyquist wavenumber).
  double nyquist() const { return (n / 2) * wavenumber_step(); }
  std::size_t size() const { return static_cast<std::size_t>(n) * n; }

  bool same_lattice(const GridSpec& o) const { return half_width == o.half_width && n == o.n; }
  bool operator==(const GridSpec&) const = default;
};

inline GridSpec make_grid(double half_width, int n, Frame frame = Frame::selfsim) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw ConfigError("grid half-width must be positive, got " + std::to_string(half_width));
  if (n < 8 || (n & (n - 1)) != 0)
    throw ConfigError("grid size must be a power of two >= 8, got " + std::to_string(n));
  return GridSpec{half_width, n, frame};
}

}  // namespace couette
