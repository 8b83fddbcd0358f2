#pragma once

#include <algorithm>
#include <complex>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "couette/errors.hpp"
#include "couette/fft.hpp"
#include "couette/grid.hpp"

namespace couette {

using cplx = std::complex<double>;

/// Real scalar field on a GridSpec, held as physical samples, Fourier
/// coefficients, or both.
///
/// Coefficients use the physical coordinates of the box, so that
///   c(k) = (1/n^2) sum_{i,j} f(x_i, y_j) exp(-i k . x_ij),
/// and c(0) is the mean value of f over the box. A Field never changes after
/// construction; transforms return new Fields.
class Field {
 public:
  Field() = default;

  /// Zero field with both representations valid.
  explicit Field(const GridSpec& grid)
      : grid_(grid),
        samples_(std::make_shared<const std::vector<double>>(grid.size(), 0.0)),
        coeffs_(std::make_shared<const std::vector<cplx>>(grid.size())) {}

  static Field from_samples(const GridSpec& grid, std::vector<double> values) {
    if (values.size() != grid.size()) throw ShapeError("sample count does not match grid");
    Field f;
    f.grid_ = grid;
    f.samples_ = std::make_shared<const std::vector<double>>(std::move(values));
    return f;
  }

  static Field from_coefficients(const GridSpec& grid, std::vector<cplx> coeffs) {
    if (coeffs.size() != grid.size()) throw ShapeError("coefficient count does not match grid");
    Field f;
    f.grid_ = grid;
    f.coeffs_ = std::make_shared<const std::vector<cplx>>(std::move(coeffs));
    return f;
  }

  /// Both representations at once; the caller guarantees they agree.
  static Field from_both(const GridSpec& grid, std::vector<double> values,
                         std::vector<cplx> coeffs) {
    Field f = from_samples(grid, std::move(values));
    if (coeffs.size() != grid.size()) throw ShapeError("coefficient count does not match grid");
    f.coeffs_ = std::make_shared<const std::vector<cplx>>(std::move(coeffs));
    return f;
  }

  /// Samples `fn(x, y)` at the grid nodes.
  template <class Fn>
  static Field sample(const GridSpec& grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (int i = 0; i < grid.n; ++i) {
      const double x = grid.coordinate(i);
      for (int j = 0; j < grid.n; ++j) v[static_cast<std::size_t>(i) * grid.n + j] = fn(x, grid.coordinate(j));
    }
    return from_samples(grid, std::move(v));
  }

  const GridSpec& grid() const { return grid_; }
  Frame frame() const { return grid_.frame; }
  int n() const { return grid_.n; }

  bool has_samples() const { return samples_ != nullptr; }
  bool has_coefficients() const { return coeffs_ != nullptr; }

  const std::vector<double>& samples() const {
    if (!samples_) throw Error("field has no valid physical representation; call to_physical");
    return *samples_;
  }
  const std::vector<cplx>& coefficients() const {
    if (!coeffs_) throw Error("field has no valid spectral representation; call to_spectral");
    return *coeffs_;
  }

  double at(int i, int j) const { return samples()[static_cast<std::size_t>(i) * grid_.n + j]; }

  /// Same data, relabelled frame.
  Field with_frame(Frame frame) const {
    Field f = *this;
    f.grid_.frame = frame;
    return f;
  }

  friend Field to_spectral(const Field& f);
  friend Field to_physical(const Field& f);

 private:
  GridSpec grid_{};
  // Shared so that copies are cheap; the vectors are never mutated.
  std::shared_ptr<const std::vector<double>> samples_;
  std::shared_ptr<const std::vector<cplx>> coeffs_;
};

namespace detail {

inline void apply_checkerboard(std::span<cplx> a, int n) {
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      if ((p + q) & 1) a[static_cast<std::size_t>(p) * n + q] = -a[static_cast<std::size_t>(p) * n + q];
}

inline std::vector<cplx> forward(const std::vector<double>& v, int n) {
  std::vector<cplx> a(v.begin(), v.end());
  fft::transform_2d(a, n, FFTW_FORWARD);
  const double scale = 1.0 / (double(n) * n);
  for (auto& c : a) c *= scale;
  apply_checkerboard(a, n);
  return a;
}

inline std::vector<double> backward(std::vector<cplx> a, int n) {
  apply_checkerboard(a, n);
  fft::transform_2d(a, n, FFTW_BACKWARD);
  std::vector<double> v(a.size());
  std::transform(a.begin(), a.end(), v.begin(), [](const cplx& c) { return c.real(); });
  return v;
}

}  // namespace detail

/// Returns f with its spectral representation populated.
inline Field to_spectral(const Field& f) {
  if (f.has_coefficients()) return f;
  Field out = f;
  out.coeffs_ = std::make_shared<const std::vector<cplx>>(detail::forward(f.samples(), f.n()));
  return out;
}

/// Returns f with its physical representation populated.
inline Field to_physical(const Field& f) {
  if (f.has_samples()) return f;
  Field out = f;
  out.samples_ = std::make_shared<const std::vector<double>>(detail::backward(f.coefficients(), f.n()));
  return out;
}

inline std::vector<double> samples_of(const Field& f) { return to_physical(f).samples(); }
inline std::vector<cplx> coefficients_of(const Field& f) { return to_spectral(f).coefficients(); }

inline void require_same_grid(const Field& a, const Field& b) {
  if (!a.grid().same_lattice(b.grid())) throw ShapeError("fields live on different grids");
}

/// a * x + b * y, computed in every representation both operands share.
inline Field combine(double a, const Field& x, double b, const Field& y) {
  require_same_grid(x, y);
  const bool phys = x.has_samples() && y.has_samples();
  const bool spec = x.has_coefficients() && y.has_coefficients();
  std::vector<cplx> c;
  if (spec) {
    c.resize(x.grid().size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a * x.coefficients()[k] + b * y.coefficients()[k];
    if (!phys) return Field::from_coefficients(x.grid(), std::move(c));
  }
  const Field px = to_physical(x), py = to_physical(y);
  const auto& xs = px.samples();
  const auto& ys = py.samples();
  std::vector<double> v(xs.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a * xs[k] + b * ys[k];
  if (spec) return Field::from_both(x.grid(), std::move(v), std::move(c));
  return Field::from_samples(x.grid(), std::move(v));
}

inline Field operator+(const Field& x, const Field& y) { return combine(1.0, x, 1.0, y); }
inline Field operator-(const Field& x, const Field& y) { return combine(1.0, x, -1.0, y); }

inline Field operator*(double s, const Field& x) {
  if (x.has_samples() && x.has_coefficients()) {
    auto v = x.samples();
    auto c = x.coefficients();
    for (auto& e : v) e *= s;
    for (auto& e : c) e *= s;
    return Field::from_both(x.grid(), std::move(v), std::move(c));
  }
  if (x.has_coefficients()) {
    auto c = x.coefficients();
    for (auto& e : c) e *= s;
    return Field::from_coefficients(x.grid(), std::move(c));
  }
  auto v = x.samples();
  for (auto& e : v) e *= s;
  return Field::from_samples(x.grid(), std::move(v));
}

inline Field operator*(const Field& x, double s) { return s * x; }

}  // namespace couette
