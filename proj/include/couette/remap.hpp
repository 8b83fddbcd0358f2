#pragma once

// Affine changes of variables carried out on the Fourier side.
//
// Given a source field f and a target lattice, remap() produces the field whose
// coefficients are
//   c_dst(K) = scale * mult(K) * F(M K) / |box_dst|,
// where F(w) = h^2 sum_j f(x_j) exp(-i w . x_j) is the Fourier integral of the
// source samples. For band-limited, localized data F is the continuous Fourier
// transform to spectral accuracy, so linear coordinate maps, shears and the
// characteristic flows of the linear operators all reduce to one call.
//
// F is evaluated off-lattice with chirp-z transforms. A triangular M separates
// into two batched 1-D passes; a full M is split into a unit shear (computed
// on the source lattice) followed by a triangular pass.

#include <algorithm>
#include <cmath>
#include <vector>

#include "couette/errors.hpp"
#include "couette/fft.hpp"
#include "couette/field.hpp"
#include "couette/grid.hpp"

namespace couette {

struct Mat2 {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  double det() const { return a11 * a22 - a12 * a21; }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
  Mat2 inverse() const {
    const double d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }
  friend Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
            a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
  }
  std::pair<double, double> apply(double x, double y) const {
    return {a11 * x + a12 * y, a21 * x + a22 * y};
  }
};

/// Diagnostics of a remap: the largest |scale * mult| over target modes whose
/// source frequency fell outside the resolved band (and were set to zero).
struct RemapReport {
  double masked_weight = 0.0;
  int masked_mode_x = 0;
  int masked_mode_y = 0;
};

namespace detail {

inline constexpr double kBandSlack = 1e-9;

// Rearranges an r x c row-major array into c x r.
inline std::vector<cplx> transposed(const std::vector<cplx>& a, int rows, int cols) {
  std::vector<cplx> t(a.size());
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      t[static_cast<std::size_t>(c) * rows + r] = a[static_cast<std::size_t>(r) * cols + c];
  return t;
}

// Unnormalized sums S(K) = sum_j f_j exp(-i (M K) . x_j) for target modes K
// in centred order, returned as [k1][k2]. M must be triangular.
inline std::vector<cplx> triangular_sums(const std::vector<cplx>& values, const GridSpec& src,
                                         const GridSpec& dst, const Mat2& M) {
  const int ns = src.n, nd = dst.n;
  const double hs = src.spacing(), x0 = -src.half_width, dk = dst.wavenumber_step();
  const double kmin = -(nd / 2) * dk;
  std::vector<double> w0;
  if (M.a21 == 0.0) {
    // Second axis first: rows of f are contiguous.
    fft::ChirpTransform c1(ns, nd, M.a22 * dk, hs);
    std::vector<cplx> g(static_cast<std::size_t>(ns) * nd);
    w0.assign(ns, M.a22 * kmin);
    c1.apply(values, g, ns, w0, x0);
    const auto gt = transposed(g, ns, nd);  // [k2][i]
    fft::ChirpTransform c2(ns, nd, M.a11 * dk, hs);
    w0.resize(nd);
    for (int k2 = 0; k2 < nd; ++k2) w0[k2] = M.a12 * (kmin + k2 * dk) + M.a11 * kmin;
    std::vector<cplx> out(static_cast<std::size_t>(nd) * nd);
    c2.apply(gt, out, nd, w0, x0);  // [k2][k1]
    return transposed(out, nd, nd);
  }
  if (M.a12 != 0.0) throw Error("triangular_sums needs a triangular matrix");
  const auto ft = transposed(values, ns, ns);  // [j][i]
  fft::ChirpTransform c1(ns, nd, M.a11 * dk, hs);
  std::vector<cplx> g(static_cast<std::size_t>(ns) * nd);
  w0.assign(ns, M.a11 * kmin);
  c1.apply(ft, g, ns, w0, x0);             // [j][k1]
  const auto gt = transposed(g, ns, nd);  // [k1][j]
  fft::ChirpTransform c2(ns, nd, M.a22 * dk, hs);
  w0.resize(nd);
  for (int k1 = 0; k1 < nd; ++k1) w0[k1] = M.a21 * (kmin + k1 * dk) + M.a22 * kmin;
  std::vector<cplx> out(static_cast<std::size_t>(nd) * nd);
  c2.apply(gt, out, nd, w0, x0);  // [k1][k2]
  return out;
}

template <class Mult>
Field assemble(const Field& src, const std::vector<cplx>& sums, const GridSpec& dst, const Mat2& M,
               double scale, Mult&& mult, RemapReport* report) {
  const GridSpec& sg = src.grid();
  const int nd = dst.n;
  const double dk = dst.wavenumber_step();
  const double band = sg.nyquist() * (1.0 + kBandSlack);
  const double norm = sg.cell_area() / dst.box_area();
  std::vector<cplx> c(dst.size(), cplx{});
  for (int k1 = 1; k1 < nd; ++k1) {  // k = 0 is the Nyquist mode, left at zero
    const int s1 = k1 - nd / 2;
    const int p = s1 < 0 ? s1 + nd : s1;
    const double K1 = s1 * dk;
    for (int k2 = 1; k2 < nd; ++k2) {
      const int s2 = k2 - nd / 2;
      const int q = s2 < 0 ? s2 + nd : s2;
      const double K2 = s2 * dk;
      const auto [w1, w2] = M.apply(K1, K2);
      const double weight = scale * mult(K1, K2);
      if (std::abs(w1) > band || std::abs(w2) > band) {
        if (report && std::abs(weight) > report->masked_weight) {
          report->masked_weight = std::abs(weight);
          report->masked_mode_x = s1;
          report->masked_mode_y = s2;
        }
        continue;
      }
      c[static_cast<std::size_t>(p) * nd + q] = weight * norm * sums[static_cast<std::size_t>(k1) * nd + k2];
    }
  }
  c[0] = scale * mult(0.0, 0.0) * (to_spectral(src).coefficients()[0].real() * sg.box_area()) /
         dst.box_area();
  return Field::from_coefficients(dst, std::move(c));
}

inline std::vector<cplx> complex_samples(const Field& f) {
  const Field f_phys = to_physical(f);
  const auto& v = f_phys.samples();
  return std::vector<cplx>(v.begin(), v.end());
}

}  // namespace detail

/// General affine remap; see the file comment. `mult(K1, K2)` is evaluated at
/// target wavenumbers.
template <class Mult>
Field remap(const Field& f, const GridSpec& dst, const Mat2& M, double scale, Mult&& mult,
            RemapReport* report = nullptr) {
  if (!(std::abs(M.det()) > 0.0) || !std::isfinite(M.det()))
    throw DomainError("remap matrix must be invertible");
  if (report) *report = RemapReport{};
  if (M.a21 == 0.0 || M.a12 == 0.0) {
    const auto sums = detail::triangular_sums(detail::complex_samples(f), f.grid(), dst, M);
    return detail::assemble(f, sums, dst, M, scale, mult, report);
  }
  // M = S * T with S a unit shear handled on the source lattice and T
  // triangular. Pick the factorization with the milder shear.
  const double lower_shear = M.a21 / M.a11;
  const double upper_shear = M.a12 / M.a22;
  const auto one = [](double, double) { return 1.0; };
  Mat2 S, T;
  if (std::abs(lower_shear) <= std::abs(upper_shear) || !std::isfinite(upper_shear)) {
    S = {1.0, 0.0, lower_shear, 1.0};
    T = {M.a11, M.a12, 0.0, M.a22 - lower_shear * M.a12};
  } else {
    S = {1.0, upper_shear, 0.0, 1.0};
    T = {M.a11 - upper_shear * M.a21, 0.0, M.a21, M.a22};
  }
  const GridSpec& sg = f.grid();
  const auto inner = detail::triangular_sums(detail::complex_samples(f), sg, sg, S);
  const Field sheared = to_physical(detail::assemble(f, inner, sg, S, 1.0, one, nullptr));
  const auto sums = detail::triangular_sums(detail::complex_samples(sheared), sg, dst, T);
  return detail::assemble(sheared, sums, dst, T, scale, mult, report);
}

inline Field remap(const Field& f, const GridSpec& dst, const Mat2& M, double scale = 1.0) {
  return remap(f, dst, M, scale, [](double, double) { return 1.0; });
}

}  // namespace couette
