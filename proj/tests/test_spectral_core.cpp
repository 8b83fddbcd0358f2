#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "couette/spectral.hpp"

using namespace couette;
using std::numbers::pi;

namespace {

// Closed-form values, evaluated once at 30 digits and frozen here.
constexpr double kGaussianL2 = 0.199471140200716338969973029967;      // (8 pi)^(-1/2)
constexpr double kSpeedAtRadius2 = 0.0503025557837880875393207474529;  // (1 - e^-1)/(4 pi)

Field gaussian(const GridSpec& g) {
  return Field::sample(g, [](double x, double y) { return std::exp(-(x * x + y * y) / 4) / (4 * pi); });
}

Field random_field(const GridSpec& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  return Field::from_samples(g, std::move(v));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(MakeGrid, SpacingAndWavenumbers) {
  const auto g = make_grid(16, 8);
  EXPECT_DOUBLE_EQ(g.spacing(), 4.0);
  EXPECT_DOUBLE_EQ(g.wavenumber(3), 3 * pi / 16);
  EXPECT_DOUBLE_EQ(g.wavenumber(4), -4 * pi / 16);
  const auto u = make_grid(pi, 16);
  for (int p = 0; p < 16; ++p) EXPECT_NEAR(u.wavenumber(p), p < 8 ? p : p - 16, 1e-15);
}

TEST(MakeGrid, RejectsBadInput) {
  EXPECT_THROW(make_grid(16, 7), ConfigError);
  EXPECT_THROW(make_grid(16, 4), ConfigError);
  EXPECT_THROW(make_grid(0.0, 16), ConfigError);
  EXPECT_THROW(make_grid(-1.0, 16), ConfigError);
}

TEST(Transform, ConstantHasOnlyZeroMode) {
  const auto g = make_grid(3.0, 16);
  const auto f = to_spectral(Field::sample(g, [](double, double) { return 2.5; }));
  const auto& c = f.coefficients();
  EXPECT_NEAR(c[0].real(), 2.5, 1e-15);
  for (std::size_t k = 1; k < c.size(); ++k) EXPECT_LT(std::abs(c[k]), 1e-15);
}

TEST(Transform, CosineHasTwoModes) {
  const auto g = make_grid(pi, 16);
  const auto c = coefficients_of(Field::sample(g, [](double x, double) { return std::cos(3 * x); }));
  int nonzero = 0;
  for (int p = 0; p < 16; ++p)
    for (int q = 0; q < 16; ++q) {
      const auto v = c[p * 16 + q];
      if (std::abs(v) > 1e-14) {
        ++nonzero;
        EXPECT_EQ(q, 0);
        EXPECT_TRUE(p == 3 || p == 13);
        EXPECT_NEAR(v.real(), 0.5, 1e-14);
      }
    }
  EXPECT_EQ(nonzero, 2);
}

TEST(Transform, RoundTripOnRandomFields) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto g = make_grid(7.0, 32);
    const auto f = random_field(g, seed);
    const auto back = to_physical(Field::from_coefficients(g, coefficients_of(f)));
    EXPECT_LE(max_abs_diff(back.samples(), f.samples()) / max_abs(f.samples()), 1e-12);
  }
}

TEST(Transform, RealFieldHasConjugateSymmetry) {
  const auto g = make_grid(5.0, 16);
  const auto c = coefficients_of(random_field(g, 7));
  for (int p = 0; p < 16; ++p)
    for (int q = 0; q < 16; ++q) {
      const auto a = c[p * 16 + q];
      const auto b = c[((16 - p) % 16) * 16 + (16 - q) % 16];
      EXPECT_LT(std::abs(a - std::conj(b)), 1e-14);
    }
}

TEST(Transform, Parseval) {
  const auto g = make_grid(4.0, 32);
  const auto f = random_field(g, 3);
  double s = 0;
  for (auto c : coefficients_of(f)) s += std::norm(c);
  const double l2sq = std::pow(lp_norm(f, 2), 2);
  EXPECT_NEAR(s * g.box_area() / l2sq, 1.0, 1e-12);
}

TEST(Derivative, OfConstantIsZero) {
  const auto g = make_grid(2.0, 16);
  const auto d = samples_of(derivative(Field::sample(g, [](double, double) { return 1.0; }), 1, 0));
  EXPECT_LT(max_abs(d), 1e-15);
}

TEST(Derivative, OfSine) {
  const auto g = make_grid(pi, 32);
  const double k = 5;
  const auto d = samples_of(derivative(Field::sample(g, [&](double x, double) { return std::sin(k * x); }), 1, 0));
  const auto e = Field::sample(g, [&](double x, double) { return k * std::cos(k * x); });
  EXPECT_LT(max_abs_diff(d, e.samples()), 1e-12);
}

TEST(Derivative, MixedOnProductOfModes) {
  // d_x d_y [sin 2x cos 3y] = -6 cos 2x sin 3y
  const auto g = make_grid(pi, 16);
  const auto f = Field::sample(g, [](double x, double y) { return std::sin(2 * x) * std::cos(3 * y); });
  const auto e = Field::sample(g, [](double x, double y) { return -6 * std::cos(2 * x) * std::sin(3 * y); });
  EXPECT_LT(max_abs_diff(samples_of(derivative(f, 1, 1)), e.samples()), 1e-12);
}

TEST(Derivative, RejectsHighOrder) {
  const auto g = make_grid(pi, 16);
  const Field f(g);
  EXPECT_THROW(derivative(f, 3, 2), UnsupportedOrderError);
  EXPECT_NO_THROW(derivative(f, 2, 2));
  EXPECT_THROW(weighted_norm(f, 1.0, 2, 2), UnsupportedOrderError);
}

TEST(BiotSavart, ZeroGivesZero) {
  const auto g = make_grid(8.0, 32);
  const auto [u1, u2] = biot_savart(Field(g));
  EXPECT_EQ(max_abs(samples_of(u1)), 0.0);
  EXPECT_EQ(max_abs(samples_of(u2)), 0.0);
}

TEST(BiotSavart, GaussianAzimuthalSpeed) {
  const auto g = make_grid(16.0, 256);
  const auto [u1, u2] = biot_savart(gaussian(g));
  // (x, y) = (2, 0) is node (144, 128); there the flow is purely azimuthal.
  // The periodic box adds the field of a uniform background -1/|box|, which
  // near the origin is the solid-body speed -r/(2|box|); what remains are
  // image corrections of order r^3/L^4.
  const auto v1 = samples_of(u1), v2 = samples_of(u2);
  const double background = 2.0 / (2.0 * g.box_area());
  EXPECT_NEAR(v2[144 * 256 + 128], kSpeedAtRadius2 - background, 1e-5);
  EXPECT_LT(std::abs(v1[144 * 256 + 128]), 1e-12);
}

TEST(BiotSavart, DivergenceFreeAndCurl) {
  const auto g = make_grid(6.0, 32);
  const auto f = random_field(g, 11);
  const auto [u1, u2] = biot_savart(f);
  const auto div = coefficients_of(divergence(u1, u2));
  for (auto c : div) EXPECT_LT(std::abs(c), 1e-13);
  // Away from the Nyquist lines the curl returns f minus its mean.
  const auto cu = coefficients_of(curl(u1, u2));
  const auto cf = coefficients_of(f);
  for (int p = 0; p < 32; ++p)
    for (int q = 0; q < 32; ++q) {
      if (p == 16 || q == 16 || (p == 0 && q == 0)) continue;
      EXPECT_LT(std::abs(cu[p * 32 + q] - cf[p * 32 + q]), 1e-13);
    }
  EXPECT_LT(std::abs(cu[0]), 1e-15);
}

TEST(Norms, ZeroField) {
  const Field z(make_grid(4.0, 16));
  for (double p : {1.0, 4.0 / 3, 2.0, kInf}) EXPECT_EQ(lp_norm(z, p), 0.0);
  EXPECT_EQ(weighted_norm(z, 2.0), 0.0);
}

TEST(Norms, Gaussian) {
  const auto g = make_grid(16.0, 256);
  const auto G = gaussian(g);
  EXPECT_NEAR(lp_norm(G, 1), 1.0, 1e-10);
  EXPECT_NEAR(lp_norm(G, 2), kGaussianL2, 1e-12);
  EXPECT_NEAR(weighted_norm(G, 0.0), kGaussianL2, 1e-12);
  EXPECT_NEAR(lp_norm(G, kInf), 1 / (4 * pi), 1e-15);
  EXPECT_NEAR(mass(G), 1.0, 1e-10);
}

TEST(Norms, RejectsExponentBelowOne) {
  const Field z(make_grid(4.0, 16));
  EXPECT_THROW(lp_norm(z, 0.5), DomainError);
  EXPECT_THROW(WeightSpec(-1.0), DomainError);
}

TEST(Norms, WeightedMonotoneAndHomogeneous) {
  const auto g = make_grid(16.0, 64);
  const auto G = gaussian(g);
  double prev = 0;
  for (double m : {0.0, 0.5, 1.0, 2.0, 3.0, 6.0}) {
    const double w = weighted_norm(G, m);
    EXPECT_GE(w, prev);
    prev = w;
  }
  EXPECT_NEAR(weighted_norm(-3.0 * G, 2.0, 1, 0), 3.0 * weighted_norm(G, 2.0, 1, 0), 1e-14);
}

TEST(Norms, WeightedInnerMatchesNorm) {
  const auto g = make_grid(16.0, 64);
  const auto G = gaussian(g);
  EXPECT_NEAR(weighted_inner(G, G, WeightSpec(2.0)), std::pow(weighted_norm(G, 2.0), 2), 1e-14);
}

TEST(Mass, OfDerivativeAndLinearity) {
  const auto g = make_grid(16.0, 64);
  const auto G = gaussian(g);
  const auto S = Field::sample(g, [](double x, double y) { return std::exp(-(x - 1) * (x - 1) - y * y); });
  EXPECT_LT(std::abs(mass(derivative(G, 1, 0))), 1e-13);
  EXPECT_NEAR(mass(2.0 * G + (-0.5) * S), 2.0 * mass(G) - 0.5 * mass(S), 1e-13);
}

TEST(Dealias, KeepsLowModesOnly) {
  const auto g = make_grid(pi, 32);
  const auto low = Field::sample(g, [](double x, double y) { return std::cos(3 * x + 2 * y); });
  const auto high = Field::sample(g, [](double x, double) { return std::cos(12 * x); });
  EXPECT_LT(max_abs_diff(samples_of(dealias(low)), low.samples()), 1e-14);
  EXPECT_LT(max_abs(samples_of(dealias(high))), 1e-14);
}

TEST(PairwiseSum, Deterministic) {
  std::vector<double> v(1000);
  for (int i = 0; i < 1000; ++i) v[i] = 1.0 / (i + 1);
  EXPECT_EQ(pairwise_sum(v), pairwise_sum(v));
  EXPECT_NEAR(pairwise_sum(v), 7.485470860550345, 1e-13);
}
