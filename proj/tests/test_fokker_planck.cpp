#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "couette/fokker_planck.hpp"
#include "couette/selfsim.hpp"

using namespace couette;
using std::numbers::pi;
using std::numbers::sqrt3;

namespace {

constexpr double kG00 = 0.0795774715459476678844418816863;  // 1/(4 pi)

double rel_l2(const Field& a, const Field& b) { return lp_norm(a - b, 2) / lp_norm(b, 2); }

// Forward characteristics of the frequency transport.
std::pair<double, double> forward_chars(double tau, double xi, double eta) {
  const double a = std::exp(0.5 * tau), b = std::exp(1.5 * tau);
  return {(1.5 * xi - sqrt3 / 2 * eta) * a + (-0.5 * xi + sqrt3 / 2 * eta) * b,
          (sqrt3 / 2 * xi - 0.5 * eta) * a + (-sqrt3 / 2 * xi + 1.5 * eta) * b};
}

// Smooth localized field with random coefficients; mean removed on request.
Field random_localized(const GridSpec& g, unsigned seed, bool mean_zero) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double c[3][3];
  for (auto& row : c)
    for (auto& v : row) v = u(rng);
  const double cx = u(rng), cy = u(rng), w = 1.2 + 0.5 * u(rng);
  Field f = Field::sample(g, [&](double x, double y) {
    const double X = x - cx, Y = y - cy;
    double p = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) p += c[i][j] * std::pow(X, i) * std::pow(Y, j);
    return p * std::exp(-(X * X + Y * Y) / (2 * w * w));
  });
  if (mean_zero) f = f - (mass(f) / mass(gaussian_G(g))) * gaussian_G(g);
  return f;
}

}  // namespace

TEST(GaussianG, ValuesAndSymmetry) {
  const auto g = make_grid(16.0, 128);
  const auto G = gaussian_G(g);
  EXPECT_NEAR(G.at(64, 64), kG00, 1e-16);
  EXPECT_NEAR(mass(G), 1.0, 1e-10);
  // (X, Y) -> (-Y, X) maps lattice index (i, j) to (n - j, i) for i, j >= 1.
  for (int i = 1; i < g.n; i += 7)
    for (int j = 1; j < g.n; j += 5) EXPECT_DOUBLE_EQ(G.at(i, j), G.at(g.n - j, i));
}

TEST(Eigenfunctions, BasicProperties) {
  const auto g = make_grid(16.0, 128);
  EXPECT_LT(rel_l2(eigenfunction_psi(0, 0, g), gaussian_G(g)), 1e-15);
  for (auto [a, b] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, 1}}) {
    const auto p = eigenfunction_psi(a, b, g);
    EXPECT_LT(std::abs(mass(p)), 1e-12 * lp_norm(p, 1));
  }
  EXPECT_THROW(eigenfunction_psi(3, 2, g), UnsupportedOrderError);
}

TEST(Eigenfunctions, EigenvaluesOfLinf) {
  const auto g = make_grid(16.0, 128);
  for (auto [a, b] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 3}, {2, 2}}) {
    const auto p = eigenfunction_psi(a, b, g);
    EXPECT_LT(rel_l2(apply_Linf(p), -(3.0 * a + b) / 2 * p), 1e-8) << a << "," << b;
  }
}

TEST(FPPhi, LimitsAndSign) {
  EXPECT_EQ(fp_phi(0.0, 2.0, -1.0), 0.0);
  EXPECT_NEAR(fp_phi(60.0, 1.3, 0.7), -(1.3 * 1.3 + 0.7 * 0.7), 1e-14);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) EXPECT_LE(fp_phi(std::abs(u(rng)), u(rng), u(rng)), 0.0);
  EXPECT_THROW(fp_phi(-1.0, 0, 0), DomainError);
}

TEST(FPPhi, EqualsCharacteristicIntegral) {
  // -4 int_0^tau Upsilon(s)^2 ds along the characteristic ending at (xi, eta).
  using Q = boost::math::quadrature::gauss<double, 30>;
  for (double tau : {0.3, 1.0, 2.5})
    for (auto [xi, eta] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {-0.7, 1.9}}) {
      const auto [x0, e0] = fp_backward_chars(tau, xi, eta);
      const double I = Q::integrate([&](double s) { return std::pow(forward_chars(s, x0, e0).second, 2); }, 0.0, tau);
      EXPECT_NEAR(fp_phi(tau, xi, eta), -4 * I, 1e-12 * (1 + 4 * I));
    }
}

TEST(FPChars, IdentityDeterminantAndInversion) {
  const auto [a, b] = fp_backward_chars(0.0, 0.4, -2.0);
  EXPECT_DOUBLE_EQ(a, 0.4);
  EXPECT_DOUBLE_EQ(b, -2.0);
  for (double tau : {0.1, 1.0, 4.0}) EXPECT_NEAR(FPChars::at(tau).determinant(), std::exp(-2 * tau), 1e-15);
  // The backward map inverts the forward one.
  const auto [x0, e0] = fp_backward_chars(1.0, 1.0, 0.0);
  const auto [x1, e1] = forward_chars(1.0, x0, e0);
  EXPECT_NEAR(x1, 1.0, 1e-12);
  EXPECT_NEAR(e1, 0.0, 1e-12);
}

TEST(FPApply, IdentityAndGaussianKernel) {
  const auto g = make_grid(16.0, 128);
  const auto f = random_localized(g, 3, false);
  EXPECT_LT(rel_l2(fp_apply(f, 0.0), f), 1e-12);
  const auto G = gaussian_G(g);
  for (double tau : {0.1, 1.0, 5.0, 20.0}) EXPECT_LE(lp_norm(fp_apply(G, tau) - G, 2), 1e-8) << tau;
}

TEST(FPApply, EigenfunctionDecay) {
  const auto g = make_grid(16.0, 128);
  for (auto [a, b] : {std::pair{1, 0}, {0, 1}, {1, 1}, {1, 2}}) {
    const auto p = eigenfunction_psi(a, b, g);
    EXPECT_LT(rel_l2(fp_apply(p, 1.0), std::exp(-(3.0 * a + b) / 2) * p), 1e-6) << a << "," << b;
  }
}

TEST(FPApply, SemigroupAndMass) {
  const auto g = make_grid(16.0, 128);
  for (unsigned s = 1; s <= 3; ++s) {
    const auto f = random_localized(g, s, false);
    EXPECT_LT(rel_l2(fp_apply(fp_apply(f, 0.4), 0.9), fp_apply(f, 1.3)), 1e-10);
    EXPECT_NEAR(mass(fp_apply(f, 2.0)), mass(f), 1e-12 * lp_norm(f, 1));
  }
}

TEST(FPApply, GeneratorConsistency) {
  const auto g = make_grid(16.0, 128);
  const auto f = random_localized(g, 7, false);
  const auto L = apply_Linf(f);
  auto err = [&](double d) { return lp_norm((1.0 / d) * (fp_apply(f, d) - f) - L, 2); };
  const double e1 = err(1e-2), e2 = err(5e-3);
  EXPECT_NEAR(e1 / e2, 2.0, 0.1);
}

TEST(FPApply, BoundedOnWeightedSpaces) {
  const auto g = make_grid(16.0, 128);
  for (unsigned s = 1; s <= 5; ++s) {
    const auto f = random_localized(g, s, false);
    for (double m : {2.0, 3.0}) {
      double worst = 0;
      for (double tau = 0; tau <= 5.0; tau += 0.5)
        worst = std::max(worst, weighted_norm(fp_apply(f, tau), m) / weighted_norm(f, m));
      EXPECT_LT(worst, 50.0);
    }
  }
}

TEST(FPApply, MeanZeroDecayRate) {
  const auto g = make_grid(16.0, 128);
  const auto f = random_localized(g, 11, true);
  const double n1 = weighted_norm(fp_apply(f, 1.0), 3.0), n4 = weighted_norm(fp_apply(f, 4.0), 3.0);
  EXPECT_LE(std::log(n4 / n1) / 3.0, -0.45);
}

TEST(FPApply, RejectsRoughInput) {
  const auto g = make_grid(16.0, 32);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  std::vector<double> v(g.size());
  for (auto& x : v) x = nd(rng);
  EXPECT_THROW(fp_apply(Field::from_samples(g, v), 1.0), InterpolationAccuracyError);
}
