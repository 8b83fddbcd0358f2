#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "couette/selfsim.hpp"

using namespace couette;
using std::numbers::pi;

namespace {

// A_1 and A_10 entries at nu = 1, 30-digit evaluations.
constexpr double kA1_11 = 0.866025403784438646763723170753;
constexpr double kA1_21 = -0.416025147168921841513756300093;
constexpr double kA10_11 = 0.0539687072220865873398758111019;
constexpr double kA10_21 = -0.088327030715757751633510943836;
constexpr double kA10_22 = 0.606512277581536561216775147674;
constexpr double kJ10 = 0.0327326835353988571899146228123;

double G(double x, double y) { return std::exp(-(x * x + y * y) / 4) / (4 * pi); }

Field gauss(const GridSpec& g, double amp = 1.0) {
  return Field::sample(g, [&](double x, double y) { return amp * G(x, y); });
}

double rel_l2(const Field& a, const Field& b) { return lp_norm(a - b, 2) / lp_norm(b, 2); }

Field offset_bump(const GridSpec& g, double amp = 1.0) {
  return Field::sample(g, [&](double x, double y) {
    const double u = x - 0.8, v = y + 0.4;
    return amp * (1.0 + 0.4 * u - 0.2 * v * u) * std::exp(-(u * u + 1.5 * v * v) / 2.5);
  });
}

}  // namespace

TEST(SelfSimCoords, FrozenValues) {
  const auto [X, Y] = selfsim_coords(1.0, 1.0, 1.0, 0.0);
  EXPECT_NEAR(X, kA1_11, 1e-15);
  EXPECT_NEAR(Y, kA1_21, 1e-15);
  const Mat2 A = selfsim_matrix(10.0, 1.0);
  EXPECT_NEAR(A.a11, kA10_11, 1e-16);
  EXPECT_EQ(A.a12, 0.0);
  EXPECT_NEAR(A.a21, kA10_21, 1e-16);
  EXPECT_NEAR(A.a22, kA10_22, 1e-15);
  EXPECT_NEAR(selfsim_jacobian(10.0, 1.0), kJ10, 1e-16);
}

TEST(SelfSimCoords, JacobianIsDeterminant) {
  for (double nu : {0.1, 1.0, 3.0})
    for (double t : {0.2, 1.0, 7.0, 300.0})
      EXPECT_NEAR(selfsim_matrix(t, nu).det(), selfsim_jacobian(t, nu), 1e-14 * selfsim_jacobian(t, nu));
  EXPECT_THROW(selfsim_matrix(0.0, 1.0), DomainError);
  EXPECT_THROW(selfsim_matrix(1.0, 0.0), DomainError);
}

TEST(FrameCoefficients, StartAndLimit) {
  const auto c0 = FrameCoefficients::at(0.0);
  EXPECT_EQ(c0.c_diff1, 1.0);
  EXPECT_EQ(c0.c_mix, 0.0);
  EXPECT_EQ(c0.c_diff2, 1.0);
  EXPECT_EQ(c0.constant, 1.0);
  const auto inf = FrameCoefficients::limit();
  EXPECT_EQ(inf.c_diff2, 4.0);
  EXPECT_EQ(inf.drift_y, 2.0);
  EXPECT_EQ(inf.constant, 2.0);
  EXPECT_DOUBLE_EQ(inf.rotation, std::sqrt(3.0) / 2);
}

TEST(FrameCoefficients, ConvergeAtRateOneOverT) {
  const auto inf = FrameCoefficients::limit();
  for (double t : {10.0, 30.0, 100.0, 1e3, 1e4}) {
    const auto c = FrameCoefficients::at(t);
    for (double d : {c.c_diff2 - inf.c_diff2, c.drift_y - inf.drift_y, c.constant - inf.constant,
                     c.rotation - inf.rotation, c.c_mix - inf.c_mix, c.c_diff1, c.drift_mixed})
      EXPECT_LE(std::abs(d), 40.0 / t) << "t=" << t;
  }
}

TEST(FrameOperators, GaussianIsFixedPointOfLt) {
  const auto g = make_grid(16.0, 128);
  const auto f = gauss(g);
  for (double t : {0.0, 0.5, 1.0, 3.0, 10.0, 100.0}) EXPECT_LE(lp_norm(apply_Lt(f, t), 2), 1e-8) << t;
  EXPECT_LE(lp_norm(apply_Linf(f), 2), 1e-8);
}

TEST(FrameOperators, LtApproachesLinf) {
  const auto g = make_grid(16.0, 128);
  const auto f = offset_bump(g);
  const double a = lp_norm(apply_Lt(f, 100.0) - apply_Linf(f), 2);
  const double b = lp_norm(apply_Lt(f, 1000.0) - apply_Linf(f), 2);
  EXPECT_LT(b, 0.2 * a);
}

TEST(FrameOperators, DeltaInverseInvertsSymbol) {
  const auto g = make_grid(16.0, 128);
  const auto f = offset_bump(g);
  const double t = 2.5;
  const auto c = FrameCoefficients::at(t);
  const auto psi = delta_t_inverse(f, t);
  const auto back = detail::multiply_symbol(psi, [&](int p, int q) -> cplx {
    return c.laplacian_symbol(g.wavenumber(p), g.wavenumber(q));
  });
  // f minus its mean is recovered.
  auto cf = coefficients_of(f);
  cf[0] = 0.0;
  EXPECT_LT(rel_l2(back, Field::from_coefficients(g, cf)), 1e-12);
}

TEST(FrameOperators, NonlinearTermMatchesDirectSummation) {
  // Band-limited data with |k| <= n/4, so the quadratic product is resolved.
  const auto g = make_grid(2 * pi, 32);
  struct Mode { int p, q; double re, im; };
  const std::vector<Mode> modes{{1, 0, 0.7, 0.1}, {0, 2, -0.3, 0.5}, {2, -1, 0.4, -0.2}, {3, 3, 0.1, 0.05}};
  const double t = 1.7, nu = 0.6;
  const auto fc = FrameCoefficients::at(t);
  std::vector<cplx> c(g.size(), 0.0);
  for (const auto& m : modes) {
    const cplx a(m.re, m.im);
    c[((m.p + g.n) % g.n) * g.n + (m.q + g.n) % g.n] += a;
    c[((-m.p + g.n) % g.n) * g.n + (-m.q + g.n) % g.n] += std::conj(a);
  }
  const auto f = Field::from_coefficients(g, c);
  const auto N = to_physical(apply_Nt(f, t, nu));
  double worst = 0, scale = 0;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double x = g.coordinate(i), y = g.coordinate(j);
      cplx px = 0, py = 0, fx = 0, fy = 0;
      for (const auto& m : modes)
        for (int s : {1, -1}) {
          const double k1 = s * m.p * g.wavenumber_step(), k2 = s * m.q * g.wavenumber_step();
          const cplx a = s == 1 ? cplx(m.re, m.im) : cplx(m.re, -m.im);
          const cplx e = a * std::exp(cplx(0, k1 * x + k2 * y));
          const double sym = fc.laplacian_symbol(k1, k2);
          px += cplx(0, k1) * e / sym;
          py += cplx(0, k2) * e / sym;
          fx += cplx(0, k1) * e;
          fy += cplx(0, k2) * e;
        }
      const double ref = (py.real() * fx.real() - px.real() * fy.real()) / (nu * (1 + t * t / 12));
      worst = std::max(worst, std::abs(N.at(i, j) - ref));
      scale = std::max(scale, std::abs(ref));
    }
  EXPECT_LT(worst, 1e-12 * scale);
}

TEST(FrameOperators, NonlinearTermIsMassFreeAndQuadratic) {
  const auto g = make_grid(16.0, 128);
  const auto f = offset_bump(g);
  const auto n1 = apply_Nt(f, 2.0, 1.0);
  EXPECT_LT(std::abs(mass(n1)), 1e-12 * lp_norm(n1, 1));
  EXPECT_LT(rel_l2(apply_Nt(-3.0 * f, 2.0, 1.0), 9.0 * n1), 1e-13);
  EXPECT_LT(rel_l2(apply_Nt(f, 2.0, 0.5), 2.0 * n1), 1e-13);
}

TEST(FrameChange, HeatKernelMapsToGaussian) {
  const auto gs = make_grid(16.0, 128);
  const auto phys = make_grid(40.0, 256, Frame::physical);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto s = phys_to_selfsim(green_kernel_field(phys, 1.0, t), t, 1.0, gs);
    EXPECT_EQ(s.omega.frame(), Frame::selfsim);
    EXPECT_NEAR(s.alpha, 1.0, 1e-10);
    EXPECT_LT(rel_l2(s.omega, gauss(gs)), 1e-10) << t;
  }
}

TEST(FrameChange, RoundTrip) {
  const auto phys = make_grid(24.0, 256, Frame::physical);
  const auto gs = make_grid(16.0, 256);
  const auto w = offset_bump(phys);
  for (double t : {1.0, 2.0}) {
    const auto s = phys_to_selfsim(w, t, 1.0, gs);
    EXPECT_LT(rel_l2(selfsim_to_phys(s, phys), w), 1e-10) << t;
    EXPECT_NEAR(mass(s.omega), mass(w), 1e-12 * lp_norm(w, 1));
  }
}

TEST(FrameChange, RejectsUnlocalizedData) {
  const auto phys = make_grid(8.0, 64, Frame::physical);
  const auto gs = make_grid(16.0, 64);
  const auto wide = Field::sample(phys, [](double x, double y) { return std::exp(-(x * x + y * y) / 30); });
  EXPECT_THROW(phys_to_selfsim(wide, 1.0, 1.0, gs), TruncationError);
}

TEST(LinearStep, AgreesWithPhysicalSemigroup) {
  const auto phys = make_grid(30.0, 256, Frame::physical);
  const auto gs = make_grid(16.0, 128);
  const auto w = offset_bump(phys);
  const double t1 = 1.0, t2 = 1.6, nu = 1.0;
  const auto a = selfsim_linear_step(phys_to_selfsim(w, t1, nu, gs).omega, t1, t2, nu);
  const auto b = phys_to_selfsim(apply_S(w, nu, t2 - t1), t2, nu, gs).omega;
  EXPECT_LT(rel_l2(a, b), 1e-10);
}

TEST(LinearStep, ComposesAndKeepsGaussian) {
  const auto gs = make_grid(16.0, 128);
  const auto f = offset_bump(gs);
  const auto one = selfsim_linear_step(f, 1.0, 5.0, 0.7);
  const auto two = selfsim_linear_step(selfsim_linear_step(f, 1.0, 2.2, 0.7), 2.2, 5.0, 0.7);
  EXPECT_LT(rel_l2(two, one), 1e-12);
  EXPECT_LT(rel_l2(selfsim_linear_step(gauss(gs), 1.0, 100.0, 0.3), gauss(gs)), 1e-12);
  EXPECT_THROW(selfsim_linear_step(f, 2.0, 1.0, 1.0), DomainError);
}

TEST(Evolve, LinearFlowKeepsGaussianToLateTimes) {
  const auto gs = make_grid(16.0, 128);
  const SelfSimilarState s0(gauss(gs, 0.5), 1.0, 1.0, 0.5);
  EvolveOptions o;
  o.nonlinear = false;
  o.step.dtau = 0.05;
  const auto r = evolve(s0, 100.0, o);
  EXPECT_EQ(r.state.t, 100.0);
  EXPECT_LE(lp_norm(r.state.omega - s0.omega, 2), 1e-8);
}

TEST(Evolve, ObserverHitsSampleTimesAndMassIsConserved) {
  const auto gs = make_grid(16.0, 128);
  const auto f = 0.3 * offset_bump(gs);
  const auto s0 = SelfSimilarState::from_field(f, 1.0, 1.0);
  EvolveOptions o;
  o.step.dtau = 0.01;
  o.sample_times = {1.0, 1.25, 1.5, 2.0};
  std::vector<double> seen;
  std::vector<double> masses;
  o.observer = [&](const SelfSimilarState& s) {
    seen.push_back(s.t);
    masses.push_back(mass(s.omega));
  };
  const auto r = evolve(s0, 2.0, o);
  ASSERT_EQ(seen.size(), 4u);
  for (std::size_t i = 0; i < seen.size(); ++i) {
    EXPECT_DOUBLE_EQ(seen[i], o.sample_times[i]);
    EXPECT_NEAR(masses[i], s0.alpha, 1e-13 * lp_norm(f, 1));
  }
  EXPECT_GT(r.steps, 60);
}

TEST(Evolve, SecondOrderInTau) {
  const auto gs = make_grid(16.0, 64);
  const auto s0 = SelfSimilarState::from_field(2.0 * offset_bump(gs), 1.0, 1.0);
  auto run = [&](double dtau) {
    EvolveOptions o;
    o.step.dtau = dtau;
    return evolve(s0, 1.5, o).state.omega;
  };
  const auto ref = run(0.0025);
  const double e1 = lp_norm(run(0.04) - ref, 2), e2 = lp_norm(run(0.02) - ref, 2);
  EXPECT_GT(e1 / e2, 3.3);
  EXPECT_LT(e1 / e2, 4.7);
}

TEST(Evolve, ResolutionPolicyError) {
  const auto gs = make_grid(16.0, 32);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> v(gs.size());
  for (auto& x : v) x = nd(rng);
  const auto s0 = SelfSimilarState::from_field(Field::from_samples(gs, v), 1.0, 1.0);
  EvolveOptions o;
  o.nonlinear = false;
  o.step.policy = ResolutionPolicy::error;
  EXPECT_THROW(evolve(s0, 1.1, o), UnderResolvedError);
  o.step.policy = ResolutionPolicy::warn;
  EXPECT_FALSE(evolve(s0, 1.1, o).warnings.empty());
}
