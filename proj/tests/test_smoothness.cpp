#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <kfun/smoothness.hpp>

using namespace kfun;

namespace {

// ||e^{-(x+h)^2} - e^{-x^2}||_2^2 = 2 sqrt(pi/2) (1 - e^{-h^2/2})
double gauss_diff_sq(double h) { return 2 * std::sqrt(pi / 2) * -std::expm1(-h * h / 2); }

}  // namespace

TEST(Stencil, BinomialSignsAndSum) {
  for (int k = 1; k <= 5; ++k) {
    auto c = stencil(k);
    double s = 0;
    for (double v : c) s += v;
    EXPECT_EQ(s, 0.0);
    EXPECT_EQ(c.back(), 1.0);
    EXPECT_EQ(std::abs(c.front()), 1.0);
  }
  EXPECT_THROW(stencil(0), Error);
}

// Delta^k_h kills polynomials of degree < k
TEST(Difference, AnnihilatesPolynomials) {
  struct Case {
    const char* id;
    int k;
  };
  for (auto c : {Case{"const:3", 1}, Case{"x", 2}, Case{"x2", 3}, Case{"x3", 4}})
    for (double h : {0.01, 0.13, 0.4}) {
      auto f = sample(c.id, Measure::Lebesgue, 256);
      auto d = difference(f, c.k, {h, 0});
      double mx = 0;
      for (double v : d.values()) mx = std::max(mx, std::abs(v));
      EXPECT_LT(mx, 1e-12) << c.id << " k=" << c.k << " h=" << h;
      EXPECT_LT(difference_norm(f, c.k, {h, 0}, NormSpec::Lp(2)), 1e-12);
    }
  // but not degree k
  auto x2 = sample("x2", Measure::Lebesgue, 256);
  EXPECT_NEAR(difference(x2, 2, {0.1, 0})[100], 2 * 0.01, 1e-12);
}

TEST(Difference, GaussianL2ClosedForm) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 2048);
  for (double h : {1e-3, 0.05, 0.7, 3.0}) {
    double v = difference_norm(f, 1, {h, 0}, NormSpec::Lp(2));
    EXPECT_NEAR(v * v, gauss_diff_sq(h), 1e-9 * std::max(1.0, gauss_diff_sq(h)) + 1e-14) << h;
  }
}

TEST(Difference, EmptyRegionOnLocalBox) {
  auto f = sample("sin", Measure::Lebesgue, 64);
  EXPECT_EQ(difference_norm(f, 1, {1.5, 0}, NormSpec::Lp(2)), 0.0);
  EXPECT_THROW(difference(f, 1, {1.5, 0}), Error);
}

TEST(Modulus, MonotoneInT) {
  auto f = sample("tent", Measure::Lebesgue, 512);
  double prev = 0;
  for (double t : {0.01, 0.05, 0.2, 0.5, 1.0}) {
    double w = modulus(f, 1, t, NormSpec::Lp(1));
    EXPECT_GE(w, prev);
    prev = w;
  }
  // tent is Lipschitz with ||f'||_1 = 2: omega_1(t)_1 <= 2 t
  EXPECT_LE(modulus(f, 1, 0.1, NormSpec::Lp(1)), 0.2 + 1e-6);
  EXPECT_THROW(modulus(f, 1, 0, NormSpec::Lp(1)), Error);
}

TEST(RadialProfile, CumulativeMatchesQuadrature) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 2048);
  RadialProfile rp(f, 1, NormSpec::Lp(2), 2);
  NetOptions fine;
  fine.per_decade = 128;
  RadialProfile rp2(f, 1, NormSpec::Lp(2), 2, fine);
  for (double R : {1e-4, 0.02, 0.5, 2.0, 8.0}) {
    // 1D: integral over |h| <= R is twice the half-line integral
    double ref = 2 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(gauss_diff_sq, 0, R, 15, 1e-13);
    double e1 = std::abs(rp.cumulative(R) - ref), e2 = std::abs(rp2.cumulative(R) - ref);
    // power-law interpolation between net radii: second order in the log spacing
    EXPECT_LT(e1, 3e-4 * ref) << R;
    if (e1 > 1e-9 * ref) {
      EXPECT_GT(e1 / e2, 3.0) << R;
    }
  }
  // g(t)/t -> (C_1 ||f'||^2 / (N + p))^{1/2} with C_1 = 2
  double d1 = std::sqrt(pi / 2);
  EXPECT_NEAR(rp.averaged(1e-5) / 1e-5, std::sqrt(2 * d1 / 3), 1e-4);
}

TEST(RadialProfile, FromSamplesExactForPowers) {
  // D(r) = r^3, N = 1: C(R) = R^4 / 4
  auto r = geometric_grid(1e-3, 1, 4);
  std::vector<double> D;
  for (double s : r) D.push_back(s * s * s);
  RadialProfile rp(1, 1, 3, r, D);
  for (double R : {1e-4, 0.01, 0.3, 1.0}) EXPECT_NEAR(rp.cumulative(R), std::pow(R, 4) / 4, 1e-12);
}

TEST(KFunctional, LpLinfMonotoneAndConcave) {
  auto f = sample("tent", Measure::Lebesgue, 1024);
  auto pair = KPair::LpLinf(2);
  auto t = geometric_grid(1e-4, 10, 4);
  auto K = k_functional(pair, t, f);
  for (size_t i = 1; i < t.size(); ++i) {
    EXPECT_GE(K[i], K[i - 1] - 1e-15);
    // K(t)/t is non-increasing
    EXPECT_LE(K[i] / t[i], K[i - 1] / t[i - 1] * (1 + 1e-12));
  }
  // K(t) -> ||f||_p for large t, K(t)/t -> ||f||_inf for small t (both on the grid)
  EXPECT_NEAR(K.back(), std::sqrt(quadrature(f, [](double v) { return v * v; })), 1e-12);
  double mx = *std::max_element(f.values().begin(), f.values().end());
  EXPECT_NEAR(K.front() / t.front(), mx, 1e-12);
  EXPECT_NEAR(K.back(), std::sqrt(2.0 / 3), 1e-4);
  for (size_t i = 0; i < t.size(); i += 7) EXPECT_NEAR(k_functional(pair, t[i], f), K[i], 1e-14);
}

TEST(KFunctional, XWkMonotone) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 1024);
  auto pair = KPair::XWk(NormSpec::Lp(2), 1, 2);
  auto t = geometric_grid(1e-4, 4, 2);
  auto K = k_functional(pair, t, f);
  for (size_t i = 1; i < t.size(); ++i) EXPECT_LE(K[i] / t[i], K[i - 1] / t[i - 1] * (1 + 1e-6));
}

TEST(Gagliardo, GaussianAgainstQuadrature) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 2048);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double s : {0.25, 0.5, 0.75}) {
    // int_R ||Delta_h f||^2 |h|^{-1-2s} dh
    auto q = [&](double h) {
      // ||Delta_h f||^2 / h^2 stays finite at 0
      double r = h > 1e-100 ? 2 * std::sqrt(pi / 2) * -std::expm1(-h * h / 2) / (h * h) : std::sqrt(pi / 2);
      return r * std::pow(h, 1 - 2 * s);
    };
    double ref = 2 * ts.integrate(q, 0.0, 60.0);
    double tail = 2 * 2 * std::sqrt(pi / 2) * std::pow(60.0, -2 * s) / (2 * s);
    EXPECT_NEAR(std::pow(gagliardo_seminorm(f, s, 2), 2), ref + tail, 2e-4 * ref) << s;
  }
  EXPECT_THROW(gagliardo_seminorm(f, 1.0, 2), Error);
  EXPECT_THROW(gagliardo_seminorm(f, 0.5, 0.5), Error);
}

TEST(Gagliardo, WeightedSeminormAgrees) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 1024);
  RadialProfile rp(f, 1, NormSpec::Lp(2), 2);
  double s = 0.4;
  PiecewisePower w({{1.0, -1 - 2 * s, 0, 0, inf}});
  EXPECT_NEAR(weighted_double_seminorm(rp, w), gagliardo_energy(rp, s), 1e-10 * gagliardo_energy(rp, s));
}

TEST(Homogeneity, ModulusAndK) {
  auto f = sample("bump", Measure::Lebesgue, 512);
  std::vector<double> v = f.values();
  for (double& x : v) x *= 2.5;
  auto g = f.with_values(v), f0 = f.with_values(f.values());
  EXPECT_NEAR(modulus(g, 2, 0.3, NormSpec::Lp(2)), 2.5 * modulus(f0, 2, 0.3, NormSpec::Lp(2)), 1e-12);
  EXPECT_NEAR(k_functional(KPair::LpLinf(1), 0.2, g), 2.5 * k_functional(KPair::LpLinf(1), 0.2, f0), 1e-12);
}
