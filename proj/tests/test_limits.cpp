#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <kfun/limits.hpp>

using namespace kfun;

namespace {

// int_{S^{N-1}} |w . e|^p dsigma by quadrature on the circle
double sphere_ref(int N, double p) {
  if (N == 1) return 2;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [p](double th) { return std::pow(std::abs(std::cos(th)), p); }, 0, 2 * pi, 15, 1e-13);
}

}  // namespace

TEST(SurfaceConstant, AgainstQuadrature) {
  EXPECT_NEAR(surface_constant(2, 2), pi, 1e-13);
  EXPECT_NEAR(surface_constant(2, 1), 4, 1e-13);
  EXPECT_EQ(surface_constant(1, 3.3), 2);
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.5}) EXPECT_NEAR(surface_constant(2, p), sphere_ref(2, p), 1e-10) << p;
  EXPECT_THROW(surface_constant(4, 2), Error);
  EXPECT_THROW(surface_constant(2, 0), Error);
}

TEST(SurfaceConstant, MonteCarloWithinNoise) {
  for (double p : {1.0, 2.0}) {
    double mc = monte_carlo_surface_constant(2, p, 200000, 7);
    EXPECT_NEAR(mc, surface_constant(2, p), 0.01 * surface_constant(2, p));
  }
  // fixed seed, fixed answer
  EXPECT_EQ(monte_carlo_surface_constant(2, 2, 1000, 3), monte_carlo_surface_constant(2, 2, 1000, 3));
}

TEST(Richardson, RecoversModel) {
  std::vector<double> x, F;
  for (int j = 1; j <= 8; ++j) {
    double e = std::ldexp(1.0, -j);
    x.push_back(e);
    F.push_back(3.0 - 2.0 * std::pow(e, 1.5));
  }
  auto r = richardson(x, F);
  EXPECT_NEAR(r.limit, 3.0, 1e-12);
  EXPECT_NEAR(r.rate, 1.5, 1e-8);
  EXPECT_LT(r.residual, 1e-12);
  EXPECT_EQ(r.flag, "");
}

TEST(Richardson, ConstantAndOscillating) {
  auto c = richardson({0.5, 0.25, 0.125}, {2, 2, 2});
  EXPECT_EQ(c.flag, "constant");
  EXPECT_EQ(c.limit, 2);
  auto o = richardson({0.5, 0.25, 0.125}, {1, 2, 1});
  EXPECT_EQ(o.flag, "no-extrapolation");
  EXPECT_EQ(o.limit, 1);
  EXPECT_THROW(richardson({1, 2}, {1, 2}), Error);
}

class AveragingLimit : public ::testing::TestWithParam<FamilyKind> {};

// g(t) = c t / (1 + t): g(t)/t -> c at 0 and g(t) -> c at infinity
TEST_P(AveragingLimit, SyntheticLimit) {
  const double c = 1.7;
  auto g = [c](double t) { return c * t / (1 + t); };
  for (double p : {1.0, 2.0}) {
    auto rep = averaging_limit(g, GetParam(), p);
    EXPECT_NEAR(rep.target, c, 1e-9);
    // the log kinds converge like 1/|log eps|; at eps = 2^-12 that is still 0.12
    bool log = GetParam() == FamilyKind::LogRho || GetParam() == FamilyKind::LogPsi;
    EXPECT_LT(rep.rel_err, log ? 5e-3 : 1e-3) << rep.label << " p=" << p << " limit " << rep.limit;
    EXPECT_TRUE(rep.violation.empty());
  }
}

std::string kind_label(const ::testing::TestParamInfo<FamilyKind>& info) {
  static const char* n[] = {"power", "scaled", "log", "power_psi", "scaled_psi", "log_psi"};
  return n[int(info.param)];
}

INSTANTIATE_TEST_SUITE_P(Kinds, AveragingLimit,
                         ::testing::Values(FamilyKind::PowerRho, FamilyKind::ScaledRho, FamilyKind::LogRho,
                                           FamilyKind::PowerPsi, FamilyKind::ScaledPsi, FamilyKind::LogPsi),
                         kind_label);

TEST(AveragingLimitViolation, UnboundedQuotient) {
  auto rep = averaging_limit([](double t) { return std::sqrt(t); }, FamilyKind::PowerRho, 2);
  EXPECT_FALSE(rep.violation.empty());
  EXPECT_TRUE(std::isinf(rep.direct));
  auto rep2 = averaging_limit([](double t) { return std::sqrt(t); }, FamilyKind::PowerPsi, 2);
  EXPECT_FALSE(rep2.violation.empty());
}

TEST(AveragingLimitValues, MonotoneForMonotoneQuotient) {
  // g(t)/t decreasing in t: averages against rho_eps increase as eps -> 0
  auto rep = averaging_limit([](double t) { return t / (1 + t); }, FamilyKind::PowerRho, 2);
  for (size_t i = 1; i < rep.values.size(); ++i) EXPECT_GE(rep.values[i], rep.values[i - 1] - 1e-12);
  EXPECT_TRUE(rep.monotone);
}

TEST(Milman, ClosedFormIsOneOverP) {
  for (double p : {1.0, 2.0, 3.0})
    for (double th : {0.5, 0.9, 0.999}) EXPECT_NEAR(milman_closed_form(th, p), 1 / p, 1e-14);
}

TEST(Milman, IndicatorExtrapolation) {
  auto f = sample("indicator:0:1", Measure::Lebesgue, 256);
  for (double p : {1.0, 2.0}) {
    auto rep = milman_extrapolation(KPair::LpLinf(p), f, p);
    EXPECT_NEAR(rep.target, std::pow(p, -1 / p), 1e-12);
    EXPECT_LT(rep.rel_err, 1e-3) << p;
  }
}
