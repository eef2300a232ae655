#include <gtest/gtest.h>

#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <kfun/norms.hpp>

using namespace kfun;

namespace {

Samples random_samples(unsigned seed, size_t n) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> v(-3, 3), m(0.01, 1);
  Samples s;
  for (size_t i = 0; i < n; ++i) {
    // ties on purpose
    s.values.push_back(i % 7 == 0 ? 1.5 : v(gen));
    s.masses.push_back(m(gen));
  }
  return s;
}

}  // namespace

TEST(NormSpec, Validation) {
  EXPECT_THROW(NormSpec::Lp(0), Error);
  EXPECT_THROW(NormSpec::Lp(inf), Error);
  EXPECT_THROW(NormSpec::Lorentz(2, 0.5), Error);
  EXPECT_EQ(NormSpec::Lorentz(2, 1).name(), "L(2,1)");
  EXPECT_EQ(NormSpec::Sup().name(), "Linf");
}

// |{f* > lambda}| = |{|f| > lambda}| for every lambda
TEST(Rearrangement, Equimeasurable) {
  for (unsigned seed : {1u, 2u, 3u}) {
    auto s = random_samples(seed, 400);
    auto prof = rearrange(s);
    EXPECT_NEAR(prof.total_mass(), s.total_mass(), 1e-12);
    for (size_t i = 1; i < prof.v.size(); ++i) EXPECT_LT(prof.v[i], prof.v[i - 1]);
    std::mt19937 gen(seed + 100);
    std::uniform_real_distribution<double> lam(0, 3.2);
    for (int r = 0; r < 50; ++r) {
      double l = lam(gen), m = 0;
      for (size_t i = 0; i < prof.v.size(); ++i)
        if (prof.v[i] > l) m += prof.t[i + 1] - prof.t[i];
      EXPECT_NEAR(m, distribution(s, l), 1e-12);
    }
    // the tie at 1.5 collapses into one step
    EXPECT_EQ(std::count(prof.v.begin(), prof.v.end(), 1.5), 1);
  }
}

TEST(Rearrangement, NormsAgreeWithDirectSums) {
  auto s = random_samples(7, 300);
  for (double p : {1.0, 2.0, 3.5}) {
    double d = 0;
    for (size_t i = 0; i < s.values.size(); ++i) d += s.masses[i] * std::pow(std::abs(s.values[i]), p);
    EXPECT_NEAR(norm(s, NormSpec::Lp(p)), std::pow(d, 1 / p), 1e-12 * std::pow(d, 1 / p));
    // Lorentz (p, p) is Lp
    EXPECT_NEAR(norm(s, NormSpec::Lorentz(p, p)), std::pow(d, 1 / p), 1e-10 * std::pow(d, 1 / p));
  }
  double mx = 0;
  for (double v : s.values) mx = std::max(mx, std::abs(v));
  EXPECT_EQ(norm(s, NormSpec::Sup()), mx);
}

TEST(Lorentz, IndicatorClosedForm) {
  // ||1_E||_{p,q} = (p/q)^{1/q} |E|^{1/p}
  Samples s{{1, 1, 0}, {0.3, 0.4, 5}};
  for (double p : {1.5, 2.0, 4.0})
    for (double q : {1.0, 2.0, 3.0})
      EXPECT_NEAR(norm(s, NormSpec::Lorentz(p, q)), std::pow(p / q, 1 / q) * std::pow(0.7, 1 / p), 1e-12);
}

TEST(Lorentz, NestingInQ) {
  // ||f||_{p,q2} <= (q1/p)^{1/q1 - 1/q2} ||f||_{p,q1} for q1 < q2
  auto s = random_samples(11, 200);
  for (double p : {1.5, 3.0}) {
    double a = norm(s, NormSpec::Lorentz(p, 1)), b = norm(s, NormSpec::Lorentz(p, 2)),
           c = norm(s, NormSpec::Lorentz(p, 4));
    EXPECT_LE(b, std::pow(1 / p, 1.0 - 0.5) * a * (1 + 1e-12));
    EXPECT_LE(c, std::pow(2 / p, 0.5 - 0.25) * b * (1 + 1e-12));
  }
}

TEST(Zygmund, MatchesQuadratureOfProfile) {
  auto f = sample("tent", Measure::Lebesgue, 512);
  auto prof = rearrange(f);
  for (double p : {1.0, 2.0}) {
    double ref = 0;
    // integrate step by step; the log singularity sits at 0
    boost::math::quadrature::tanh_sinh<double> ts;
    for (size_t i = 0; i < prof.v.size() && prof.t[i] < 1; ++i) {
      double a = prof.t[i], b = std::min(1.0, prof.t[i + 1]);
      auto g = [&](double t) { return std::pow(prof.v[i] * (1 - std::log(t)), p); };
      ref += a == 0 ? ts.integrate(g, a, b) : boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b);
    }
    EXPECT_NEAR(norm(prof, NormSpec::Zygmund(p)), std::pow(ref, 1 / p), 1e-8);
  }
}

TEST(Norm, WholeSpaceTruncationIsChecked) {
  auto g = sample("gauss_bump", Measure::Lebesgue);
  EXPECT_NEAR(norm(g, NormSpec::Lp(2)), std::pow(pi / 2, 0.25), 1e-10);
  auto bad = g.with_values(std::vector<double>(g.size(), 1.0));
  EXPECT_THROW(norm(bad, NormSpec::Lp(2)), Error);
  EXPECT_NO_THROW(norm(bad, NormSpec::Sup()));
}

TEST(Norm, Homogeneity) {
  auto f = sample("bump", Measure::Lebesgue, 512);
  std::vector<double> v = f.values();
  for (double& x : v) x *= -3;
  auto g = f.with_values(v);
  for (auto spec : {NormSpec::Lp(1), NormSpec::Lp(2.5), NormSpec::Lorentz(2, 1), NormSpec::Sup()})
    EXPECT_NEAR(norm(g, spec), 3 * norm(f, spec), 1e-12 * norm(g, spec)) << spec.name();
}

TEST(Bmo, ConstantsAndScaling) {
  auto c = sample("const:2", Measure::Lebesgue, 64);
  EXPECT_NEAR(bmo_norm(c), 0.0, 1e-14);
  auto f = sample("indicator:0:0.3", Measure::Lebesgue, 64);
  auto f1 = GridFunction(Box::line(0, 1, 64), Measure::Lebesgue, f.values(), nullptr, false);
  std::vector<double> v = f1.values();
  for (double& x : v) x = 5 * x + 1;
  EXPECT_NEAR(bmo_norm(f1.with_values(v)), 5 * bmo_norm(f1), 1e-12);
  // mean oscillation of an indicator on a cube is 2 m (1 - m) <= 1/2
  EXPECT_LE(bmo_norm(f1, CubeFamily::All), 0.5 + 1e-12);
  EXPECT_GE(bmo_norm(f1, CubeFamily::All), bmo_norm(f1, CubeFamily::Dyadic) - 1e-12);
}

TEST(Bmo, SharpMaximalDominatesOscillation) {
  auto f = sample("stair:4", Measure::Lebesgue, 128);
  auto cubes = cube_family(f, CubeFamily::Dyadic);
  auto fs = sharp_maximal(f, cubes);
  for (const auto& q : cubes) {
    double osc = detail::mean_oscillation(f, q);
    for (int i = q.i0; i < q.i1; ++i) EXPECT_GE(fs[i], osc - 1e-14);
  }
}

TEST(BestApprox, L2ClosedForms) {
  auto f = sample(make_analytic("x2"), Box::line(-1, 1, 1024), Measure::Lebesgue, false);
  Box Q = Box::line(-1, 1, 1024);
  // ||x^2 - 1/3||_2 on [-1, 1] = sqrt(8/45)
  EXPECT_NEAR(best_approx(f, Q, 1, 2).value, std::sqrt(8.0 / 45), 1e-5);
  EXPECT_NEAR(best_approx(f, Q, 3, 2).value, 0.0, 1e-12);
  EXPECT_THROW(best_approx(f, Q, 0, 2), Error);
  EXPECT_THROW(best_approx(f, Q, 1, 0.5), Error);
}

TEST(BestApprox, L1MedianForLinear) {
  auto f = sample(make_analytic("x"), Box::line(-1, 1, 1024), Measure::Lebesgue, false);
  // best constant in L1 is the median 0: ||x||_1 = 1
  auto r = best_approx(f, Box::line(-1, 1, 1), 1, 1);
  EXPECT_NEAR(r.value, 1.0, 1e-3);
  // p = 4: best constant is 0 by symmetry, ||x||_4 = (2/5)^{1/4}
  EXPECT_NEAR(best_approx(f, Box::line(-1, 1, 1), 1, 4).value, std::pow(0.4, 0.25), 1e-4);
}
