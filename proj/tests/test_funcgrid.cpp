#include <gtest/gtest.h>

#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <kfun/funcgrid.hpp>

using namespace kfun;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-11);
}

}  // namespace

TEST(Box, Validation) {
  EXPECT_NO_THROW(Box::line(0, 1, 4).validate());
  EXPECT_THROW(Box::line(1, 0, 4).validate(), Error);
  EXPECT_THROW(Box::line(0, 1, 1).validate(), Error);
  Box b{3, {0, 0}, {1, 1}, {4, 4}};
  EXPECT_THROW(b.validate(), Error);
  EXPECT_NEAR(Box::square(0, 2, 8).diameter(), std::sqrt(8.0), 1e-15);
}

TEST(Corpus, AllIdsBuild) {
  for (const auto& id : corpus_ids()) EXPECT_NO_THROW(make_analytic(id)) << id;
  EXPECT_THROW(make_analytic("nonsense"), Error);
  EXPECT_THROW(make_analytic("indicator:1:0"), Error);
  EXPECT_THROW(make_analytic("tent", 2), Error);
}

// stored ||f||_p^p, ||f'||_p^p, ||f''||_p^p against adaptive quadrature of the analytic formulas
TEST(Corpus, StoredNormsMatchQuadrature) {
  for (const auto& id : corpus_ids()) {
    auto a = make_analytic(id);
    double lo = a->compact() ? a->support[0] : a->domain[0];
    double hi = a->compact() ? a->support[1] : a->domain[1];
    for (double p : {1.0, 2.0, 3.0}) {
      auto check = [&](const std::function<double(double)>& stored, int order) {
        double v = stored(p);
        if (std::isnan(v)) return;
        // split at the kinks of abs / tent / stair
        std::vector<double> cuts{lo};
        for (int j = 1; j < 64; ++j) cuts.push_back(lo + (hi - lo) * j / 64);
        cuts.push_back(hi);
        double ref = 0;
        for (size_t i = 0; i + 1 < cuts.size(); ++i)
          ref += gk([&](double x) { return std::pow(std::abs(a->deriv(x, 0, order, 0)), p); }, cuts[i], cuts[i + 1]);
        EXPECT_NEAR(v, ref, 1e-6 * std::max(1.0, ref)) << id << " order " << order << " p " << p;
      };
      check(a->norm_pp, 0);
      if (a->max_deriv >= 1) check(a->d1_pp, 1);
      if (a->max_deriv >= 2) check(a->d2_pp, 2);
    }
  }
}

TEST(Corpus, DerivativesMatchFiniteDifferences) {
  for (const auto& id : {"gauss_bump", "bump", "x2bump", "x3", "sin", "cos", "exp", "tanh", "hermite3"}) {
    auto a = make_analytic(id);
    const double h = 1e-5;
    for (double x : {-0.61, -0.2, 0.13, 0.47}) {
      double d1 = (a->f(x + h, 0) - a->f(x - h, 0)) / (2 * h);
      double d2 = (a->deriv(x + h, 0, 1, 0) - a->deriv(x - h, 0, 1, 0)) / (2 * h);
      EXPECT_NEAR(a->deriv(x, 0, 1, 0), d1, 1e-5 * std::max(1.0, std::abs(d1))) << id << " " << x;
      EXPECT_NEAR(a->deriv(x, 0, 2, 0), d2, 1e-5 * std::max(1.0, std::abs(d2))) << id << " " << x;
    }
  }
}

TEST(Corpus, TwoDimensionalNorms) {
  for (const auto& id : {"gauss_bump", "bump"}) {
    auto a = make_analytic(id, 2);
    // polar quadrature of a radial function: 2 pi int r f(r)^p dr
    for (double p : {1.0, 2.0}) {
      double ref = 2 * pi * gk([&](double r) { return r * std::pow(std::abs(a->f(r, 0)), p); }, 0, 6);
      EXPECT_NEAR(a->norm_pp(p), ref, 1e-8) << id;
    }
  }
}

// midpoint rule: error ratio 4 when the cell count doubles
TEST(Quadrature, SecondOrderMidpoint) {
  struct Case {
    const char* id;
    double lo, hi;
  };
  for (auto c : {Case{"exp", 0, 1}, Case{"x2", -1, 1}, Case{"x3", 0, 1}, Case{"cos", 0, 0.3}}) {
    auto a = make_analytic(c.id);
    double exact = gk([&](double x) { return a->f(x, 0); }, c.lo, c.hi);
    double prev = 0;
    for (int n : {32, 64, 128, 256}) {
      auto f = sample(a, Box::line(c.lo, c.hi, n), Measure::Lebesgue, false);
      double err = std::abs(quadrature(f) - exact);
      if (prev > 0) {
        EXPECT_GE(prev / err, 3.5) << c.id << " n=" << n;
        EXPECT_LE(prev / err, 4.5) << c.id << " n=" << n;
      }
      prev = err;
    }
  }
}

TEST(Quadrature, GaussianMeasureHasUnitMass) {
  auto f = sample("const:1", Measure::Gaussian);
  EXPECT_NEAR(quadrature(f), 1.0, 1e-9);
  auto x2 = sample("x2", Measure::Gaussian);
  EXPECT_NEAR(quadrature(x2), 1.0, 1e-6);  // second moment
  auto sq = sample("const:1", Measure::Gaussian, 256, 2);
  EXPECT_NEAR(quadrature(sq), 1.0, 1e-4);
}

TEST(GridFunction, RejectsNonFinite) {
  std::vector<double> v(4, 1.0);
  v[2] = std::nan("");
  EXPECT_THROW(GridFunction(Box::line(0, 1, 4), Measure::Lebesgue, v), Error);
  EXPECT_THROW(GridFunction(Box::line(0, 1, 4), Measure::Lebesgue, std::vector<double>(3, 0.0)), Error);
}

TEST(GridFunction, InterpolationExactForLinear) {
  auto f = sample(make_analytic("x"), Box::line(-1, 1, 64), Measure::Lebesgue, false).with_values(
      [] {
        std::vector<double> v(64);
        for (int i = 0; i < 64; ++i) v[i] = -1 + (i + 0.5) * 2 / 64.0;
        return v;
      }());
  for (double x : {-0.9, -0.31, 0.0, 0.52, 0.97}) EXPECT_NEAR(f.interpolate(x), x, 1e-14);
  // local box clamps outside
  EXPECT_NEAR(f.interpolate(5.0), 1 - 1 / 64.0, 1e-14);
}

TEST(GridFunction, ZeroExtensionOnWholeSpace) {
  auto f = sample("gauss_bump", Measure::Lebesgue, 256).with_values(std::vector<double>(256, 1.0));
  EXPECT_EQ(f.interpolate(20.0), 0.0);
  EXPECT_NEAR(f.interpolate(0.0), 1.0, 1e-15);
}

TEST(GridFunction, RestrictAndRefine) {
  auto f = sample("sin", Measure::Lebesgue, 64);
  auto g = restrict(f, Box::line(0.25, 0.75, 2));
  EXPECT_EQ(g.size(), 32u);
  EXPECT_FALSE(g.whole());
  EXPECT_NEAR(g.x(0), f.x(16), 1e-15);
  EXPECT_THROW(restrict(f, Box::line(0.1, 0.7, 2)), Error);
  EXPECT_THROW(restrict(f, Box::line(-1, 0.5, 2)), Error);
  auto r = refine(f, 2);
  EXPECT_EQ(r.size(), 128u);
  EXPECT_NEAR(quadrature(r, [](double v) { return v * v; }), 0.5, 1e-12);
  EXPECT_THROW(refine(f.with_values(f.values()), 2), Error);
}

TEST(GridFunction, CsvHasHeaderAndRows) {
  std::ostringstream os;
  write_csv(os, sample("x", Measure::Lebesgue, 8));
  auto s = os.str();
  EXPECT_EQ(s.rfind("x,value\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 9);
}
