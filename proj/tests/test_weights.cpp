#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <kfun/weights.hpp>

using namespace kfun;

namespace {

const FamilyKind all_kinds[] = {FamilyKind::PowerRho, FamilyKind::ScaledRho, FamilyKind::LogRho,
                                FamilyKind::PowerPsi, FamilyKind::ScaledPsi, FamilyKind::LogPsi};

// the families written out by hand
double rho_ref(FamilyKind k, double e, double a, double t) {
  switch (k) {
    case FamilyKind::PowerRho: return t > 0 && t < 1 ? e * std::pow(t, e - 1) : 0;
    case FamilyKind::ScaledRho: return t > 0 && t < e ? a * std::pow(t, a - 1) / std::pow(e, a) : 0;
    case FamilyKind::LogRho: return t >= e && t < 1 ? 1 / (t * std::abs(std::log(e))) : 0;
    case FamilyKind::PowerPsi: return t >= 1 ? e * std::pow(t, -e - 1) : 0;
    case FamilyKind::ScaledPsi: return t >= 1 / e ? a * std::pow(e * t, -a) / t : 0;
    case FamilyKind::LogPsi: return t >= 1 && t < 1 / e ? 1 / (t * std::abs(std::log(e))) : 0;
    default: return 0;
  }
}

// integral of v^a rho(v) over (lo, hi) by quadrature in log v
double moment_ref(const std::function<double(double)>& rho, double a, double lo, double hi,
                  const std::vector<double>& breaks) {
  std::vector<double> cuts{lo};
  for (double b : breaks)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  double s = 0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double x0 = cuts[i] > 0 ? std::log(cuts[i]) : -700, x1 = std::isinf(cuts[i + 1]) ? 700 : std::log(cuts[i + 1]);
    if (!(x1 > x0)) continue;
    auto g = [&](double x) {
      double v = std::exp(x);
      return std::pow(v, a + 1) * rho(v);
    };
    s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, x0, x1, 15, 1e-12);
  }
  return s;
}

}  // namespace

TEST(Families, UnitMassAndSupport) {
  for (auto k : all_kinds)
    for (double e : {0.5, 0.1, 1e-3, 1e-6})
      for (double a : {0.5, 1.0, 2.0}) {
        auto w = make_family(k, e, a);
        // the stored exponent eps - 1 carries a rounding error of order 1e-16 / eps
        EXPECT_NEAR(w.mass(), 1.0, 1e-12 + 4e-16 / e) << w.name();
        EXPECT_TRUE(w.normalized);
        if (w.rho) {
          EXPECT_LE(w.support_hi(), 1.0);
        } else {
          EXPECT_GE(w.support_lo(), 1.0);
        }
      }
}

TEST(Families, ScaledPsiMassIsOne) {
  for (double e : {0.5, 0.25, 1e-4})
    for (double a : {0.3, 1.0, 3.0}) {
      auto w = make_psi(FamilyKind::ScaledPsi, e, a);
      double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double x) { return std::exp(x) * rho_ref(FamilyKind::ScaledPsi, e, a, std::exp(x)); }, std::log(1 / e),
          std::log(1 / e) + 80 / a, 15, 1e-13);
      EXPECT_NEAR(ref, 1.0, 1e-9);
      EXPECT_NEAR(w.mass(), 1.0, 1e-13);
    }
}

TEST(Families, PointwiseAgainstHandWrittenDensities) {
  for (auto k : all_kinds)
    for (double e : {0.5, 0.01})
      for (double t : {1e-3, 0.007, 0.3, 0.75, 1.5, 40.0, 250.0}) {
        auto w = make_family(k, e, 2.0);
        double r = rho_ref(k, e, 2.0, t);
        EXPECT_NEAR(w(t), r, 1e-12 * std::max(1.0, r)) << w.name() << " t=" << t;
      }
}

TEST(Families, ConcentrationAsEpsShrinks) {
  // rho_eps puts all but a vanishing part of its mass on (0, delta)
  for (auto k : {FamilyKind::PowerRho, FamilyKind::ScaledRho, FamilyKind::LogRho}) {
    double prev = 0;
    for (double e : {1e-2, 1e-4, 1e-8}) {
      double m = make_rho(k, e).cdf(0.1);
      EXPECT_GE(m, prev - 1e-12);
      prev = m;
    }
    EXPECT_GT(prev, 0.5);
  }
}

TEST(Families, DualOfRhoIsPsi) {
  for (auto k : {FamilyKind::PowerRho, FamilyKind::ScaledRho}) {
    auto r = make_rho(k, 0.2, 1.5);
    auto d = dual(r);
    EXPECT_FALSE(d.rho);
    for (double t : {1.2, 3.0, 7.5, 100.0}) EXPECT_NEAR(d(t), r(1 / t) / (t * t), 1e-14);
    EXPECT_NEAR(d.mass(), 1.0, 1e-12);
  }
  EXPECT_EQ(dual(make_rho(FamilyKind::PowerRho, 0.2)).kind, FamilyKind::PowerPsi);
}

TEST(Families, RescaledKeepsMass) {
  auto r = make_rho(FamilyKind::PowerRho, 0.3).rescaled(2.5);
  EXPECT_NEAR(r.mass(), 1.0, 1e-12);
  EXPECT_NEAR(r.support_hi(), 2.5, 1e-15);
  EXPECT_NEAR(make_rho(FamilyKind::LogRho, 0.3).rescaled(2).mass(), 1.0, 1e-12);
}

TEST(Families, ParseAndErrors) {
  EXPECT_EQ(parse_family("power:0.25").eps, 0.25);
  EXPECT_EQ(parse_family("scaled:alpha=3:eps=0.1").alpha, 3);
  EXPECT_EQ(parse_family("log_psi:eps=1e-3").kind, FamilyKind::LogPsi);
  EXPECT_EQ(parse_family("power", 0.125).eps, 0.125);
  EXPECT_THROW(parse_family("gamma:0.1"), Error);
  EXPECT_THROW(parse_family("power:beta=2"), Error);
  EXPECT_THROW(make_family(FamilyKind::PowerRho, 0), Error);
  EXPECT_THROW(make_family(FamilyKind::LogRho, 1.5), Error);
  EXPECT_THROW(make_family(FamilyKind::ScaledRho, 0.5, -1), Error);
  EXPECT_THROW(make_rho(FamilyKind::PowerPsi, 0.5), Error);
  EXPECT_THROW(make_psi(FamilyKind::PowerRho, 0.5), Error);
}

TEST(Families, TabulatedReproducesPowerWeight) {
  auto t = std::vector<double>{1e-4, 1e-3, 1e-2, 0.1, 1.0};
  std::vector<double> v;
  for (double s : t) v.push_back(0.5 * std::pow(s, -0.5));
  auto w = from_table(t, v);
  EXPECT_NEAR(w(0.05), 0.5 / std::sqrt(0.05), 1e-12);
  EXPECT_NEAR(w.mass(), 1 - std::sqrt(1e-4), 1e-12);
  EXPECT_FALSE(w.normalized);
  EXPECT_THROW(from_table({1, 0.5}, {1, 1}), Error);
  EXPECT_THROW(from_table({1, 2}, {1, -1}), Error);
}

struct DerivedCase {
  FamilyKind kind;
  double eps;
  Construction c;
  int k, N;
  double p;
};

class Derived : public ::testing::TestWithParam<DerivedCase> {};

TEST_P(Derived, ClosedFormMatchesDefiningIntegral) {
  auto dc = GetParam();
  auto rho = make_rho(dc.kind, dc.eps, 1.5);
  DerivedParams par{dc.k, dc.p, dc.N, 1.0};
  auto w = derive(rho, dc.c, par);
  auto r = [&](double v) { return rho_ref(dc.kind, dc.eps, 1.5, v); };
  std::vector<double> br{dc.eps, 1.0};
  const double k = dc.k, N = dc.N, p = dc.p;
  for (double t : {1e-5, 3e-3, 0.04, 0.2, 0.6, 0.9}) {
    double ref = 0;
    switch (dc.c) {
      case Construction::PhiPoincare: ref = moment_ref(r, -p - N / k, std::pow(t, k), 1.0, br) / k; break;
      case Construction::PhiBBM: ref = moment_ref(r, -p - N / k, std::pow(t, k), inf, br); break;
      case Construction::PhiMS: ref = moment_ref(r, -N / k, std::pow(t, k), inf, br); break;
      case Construction::EtaJN: ref = moment_ref(r, -p, std::pow(t, 1 / p), 1.0, br); break;
      case Construction::Upsilon: {
        double L = 1 - std::log(t);
        ref = std::pow(L, p) * moment_ref(r, 0, 0, 1 / L, br) + moment_ref(r, -p, 1 / L, 1.0, br);
        break;
      }
    }
    EXPECT_NEAR(w(t), ref, 1e-8 * std::max(1.0, std::abs(ref))) << rho.name() << " t=" << t;
    if (dc.c == Construction::PhiPoincare) {
      EXPECT_GE(w.bracket(t), -1e-12);
      EXPECT_LE(w.bracket(t), 1 + 1e-12);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, Derived,
    ::testing::Values(DerivedCase{FamilyKind::PowerRho, 0.25, Construction::PhiPoincare, 1, 1, 2},
                      DerivedCase{FamilyKind::PowerRho, 0.25, Construction::PhiPoincare, 2, 2, 1},
                      DerivedCase{FamilyKind::ScaledRho, 0.1, Construction::PhiPoincare, 1, 2, 1.5},
                      DerivedCase{FamilyKind::LogRho, 0.01, Construction::PhiPoincare, 2, 1, 2},
                      DerivedCase{FamilyKind::PowerRho, 0.5, Construction::PhiBBM, 1, 1, 2},
                      DerivedCase{FamilyKind::ScaledRho, 0.05, Construction::PhiBBM, 2, 2, 1},
                      DerivedCase{FamilyKind::LogRho, 0.01, Construction::PhiMS, 1, 1, 2},
                      DerivedCase{FamilyKind::PowerRho, 0.25, Construction::EtaJN, 1, 1, 2},
                      DerivedCase{FamilyKind::ScaledRho, 0.2, Construction::EtaJN, 1, 1, 1},
                      DerivedCase{FamilyKind::PowerRho, 0.25, Construction::Upsilon, 1, 1, 2},
                      DerivedCase{FamilyKind::LogRho, 0.05, Construction::Upsilon, 1, 1, 1}),
                         [](const auto& info) { return "case" + std::to_string(info.index); });

TEST(Derived, EtaMassIdentity) {
  for (auto k : {FamilyKind::PowerRho, FamilyKind::ScaledRho, FamilyKind::LogRho})
    for (double p : {1.0, 2.0, 3.0})
      for (double e : {0.5, 1e-3}) {
        auto eta = derive(make_rho(k, e), Construction::EtaJN, {1, p, 1, 1});
        EXPECT_NEAR(eta_mass_identity(eta), 1.0, 1e-10);
      }
  EXPECT_THROW(eta_mass_identity(derive(make_rho(FamilyKind::PowerRho, 0.5), Construction::PhiBBM)), Error);
}

TEST(Derived, UpsilonIntegralAgainstQuadrature) {
  for (auto k : {FamilyKind::PowerRho, FamilyKind::ScaledRho}) {
    auto ups = derive(make_rho(k, 0.25), Construction::Upsilon, {1, 2, 1, 1});
    boost::math::quadrature::tanh_sinh<double> ts;
    for (auto [a, b] : {std::pair{0.0, 0.5}, std::pair{0.1, 0.9}, std::pair{0.0, 1.0}}) {
      double ref = ts.integrate([&](double t) { return ups(t); }, a, b);
      EXPECT_NEAR(ups.integral(a, b), ref, 1e-7 * std::max(1.0, ref));
    }
  }
}

TEST(Derived, SupportRestrictions) {
  auto psi = make_psi(FamilyKind::PowerPsi, 0.5);
  EXPECT_THROW(derive(psi, Construction::EtaJN), Error);
  EXPECT_THROW(derive(psi, Construction::Upsilon), Error);
  EXPECT_THROW(derive(make_rho(FamilyKind::PowerRho, 0.5), Construction::PhiPoincare, {1, 2, 1, 0.5}), Error);
  EXPECT_THROW(derive(make_rho(FamilyKind::PowerRho, 0.5), Construction::Upsilon).pw(), Error);
}
