#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"
#include "funcgrid.hpp"
#include "norms.hpp"

namespace kfun {

enum class FamilyKind { PowerRho, ScaledRho, LogRho, PowerPsi, ScaledPsi, LogPsi, Tabulated };

struct WeightFamily {
  FamilyKind kind = FamilyKind::PowerRho;
  double eps = 0.5;
  double alpha = 1;
  bool normalized = true;
  bool rho = true;  // concentrates at 0 (rho) or escapes to infinity (psi)
  PiecewisePower density;

  double operator()(double t) const { return density(t); }
  double cdf(double t) const { return density.integrate(0, t); }
  double mass() const { return density.integrate(0, inf); }
  double support_lo() const { return density.support_lo(); }
  double support_hi() const { return density.support_hi(); }

  std::string name() const {
    static const char* names[] = {"power", "scaled", "log", "power_psi", "scaled_psi", "log_psi", "table"};
    char buf[96];
    if (kind == FamilyKind::ScaledRho || kind == FamilyKind::ScaledPsi)
      std::snprintf(buf, sizeof buf, "%s:alpha=%g:eps=%g", names[int(kind)], alpha, eps);
    else
      std::snprintf(buf, sizeof buf, "%s:eps=%g", names[int(kind)], eps);
    return buf;
  }

  // v -> L^{-1} rho(v / L): same family stretched to the interval scale L
  WeightFamily rescaled(double L) const {
    WeightFamily w = *this;
    auto terms = density.terms();
    for (auto& p : terms) {
      if (p.m != 0) throw Error("rescaled: log terms not supported");
      p.c *= std::pow(L, -1 - p.s);
      p.lo *= L;
      p.hi *= L;
    }
    w.density = PiecewisePower(terms);
    return w;
  }
};

inline WeightFamily make_family(FamilyKind kind, double eps, double alpha = 1) {
  WeightFamily w;
  w.kind = kind;
  w.eps = eps;
  w.alpha = alpha;
  if (!(eps > 0)) throw Error("weight family: eps must be positive");
  if ((kind == FamilyKind::ScaledRho || kind == FamilyKind::ScaledPsi) && !(alpha > 0))
    throw Error("weight family: alpha must be positive");
  if ((kind == FamilyKind::LogRho || kind == FamilyKind::LogPsi) && !(eps < 1))
    throw Error("weight family: log kinds need eps in (0, 1)");
  switch (kind) {
    case FamilyKind::PowerRho:
      w.density = PiecewisePower({{eps, eps - 1, 0, 0, 1}});
      break;
    case FamilyKind::ScaledRho:
      w.density = PiecewisePower({{alpha * std::pow(eps, -alpha), alpha - 1, 0, 0, eps}});
      break;
    case FamilyKind::LogRho:
      w.density = PiecewisePower({{1 / std::abs(std::log(eps)), -1, 0, eps, 1}});
      break;
    case FamilyKind::PowerPsi:
      w.density = PiecewisePower({{eps, -eps - 1, 0, 1, inf}});
      w.rho = false;
      break;
    case FamilyKind::ScaledPsi:
      w.density = PiecewisePower({{alpha * std::pow(eps, -alpha), -alpha - 1, 0, 1 / eps, inf}});
      w.rho = false;
      break;
    case FamilyKind::LogPsi:
      w.density = PiecewisePower({{1 / std::abs(std::log(eps)), -1, 0, 1, 1 / eps}});
      w.rho = false;
      break;
    case FamilyKind::Tabulated:
      throw Error("weight family: use from_table for tabulated weights");
  }
  return w;
}

inline WeightFamily make_rho(FamilyKind kind, double eps, double alpha = 1) {
  auto w = make_family(kind, eps, alpha);
  if (!w.rho) throw Error("make_rho: not a rho kind");
  return w;
}

inline WeightFamily make_psi(FamilyKind kind, double eps, double alpha = 1) {
  auto w = make_family(kind, eps, alpha);
  if (w.rho) throw Error("make_psi: not a psi kind");
  return w;
}

// eps t^{p - eps - 1} on (0, 1): the un-normalized weight used by the Gaussian corollary.
inline WeightFamily unnormalized_power(double eps, double p) {
  WeightFamily w = make_rho(FamilyKind::PowerRho, eps);
  w.density = PiecewisePower({{eps, p - eps - 1, 0, 0, 1}});
  w.normalized = false;
  return w;
}

// psi(t) = t^{-2} rho(1/t)
inline WeightFamily dual(const WeightFamily& r) {
  WeightFamily w = r;
  std::vector<PowerTerm> terms;
  for (const auto& p : r.density.terms()) {
    if (p.m != 0) throw Error("dual: log terms not supported");
    terms.push_back({p.c, -p.s - 2, 0, p.hi == inf ? 0.0 : 1 / p.hi, p.lo == 0 ? inf : 1 / p.lo});
  }
  w.density = PiecewisePower(terms);
  w.rho = !r.rho;
  switch (r.kind) {
    case FamilyKind::PowerRho: w.kind = FamilyKind::PowerPsi; break;
    case FamilyKind::ScaledRho: w.kind = FamilyKind::ScaledPsi; break;
    case FamilyKind::LogRho: w.kind = FamilyKind::LogPsi; break;
    case FamilyKind::PowerPsi: w.kind = FamilyKind::PowerRho; break;
    case FamilyKind::ScaledPsi: w.kind = FamilyKind::ScaledRho; break;
    case FamilyKind::LogPsi: w.kind = FamilyKind::LogRho; break;
    case FamilyKind::Tabulated: break;
  }
  return w;
}

// Tabulated weight: log-log interpolation between positive samples, zero outside [t0, tn].
inline WeightFamily from_table(const std::vector<double>& t, const std::vector<double>& v, bool rho = true) {
  if (t.size() < 2 || t.size() != v.size()) throw Error("from_table: need matching t and value arrays");
  std::vector<PowerTerm> terms;
  for (size_t i = 0; i + 1 < t.size(); ++i) {
    if (!(t[i] > 0 && t[i + 1] > t[i])) throw Error("from_table: t must be positive and increasing");
    if (!(v[i] > 0 && v[i + 1] > 0)) throw Error("from_table: values must be positive");
    double s = std::log(v[i + 1] / v[i]) / std::log(t[i + 1] / t[i]);
    terms.push_back({v[i] * std::pow(t[i], -s), s, 0, t[i], t[i + 1]});
  }
  WeightFamily w;
  w.kind = FamilyKind::Tabulated;
  w.eps = 0;
  w.rho = rho;
  w.density = PiecewisePower(terms);
  w.normalized = std::abs(w.mass() - 1) < 1e-10;
  return w;
}

// "power:0.25", "power:eps=0.25", "scaled:alpha=2:eps=0.1", "log:eps=1e-3", "power_psi:0.1", ...
inline WeightFamily parse_family(const std::string& s, double eps_override = -1) {
  auto parts = detail::split(s, ':');
  if (parts.empty()) throw Error("empty family");
  const std::string& n = parts[0];
  FamilyKind kind;
  if (n == "power") kind = FamilyKind::PowerRho;
  else if (n == "scaled") kind = FamilyKind::ScaledRho;
  else if (n == "log") kind = FamilyKind::LogRho;
  else if (n == "power_psi") kind = FamilyKind::PowerPsi;
  else if (n == "scaled_psi") kind = FamilyKind::ScaledPsi;
  else if (n == "log_psi") kind = FamilyKind::LogPsi;
  else throw Error("unknown weight family '" + n + "'");
  double eps = 0.5, alpha = 2;
  for (size_t i = 1; i < parts.size(); ++i) {
    auto kv = detail::split(parts[i], '=');
    if (kv.size() == 1) eps = detail::to_double(kv[0]);
    else if (kv[0] == "eps") eps = detail::to_double(kv[1]);
    else if (kv[0] == "alpha") alpha = detail::to_double(kv[1]);
    else throw Error("unknown family parameter '" + kv[0] + "'");
  }
  if (eps_override > 0) eps = eps_override;
  return make_family(kind, eps, alpha);
}

enum class Construction { PhiPoincare, PhiBBM, Upsilon, EtaJN, PhiMS };

struct DerivedParams {
  int k = 1;
  double p = 2;
  int N = 1;
  double ell = 1;
};

class DerivedWeight {
 public:
  DerivedWeight(WeightFamily source, Construction kind, DerivedParams par)
      : source_(std::move(source)), kind_(kind), par_(par) {
    const double hi = source_.support_hi(), tol = 1 + 1e-12;
    switch (kind_) {
      case Construction::PhiPoincare:
        if (hi > std::pow(par_.ell, par_.k) * tol) throw Error("PhiPoincare: supp rho must lie in (0, l(Q)^k)");
        build(1.0 / par_.k, par_.k, -par_.p - double(par_.N) / par_.k, std::pow(par_.ell, par_.k));
        break;
      case Construction::PhiBBM:
        build(1.0, par_.k, -par_.p - double(par_.N) / par_.k, inf);
        break;
      case Construction::PhiMS:
        build(1.0, par_.k, -double(par_.N) / par_.k, inf);
        break;
      case Construction::EtaJN:
        if (hi > tol) throw Error("EtaJN: supp rho must lie in (0, 1)");
        build(1.0, 1.0 / par_.p, -par_.p, 1.0);
        break;
      case Construction::Upsilon:
        if (hi > tol) throw Error("Upsilon: supp rho must lie in (0, 1)");
        moment_ = tail_moment(1.0, 1.0, -par_.p, 1.0, nullptr);
        break;
    }
  }

  Construction kind() const { return kind_; }
  const WeightFamily& source() const { return source_; }
  const DerivedParams& params() const { return par_; }
  bool closed_form() const { return kind_ != Construction::Upsilon || source_.kind == FamilyKind::PowerRho; }
  // closed-form piecewise-power representation (not available for Upsilon)
  const PiecewisePower& pw() const {
    if (kind_ == Construction::Upsilon) throw Error("Upsilon has no piecewise-power form");
    return pw_;
  }
  // Poincare weight without the remainder bracket
  const PiecewisePower& free_pw() const { return free_; }

  double operator()(double t) const {
    if (kind_ != Construction::Upsilon) return pw_(t);
    if (!(t > 0 && t < 1)) return 0.0;
    double L = 1 - std::log(t);
    return std::pow(L, par_.p) * source_.cdf(1 / L) + moment_(1 / L);
  }

  // Poincare remainder bracket in [0, 1]: phi = free * bracket
  double bracket(double t) const {
    double f = free_(t);
    return f > 0 ? pw_(t) / f : 1.0;
  }

  // integral of the weight over (a, b)
  double integral(double a, double b) const {
    if (kind_ != Construction::Upsilon) return pw_.integrate(a, b);
    a = std::max(a, 0.0);
    b = std::min(b, 1.0);
    if (!(b > a)) return 0.0;
    if (source_.kind == FamilyKind::PowerRho && source_.normalized) {
      const double e = source_.eps, p = par_.p;
      if (std::abs(p - e) > 1e-9) {
        double c = e / (p - e);
        return (1 + c) * zygmund_weight_mass(a, b, p - e) - c * (b - a);
      }
    }
    // numerical fallback in the variable L = 1 - log t
    auto g = [&](double L) { return (*this)(std::exp(1 - L)) * std::exp(1 - L); };
    double La = a > 0 ? 1 - std::log(a) : inf, Lb = 1 - std::log(b);
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, Lb, La, 15, 1e-12);
  }

  // Defining integral evaluated by adaptive quadrature (oracle for the closed forms).
  double numeric(double t) const {
    const auto& rho = source_;
    auto moment = [&](double a, double lo, double hi) {
      lo = std::max(lo, rho.support_lo());
      hi = std::min(hi, rho.support_hi());
      if (!(hi > lo)) return 0.0;
      auto g = [&](double x) {
        double v = std::exp(x);
        return std::pow(v, a + 1) * rho(v);
      };
      double xl = lo > 0 ? std::log(lo) : -inf, xh = std::isinf(hi) ? inf : std::log(hi);
      // split at interior breakpoints of the source
      std::vector<double> cuts{xl};
      for (const auto& p : rho.density.terms())
        for (double c : {p.lo, p.hi})
          if (c > 0 && std::isfinite(c) && std::log(c) > xl && std::log(c) < xh) cuts.push_back(std::log(c));
      cuts.push_back(xh);
      std::sort(cuts.begin(), cuts.end());
      double s = 0;
      for (size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
          s += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, cuts[i], cuts[i + 1], 20, 1e-12);
      return s;
    };
    const int k = par_.k;
    const double N = par_.N, p = par_.p;
    switch (kind_) {
      case Construction::PhiPoincare:
        return moment(-p - N / k, std::pow(t, k), std::pow(par_.ell, k)) / k;
      case Construction::PhiBBM:
        return moment(-p - N / k, std::pow(t, k), inf);
      case Construction::PhiMS:
        return moment(-N / k, std::pow(t, k), inf);
      case Construction::EtaJN:
        return moment(-p, std::pow(t, 1 / p), 1.0);
      case Construction::Upsilon: {
        double L = 1 - std::log(t);
        return std::pow(L, p) * moment(0, 0, 1 / L) + moment(-p, 1 / L, 1.0);
      }
    }
    return 0;
  }

 private:
  // K * integral_{t^kappa}^{U} v^a rho(v) dv as a piecewise power in t.
  // `free` (optional) receives the bracket-free part: for each source piece the dominant term.
  PiecewisePower tail_moment(double K, double kappa, double a, double U, PiecewisePower* free) const {
    std::vector<PowerTerm> out, fr;
    for (const auto& p : source_.density.terms()) {
      if (p.m != 0) throw Error("derived weight: log terms in source not supported");
      double lo = p.lo, hi = std::min(p.hi, U);
      if (!(hi > lo)) continue;
      const double e = a + p.s + 1, c = K * p.c;
      const double tlo = std::pow(lo, 1 / kappa), thi = std::isinf(hi) ? inf : std::pow(hi, 1 / kappa);
      if (std::isinf(hi) && e >= 0) throw Error("derived weight diverges at infinity");
      // plateau for t^kappa < lo
      if (lo > 0) {
        double I = c * power_integral(a + p.s, 0, lo, hi);
        out.push_back({I, 0, 0, 0, tlo});
        if (e != 0) fr.push_back({c / std::abs(e) * std::max(std::pow(lo, e), std::isinf(hi) ? 0.0 : std::pow(hi, e)), 0, 0, 0, tlo});
        else fr.push_back({I, 0, 0, 0, tlo});
      }
      if (e != 0) {
        double Ghi = std::isinf(hi) ? 0.0 : std::pow(hi, e) / e;
        out.push_back({c * Ghi, 0, 0, tlo, thi});
        out.push_back({-c / e, kappa * e, 0, tlo, thi});
        if (e < 0) fr.push_back({c / -e, kappa * e, 0, tlo, thi});
        else fr.push_back({c * Ghi, 0, 0, tlo, thi});
      } else {
        out.push_back({c * std::log(hi), 0, 0, tlo, thi});
        out.push_back({-c * kappa, 0, 1, tlo, thi});
        fr.push_back({c * std::log(hi), 0, 0, tlo, thi});
        fr.push_back({-c * kappa, 0, 1, tlo, thi});
      }
    }
    if (free) *free = PiecewisePower(fr);
    return PiecewisePower(out);
  }

  void build(double K, double kappa, double a, double U) {
    pw_ = tail_moment(K, kappa, a, U, &free_);
    if (source_.density.terms().size() != 1) free_ = pw_;
  }

  WeightFamily source_;
  Construction kind_;
  DerivedParams par_;
  PiecewisePower pw_, free_, moment_;
};

inline DerivedWeight derive(const WeightFamily& source, Construction c, DerivedParams par = {}) {
  return DerivedWeight(source, c, par);
}

// integral_0^1 eta(t) dt; equals the mass of the source on (0, 1).
inline double eta_mass_identity(const DerivedWeight& eta) {
  if (eta.kind() != Construction::EtaJN) throw Error("eta_mass_identity: not an EtaJN weight");
  return eta.integral(0, 1);
}

}  // namespace kfun
