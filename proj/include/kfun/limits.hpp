#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include <json.hpp>
#include "core.hpp"
#include "smoothness.hpp"
#include "weights.hpp"

namespace kfun {

// C_{N,p} = int_{S^{N-1}} |w . e|^p dsigma
inline double surface_constant(int N, double p) {
  if (!(p > 0)) throw Error("surface_constant: p must be positive");
  if (N == 1) return 2.0;
  if (N == 2) return 2 * std::sqrt(pi) * boost::math::tgamma((p + 1) / 2) / boost::math::tgamma(p / 2 + 1);
  throw Error("surface_constant: unsupported dimension " + std::to_string(N));
}

inline double sphere_area(int N) {
  switch (N) {
    case 1: return 2.0;
    case 2: return 2 * pi;
    case 3: return 4 * pi;
  }
  throw Error("sphere_area: unsupported dimension " + std::to_string(N));
}

// Monte-Carlo estimate of C_{N,p}: |S^{N-1}| E|w_1|^p with w uniform on the sphere.
inline double monte_carlo_surface_constant(int N, double p, long samples = 1000000, unsigned long seed = 12345) {
  if (N < 1 || N > 3) throw Error("monte_carlo_surface_constant: unsupported dimension");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  double acc = 0;
  for (long i = 0; i < samples; ++i) {
    double z[3] = {0, 0, 0}, r2 = 0;
    for (int a = 0; a < N; ++a) {
      z[a] = nd(gen);
      r2 += z[a] * z[a];
    }
    acc += std::pow(std::abs(z[0]) / std::sqrt(r2), p);
  }
  return sphere_area(N) * acc / samples;
}

struct Extrapolation {
  double limit = 0;
  double rate = 0;      // NaN when the sequence is constant
  double residual = 0;  // misfit of the model at the fourth-to-last point
  std::string flag;     // "", "no-extrapolation", "constant"
};

// Fit F(x) = L + A x^r through the last three points (x decreasing to 0) and extrapolate to x = 0.
inline Extrapolation richardson(const std::vector<double>& x, const std::vector<double>& F) {
  const size_t n = F.size();
  if (n < 3 || x.size() != n) throw Error("richardson: need at least three points");
  Extrapolation out;
  const double x1 = x[n - 3], x2 = x[n - 2], x3 = x[n - 1];
  const double d1 = F[n - 3] - F[n - 2], d2 = F[n - 2] - F[n - 1];
  const double scale = std::max({std::abs(F[n - 1]), std::abs(F[n - 2]), 1e-300});
  if (std::abs(d1) <= 1e-14 * scale && std::abs(d2) <= 1e-14 * scale) {
    out.limit = F[n - 1];
    out.rate = std::nan("");
    out.flag = "constant";
    return out;
  }
  auto fallback = [&] {
    out.limit = F[n - 1];
    out.rate = std::nan("");
    out.flag = "no-extrapolation";
    return out;
  };
  if (!std::isfinite(d1) || !std::isfinite(d2) || d1 * d2 <= 0) return fallback();
  const double q = d1 / d2;
  auto ratio = [&](double r) { return (std::pow(x1, r) - std::pow(x2, r)) / (std::pow(x2, r) - std::pow(x3, r)); };
  // ratio(r) increases with r for a decreasing geometric-like grid
  double lo = 1e-3, hi = 12;
  double flo = ratio(lo) - q, fhi = ratio(hi) - q;
  if (flo * fhi > 0) return fallback();
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi), fm = ratio(mid) - q;
    if ((fm > 0) == (fhi > 0)) {
      hi = mid;
      fhi = fm;
    } else {
      lo = mid;
    }
  }
  const double r = 0.5 * (lo + hi);
  const double A = d2 / (std::pow(x2, r) - std::pow(x3, r));
  out.rate = r;
  out.limit = F[n - 1] - A * std::pow(x3, r);
  if (n >= 4) out.residual = std::abs(F[n - 4] - (out.limit + A * std::pow(x[n - 4], r)));
  return out;
}

struct ConvergenceReport {
  std::string label;
  std::vector<double> eps, values;
  double limit = 0, target = 0, rel_err = 0, rate = 0, residual = 0;
  double direct = std::nan("");  // limit estimated directly from the sampled data
  std::string target_source;
  std::string flag;
  bool monotone = true;
  bool diverged = false;
  std::string violation;

  // relative error, or absolute error when the target is 0
  static double error(double limit, double target) {
    if (target == 0) return std::abs(limit);
    if (std::isinf(target)) return std::isinf(limit) ? 0.0 : inf;
    return std::abs(limit - target) / std::abs(target);
  }
  bool within(double tol) const { return target == 0 ? rel_err <= 1e-3 : rel_err <= tol; }

  void finish(const std::vector<double>& x) {
    for (size_t i = 1; i < eps.size(); ++i)
      if (!(eps[i] < eps[i - 1])) throw Error("convergence report: eps must be strictly decreasing");
    monotone = true;
    bool up = true, down = true;
    for (size_t i = 1; i < values.size(); ++i) {
      double tol = 1e-12 * std::max(std::abs(values[i]), std::abs(values[i - 1]));
      if (values[i] < values[i - 1] - tol) up = false;
      if (values[i] > values[i - 1] + tol) down = false;
    }
    monotone = up || down;
    double big = std::max(std::abs(target), std::isfinite(direct) ? std::abs(direct) : 0.0);
    for (double v : values)
      if (std::isinf(v)) diverged = true;
    // growing past 10x the largest finite target
    if (!values.empty() && values.back() > values.front() && values.back() > 10 * big) diverged = true;
    if (diverged) {
      limit = inf;
      rate = std::nan("");
      flag = "diverged";
    } else {
      auto ex = richardson(x, values);
      limit = ex.limit;
      rate = ex.rate;
      residual = ex.residual;
      flag = ex.flag;
    }
    rel_err = error(limit, target);
  }

  nlohmann::json to_json() const {
    auto num = [](double v) -> nlohmann::json {
      if (std::isfinite(v)) return v;
      return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    };
    nlohmann::json j;
    j["label"] = label;
    nlohmann::json rows = nlohmann::json::array();
    for (size_t i = 0; i < eps.size(); ++i) rows.push_back({{"eps", num(eps[i])}, {"value", num(values[i])}});
    j["table"] = rows;
    j["limit"] = num(limit);
    j["target"] = num(target);
    j["target_source"] = target_source;
    j["direct"] = num(direct);
    j["rel_err"] = num(rel_err);
    j["rate"] = num(rate);
    j["residual"] = num(residual);
    j["monotone"] = monotone;
    j["diverged"] = diverged;
    j["flag"] = flag;
    if (!violation.empty()) j["violation"] = violation;
    return j;
  }

  void write_csv(std::ostream& os) const {
    os << "eps,value\n";
    os.precision(12);
    for (size_t i = 0; i < eps.size(); ++i) os << eps[i] << ',' << values[i] << '\n';
  }
};

struct LimitOptions {
  std::vector<double> eps;                // default: 2^-1 .. 2^-12
  double alpha = 1;                       // scaled families
  double target = std::nan("");           // default: the direct estimate of L
  std::string target_source = "direct";
  std::string label;
};

// Rate variable: eps itself, or 1/|log eps| for the log families.
inline double rate_variable(FamilyKind kind, double eps) {
  if (kind == FamilyKind::LogRho || kind == FamilyKind::LogPsi) return 1 / std::abs(std::log(eps));
  return eps;
}

// [int (g(t)/t)^p rho_eps dt]^{1/p} (rho kinds) or [int g^p psi_eps dt]^{1/p} (psi kinds) over eps.
inline ConvergenceReport averaging_limit(const std::vector<double>& t, const std::vector<double>& g, FamilyKind kind,
                                       double p, LimitOptions o = {}) {
  if (t.size() < 2 || t.size() != g.size()) throw Error("averaging_limit: need matching t and g samples");
  if (!(p > 0)) throw Error("averaging_limit: p must be positive");
  if (o.eps.empty()) o.eps = dyadic_eps(1, 12);
  const bool rho = make_family(kind, 0.5, o.alpha).rho;
  std::vector<double> phi(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (!(g[i] >= 0)) throw Error("averaging_limit: g must be non-negative");
    phi[i] = std::pow(rho ? g[i] / t[i] : g[i], p);
  }
  ConvergenceReport rep;
  rep.label = o.label.empty() ? make_family(kind, 0.5, o.alpha).name() : o.label;
  rep.direct = rho ? g.front() / t.front() : g.back();
  // unbounded g(t)/t near 0 (or g near infinity): fitted power of the end samples
  {
    size_t a = rho ? 0 : t.size() - 2;
    double gam = std::log(phi[a + 1] / phi[a]) / std::log(t[a + 1] / t[a]);
    if (std::isfinite(gam) && (rho ? gam < -0.05 : gam > 0.05)) {
      rep.violation = rho ? "sup g(t)/t is infinite" : "g(t) is unbounded as t grows";
      rep.direct = inf;
    }
  }
  double vmax = 0;
  for (double v : phi) vmax = std::max(vmax, std::pow(v, 1 / p));
  if (std::isfinite(rep.direct) && rep.direct < 1e-8 * vmax) rep.direct = 0;  // below resolution
  rep.target = std::isnan(o.target) ? rep.direct : o.target;
  rep.target_source = std::isnan(o.target) ? "direct" : o.target_source;
  std::vector<double> x;
  for (double e : o.eps) {
    auto w = make_family(kind, e, o.alpha);
    double v = product_integral(t, phi, w.density);
    rep.eps.push_back(e);
    rep.values.push_back(std::pow(v, 1 / p));
    x.push_back(rate_variable(kind, e));
  }
  rep.finish(x);
  return rep;
}

// Same with g given as a function, sampled on a log grid covering [t_lo, t_hi].
inline ConvergenceReport averaging_limit(const std::function<double(double)>& g, FamilyKind kind, double p,
                                       LimitOptions o = {}, double t_lo = 1e-12, double t_hi = 1e12) {
  auto t = geometric_grid(t_lo, t_hi, 8);
  std::vector<double> v;
  for (double s : t) v.push_back(g(s));
  return averaging_limit(t, v, kind, p, o);
}

// theta * int_0^1 t^{theta p - 1} dt for theta = 1 - eps; identically 1/p
inline double milman_closed_form(double theta, double p) {
  PiecewisePower w({{theta, theta * p - 1, 0, 0, 1}});
  return w.integrate(0, 1);
}

// ((1-eps) int_0^1 [t^{-eps} K(t,f)]^p dt/t)^{1/p} as eps -> 1, against p^{-1/p} lim_{t->0} K(t)/t.
inline ConvergenceReport milman_extrapolation(const KPair& pair, const GridFunction& f, double p,
                                              std::vector<double> thetas = {}, double target = std::nan("")) {
  if (!(p > 0)) throw Error("milman_extrapolation: p must be positive");
  if (thetas.empty()) thetas = dyadic_eps(1, 12);
  auto t = geometric_grid(1e-9, 1.0, 16);
  auto K = k_functional(pair, t, f);
  std::vector<double> phi(t.size());
  for (size_t i = 0; i < t.size(); ++i) phi[i] = std::pow(K[i] / t[i], p);
  ConvergenceReport rep;
  rep.label = "milman";
  double a1;
  switch (pair.tag) {
    case KPair::Tag::LpLinf: a1 = norm(f, NormSpec::Sup()); break;
    case KPair::Tag::BB: a1 = norm(f, pair.spec); break;
    default: a1 = K.front() / t.front(); break;
  }
  rep.direct = std::pow(p, -1 / p) * K.front() / t.front();
  rep.target = std::isnan(target) ? std::pow(p, -1 / p) * a1 : target;
  rep.target_source = std::isnan(target) ? "p^{-1/p} |f|_{A1}" : "given";
  std::vector<double> x;
  ProductOptions po;
  po.hi = Tail::Zero;
  for (double th : thetas) {
    PiecewisePower w({{th, th * p - 1, 0, 0, 1}});
    double v = product_integral(t, phi, w, po);
    rep.eps.push_back(th);
    rep.values.push_back(std::pow(v, 1 / p));
    x.push_back(th);
  }
  rep.finish(x);
  return rep;
}

}  // namespace kfun
