#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace kfun {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double inf = std::numeric_limits<double>::infinity();
inline constexpr double pi = 3.141592653589793238462643383279502884;

// Generalized binomial coefficient binom(a, j).
inline double binom(double a, long j) {
  double r = 1.0;
  for (long l = 1; l <= j; ++l) r *= (a - double(l - 1)) / double(l);
  return r;
}

// Geometric grid lo..hi (both included), `per_octave` points per factor 2.
inline std::vector<double> geometric_grid(double lo, double hi, int per_octave) {
  if (!(lo > 0 && hi > lo)) throw Error("geometric_grid: need 0 < lo < hi");
  int n = int(std::ceil(std::log2(hi / lo) * per_octave));
  std::vector<double> t(n + 1);
  double q = std::log(hi / lo) / n;
  for (int i = 0; i <= n; ++i) t[i] = lo * std::exp(q * i);
  t[n] = hi;
  return t;
}

// {2^-1, ..., 2^-n}
inline std::vector<double> dyadic_eps(int from, int to) {
  std::vector<double> e;
  for (int j = from; j <= to; ++j) e.push_back(std::ldexp(1.0, -j));
  return e;
}

// Integral of t^s (log t)^m over (a, b), m in {0, 1}; a may be 0 and b may be inf.
inline double power_integral(double s, int m, double a, double b) {
  if (!(b > a)) return 0.0;
  const double e = s + 1.0;
  if (m == 0) {
    if (a <= 0) {
      if (e <= 0 || std::isinf(b)) return inf;
      return std::pow(b, e) / e;
    }
    if (std::isinf(b)) {
      if (e >= 0) return inf;
      return -std::pow(a, e) / e;
    }
    double L = std::log(b / a);
    if (e == 0) return L;
    return std::pow(a, e) * std::expm1(e * L) / e;
  }
  // m == 1
  if (a <= 0) {
    if (e <= 0 || std::isinf(b)) return e <= 0 ? -inf : inf;
    double lb = std::log(b);
    return std::pow(b, e) * (lb / e - 1.0 / (e * e));
  }
  if (std::isinf(b)) {
    if (e >= 0) return inf;
    double la = std::log(a);
    return -std::pow(a, e) * (la / e - 1.0 / (e * e));
  }
  double la = std::log(a), lb = std::log(b);
  if (std::abs(e) * (lb - la) < 1.0) {
    // x e^{e x} on [la, lb] is entire and nearly polynomial here
    auto g = [e](double x) { return x * std::exp(e * x); };
    return boost::math::quadrature::gauss<double, 30>::integrate(g, la, lb);
  }
  return std::pow(b, e) * (lb / e - 1.0 / (e * e)) - std::pow(a, e) * (la / e - 1.0 / (e * e));
}

// c * t^s * (log t)^m on [lo, hi)
struct PowerTerm {
  double c = 0, s = 0;
  int m = 0;
  double lo = 0, hi = inf;
};

// Sum of power terms. Every weight in the library is one of these, so moments are closed form.
class PiecewisePower {
 public:
  PiecewisePower() = default;
  explicit PiecewisePower(std::vector<PowerTerm> terms) : terms_(std::move(terms)) {
    std::erase_if(terms_, [](const PowerTerm& p) { return p.c == 0 || !(p.hi > p.lo); });
  }

  const std::vector<PowerTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double operator()(double t) const {
    double v = 0;
    for (const auto& p : terms_)
      if (t >= p.lo && t < p.hi) v += p.c * std::pow(t, p.s) * (p.m ? std::log(t) : 1.0);
    return v;
  }

  // Integral of t^g * w(t) over (a, b).
  double integrate(double a, double b, double g = 0.0) const {
    double v = 0;
    for (const auto& p : terms_) {
      double lo = std::max(a, p.lo), hi = std::min(b, p.hi);
      if (hi > lo) v += p.c * power_integral(p.s + g, p.m, lo, hi);
    }
    return v;
  }

  double support_lo() const {
    double v = inf;
    for (const auto& p : terms_) v = std::min(v, p.lo);
    return v;
  }
  double support_hi() const {
    double v = 0;
    for (const auto& p : terms_) v = std::max(v, p.hi);
    return v;
  }

  PiecewisePower scaled(double k) const {
    auto t = terms_;
    for (auto& p : t) p.c *= k;
    return PiecewisePower(std::move(t));
  }
  PiecewisePower times_power(double g) const {
    auto t = terms_;
    for (auto& p : t) p.s += g;
    return PiecewisePower(std::move(t));
  }
  PiecewisePower operator+(const PiecewisePower& o) const {
    auto t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return PiecewisePower(std::move(t));
  }

 private:
  std::vector<PowerTerm> terms_;
};

enum class Tail { Auto, Constant, Zero };

struct ProductOptions {
  Tail lo = Tail::Auto;
  Tail hi = Tail::Auto;
  double flat = 0.05;  // |fitted exponent| below this counts as a constant tail
};

// Integral over (0, inf) of phi(t) w(t), phi sampled at increasing t > 0.
// phi is interpolated as a power law between positive samples and linearly otherwise;
// each cell is then integrated exactly against w. Tails extend the end samples.
inline double product_integral(const std::vector<double>& t, const std::vector<double>& phi,
                               const PiecewisePower& w, ProductOptions o = {}) {
  const size_t n = t.size();
  if (n < 2 || phi.size() != n) throw Error("product_integral: need at least two samples");
  auto exponent = [&](size_t i) {
    return std::log(phi[i + 1] / phi[i]) / std::log(t[i + 1] / t[i]);
  };
  double total = 0;
  const double slo = w.support_lo(), shi = w.support_hi();
  for (size_t i = 0; i + 1 < n; ++i) {
    double a = t[i], b = t[i + 1];
    if (phi[i] == 0 && phi[i + 1] == 0) continue;
    if (b <= slo || a >= shi) continue;
    if (phi[i] > 0 && phi[i + 1] > 0) {
      double g = exponent(i);
      total += phi[i] * std::pow(a, -g) * w.integrate(a, b, g);
    } else {
      double slope = (phi[i + 1] - phi[i]) / (b - a);
      total += (phi[i] - slope * a) * w.integrate(a, b) + slope * w.integrate(a, b, 1.0);
    }
  }
  auto tail = [&](Tail mode, size_t i, double v, double ta, double tb) {
    if (mode == Tail::Zero || v == 0 || tb <= slo || ta >= shi) return 0.0;
    double g = 0;
    if (mode == Tail::Auto && phi[i] > 0 && phi[i + 1] > 0) g = exponent(i);
    if (std::abs(g) < o.flat) return v * w.integrate(ta, tb);
    double r = w.integrate(ta, tb, g);
    return std::isinf(r) ? r : v * std::pow(std::isinf(tb) ? ta : tb, -g) * r;
  };
  total += tail(o.lo, 0, phi[0], 0.0, t[0]);
  total += tail(o.hi, n - 2, phi[n - 1], t[n - 1], inf);
  return total;
}

}  // namespace kfun
