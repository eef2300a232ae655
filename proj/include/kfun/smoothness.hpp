#pragma once

#include <array>
#include <vector>

#include "core.hpp"
#include "funcgrid.hpp"
#include "norms.hpp"
#include "weights.hpp"

namespace kfun {

using Vec2 = std::array<double, 2>;

// (-1)^{j+k} binom(k, j), j = 0..k
inline std::vector<double> stencil(int k) {
  if (k < 1) throw Error("difference order must be >= 1");
  std::vector<double> c(k + 1);
  for (int j = 0; j <= k; ++j) c[j] = ((j + k) % 2 ? -1.0 : 1.0) * binom(k, j);
  return c;
}

namespace detail {

struct DiffGrid {
  std::vector<double> xs, ys, masses;
};

// Evaluation nodes for Delta^k_h f. Local boxes: cell centers in Q(k,h). Whole space: the union of
// the shifted boxes (box - j h), which is where Delta^k_h f can be non-zero.
inline DiffGrid diff_nodes(const GridFunction& f, int k, const Vec2& h) {
  const Box& b = f.box();
  DiffGrid g;
  auto weight = [&](double x, double y, double vol) {
    return f.measure() == Measure::Gaussian ? vol * gauss_density(b.dim, x, y) : vol;
  };
  if (!f.whole()) {
    const int ny = b.dim == 2 ? b.cells[1] : 1;
    for (int j = 0; j < ny; ++j) {
      double y = b.dim == 2 ? b.center(1, j) : 0.0;
      if (b.dim == 2 && (y + k * h[1] < b.lo[1] || y + k * h[1] > b.hi[1])) continue;
      for (int i = 0; i < b.cells[0]; ++i) {
        double x = b.center(0, i);
        if (x + k * h[0] < b.lo[0] || x + k * h[0] > b.hi[0]) continue;
        g.xs.push_back(x);
        g.ys.push_back(y);
        g.masses.push_back(weight(x, y, b.cell_volume()));
      }
    }
    return g;
  }
  if (b.dim == 1) {
    std::vector<std::pair<double, double>> iv;
    for (int j = 0; j <= k; ++j) iv.push_back({b.lo[0] - j * h[0], b.hi[0] - j * h[0]});
    std::sort(iv.begin(), iv.end());
    std::vector<std::pair<double, double>> merged;
    for (auto& [a, c] : iv) {
      if (!merged.empty() && a <= merged.back().second) merged.back().second = std::max(merged.back().second, c);
      else merged.push_back({a, c});
    }
    const double dx = b.dx(0);
    for (auto [a, c] : merged) {
      int n = std::max(1, int(std::ceil((c - a) / dx - 1e-9)));
      double d = (c - a) / n;
      for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * d;
        g.xs.push_back(x);
        g.ys.push_back(0.0);
        g.masses.push_back(weight(x, 0.0, d));
      }
    }
    return g;
  }
  std::array<double, 2> lo, hi;
  std::array<int, 2> n;
  for (int a = 0; a < 2; ++a) {
    lo[a] = std::min(b.lo[a], b.lo[a] - k * h[a]);
    hi[a] = std::max(b.hi[a], b.hi[a] - k * h[a]);
    n[a] = std::max(1, int(std::ceil((hi[a] - lo[a]) / b.dx(a) - 1e-9)));
  }
  double dxa = (hi[0] - lo[0]) / n[0], dya = (hi[1] - lo[1]) / n[1];
  for (int j = 0; j < n[1]; ++j)
    for (int i = 0; i < n[0]; ++i) {
      double x = lo[0] + (i + 0.5) * dxa, y = lo[1] + (j + 0.5) * dya;
      g.xs.push_back(x);
      g.ys.push_back(y);
      g.masses.push_back(weight(x, y, dxa * dya));
    }
  return g;
}

}  // namespace detail

// Values of Delta^k_h f with their quadrature masses.
inline Samples difference_samples(const GridFunction& f, int k, const Vec2& h) {
  auto c = stencil(k);
  auto g = detail::diff_nodes(f, k, h);
  Samples s;
  s.masses = std::move(g.masses);
  s.values.resize(g.xs.size());
  for (size_t i = 0; i < g.xs.size(); ++i) {
    double v = 0;
    for (int j = 0; j <= k; ++j) v += c[j] * f.eval(g.xs[i] + j * h[0], g.ys[i] + j * h[1]);
    s.values[i] = v;
  }
  return s;
}

// Delta^k_h f on the box of f; on local boxes values outside Q(k,h) are 0.
inline GridFunction difference(const GridFunction& f, int k, const Vec2& h) {
  auto c = stencil(k);
  const Box& b = f.box();
  std::vector<double> out(f.size(), 0.0);
  size_t inside = 0;
  for (size_t i = 0; i < f.size(); ++i) {
    double x = f.x(i), y = f.y(i);
    bool ok = x + k * h[0] >= b.lo[0] && x + k * h[0] <= b.hi[0];
    if (b.dim == 2) ok = ok && y + k * h[1] >= b.lo[1] && y + k * h[1] <= b.hi[1];
    if (!ok && !f.whole()) continue;
    ++inside;
    double v = 0;
    for (int j = 0; j <= k; ++j) v += c[j] * f.eval(x + j * h[0], y + j * h[1]);
    out[i] = v;
  }
  if (!f.whole() && inside == 0) throw Error("difference: Q(k,h) is empty");
  return f.with_values(std::move(out));
}

// ||Delta^k_h f||_spec; 0 when Q(k,h) is empty.
inline double difference_norm(const GridFunction& f, int k, const Vec2& h, const NormSpec& spec) {
  auto s = difference_samples(f, k, h);
  if (s.values.empty()) return 0.0;
  if (spec.tag == NormSpec::Tag::Lp) {
    double acc = 0;
    for (size_t i = 0; i < s.values.size(); ++i) acc += s.masses[i] * std::pow(std::abs(s.values[i]), spec.p);
    return std::pow(acc, 1 / spec.p);
  }
  return norm(s, spec);
}

inline std::vector<Vec2> directions(int dim, int count = 16) {
  std::vector<Vec2> d;
  if (dim == 1) return {{1, 0}, {-1, 0}};
  for (int i = 0; i < count; ++i) d.push_back({std::cos(2 * pi * i / count), std::sin(2 * pi * i / count)});
  return d;
}

// omega_k(f, t) = sup_{|h| < t} ||Delta^k_h f||, over 64 log-spaced magnitudes (one decade below t)
inline double modulus(const GridFunction& f, int k, double t, const NormSpec& spec, int dirs = 16) {
  if (!(t > 0)) throw Error("modulus: t must be positive");
  double best = 0;
  for (int m = 0; m < 64; ++m) {
    double r = t * std::pow(10.0, -m / 64.0) * (m == 0 ? 1 - 1e-12 : 1.0);
    for (auto w : directions(f.dim(), dirs)) best = std::max(best, difference_norm(f, k, {r * w[0], r * w[1]}, spec));
  }
  return best;
}

struct NetOptions {
  double per_decade = 64;
  double r_min = 0;  // 0: 10^{-6/k} * r_max
  double r_max = 0;  // 0: box width (whole space) or l/k (local box)
  int dirs = 16;
};

// Sphere-integrated difference energy D(r) = int_{S^{N-1}} ||Delta^k_{r w} f||^p dsigma on a log grid,
// with the cumulative radial integral C(R) = int_{|h| <= R} ||Delta^k_h f||^p dh.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(const GridFunction& f, int k, const NormSpec& spec, double p, NetOptions o = {})
      : N_(f.dim()), k_(k), p_(p), local_(!f.whole()) {
    const Box& b = f.box();
    double rmax = o.r_max > 0 ? o.r_max : (f.whole() ? b.diameter() : b.width(0) / k);
    // on a local box r_max is the cube scale and k-th differences ~ r^k must stay well above rounding
    double rmin = o.r_min > 0 ? o.r_min : (f.whole() ? 1e-6 : std::pow(10.0, -6.0 / k)) * rmax;
    r_ = geometric_grid(rmin, rmax, o.per_decade / std::log2(10.0));
    auto dirs = directions(N_, o.dirs);
    double dw = N_ == 1 ? 1.0 : 2 * pi / o.dirs;
    D_.resize(r_.size());
    double fmax = 0;
    for (double v : f.values()) fmax = std::max(fmax, std::abs(v));
    // rounding noise of the stencil; anything below is treated as an exact zero
    const double floor = std::pow(1e-14 * std::ldexp(1.0, k) * fmax, p) * b.volume() * dirs.size() * dw;
    for (size_t i = 0; i < r_.size(); ++i) {
      double s = 0;
      for (auto w : dirs) s += std::pow(difference_norm(f, k, {r_[i] * w[0], r_[i] * w[1]}, spec), p);
      D_[i] = s * dw > floor ? s * dw : 0.0;
    }
    build();
  }

  // Build from externally computed samples of D.
  RadialProfile(int N, int k, double p, std::vector<double> r, std::vector<double> D)
      : N_(N), k_(k), p_(p), r_(std::move(r)), D_(std::move(D)) {
    build();
  }

  const std::vector<double>& r() const { return r_; }
  const std::vector<double>& D() const { return D_; }
  int dim() const { return N_; }
  // restricted to a local box: no energy beyond r_max
  bool local() const { return local_; }
  int order() const { return k_; }
  double p() const { return p_; }

  // integral over |h| <= R of ||Delta^k_h f||^p
  double cumulative(double R) const {
    if (R <= 0) return 0.0;
    if (R <= r_.front()) return piece(0, 0.0, R, lo_exp_);
    if (R >= r_.back()) return local_ ? C_.back() : C_.back() + piece(r_.size() - 1, r_.back(), R, hi_exp_);
    size_t i = size_t(std::upper_bound(r_.begin(), r_.end(), R) - r_.begin()) - 1;
    return C_[i] + segment(i, r_[i], R);
  }

  // g(t) = (t^{-N/k} C(t^{1/k}))^{1/p}
  double averaged(double t) const {
    return std::pow(std::pow(t, -double(N_) / k_) * cumulative(std::pow(t, 1.0 / k_)), 1 / p_);
  }

 private:
  static double exponent(double d0, double d1, double r0, double r1) {
    if (!(d0 > 0 && d1 > 0)) return 0.0;
    double g = std::log(d1 / d0) / std::log(r1 / r0);
    return std::abs(g) < 1e-6 ? 0.0 : g;
  }
  // integral of D r^{N-1} over (a, b) within cell i, power or linear interpolation
  double segment(size_t i, double a, double b) const {
    double d0 = D_[i], d1 = D_[i + 1], r0 = r_[i], r1 = r_[i + 1];
    if (d0 > 0 && d1 > 0) {
      double g = exponent(d0, d1, r0, r1);
      return d0 * std::pow(r0, -g) * power_integral(g + N_ - 1, 0, a, b);
    }
    double s = (d1 - d0) / (r1 - r0);
    return (d0 - s * r0) * power_integral(N_ - 1, 0, a, b) + s * power_integral(N_, 0, a, b);
  }
  // power-law extension D_i (r / r_i)^g integrated over (a, b)
  double piece(size_t i, double a, double b, double g) const {
    if (D_[i] == 0) return 0.0;
    return D_[i] * std::pow(r_[i], -g) * power_integral(g + N_ - 1, 0, a, b);
  }
  void build() {
    if (r_.size() < 2 || r_.size() != D_.size()) throw Error("radial profile: need at least two samples");
    size_t n = r_.size();
    lo_exp_ = exponent(D_[0], D_[1], r_[0], r_[1]);
    if (std::abs(lo_exp_ - k_ * p_) < 0.05) lo_exp_ = k_ * p_;  // smooth f: D ~ r^{kp}
    hi_exp_ = exponent(D_[n - 2], D_[n - 1], r_[n - 2], r_[n - 1]);
    if (std::abs(hi_exp_) < 0.05) hi_exp_ = 0.0;
    C_.assign(n, 0.0);
    C_[0] = piece(0, 0.0, r_[0], lo_exp_);
    for (size_t i = 0; i + 1 < n; ++i) C_[i + 1] = C_[i] + segment(i, r_[i], r_[i + 1]);
  }

  int N_ = 1, k_ = 1;
  double p_ = 2;
  bool local_ = false;
  std::vector<double> r_, D_, C_;
  double lo_exp_ = 0, hi_exp_ = 0;
};

inline double averaged_modulus(const GridFunction& f, int k, double t, const NormSpec& spec, double p,
                               NetOptions o = {}) {
  if (!(t > 0)) throw Error("averaged_modulus: t must be positive");
  return RadialProfile(f, k, spec, p, o).averaged(t);
}

// K-functional pairs with a computable K.
struct KPair {
  enum class Tag { LpLinf, XWk, BB };
  Tag tag = Tag::LpLinf;
  double p = 1;
  NormSpec spec = NormSpec::Lp(2);
  int k = 1;

  static KPair LpLinf(double p) { return {Tag::LpLinf, p, NormSpec::Lp(p), 1}; }
  static KPair XWk(NormSpec spec, int k, double p) { return {Tag::XWk, p, spec, k}; }
  static KPair BB(NormSpec spec) { return {Tag::BB, spec.p, spec, 1}; }
};

inline double k_functional(const KPair& pair, double t, const GridFunction& f) {
  if (!(t > 0)) throw Error("k_functional: t must be positive");
  switch (pair.tag) {
    case KPair::Tag::LpLinf:
      return std::pow(rearrange(f).integral_pow(std::pow(t, pair.p), pair.p), 1 / pair.p);
    case KPair::Tag::XWk:
      return averaged_modulus(f, pair.k, t, pair.spec, pair.p);
    case KPair::Tag::BB:
      return std::min(1.0, t) * norm(f, pair.spec);
  }
  throw Error("k_functional: unsupported pair");
}

// Sampled K(t) for one pair on a t-grid (shares one rearrangement / radial profile).
inline std::vector<double> k_functional(const KPair& pair, const std::vector<double>& ts, const GridFunction& f) {
  std::vector<double> out;
  if (pair.tag == KPair::Tag::LpLinf) {
    auto prof = rearrange(f);
    for (double t : ts) out.push_back(std::pow(prof.integral_pow(std::pow(t, pair.p), pair.p), 1 / pair.p));
  } else if (pair.tag == KPair::Tag::XWk) {
    RadialProfile rp(f, pair.k, pair.spec, pair.p);
    for (double t : ts) out.push_back(rp.averaged(t));
  } else {
    double n = norm(f, pair.spec);
    for (double t : ts) out.push_back(std::min(1.0, t) * n);
  }
  return out;
}

// int_{R^N} ||Delta^k_h f||^p w(|h|) dh for a piecewise-power radial weight.
inline double weighted_double_seminorm(const RadialProfile& rp, const PiecewisePower& w) {
  const auto& r = rp.r();
  std::vector<double> phi(r.size());
  double kp = rp.order() * rp.p();
  for (size_t i = 0; i < r.size(); ++i) phi[i] = rp.D()[i] / std::pow(r[i], kp);
  ProductOptions o;
  if (rp.local()) o.hi = Tail::Zero;
  return product_integral(r, phi, w.times_power(kp + rp.dim() - 1), o);
}

inline double weighted_double_seminorm(const GridFunction& f, int k, const DerivedWeight& w, const NormSpec& spec,
                                       double p, NetOptions o = {}) {
  return weighted_double_seminorm(RadialProfile(f, k, spec, p, o), w.pw());
}

// ||f||_{W^{s,p}}^p = int int |f(x) - f(y)|^p / |x - y|^{sp + N}
inline double gagliardo_energy(const RadialProfile& rp, double s) {
  if (!(s > 0)) throw Error("gagliardo: s must be positive");
  if (s >= 1) throw Error("gagliardo: seminorm diverges for s >= 1");
  if (rp.order() != 1) throw Error("gagliardo: needs first-order differences");
  const auto& r = rp.r();
  const double p = rp.p();
  std::vector<double> phi(r.size());
  for (size_t i = 0; i < r.size(); ++i) phi[i] = rp.D()[i] / std::pow(r[i], p);
  PiecewisePower w({{1.0, p - s * p - 1, 0, 0.0, inf}});
  ProductOptions o;
  if (rp.local()) o.hi = Tail::Zero;
  return product_integral(r, phi, w, o);
}

inline double gagliardo_seminorm(const GridFunction& f, double s, double p, NetOptions o = {}) {
  if (!(s > 0)) throw Error("gagliardo: s must be positive");
  if (s >= 1) throw Error("gagliardo: seminorm diverges for s >= 1");
  if (!(p >= 1)) throw Error("gagliardo: p must be >= 1");
  return std::pow(gagliardo_energy(RadialProfile(f, 1, NormSpec::Lp(p), p, o), s), 1 / p);
}

}  // namespace kfun
