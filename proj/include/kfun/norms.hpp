#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "funcgrid.hpp"

namespace kfun {

struct NormSpec {
  enum class Tag { Lp, Lorentz, Zygmund, Sup };
  Tag tag = Tag::Lp;
  double p = 2, q = 2;

  static NormSpec Lp(double p) { return check({Tag::Lp, p, p}); }
  static NormSpec Lorentz(double p, double q) { return check({Tag::Lorentz, p, q}); }
  static NormSpec Zygmund(double p) { return check({Tag::Zygmund, p, p}); }
  static NormSpec Sup() { return {Tag::Sup, inf, inf}; }

  static NormSpec check(NormSpec s) {
    if (!(s.p > 0) || !std::isfinite(s.p)) throw Error("norm spec: p must be positive and finite");
    if (s.tag == Tag::Lorentz && !(s.q >= 1 && std::isfinite(s.q))) throw Error("norm spec: Lorentz q must be in [1, inf)");
    return s;
  }

  std::string name() const {
    char buf[64];
    switch (tag) {
      case Tag::Lp: std::snprintf(buf, sizeof buf, "L%g", p); break;
      case Tag::Lorentz: std::snprintf(buf, sizeof buf, "L(%g,%g)", p, q); break;
      case Tag::Zygmund: std::snprintf(buf, sizeof buf, "Zygmund(%g)", p); break;
      case Tag::Sup: std::snprintf(buf, sizeof buf, "Linf"); break;
    }
    return buf;
  }
};

// Right-continuous step profile: f*(t) = v[i] on [t[i], t[i+1]); t[0] = 0, t.size() = v.size() + 1.
struct Profile {
  std::vector<double> t{0.0};
  std::vector<double> v;

  double total_mass() const { return t.back(); }
  double operator()(double s) const {
    if (s < 0 || v.empty()) return v.empty() ? 0.0 : v.front();
    auto it = std::upper_bound(t.begin(), t.end(), s);
    size_t i = size_t(it - t.begin());
    return i == 0 ? v.front() : (i - 1 < v.size() ? v[i - 1] : 0.0);
  }
  // integral of f*(u)^p over (0, s)
  double integral_pow(double s, double p) const {
    double acc = 0;
    for (size_t i = 0; i < v.size() && t[i] < s; ++i) acc += std::pow(v[i], p) * (std::min(s, t[i + 1]) - t[i]);
    return acc;
  }
  void write_csv(std::ostream& os) const {
    os.precision(12);
    os << "t,value\n";
    for (size_t i = 0; i < v.size(); ++i) os << t[i] << ',' << v[i] << '\n';
  }
};

inline Profile rearrange(const Samples& s) {
  std::vector<size_t> idx(s.values.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (double v : s.values)
    if (!std::isfinite(v)) throw Error("non-finite sample");
  std::stable_sort(idx.begin(), idx.end(),
                   [&](size_t a, size_t b) { return std::abs(s.values[a]) > std::abs(s.values[b]); });
  Profile p;
  for (size_t i : idx) {
    double m = s.masses[i], v = std::abs(s.values[i]);
    if (m <= 0) continue;
    if (!p.v.empty() && p.v.back() == v) {
      p.t.back() += m;
    } else {
      p.v.push_back(v);
      p.t.push_back(p.t.back() + m);
    }
  }
  return p;
}

inline Profile rearrange(const GridFunction& f) { return rearrange(f.samples()); }

inline double distribution(const Samples& s, double lambda) {
  if (lambda < 0) throw Error("distribution: lambda must be non-negative");
  double m = 0;
  for (size_t i = 0; i < s.values.size(); ++i)
    if (std::abs(s.values[i]) > lambda) m += s.masses[i];
  return m;
}

inline double distribution(const GridFunction& f, double lambda) { return distribution(f.samples(), lambda); }

// integral of (1 - log t)^p over (a, b), 0 <= a < b <= 1
inline double zygmund_weight_mass(double a, double b, double p) {
  auto G = [p](double t) {
    if (t <= 0) return 0.0;
    return std::exp(1.0) * boost::math::tgamma(p + 1, 1 - std::log(t));
  };
  return G(b) - G(a);
}

inline double norm(const Profile& prof, const NormSpec& spec) {
  using T = NormSpec::Tag;
  const auto& t = prof.t;
  const auto& v = prof.v;
  double acc = 0;
  switch (spec.tag) {
    case T::Sup:
      return v.empty() ? 0.0 : v.front();
    case T::Lp:
      for (size_t i = 0; i < v.size(); ++i) acc += std::pow(v[i], spec.p) * (t[i + 1] - t[i]);
      return std::pow(acc, 1 / spec.p);
    case T::Lorentz: {
      double r = spec.q / spec.p;
      for (size_t i = 0; i < v.size(); ++i)
        if (v[i] > 0) acc += std::pow(v[i], spec.q) * (std::pow(t[i + 1], r) - std::pow(t[i], r)) / r;
      return std::pow(acc, 1 / spec.q);
    }
    case T::Zygmund:
      for (size_t i = 0; i < v.size() && t[i] < 1; ++i)
        if (v[i] > 0) acc += std::pow(v[i], spec.p) * zygmund_weight_mass(t[i], std::min(1.0, t[i + 1]), spec.p);
      return std::pow(acc, 1 / spec.p);
  }
  return 0;
}

inline double norm(const Samples& s, const NormSpec& spec) { return norm(rearrange(s), spec); }

// On whole-space Lebesgue boxes the truncation must not cut off mass.
inline double norm(const GridFunction& f, const NormSpec& spec) {
  if (f.whole() && f.measure() == Measure::Lebesgue && spec.tag != NormSpec::Tag::Sup) {
    const Box& b = f.box();
    double mx = 0, edge = 0;
    for (size_t i = 0; i < f.size(); ++i) {
      mx = std::max(mx, std::abs(f[i]));
      int ix = int(i % b.cells[0]), iy = int(i / b.cells[0]);
      bool border = ix == 0 || ix == b.cells[0] - 1 || (b.dim == 2 && (iy == 0 || iy == b.cells[1] - 1));
      if (border) edge = std::max(edge, std::abs(f[i]));
    }
    if (edge > 1e-8 * mx && edge > 0) throw Error("norm diverges: f does not decay at the edge of the truncated space");
  }
  return norm(f.samples(), spec);
}

// ----- sharp maximal function and BMO -----

// Index ranges [i0, i1) x [j0, j1) of grid-aligned cubes.
struct Cube {
  int i0, i1, j0 = 0, j1 = 1;
};

enum class CubeFamily { Dyadic, All };

namespace detail {

inline double mean_oscillation(const GridFunction& f, const Cube& c, double* mean_out = nullptr) {
  const int nx = f.box().cells[0];
  double m = 0, w = 0;
  for (int j = c.j0; j < c.j1; ++j)
    for (int i = c.i0; i < c.i1; ++i) {
      size_t k = size_t(j) * nx + i;
      double mk = f.mass(k);
      m += mk * f[k];
      w += mk;
    }
  m /= w;
  double o = 0;
  for (int j = c.j0; j < c.j1; ++j)
    for (int i = c.i0; i < c.i1; ++i) {
      size_t k = size_t(j) * nx + i;
      o += f.mass(k) * std::abs(f[k] - m);
    }
  if (mean_out) *mean_out = m;
  return o / w;
}

inline void dyadic_cubes(const Cube& c, int min_width, std::vector<Cube>& out, bool two_d) {
  out.push_back(c);
  int w = c.i1 - c.i0;
  if (w / 2 < min_width) return;
  int mi = c.i0 + w / 2;
  if (!two_d) {
    dyadic_cubes({c.i0, mi, 0, 1}, min_width, out, false);
    dyadic_cubes({mi, c.i1, 0, 1}, min_width, out, false);
    return;
  }
  int mj = c.j0 + (c.j1 - c.j0) / 2;
  for (auto [a0, a1] : {std::pair{c.i0, mi}, std::pair{mi, c.i1}})
    for (auto [b0, b1] : {std::pair{c.j0, mj}, std::pair{mj, c.j1}}) dyadic_cubes({a0, a1, b0, b1}, min_width, out, true);
}

}  // namespace detail

// Cube family over the whole box of f: dyadic subcubes down to 4 cells, or every aligned cube (>= 2 cells).
inline std::vector<Cube> cube_family(const GridFunction& f, CubeFamily fam) {
  const Box& b = f.box();
  std::vector<Cube> out;
  int nx = b.cells[0], ny = b.dim == 2 ? b.cells[1] : 1;
  if (fam == CubeFamily::Dyadic) {
    if (b.dim == 2 && nx != ny) throw Error("dyadic family needs a square grid");
    detail::dyadic_cubes({0, nx, 0, ny}, 4, out, b.dim == 2);
    return out;
  }
  if (b.dim == 1) {
    for (int w = 2; w <= nx; ++w)
      for (int i = 0; i + w <= nx; ++i) out.push_back({i, i + w, 0, 1});
  } else {
    for (int w = 2; w <= std::min(nx, ny); ++w)
      for (int j = 0; j + w <= ny; ++j)
        for (int i = 0; i + w <= nx; ++i) out.push_back({i, i + w, j, j + w});
  }
  return out;
}

inline GridFunction sharp_maximal(const GridFunction& f, const std::vector<Cube>& cubes) {
  const Box& b = f.box();
  const int nx = b.cells[0], ny = b.dim == 2 ? b.cells[1] : 1;
  std::vector<double> out(f.size(), -1.0);
  for (const Cube& c : cubes) {
    if (c.i0 < 0 || c.i1 > nx || c.j0 < 0 || c.j1 > ny || c.i1 <= c.i0 || c.j1 <= c.j0)
      throw Error("sharp_maximal: cube outside the box");
    double o = detail::mean_oscillation(f, c);
    for (int j = c.j0; j < c.j1; ++j)
      for (int i = c.i0; i < c.i1; ++i) {
        double& r = out[size_t(j) * nx + i];
        r = std::max(r, o);
      }
  }
  for (double v : out)
    if (v < 0) throw Error("sharp_maximal: cube family does not cover every point");
  return f.with_values(std::move(out));
}

inline GridFunction sharp_maximal(const GridFunction& f, CubeFamily fam = CubeFamily::Dyadic) {
  return sharp_maximal(f, cube_family(f, fam));
}

inline double bmo_norm(const GridFunction& f, CubeFamily fam = CubeFamily::Dyadic) {
  auto s = sharp_maximal(f, fam);
  return *std::max_element(s.values().begin(), s.values().end());
}

// ----- best polynomial approximation -----

struct BestApprox {
  double value = 0;
  bool fallback = false;  // IRLS stalled; value is min(IRLS, mean-removal bound)
  int iterations = 0;
};

namespace detail {

inline double legendre(int n, double u) {
  double p0 = 1, p1 = u;
  if (n == 0) return p0;
  for (int k = 1; k < n; ++k) {
    double p2 = ((2 * k + 1) * u * p1 - k * p0) / (k + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

}  // namespace detail

// E_k(f, Q)_p = inf over polynomials of degree < k of ||f - P||_{L^p(Q)}.
inline BestApprox best_approx(const GridFunction& f, const Box& Q, int k, double p) {
  if (k < 1) throw Error("best_approx: k must be >= 1");
  if (k > 4) throw Error("best_approx: unsupported degree (k > 4)");
  if (!(p >= 1)) throw Error("best_approx: p must be >= 1");
  GridFunction g = restrict(f, Q);
  const Box& b = g.box();
  const size_t n = g.size();
  std::vector<std::pair<int, int>> deg;
  for (int d = 0; d < k; ++d)
    for (int i = d; i >= 0; --i)
      if (b.dim == 2 || d - i == 0) deg.push_back({i, d - i});
  const int m = int(deg.size());
  Eigen::MatrixXd B(n, m);
  Eigen::VectorXd y(n), mass(n);
  for (size_t r = 0; r < n; ++r) {
    double u = 2 * (g.x(r) - b.lo[0]) / b.width(0) - 1;
    double v = b.dim == 2 ? 2 * (g.y(r) - b.lo[1]) / b.width(1) - 1 : 0.0;
    for (int c = 0; c < m; ++c) B(r, c) = detail::legendre(deg[c].first, u) * detail::legendre(deg[c].second, v);
    y(r) = g[r];
    mass(r) = g.mass(r);
  }
  auto solve = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd s = w.cwiseSqrt();
    Eigen::MatrixXd A = s.asDiagonal() * B;
    Eigen::VectorXd rhs = s.cwiseProduct(y);
    return Eigen::VectorXd(A.colPivHouseholderQr().solve(rhs));
  };
  auto objective = [&](const Eigen::VectorXd& c) {
    Eigen::VectorXd r = y - B * c;
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += mass(i) * std::pow(std::abs(r(i)), p);
    return s;
  };
  Eigen::VectorXd c = solve(mass);
  BestApprox out;
  if (p == 2) {
    out.value = std::sqrt(objective(c));
    return out;
  }
  const int max_iter = 1000;
  double obj = objective(c);
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd r = (y - B * c).cwiseAbs();
    double scale = std::max(r.maxCoeff(), 1e-300);
    if (r.maxCoeff() == 0) {
      converged = true;
      out.iterations = it;
      break;
    }
    Eigen::VectorXd w(n);
    for (size_t i = 0; i < n; ++i) w(i) = mass(i) * std::pow(std::max(r(i), 1e-12 * scale), p - 2);
    c = 0.5 * c + 0.5 * solve(w);
    double next = objective(c);
    out.iterations = it;
    if (std::abs(obj - next) <= 1e-8 * std::max(obj, 1e-300)) {
      obj = std::min(obj, next);
      converged = true;
      break;
    }
    obj = std::min(obj, next);
  }
  out.value = std::pow(obj, 1 / p);
  if (!converged) {
    double mean = 0, w = 0;
    for (size_t i = 0; i < n; ++i) mean += mass(i) * y(i), w += mass(i);
    mean /= w;
    double d = 0;
    for (size_t i = 0; i < n; ++i) d += mass(i) * std::pow(std::abs(y(i) - mean), p);
    out.value = std::min(out.value, std::pow(d, 1 / p));
    out.fallback = true;
  }
  return out;
}

}  // namespace kfun
