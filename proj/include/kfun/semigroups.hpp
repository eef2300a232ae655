#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "core.hpp"
#include "funcgrid.hpp"
#include "norms.hpp"

namespace kfun {

enum class SgKind { Translation, Heat, OU };

struct Semigroup {
  SgKind kind = SgKind::Translation;
  int nz = 256;    // nodes of the Gaussian z-grid (heat and OU with an analytic handle)
  double M = 1.0;  // sup_t ||T_t||

  static Semigroup parse(const std::string& s) {
    if (s == "translation") return {SgKind::Translation};
    if (s == "heat") return {SgKind::Heat};
    if (s == "ou") return {SgKind::OU};
    throw Error("unknown semigroup '" + s + "'");
  }
  std::string name() const {
    return kind == SgKind::Translation ? "translation" : kind == SgKind::Heat ? "heat" : "ou";
  }
};

namespace detail {

// Midpoint nodes on [-R, R] with standard normal weights renormalized to sum 1.
struct GaussGrid {
  std::vector<double> z, w;
};

inline GaussGrid gauss_grid(int n, double R) {
  GaussGrid g;
  double dz = 2 * R / n, s = 0;
  for (int i = 0; i < n; ++i) {
    double z = -R + (i + 0.5) * dz;
    g.z.push_back(z);
    g.w.push_back(std::exp(-0.5 * z * z));
    s += g.w.back();
  }
  for (double& w : g.w) w /= s;
  return g;
}

inline AnalyticPtr wrap(const GridFunction& f, std::string id, std::function<double(double, double)> fn) {
  auto a = std::make_shared<Analytic>();
  a->id = std::move(id);
  a->dim = f.dim();
  a->f = std::move(fn);
  a->norm_pp = a->d1_pp = a->d2_pp = nan_of;
  if (f.analytic()) {
    a->domain = f.analytic()->domain;
    a->whole = f.analytic()->whole;
  }
  return a;
}

inline std::string fmt_t(double t) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", t);
  return b;
}

// Evaluation that clamps to the box for sampled data (OU moves points outward).
inline double eval_clamped(const GridFunction& f, double x, double y = 0) {
  if (f.analytic()) return f.analytic()->f(x, y);
  const Box& b = f.box();
  x = std::clamp(x, b.center(0, 0), b.center(0, b.cells[0] - 1));
  if (b.dim == 2) y = std::clamp(y, b.center(1, 0), b.center(1, b.cells[1] - 1));
  return f.interpolate(x, y);
}

}  // namespace detail

inline GridFunction apply(const Semigroup& sg, double t, const GridFunction& f) {
  if (!(t > 0)) throw Error("semigroup: t must be positive");
  const Box& b = f.box();
  switch (sg.kind) {
    case SgKind::Translation: {
      if (f.dim() != 1) throw Error("translation semigroup is one-dimensional");
      if (f.analytic()) {
        auto src = f.analytic();
        auto a = detail::wrap(f, "T" + detail::fmt_t(t) + "(" + src->id + ")",
                              [src, t](double x, double y) { return src->f(x + t, y); });
        return sample(a, b, f.measure(), f.whole());
      }
      std::vector<double> v(f.size());
      for (size_t i = 0; i < f.size(); ++i) v[i] = f.interpolate(f.x(i) + t);
      return f.with_values(std::move(v));
    }
    case SgKind::Heat: {
      const double sigma = std::sqrt(2 * t);
      if (f.analytic()) {
        auto src = f.analytic();
        auto g = std::make_shared<detail::GaussGrid>(detail::gauss_grid(f.dim() == 1 ? sg.nz : std::min(sg.nz, 64), 12.0));
        int dim = f.dim();
        auto a = detail::wrap(f, "H" + detail::fmt_t(t) + "(" + src->id + ")", [src, g, sigma, dim](double x, double y) {
          double s = 0;
          if (dim == 1) {
            for (size_t i = 0; i < g->z.size(); ++i) s += g->w[i] * src->f(x + sigma * g->z[i], y);
          } else {
            for (size_t i = 0; i < g->z.size(); ++i)
              for (size_t j = 0; j < g->z.size(); ++j)
                s += g->w[i] * g->w[j] * src->f(x + sigma * g->z[i], y + sigma * g->z[j]);
          }
          return s;
        });
        return sample(a, b, f.measure(), f.whole());
      }
      // discrete separable Gaussian convolution, kernel cut at 12 sigma and renormalized
      std::vector<double> v = f.values();
      for (int axis = 0; axis < f.dim(); ++axis) {
        double dx = b.dx(axis);
        int half = int(std::floor(12 * sigma / dx));
        std::vector<double> ker(2 * half + 1);
        double s = 0;
        for (int m = -half; m <= half; ++m) s += ker[m + half] = std::exp(-0.5 * std::pow(m * dx / sigma, 2));
        for (double& k : ker) k /= s;
        int nx = b.cells[0], ny = f.dim() == 2 ? b.cells[1] : 1;
        std::vector<double> out(v.size(), 0.0);
        for (int j = 0; j < ny; ++j)
          for (int i = 0; i < nx; ++i) {
            double acc = 0;
            for (int m = -half; m <= half; ++m) {
              int ii = axis == 0 ? i + m : i, jj = axis == 1 ? j + m : j;
              if (ii < 0 || ii >= nx || jj < 0 || jj >= ny) continue;
              acc += ker[m + half] * v[size_t(jj) * nx + ii];
            }
            out[size_t(j) * nx + i] = acc;
          }
        v.swap(out);
      }
      return f.with_values(std::move(v));
    }
    case SgKind::OU: {
      if (f.dim() != 1) throw Error("Ornstein-Uhlenbeck semigroup is implemented for N = 1");
      const double a = std::exp(-t), s = std::sqrt(-std::expm1(-2 * t));
      auto g = std::make_shared<detail::GaussGrid>(detail::gauss_grid(sg.nz, 10.0));
      if (f.analytic()) {
        auto src = f.analytic();
        auto h = detail::wrap(f, "G" + detail::fmt_t(t) + "(" + src->id + ")", [src, g, a, s](double x, double y) {
          double acc = 0;
          for (size_t i = 0; i < g->z.size(); ++i) acc += g->w[i] * src->f(a * x + s * g->z[i], y);
          return acc;
        });
        return sample(h, b, f.measure(), f.whole());
      }
      std::vector<double> v(f.size());
      for (size_t i = 0; i < f.size(); ++i) {
        double acc = 0;
        for (size_t j = 0; j < g->z.size(); ++j) acc += g->w[j] * detail::eval_clamped(f, a * f.x(i) + s * g->z[j]);
        v[i] = acc;
      }
      return f.with_values(std::move(v));
    }
  }
  throw Error("semigroup: unknown kind");
}

// Analytic generator: f' (translation), Laplacian (heat), f'' - x f' (OU).
inline GridFunction generator(const Semigroup& sg, const GridFunction& f) {
  auto src = f.analytic();
  int need = sg.kind == SgKind::Translation ? 1 : 2;
  if (!src || !src->deriv || src->max_deriv < need) throw Error("generator: unsupported f (needs analytic derivatives)");
  std::function<double(double, double)> fn;
  switch (sg.kind) {
    case SgKind::Translation:
      if (f.dim() != 1) throw Error("translation semigroup is one-dimensional");
      fn = [src](double x, double y) { return src->deriv(x, y, 1, 0); };
      break;
    case SgKind::Heat:
      if (f.dim() == 1) fn = [src](double x, double y) { return src->deriv(x, y, 2, 0); };
      else fn = [src](double x, double y) { return src->deriv(x, y, 2, 0) + src->deriv(x, y, 0, 2); };
      break;
    case SgKind::OU:
      if (f.dim() != 1) throw Error("Ornstein-Uhlenbeck semigroup is implemented for N = 1");
      fn = [src](double x, double y) { return src->deriv(x, y, 2, 0) - x * src->deriv(x, y, 1, 0); };
      break;
  }
  return sample(detail::wrap(f, "A(" + src->id + ")", fn), f.box(), f.measure(), f.whole());
}

// (T_t f - f) / t, the difference quotient whose limit is the generator.
inline GridFunction generator_quotient(const Semigroup& sg, const GridFunction& f, double t) {
  auto g = apply(sg, t, f);
  std::vector<double> v(f.size());
  for (size_t i = 0; i < f.size(); ++i) v[i] = (g[i] - f[i]) / t;
  return f.with_values(std::move(v));
}

// Coefficients (-1)^j binom(alpha, j), j = 0..J, of [I - T_t]^alpha.
struct FracCoeffs {
  double alpha = 1;
  long J = 1;
  std::vector<double> c;
  double tail_bound = 0;  // sum_{j > J} |binom(alpha, j)| * M
};

inline bool is_integer(double a) { return std::abs(a - std::round(a)) < 1e-12; }

inline constexpr long frac_cap = 1000000;

// J is the first index with |binom(alpha - 1, J)| * M <= tol (that telescoping sum is the exact tail
// of the absolute series once J > alpha); `min_J` forces a longer series.
inline FracCoeffs frac_coefficients(double alpha, double tol, double M = 1.0, long min_J = 0) {
  if (!(alpha > 0)) throw Error("fractional difference: alpha must be positive");
  if (!(tol > 0)) throw Error("fractional difference: tol must be positive");
  FracCoeffs fc;
  fc.alpha = alpha;
  if (is_integer(alpha)) {
    fc.J = std::lround(alpha);
    for (long j = 0; j <= fc.J; ++j) fc.c.push_back((j % 2 ? -1.0 : 1.0) * binom(std::round(alpha), j));
    return fc;
  }
  double b = 1.0;  // binom(alpha - 1, J)
  long J = 0;
  while (J < long(std::ceil(alpha)) || std::abs(b) * M > tol || J < min_J) {
    ++J;
    if (J > frac_cap) throw Error("fractional difference: truncation J exceeds cap 1e6");
    b *= (alpha - 1 - double(J - 1)) / double(J);
  }
  fc.J = J;
  fc.tail_bound = std::abs(b) * M;
  fc.c.resize(J + 1);
  double c = 1.0;
  for (long j = 0; j <= J; ++j) {
    fc.c[j] = (j % 2 ? -1.0 : 1.0) * c;
    c *= (alpha - double(j)) / double(j + 1);
  }
  return fc;
}

struct CAlpha {
  double value = -1;     // extrapolated sum_{j >= 1} (-1)^j binom(alpha, j)
  double raw = -1;       // plain partial sum at the largest J
  long J = 0;            // largest partial-sum index used
  double raw_tail = 0;   // |binom(alpha - 1, J)|: exact size of the raw truncation error
  double tail_bound = 0; // declared bound on |value - limit| after acceleration
};

// Partial sums at J = 2^10..2^19 accelerated by Richardson in J^{-alpha}, J^{-alpha-1}, ...
inline CAlpha c_alpha(double alpha) {
  if (!(alpha > 0)) throw Error("c_alpha: alpha must be positive");
  CAlpha r;
  if (is_integer(alpha)) {
    long k = std::lround(alpha);
    double s = 0;
    for (long j = 1; j <= k; ++j) s += (j % 2 ? -1.0 : 1.0) * binom(double(k), j);
    r.value = r.raw = s;
    r.J = k;
    return r;
  }
  const int m0 = 10, m1 = 19;
  std::vector<double> S;
  double c = 1.0, s = 0;
  long j = 0, next = 1L << m0;
  for (int m = m0; m <= m1; ++m) {
    while (j < next) {
      c *= (alpha - double(j)) / double(j + 1);
      ++j;
      s += (j % 2 ? -1.0 : 1.0) * c;
    }
    S.push_back(s);
    next <<= 1;
  }
  r.raw = S.back();
  r.J = j;
  r.raw_tail = std::abs(binom(alpha - 1, j));
  std::vector<double> T = S;
  for (int lev = 0; lev < 4 && T.size() > 2; ++lev) {
    double q = std::pow(2.0, alpha + lev);
    std::vector<double> U;
    for (size_t i = 0; i + 1 < T.size(); ++i) U.push_back((q * T[i + 1] - T[i]) / (q - 1));
    T = U;
  }
  r.value = T.back();
  r.tail_bound = std::max(std::abs(T.back() - T[T.size() - 2]), 1e-15);
  return r;
}

// [I - T_t]^alpha f on the box of f.
inline GridFunction frac_difference(const Semigroup& sg, double alpha, double t, const GridFunction& f,
                                    double tol = 1e-3) {
  if (!(t > 0)) throw Error("fractional difference: t must be positive");
  auto fc = frac_coefficients(alpha, tol, sg.M);
  const Box& b = f.box();
  std::vector<double> out(f.size(), 0.0);
  if (sg.kind == SgKind::Translation) {
    if (f.dim() != 1) throw Error("translation semigroup is one-dimensional");
    const bool bounded = f.whole() || !f.analytic();
    for (size_t i = 0; i < f.size(); ++i) {
      double x = f.x(i), acc = 0;
      long jmax = fc.J;
      if (bounded) jmax = std::min<long>(jmax, long(std::floor((b.hi[0] - x) / t)) + 1);
      for (long j = 0; j <= jmax; ++j) acc += fc.c[j] * f.eval(x + j * t);
      out[i] = acc;
    }
    return f.with_values(std::move(out));
  }
  // heat / OU: sum of semigroup applications; OU tail replaced by the mean once e^{-jt} is negligible
  GridFunction Pf = f;
  bool have_P = false;
  for (long j = 0; j <= fc.J; ++j) {
    if (sg.kind == SgKind::OU && j * t > 40) {
      if (!have_P) {
        auto g = detail::gauss_grid(sg.nz, 10.0);
        double m = 0;
        for (size_t i = 0; i < g.z.size(); ++i) m += g.w[i] * detail::eval_clamped(f, g.z[i]);
        Pf = f.with_values(std::vector<double>(f.size(), m));
        have_P = true;
      }
      double rest = 0;
      for (long l = j; l <= fc.J; ++l) rest += fc.c[l];
      for (size_t i = 0; i < f.size(); ++i) out[i] += rest * Pf[i];
      break;
    }
    GridFunction g = j == 0 ? f : apply(sg, j * t, f);
    for (size_t i = 0; i < f.size(); ++i) out[i] += fc.c[j] * g[i];
  }
  return f.with_values(std::move(out));
}

// ||[I - T_t]^alpha f||_p^p over the whole line for the translation semigroup (f extended by its
// analytic handle or by zero outside its box). Each residue class x0 + t Z is a discrete
// correlation with the coefficient sequence, done directly or by FFT.
// `reach` lengthens the series so that output points up to `reach` left of the box are exact.
inline double translation_frac_energy(double alpha, double t, const GridFunction& f, double p, double tol = 1e-2,
                                      double reach = 0) {
  if (f.dim() != 1) throw Error("translation semigroup is one-dimensional");
  if (!(t > 0)) throw Error("fractional difference: t must be positive");
  const Box& b = f.box();
  const double lo = b.lo[0], hi = b.hi[0], W = hi - lo, dx = b.dx(0);
  long min_J = reach > 0 ? long(std::ceil((W + reach) / t)) : 0;
  auto fc = frac_coefficients(alpha, tol, 1.0, std::min(min_J, frac_cap));
  const long J = fc.J;
  if (t >= W) {
    double fp = 0, cs = 0;
    for (size_t i = 0; i < f.size(); ++i) fp += f.mass(i) * std::pow(std::abs(f[i]), p);
    for (long j = 0; j <= J; ++j) cs += std::pow(std::abs(fc.c[j]), p);
    return cs * fp;
  }
  const long m = std::max(1L, long(std::ceil(t / dx - 1e-9)));
  const double delta = t / m;
  const long K = long(std::ceil(W / t));
  const long L = K + J;
  const bool use_fft = double(K) * double(J + 1) > 40.0 * double(L) * std::log2(double(L) + 1);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> chat;
  size_t nfft = 1;
  if (use_fft) {
    while (nfft < size_t(L)) nfft <<= 1;
    std::vector<double> rev(nfft, 0.0);
    for (long j = 0; j <= J; ++j) rev[J - j] = fc.c[j];
    fft.fwd(chat, rev);
  }
  double total = 0;
  std::vector<double> F(K), A;
  for (long r = 0; r < m; ++r) {
    const double x0 = lo + (r + 0.5) * delta;
    long k = 0;
    for (; k < K && x0 + k * t < hi; ++k) F[k] = f.eval(x0 + k * t);
    const long Kr = k;
    double acc = 0;
    if (use_fft) {
      std::vector<double> Fp(nfft, 0.0);
      for (long n = 0; n < Kr; ++n) Fp[n] = F[n];
      std::vector<std::complex<double>> fh;
      fft.fwd(fh, Fp);
      for (size_t i = 0; i < nfft; ++i) fh[i] *= chat[i];
      fft.inv(A, fh);
      for (long i = 0; i < Kr + J; ++i) acc += std::pow(std::abs(A[i]), p);
    } else {
      A.assign(Kr + J, 0.0);
      for (long n = 0; n < Kr; ++n) {
        if (F[n] == 0) continue;
        // output index i' = n - j + J for j = 0..J
        double* out = A.data() + n;
        for (long j = 0; j <= J; ++j) out[J - j] += fc.c[j] * F[n];
      }
      for (double v : A) acc += std::pow(std::abs(v), p);
    }
    total += acc * delta;
  }
  return total;
}

// Norm of [I - T_t]^alpha f: whole-line lattice computation for translation, grid norm otherwise.
inline double frac_difference_norm(const Semigroup& sg, double alpha, double t, const GridFunction& f, double p,
                                   double tol = 1e-2) {
  if (sg.kind == SgKind::Translation && f.whole())
    return std::pow(translation_frac_energy(alpha, t, f, p, tol, 4 * f.box().width(0)), 1 / p);
  auto g = frac_difference(sg, alpha, t, f, tol);
  return norm(g.samples(), NormSpec::Lp(p));
}

// Pf = lim_{t -> inf} T_t f.
inline GridFunction projection_P(const Semigroup& sg, const GridFunction& f) {
  switch (sg.kind) {
    case SgKind::OU: {
      if (f.dim() != 1) throw Error("Ornstein-Uhlenbeck semigroup is implemented for N = 1");
      auto g = detail::gauss_grid(sg.nz, 10.0);
      double m = 0;
      for (size_t i = 0; i < g.z.size(); ++i) m += g.w[i] * detail::eval_clamped(f, g.z[i]);
      return f.with_values(std::vector<double>(f.size(), m));
    }
    case SgKind::Heat: {
      if (!f.whole()) throw Error("limit does not exist: heat flow needs a whole-space function");
      double mx = 0, edge = 0;
      const Box& b = f.box();
      for (size_t i = 0; i < f.size(); ++i) {
        mx = std::max(mx, std::abs(f[i]));
        int ix = int(i % b.cells[0]);
        if (ix == 0 || ix == b.cells[0] - 1) edge = std::max(edge, std::abs(f[i]));
      }
      if (edge > 1e-8 * mx) throw Error("limit does not exist: f does not decay");
      return f.with_values(std::vector<double>(f.size(), 0.0));
    }
    case SgKind::Translation:
      // ||f(. + t)||_p = ||f||_p for all t, so T_t f has no norm limit (only a weak limit 0).
      throw Error("limit does not exist: translates keep their norm");
  }
  throw Error("projection: unknown semigroup");
}

// Fourier-symbol oracle for translation: ||(-A)^alpha f||_2 = ((1/2pi) int |xi|^{2 alpha} |f^(xi)|^2)^{1/2}.
inline double translation_symbol_norm(const GridFunction& f, double alpha, int pad = 32) {
  if (f.dim() != 1) throw Error("symbol oracle is one-dimensional");
  const size_t n = f.size() * pad;
  std::vector<double> v(n, 0.0);
  for (size_t i = 0; i < f.size(); ++i) v[i] = f[i];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> F;
  fft.fwd(F, v);
  const double dx = f.box().dx(0), len = n * dx;
  double s = 0;
  for (size_t k = 0; k < n; ++k) {
    long kk = k <= n / 2 ? long(k) : long(k) - long(n);
    double xi = 2 * pi * kk / len;
    double a = std::abs(F[k]) * dx;
    s += std::pow(std::abs(xi), 2 * alpha) * a * a;
  }
  return std::sqrt(s / len);
}

// (-A)^alpha f = lim_{t -> 0} [I - T_t]^alpha f / t^alpha from t = 2^-4..2^-10 with two Richardson levels.
inline GridFunction frac_power(const Semigroup& sg, double alpha, const GridFunction& f, double tol = 1e-3) {
  std::vector<std::vector<double>> q;
  std::vector<double> norms;
  auto l2 = [&](const std::vector<double>& v) {
    double s = 0;
    for (size_t i = 0; i < v.size(); ++i) s += f.mass(i) * v[i] * v[i];
    return std::sqrt(s);
  };
  for (int m = 4; m <= 10; ++m) {
    double t = std::ldexp(1.0, -m);
    auto d = frac_difference(sg, alpha, t, f, tol);
    std::vector<double> v(d.values());
    for (double& x : v) x /= std::pow(t, alpha);
    norms.push_back(l2(v));
    q.push_back(std::move(v));
  }
  size_t n = q.size();
  double mx = *std::max_element(norms.end() - 3, norms.end()), mn = *std::min_element(norms.end() - 3, norms.end());
  if (mx > 0 && (mx - mn) / mx > 0.1) throw Error("frac_power: non-convergent quotient (relative spread > 10%)");
  auto diffnorm = [&](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return l2(d);
  };
  // first level: fitted rate; second level: rate + 1
  double d1 = diffnorm(q[n - 2], q[n - 3]), d2 = diffnorm(q[n - 1], q[n - 2]);
  if (!(d1 > 0 && d2 > 0 && d1 > d2)) return f.with_values(q.back());
  double r = std::log2(d1 / d2);
  for (int lev = 0; lev < 2 && q.size() > 1; ++lev) {
    double fac = std::pow(2.0, r + lev) - 1;
    std::vector<std::vector<double>> u;
    for (size_t k = 0; k + 1 < q.size(); ++k) {
      std::vector<double> v(q[k].size());
      for (size_t i = 0; i < v.size(); ++i) v[i] = q[k + 1][i] + (q[k + 1][i] - q[k][i]) / fac;
      u.push_back(std::move(v));
    }
    q.swap(u);
  }
  return f.with_values(q.back());
}

}  // namespace kfun
