#pragma once

#include <array>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "core.hpp"

namespace kfun {

struct Box {
  int dim = 1;
  std::array<double, 2> lo{0, 0}, hi{1, 1};
  std::array<int, 2> cells{2048, 1};

  static Box line(double a, double b, int n) { return Box{1, {a, 0}, {b, 1}, {n, 1}}; }
  static Box square(double a, double b, int n) { return Box{2, {a, a}, {b, b}, {n, n}}; }

  void validate() const {
    if (dim != 1 && dim != 2) throw Error("box: dimension must be 1 or 2");
    for (int a = 0; a < dim; ++a) {
      if (!(lo[a] < hi[a])) throw Error("box: need lo < hi");
      if (cells[a] < 2) throw Error("box: need at least 2 cells per axis");
    }
  }
  double width(int a) const { return hi[a] - lo[a]; }
  double dx(int a) const { return width(a) / cells[a]; }
  double center(int a, int i) const { return lo[a] + (i + 0.5) * dx(a); }
  size_t size() const { return dim == 1 ? size_t(cells[0]) : size_t(cells[0]) * cells[1]; }
  double volume() const { return dim == 1 ? width(0) : width(0) * width(1); }
  double cell_volume() const { return dim == 1 ? dx(0) : dx(0) * dx(1); }
  double diameter() const { return dim == 1 ? width(0) : std::hypot(width(0), width(1)); }
  bool is_cube() const { return dim == 1 || std::abs(width(0) - width(1)) <= 1e-12 * width(0); }
  double edge() const {
    if (!is_cube()) throw Error("box: not a cube");
    return width(0);
  }
  bool contains(const Box& o) const {
    for (int a = 0; a < dim; ++a) {
      double tol = 1e-9 * dx(a);
      if (o.lo[a] < lo[a] - tol || o.hi[a] > hi[a] + tol) return false;
    }
    return o.dim == dim;
  }
};

enum class Measure { Lebesgue, Gaussian };

inline double gauss_density(int dim, double x, double y) {
  double r2 = x * x + (dim == 2 ? y * y : 0.0);
  return std::exp(-0.5 * r2) / std::pow(2 * pi, 0.5 * dim);
}

// Analytic corpus entry. deriv(x, y, i, j) is the mixed partial of order (i, j).
struct Analytic {
  std::string id;
  int dim = 1;
  std::function<double(double, double)> f;
  std::function<double(double, double, int, int)> deriv;  // may be empty
  int max_deriv = 0;
  // p-th powers of ||f||_p, ||f'||_p, ||f''||_p on the default domain (1D Lebesgue); NaN when unknown
  std::function<double(double)> norm_pp, d1_pp, d2_pp;
  std::array<double, 2> support{-inf, inf};  // 1D support, used for large-shift experiments
  std::array<double, 2> domain{-8, 8};       // default 1D box
  bool whole = true;                         // default domain stands for the whole line

  double operator()(double x, double y = 0) const { return f(x, y); }
  bool compact() const { return std::isfinite(support[0]) && std::isfinite(support[1]); }
};

using AnalyticPtr = std::shared_ptr<const Analytic>;

namespace detail {

inline double nan_of(double) { return std::nan(""); }

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

inline double to_double(const std::string& s) {
  size_t pos = 0;
  double v = std::stod(s, &pos);
  if (pos != s.size()) throw Error("bad number '" + s + "'");
  return v;
}

inline double beta(double a, double b) { return boost::math::beta(a, b); }
inline double tgamma(double a) { return boost::math::tgamma(a); }

// mean of |sin|^p over a period
inline double sin_mean(double p) { return tgamma((p + 1) / 2) / (std::sqrt(pi) * tgamma(p / 2 + 1)); }

}  // namespace detail

inline std::vector<std::string> corpus_ids() {
  return {"gauss_bump", "bump",  "tent",  "indicator:0:1", "x",    "x2",  "x3",
          "sin",        "cos",   "exp",   "abs:0.3",       "stair:4", "const:1", "tanh",
          "hermite3",   "x2bump"};
}

// Build a corpus entry from its string id ("gauss_bump", "indicator:0:1", "tent:0.5:0.5", ...).
inline AnalyticPtr make_analytic(const std::string& id, int dim = 1) {
  using detail::nan_of;
  auto parts = detail::split(id, ':');
  if (parts.empty()) throw Error("empty function id");
  const std::string& name = parts[0];
  auto arg = [&](size_t i, double def) {
    return parts.size() > i ? detail::to_double(parts[i]) : def;
  };
  auto a = std::make_shared<Analytic>();
  a->id = id;
  a->dim = dim;
  a->norm_pp = a->d1_pp = a->d2_pp = nan_of;

  if (dim == 2) {
    if (name == "gauss_bump") {
      a->f = [](double x, double y) { return std::exp(-x * x - y * y); };
      a->deriv = [](double x, double y, int i, int j) {
        double g = std::exp(-x * x - y * y);
        auto h = [](double u, int o) { return o == 0 ? 1.0 : o == 1 ? -2 * u : 4 * u * u - 2; };
        return h(x, i) * h(y, j) * g;
      };
      a->max_deriv = 2;
      a->norm_pp = [](double p) { return pi / p; };
    } else if (name == "bump") {
      a->f = [](double x, double y) {
        double s = 1 - x * x - y * y;
        return s > 0 ? s * s * s : 0.0;
      };
      a->deriv = [](double x, double y, int i, int j) {
        double s = 1 - x * x - y * y;
        if (s <= 0) return 0.0;
        if (i + j == 0) return s * s * s;
        if (i + j == 1) return -6 * (i ? x : y) * s * s;
        if (i == 1 && j == 1) return 24 * x * y * s;
        double u = i == 2 ? x : y;
        return -6 * s * s + 24 * u * u * s;
      };
      a->max_deriv = 2;
      a->norm_pp = [](double p) { return pi / (3 * p + 1); };
      a->support = {-1, 1};
    } else if (name == "x") {
      a->f = [](double x, double) { return x; };
      a->deriv = [](double x, double, int i, int j) { return j ? 0.0 : i == 0 ? x : i == 1 ? 1.0 : 0.0; };
      a->max_deriv = 2;
      a->domain = {-1, 1};
      a->whole = false;
    } else if (name == "const") {
      double c = arg(1, 1.0);
      a->f = [c](double, double) { return c; };
      a->deriv = [c](double, double, int i, int j) { return i + j == 0 ? c : 0.0; };
      a->max_deriv = 2;
      a->domain = {0, 1};
      a->whole = false;
    } else {
      throw Error("unknown 2D function id '" + id + "'");
    }
    return a;
  }

  auto set1 = [&](auto f, auto d, int maxd) {
    a->f = [f](double x, double) { return f(x); };
    a->deriv = [d](double x, double, int i, int j) { return j ? 0.0 : d(x, i); };
    a->max_deriv = maxd;
  };

  if (name == "gauss_bump") {
    set1([](double x) { return std::exp(-x * x); },
         [](double x, int i) {
           double g = std::exp(-x * x);
           return i == 0 ? g : i == 1 ? -2 * x * g : (4 * x * x - 2) * g;
         },
         2);
    a->norm_pp = [](double p) { return std::sqrt(pi / p); };
    a->d1_pp = [](double p) {
      return std::pow(2.0, p) * detail::tgamma((p + 1) / 2) / std::pow(p, (p + 1) / 2);
    };
    a->d2_pp = [](double p) { return p == 2 ? 3 * std::sqrt(pi / 2) : std::nan(""); };
  } else if (name == "bump") {
    // (1 - ((x-c)/w)^2)^3 on |x - c| < w; C^2
    double c = arg(1, 0.0), w = arg(2, 1.0);
    set1([c, w](double x) {
           double u = (x - c) / w, s = 1 - u * u;
           return s > 0 ? s * s * s : 0.0;
         },
         [c, w](double x, int i) {
           double u = (x - c) / w, s = 1 - u * u;
           if (s <= 0) return 0.0;
           if (i == 0) return s * s * s;
           if (i == 1) return -6 * u * s * s / w;
           return s * (30 * u * u - 6) / (w * w);
         },
         2);
    a->norm_pp = [w](double p) { return w * detail::beta(0.5, 3 * p + 1); };
    a->d1_pp = [w](double p) { return w * std::pow(6 / w, p) * detail::beta((p + 1) / 2, 2 * p + 1); };
    a->d2_pp = [w](double p) { return p == 2 ? 9216.0 / 315.0 / (w * w * w) : std::nan(""); };
    a->support = {c - w, c + w};
  } else if (name == "x2bump") {
    set1([](double x) {
           double s = 1 - x * x;
           return s > 0 ? x * x * s * s * s : 0.0;
         },
         [](double x, int i) {
           double s = 1 - x * x;
           if (s <= 0) return 0.0;
           double x2 = x * x;
           if (i == 0) return x2 * s * s * s;
           if (i == 1) return 2 * x * s * s * s - 6 * x * x2 * s * s;
           return 2 * s * s * s - 30 * x2 * s * s + 24 * x2 * x2 * s;
         },
         2);
    a->support = {-1, 1};
  } else if (name == "tent") {
    double c = arg(1, 0.0), w = arg(2, 1.0);
    set1([c, w](double x) { return std::max(0.0, 1 - std::abs(x - c) / w); },
         [c, w](double x, int i) {
           double u = (x - c) / w;
           if (i == 0) return std::max(0.0, 1 - std::abs(u));
           if (i == 1) return std::abs(u) < 1 ? (u > 0 ? -1 / w : 1 / w) : 0.0;
           return 0.0;
         },
         1);
    a->norm_pp = [w](double p) { return 2 * w / (p + 1); };
    a->d1_pp = [w](double p) { return 2 * w * std::pow(w, -p); };
    a->support = {c - w, c + w};
  } else if (name == "indicator") {
    double lo = arg(1, 0.0), hi = arg(2, 1.0);
    if (!(hi > lo)) throw Error("indicator: need a < b");
    set1([lo, hi](double x) { return x >= lo && x < hi ? 1.0 : 0.0; },
         [lo, hi](double x, int i) { return i == 0 && x >= lo && x < hi ? 1.0 : 0.0; }, 0);
    a->norm_pp = [lo, hi](double) { return hi - lo; };
    a->support = {lo, hi};
  } else if (name == "x" || name == "x2" || name == "x3") {
    int d = name == "x" ? 1 : name == "x2" ? 2 : 3;
    set1([d](double x) { return std::pow(x, d); },
         [d](double x, int i) {
           if (i > d) return 0.0;
           double c = 1;
           for (int l = 0; l < i; ++l) c *= d - l;
           return c * std::pow(x, d - i);
         },
         3);
    a->norm_pp = [d](double p) { return 2 / (d * p + 1); };
    a->d1_pp = [d](double p) { return std::pow(d, p) * 2 / ((d - 1) * p + 1); };
    a->d2_pp = [d](double p) {
      return d == 1 ? 0.0 : std::pow(d * (d - 1), p) * 2 / ((d - 2) * p + 1);
    };
    a->domain = {-1, 1};
    a->whole = false;
  } else if (name == "sin" || name == "cos") {
    bool s = name == "sin";
    set1([s](double x) { return s ? std::sin(2 * pi * x) : std::cos(2 * pi * x); },
         [s](double x, int i) {
           double w = std::pow(2 * pi, i);
           int ph = (i + (s ? 0 : 1)) % 4;
           double v = ph == 0 ? std::sin(2 * pi * x) : ph == 1 ? std::cos(2 * pi * x)
                    : ph == 2 ? -std::sin(2 * pi * x) : -std::cos(2 * pi * x);
           return w * v;
         },
         3);
    a->norm_pp = [](double p) { return detail::sin_mean(p); };
    a->d1_pp = [](double p) { return std::pow(2 * pi, p) * detail::sin_mean(p); };
    a->d2_pp = [](double p) { return std::pow(4 * pi * pi, p) * detail::sin_mean(p); };
    a->domain = {0, 1};
    a->whole = false;
  } else if (name == "exp") {
    set1([](double x) { return std::exp(x); }, [](double x, int) { return std::exp(x); }, 3);
    a->norm_pp = [](double p) { return std::expm1(p) / p; };
    a->d1_pp = a->d2_pp = a->norm_pp;
    a->domain = {0, 1};
    a->whole = false;
  } else if (name == "abs") {
    double c = arg(1, 0.0);
    set1([c](double x) { return std::abs(x - c); },
         [c](double x, int i) { return i == 0 ? std::abs(x - c) : i == 1 ? (x > c ? 1.0 : -1.0) : 0.0; },
         1);
    a->domain = {0, 1};
    a->whole = false;
    a->norm_pp = [c](double p) { return (std::pow(c, p + 1) + std::pow(1 - c, p + 1)) / (p + 1); };
    a->d1_pp = [](double) { return 1.0; };
  } else if (name == "stair") {
    double n = arg(1, 4.0);
    set1([n](double x) { return std::floor(n * x) / n; },
         [n](double x, int i) { return i == 0 ? std::floor(n * x) / n : 0.0; }, 0);
    a->domain = {0, 1};
    a->whole = false;
    a->norm_pp = [n](double p) {
      double s = 0;
      for (int j = 0; j < int(n); ++j) s += std::pow(j / n, p) / n;
      return s;
    };
  } else if (name == "const") {
    double c = arg(1, 1.0);
    set1([c](double) { return c; }, [c](double, int i) { return i == 0 ? c : 0.0; }, 3);
    a->domain = {0, 1};
    a->whole = false;
    a->norm_pp = [c](double p) { return std::pow(std::abs(c), p); };
    a->d1_pp = a->d2_pp = [](double) { return 0.0; };
  } else if (name == "tanh") {
    set1([](double x) { return std::tanh(x); },
         [](double x, int i) {
           double t = std::tanh(x), s = 1 - t * t;
           return i == 0 ? t : i == 1 ? s : -2 * t * s;
         },
         2);
    a->domain = {-10, 10};
  } else if (name == "hermite3") {
    set1([](double x) { return x * x * x - 3 * x; },
         [](double x, int i) { return i == 0 ? x * x * x - 3 * x : i == 1 ? 3 * x * x - 3 : 6 * x; }, 3);
    a->domain = {-10, 10};
  } else {
    throw Error("unknown function id '" + id + "'");
  }
  return a;
}

// Samples with their quadrature masses (cell volume times measure density).
struct Samples {
  std::vector<double> values;
  std::vector<double> masses;
  double total_mass() const {
    double m = 0;
    for (double w : masses) m += w;
    return m;
  }
};

class GridFunction {
 public:
  GridFunction(Box box, Measure measure, std::vector<double> values, AnalyticPtr analytic = nullptr,
               bool whole = true)
      : box_(box), measure_(measure), values_(std::move(values)), analytic_(std::move(analytic)),
        whole_(whole) {
    box_.validate();
    if (values_.size() != box_.size()) throw Error("grid function: value count does not match box");
    for (double v : values_)
      if (!std::isfinite(v)) throw Error("non-finite sample");
  }

  const Box& box() const { return box_; }
  Measure measure() const { return measure_; }
  const std::vector<double>& values() const { return values_; }
  const AnalyticPtr& analytic() const { return analytic_; }
  // true: the box truncates the whole space and f extends beyond it (analytically or by 0)
  bool whole() const { return whole_; }
  int dim() const { return box_.dim; }
  size_t size() const { return values_.size(); }
  double operator[](size_t i) const { return values_[i]; }

  double x(size_t idx) const { return box_.center(0, int(idx % box_.cells[0])); }
  double y(size_t idx) const { return box_.dim == 2 ? box_.center(1, int(idx / box_.cells[0])) : 0.0; }

  double mass(size_t idx) const {
    double v = box_.cell_volume();
    return measure_ == Measure::Gaussian ? v * gauss_density(box_.dim, x(idx), y(idx)) : v;
  }
  std::vector<double> masses() const {
    std::vector<double> m(size());
    for (size_t i = 0; i < size(); ++i) m[i] = mass(i);
    return m;
  }
  Samples samples() const { return {values_, masses()}; }

  // Point evaluation: analytic handle if present, else (bi)linear interpolation between
  // cell centers with zero extension (whole space) or clamping (local box).
  double eval(double px, double py = 0) const {
    if (analytic_) return analytic_->f(px, py);
    return interpolate(px, py);
  }

  double interpolate(double px, double py = 0) const {
    auto locate = [&](int a, double p, int& i0, double& w) -> bool {
      double u = (p - box_.lo[a]) / box_.dx(a) - 0.5;
      int n = box_.cells[a];
      if (whole_) {
        if (u < -1 || u > n) return false;
      } else {
        u = std::clamp(u, 0.0, double(n - 1));
      }
      i0 = int(std::floor(u));
      w = u - i0;
      return true;
    };
    int nx = box_.cells[0];
    auto at = [&](int i, int j) -> double {
      if (i < 0 || i >= nx) return 0.0;
      if (box_.dim == 2 && (j < 0 || j >= box_.cells[1])) return 0.0;
      return values_[size_t(j) * nx + i];
    };
    int i0, j0 = 0;
    double wx, wy = 0;
    if (!locate(0, px, i0, wx)) return 0.0;
    if (box_.dim == 1) return (1 - wx) * at(i0, 0) + wx * at(i0 + 1, 0);
    if (!locate(1, py, j0, wy)) return 0.0;
    return (1 - wy) * ((1 - wx) * at(i0, j0) + wx * at(i0 + 1, j0)) +
           wy * ((1 - wx) * at(i0, j0 + 1) + wx * at(i0 + 1, j0 + 1));
  }

  GridFunction with_values(std::vector<double> v, bool keep_handle = false) const {
    return GridFunction(box_, measure_, std::move(v), keep_handle ? analytic_ : nullptr, whole_);
  }

 private:
  Box box_;
  Measure measure_;
  std::vector<double> values_;
  AnalyticPtr analytic_;
  bool whole_;
};

inline GridFunction sample(AnalyticPtr a, const Box& box, Measure m = Measure::Lebesgue, bool whole = true) {
  box.validate();
  if (a->dim != box.dim) throw Error("sample: dimension mismatch");
  std::vector<double> v(box.size());
  for (int j = 0; j < (box.dim == 2 ? box.cells[1] : 1); ++j)
    for (int i = 0; i < box.cells[0]; ++i)
      v[size_t(j) * box.cells[0] + i] = a->f(box.center(0, i), box.dim == 2 ? box.center(1, j) : 0.0);
  return GridFunction(box, m, std::move(v), std::move(a), whole);
}

// Default box: radius 8 for the Lebesgue whole-line corpus, radius 10 under the Gaussian measure.
inline Box default_box(const Analytic& a, Measure m, int cells = 0) {
  int n = cells > 0 ? cells : (a.dim == 1 ? 2048 : 256);
  double lo = a.domain[0], hi = a.domain[1];
  if (m == Measure::Gaussian) lo = -10, hi = 10;
  return a.dim == 1 ? Box::line(lo, hi, n) : Box::square(lo, hi, n);
}

inline GridFunction sample(const std::string& id, Measure m = Measure::Lebesgue, int cells = 0, int dim = 1) {
  auto a = make_analytic(id, dim);
  bool whole = m == Measure::Gaussian ? true : a->whole;
  return sample(a, default_box(*a, m, cells), m, whole);
}

// Sum of mass_i * integrand(f_i).
template <class F>
double quadrature(const GridFunction& f, F&& integrand) {
  double s = 0;
  for (size_t i = 0; i < f.size(); ++i) {
    double v = f[i];
    if (!std::isfinite(v)) throw Error("non-finite sample");
    s += f.mass(i) * integrand(v);
  }
  return s;
}

inline double quadrature(const GridFunction& f) {
  return quadrature(f, [](double v) { return v; });
}

// Restrict to a grid-aligned sub-box; cells are kept by center (sharp cutoff).
inline GridFunction restrict(const GridFunction& f, const Box& sub) {
  const Box& b = f.box();
  if (sub.dim != b.dim || !b.contains(sub)) throw Error("restrict: sub-box not contained in box");
  std::array<int, 2> i0{0, 0}, n{1, 1};
  Box out = sub;
  for (int a = 0; a < b.dim; ++a) {
    double u0 = (sub.lo[a] - b.lo[a]) / b.dx(a), u1 = (sub.hi[a] - b.lo[a]) / b.dx(a);
    long r0 = std::lround(u0), r1 = std::lround(u1);
    if (std::abs(u0 - r0) > 1e-6 || std::abs(u1 - r1) > 1e-6) throw Error("restrict: sub-box not grid-aligned");
    i0[a] = int(r0);
    n[a] = int(r1 - r0);
    out.cells[a] = n[a];
    out.lo[a] = b.lo[a] + r0 * b.dx(a);
    out.hi[a] = b.lo[a] + r1 * b.dx(a);
  }
  if (b.dim == 1) out.cells[1] = 1;
  out.validate();
  std::vector<double> v;
  v.reserve(out.size());
  for (int j = 0; j < n[1]; ++j)
    for (int i = 0; i < n[0]; ++i) v.push_back(f[size_t(j + i0[1]) * b.cells[0] + (i + i0[0])]);
  return GridFunction(out, f.measure(), std::move(v), f.analytic(), false);
}

inline GridFunction refine(const GridFunction& f, int factor) {
  if (!f.analytic()) throw Error("cannot refine sampled-only data");
  if (factor < 1) throw Error("refine: factor must be positive");
  Box b = f.box();
  for (int a = 0; a < b.dim; ++a) b.cells[a] *= factor;
  return sample(f.analytic(), b, f.measure(), f.whole());
}

// CSV dump: x[,y],value
inline void write_csv(std::ostream& os, const GridFunction& f) {
  os.precision(12);
  os << (f.dim() == 1 ? "x,value\n" : "x,y,value\n");
  for (size_t i = 0; i < f.size(); ++i) {
    os << f.x(i) << ',';
    if (f.dim() == 2) os << f.y(i) << ',';
    os << f[i] << '\n';
  }
}

}  // namespace kfun
