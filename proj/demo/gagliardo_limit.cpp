// (1 - s) |f|^2_{W^{s,2}} for f = exp(-x^2) as s -> 1, then the extrapolated limit.
#include <cstdio>

#include <kfun/limits.hpp>
#include <kfun/smoothness.hpp>

using namespace kfun;

int main() {
  auto f = sample("gauss_bump", Measure::Lebesgue, 2048);
  RadialProfile rp(f, 1, NormSpec::Lp(2), 2);
  std::vector<double> x, F;
  for (int j = 4; j <= 10; ++j) {
    double e = std::ldexp(1.0, -j), v = e * gagliardo_energy(rp, 1 - e);
    x.push_back(e);
    F.push_back(v);
    std::printf("s = 1 - 2^-%-2d  %.10f\n", j, v);
  }
  auto r = richardson(x, F);
  std::printf("limit %.8f  (sqrt(pi/2) = %.8f)  rate %.3f\n", r.limit, std::sqrt(pi / 2), r.rate);
}
