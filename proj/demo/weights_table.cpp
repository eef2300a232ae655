// Prints the three rho families, their derived Poincare weights and the eta mass check.
#include <cstdio>

#include <kfun/weights.hpp>

using namespace kfun;

int main() {
  std::printf("%-24s %10s %12s %12s %12s\n", "family", "mass", "rho(0.1)", "phi(0.1)", "eta mass-1");
  for (auto kind : {FamilyKind::PowerRho, FamilyKind::ScaledRho, FamilyKind::LogRho})
    for (double eps : {0.5, 0.1, 0.01}) {
      auto rho = make_rho(kind, eps);
      auto phi = derive(rho, Construction::PhiPoincare, {1, 2, 1, 1});
      auto eta = derive(rho, Construction::EtaJN, {1, 2, 1, 1});
      std::printf("%-24s %10.6f %12.5g %12.5g %12.3g\n", rho.name().c_str(), rho.mass(), rho(0.1), phi(0.1),
                  eta_mass_identity(eta) - 1);
    }
}
