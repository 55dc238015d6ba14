#pragma once

// Generalized Gell-Mann basis of su(n+1), trace normalization tr(G_a G_b) =
// 2 delta_ab, multiplied by i so the family is anti-Hermitian. For n=1 this is
// exactly {i sx, i sy, i sz}.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qmfg/core.hpp"

namespace qmfg {

struct GellMannFamily {
  int n = 0;
  std::vector<CMat> generators;  // n^2 + 2n anti-Hermitian matrices, dim n+1

  int count() const { return static_cast<int>(generators.size()); }
};

inline GellMannFamily gell_mann_family(int n) {
  if (n < 1) throw std::invalid_argument("gell_mann_family: n must be >= 1");
  const int d = n + 1;
  GellMannFamily fam;
  fam.n = n;
  for (int j = 0; j < d; ++j)
    for (int k = j + 1; k < d; ++k) {
      CMat sym = CMat::Zero(d, d);
      sym(j, k) = 1.0;
      sym(k, j) = 1.0;
      fam.generators.push_back(kI * sym);
      CMat asym = CMat::Zero(d, d);
      asym(j, k) = Complex(0, -1);
      asym(k, j) = Complex(0, 1);
      fam.generators.push_back(kI * asym);
    }
  for (int l = 1; l < d; ++l) {
    CMat diag = CMat::Zero(d, d);
    const double f = std::sqrt(2.0 / (l * (l + 1.0)));
    for (int j = 0; j < l; ++j) diag(j, j) = f;
    diag(l, l) = -l * f;
    fam.generators.push_back(kI * diag);
  }
  return fam;
}

}  // namespace qmfg
