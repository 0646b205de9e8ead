#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "hypgreen/types.hpp"

namespace hypgreen::testsupport {

/// Dedekind eta function, q-product form.
inline cplx dedekind_eta(cplx tau) {
  const cplx q = std::exp(cplx(0.0, 2.0 * kPi) * tau);
  cplx prod = std::exp(cplx(0.0, kPi) * tau / 12.0);
  cplx qn(1.0, 0.0);
  for (int n = 1; n < 512; ++n) {
    qn *= q;
    prod *= (1.0 - qn);
    if (std::abs(qn) < 1e-18) break;
  }
  return prod;
}

/// Low eigenvalues of the canonical Laplacian on the flat torus of modulus
/// tau, unit-mass measure: 2 pi |m tau - n|^2 / Im(tau) over integer pairs.
inline std::vector<double> flat_torus_spectrum(cplx tau, int count) {
  std::vector<double> vals;
  const int range = 24;
  for (int m = -range; m <= range; ++m)
    for (int n = -range; n <= range; ++n)
      vals.push_back(2.0 * kPi * std::norm(static_cast<double>(m) * tau -
                                           static_cast<double>(n)) /
                     tau.imag());
  std::sort(vals.begin(), vals.end());
  vals.resize(count);
  return vals;
}

}  // namespace hypgreen::testsupport
