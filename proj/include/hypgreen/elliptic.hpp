#pragma once

#include <array>

#include "hypgreen/branch_algebra.hpp"
#include "hypgreen/types.hpp"

namespace hypgreen::elliptic {

/// Complex torus C / (Z + tau Z), Im(tau) > 0.
struct Torus {
  cplx tau;
};

Torus make_torus(cplx tau);

/// Point on the torus; z is the stored representative.
struct TorusPoint {
  cplx z;
};

/// Representative with 0 <= Re < 1 and 0 <= Im < Im(tau).
TorusPoint reduce_point(cplx z, const Torus& t);

/// First Jacobi theta function in the lattice-coordinate convention
/// (theta1(z+1) = -theta1(z), quasi-period tau), via its sine series,
/// truncated when the next term falls below 1e-15 of the partial sum.
/// theta1_dz and theta1_dzz are the first two z-derivatives.
cplx theta1(cplx z, cplx tau);
cplx theta1_dz(cplx z, cplx tau);
cplx theta1_dzz(cplx z, cplx tau);

/// log |theta1(u, tau)| evaluated with lattice reduction, valid for any u.
double theta1_log_abs(cplx u, cplx tau);

struct ThetaConstants {
  cplx t2, t3, t4;  // theta_2(0), theta_3(0), theta_4(0)
};
ThetaConstants theta_constants(cplx tau);

/// Modulus reduced to the standard fundamental domain. The original lattice
/// satisfies Z + tau0 Z = gamma (Z + tau Z).
struct ReducedModulus {
  cplx tau;
  cplx gamma;
};
ReducedModulus reduce_modulus(cplx tau0);

/// Additive constant making log|theta1(pi u)| - pi Im(u)^2 / Im(tau) mean-zero
/// against the flat unit-mass measure. Computed by midpoint quadrature with a
/// smooth local subtraction of the logarithmic singularity; the grid is
/// doubled until the result changes by less than 1e-9. Requires a reduced
/// modulus (Im tau >= sqrt(3)/2 - eps). Results are cached per modulus.
double mean_zero_constant(cplx tau_reduced);

/// Canonical Green's function g(z, 0) on the torus.
double torus_green(const TorusPoint& p, const Torus& t);

/// Sum of g(x, 0) over the N^2 - 1 nontrivial N-torsion points x.
double torsion_energy(const Torus& t, int N);

/// Modulus and branch-point/half-period correspondence of a genus-1 set.
struct BranchTorusData {
  cplx tau;                // reduced modulus, Im > 0
  std::array<cplx, 4> u;   // torus coordinate of the point over each branch index
  int infinity_slot;       // branch index placed over the lattice origin
  cplx lambda;             // Legendre parameter fed to the AGM inversion
};

/// Computes tau by AGM from the Legendre parameter of the four branch points
/// and fixes the correspondence between the finite branch points and the
/// three half-periods by matching affine shapes of the half-period values of
/// the Weierstrass function.
BranchTorusData tau_from_branch(const branch::BranchSet& bs);

struct WeierstrassGreenValue {
  double value;     // theta route
  double residual;  // |theta route - closed form|
};

/// g(w_i, w_j) for two finite branch indices of a genus-1 set containing
/// infinity, computed through the torus correspondence and checked against
/// the closed form in the branch-point differences.
WeierstrassGreenValue elliptic_weierstrass_green(const branch::BranchSet& bs, int i, int j);

}  // namespace hypgreen::elliptic
