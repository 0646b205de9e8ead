#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hypgreen/branch_algebra.hpp"
#include "hypgreen/types.hpp"

namespace hypgreen::periods {

/// Coordinate change from the input branch coordinate z to the finite,
/// centered, unit-scale work frame in which all quadrature and meshing runs:
/// w = 1/(z - inv_center) when an inversion is needed (infinity among the
/// branch points), then xi = scale * (w - shift).
struct FrameMap {
  bool inverted = false;
  cplx inv_center{0.0, 0.0};
  cplx shift{0.0, 0.0};
  cplx scale{1.0, 0.0};

  cplx to_work(const branch::SpherePoint& p) const;
  cplx from_work(cplx xi) const;  // back to the input coordinate (may be large)
};

struct CurveData {
  branch::BranchSet bs;            // original input configuration
  FrameMap frame;                  // input -> work coordinate map
  std::vector<cplx> work_points;   // finite work-frame branch points, input order
  std::vector<std::pair<int, int>> cut_pairing;  // h+1 disjoint pairs, input indices

  Eigen::MatrixXcd A, B;           // periods of x^{k-1} dx / y over the homology basis
  Eigen::MatrixXcd tau_period;     // A^{-1} B, symmetric with positive-definite Im
  Eigen::MatrixXcd gram;           // hermitian Gram matrix of the naive basis
  Eigen::MatrixXcd ortho;          // columns express an orthonormal basis, C* G C = 1
  double quadrature_error = 0.0;   // last node-doubling change, relative

  int genus() const { return bs.genus; }
};

/// Period matrices by adaptive trapezoid quadrature over closed elliptic
/// contours around the branch cuts, with the sign of y = sqrt(prod(x - a_r))
/// continued analytically in small steps along each contour.
CurveData compute_periods(const branch::BranchSet& bs);

/// Gram matrix of the naive differentials from the a/b-periods through the
/// bilinear relations; fills cd.gram and returns it.
Eigen::MatrixXcd gram_matrix(CurveData& cd);

/// Coefficient matrix C with C* G C = 1 (Cholesky route); fills cd.ortho.
Eigen::MatrixXcd orthonormalize(CurveData& cd);

/// Runs compute_periods, gram_matrix and orthonormalize in sequence.
CurveData analyze_curve(const branch::BranchSet& bs);

/// Density of the canonical measure with respect to planar Lebesgue measure
/// in the work-frame chart (either sheet; the density is sheet-symmetric).
double canonical_density(const CurveData& cd, cplx xi_work, int sheet = 0);

/// Coefficient polynomials of the orthonormal differentials: P_k(xi) with
/// omega_k = P_k(xi) dxi / y. Used by the mesh and spectral layers.
Eigen::VectorXcd ortho_poly_values(const CurveData& cd, cplx xi_work);

/// prod (xi - xi_r) over all work-frame branch points.
cplx sheet_polynomial(const CurveData& cd, cplx xi_work);

}  // namespace hypgreen::periods
