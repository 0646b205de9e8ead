#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "hypgreen/surface_mesh.hpp"

namespace hypgreen::laplace {

/// Discretization of the canonical Laplacian: the generalized problem
/// stiffness v = lambda mass v has nonnegative spectrum with constants in
/// the kernel. The stiffness carries the 1/(2 pi) scale that matches the
/// operator convention fixed by the flat-torus oracle (see the constants
/// test); the mass is the lumped canonical measure.
struct CanonicalLaplacian {
  Eigen::SparseMatrix<double> stiffness;
  Eigen::VectorXd mass;

  // Dirichlet-energy matrix (without the spectral scale) factored with one
  // pinned vertex; shared by all Poisson solves on the mesh.
  std::shared_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> poisson;
  int pinned_vertex = 0;
};

CanonicalLaplacian assemble_laplacian(const surface::SurfaceMesh& mesh);

/// Green's function field for one source vertex. values[source] stores the
/// regular part u(source); the log|t| singularity is implicit. The additive
/// constant is fixed so the singularity-aware quadrature of the field
/// against the canonical measure vanishes.
struct GreenField {
  int source = -1;
  std::vector<double> values;
  bool constant_fixed = false;
};

/// Poisson solve with the logarithmic split in the source's chart. The
/// source must be a marked Weierstrass vertex (t-chart) or a plane-chart
/// vertex with enough clearance from the disks and the cap.
GreenField green_function(const surface::SurfaceMesh& mesh, const CanonicalLaplacian& lap,
                          int source_vertex);

/// Evaluates a Green field at a vertex (the regular part at its own source).
double green_value(const GreenField& field, int vertex);

/// Difference of two Green fields by pure quadrature of the meromorphic
/// ratio attached to the branch pair (i, j): no linear solve involved.
double green_difference_oracle(const surface::SurfaceMesh& mesh, int i, int j, int z_vertex);

struct SpectralData {
  Eigen::VectorXd eigenvalues;    // ascending, first entry ~ 0
  Eigen::MatrixXd eigenfunctions; // columns, mass-orthonormal
  double ortho_defect = 0.0;      // max |<phi_l, phi_m> - delta|
};

/// Lowest count+1 eigenpairs of the canonical Laplacian by shift-inverted
/// Lanczos with full reorthogonalization in the mass inner product.
SpectralData eigenpairs(const surface::SurfaceMesh& mesh, const CanonicalLaplacian& lap,
                        int count);

struct PhiResult {
  double value = 0.0;
  double tail_estimate = 0.0;
  double c0_defect = 0.0;  // mode-0 wedge integrals against delta_mn, relative
};

/// Spectral invariant from the truncated eigen-expansion; the wedge
/// integrals use the same lumped measure as the eigensolver orthogonality.
/// Throws InsufficientSpectrum when the geometric tail estimate exceeds
/// tail_tolerance.
PhiResult kawazumi_zhang_phi(const surface::SurfaceMesh& mesh, const SpectralData& spec,
                             double tail_tolerance = 1e-2);

struct EnergyResult {
  Eigen::MatrixXd green_matrix;     // symmetrized g(w_i, w_j), zero diagonal
  double psi = 0.0;
  std::vector<GreenField> fields;   // one per Weierstrass source
};

/// Solves from every Weierstrass source and assembles the energy.
EnergyResult weierstrass_energy_psi(const surface::SurfaceMesh& mesh,
                                    const CanonicalLaplacian& lap);

/// Residuals g(w_i,w_j) - log|delta_ij|/(4h(2h+1)) - psi/(2h+1).
Eigen::MatrixXd theorem_A_residuals(const branch::BranchSet& bs,
                                    const Eigen::MatrixXd& green_matrix, double psi);

/// Spread (max - min over pairs) of g(w_i,w_j) - log|delta_ij|/(4h(2h+1)).
double theorem_A_spread(const branch::BranchSet& bs, const Eigen::MatrixXd& green_matrix);

/// psi - phi/(2h) - log 2.
double theorem_B_residual(double psi, double phi, int genus);

}  // namespace hypgreen::laplace
