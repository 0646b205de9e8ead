#pragma once

#include <array>
#include <functional>
#include <vector>

#include "hypgreen/periods.hpp"
#include "hypgreen/types.hpp"

namespace hypgreen::surface {

enum class ChartKind { plane, branch, infinity_cap };

/// Triangulated model of the two-sheeted cover. Geometry lives in the
/// work-frame coordinate of the underlying CurveData; every triangle carries
/// the conformal chart it is flat in (x-plane, a branch disk t-chart with
/// t^2 = x - a_i, or the 1/x cap) together with its corner coordinates in
/// that chart. The double cover is built combinatorially by analytic
/// continuation of the sheet sign across triangle adjacencies.
struct SurfaceMesh {
  struct Vertex {
    cplx x;            // work-frame coordinate (the cap center stores x = 0 with chart infinity_cap)
    int sheet;         // 0/1; ramification vertices carry 0
    ChartKind chart;   // chart the vertex primarily lives in
    int chart_index;   // branch disk index when chart == branch
    cplx chart_pos;    // coordinate in that chart (t, w or x)
    double mu_weight;  // lumped canonical measure, sums to 1 over the mesh
    double mu_load;    // consistent load \int rho phi_v dA, same normalization
    int base_id;       // vertex of the base sphere mesh this lift covers
  };

  struct Triangle {
    std::array<int, 3> v;          // lifted vertex ids, counter-clockwise in the chart
    ChartKind chart;
    int chart_index;               // disk index for branch charts
    std::array<cplx, 3> corner;    // corner coordinates in the home chart
    double mass;                   // canonical measure of the triangle
  };

  periods::CurveData curve;
  int resolution = 0;

  std::vector<Vertex> vertices;
  std::vector<Triangle> triangles;
  std::vector<int> marked_points;   // branch index -> lifted vertex id
  std::vector<double> disk_radii;   // x-chart radius of each branch disk
  std::vector<int> involution;      // hyperelliptic involution on vertices
  int euler_characteristic = 0;
  double raw_mass = 0.0;            // quadrature mass before normalization

  int vertex_count() const { return static_cast<int>(vertices.size()); }
};

/// Builds the mesh at the given resolution (background cells across the
/// domain diameter). Checks closedness, orientation and the Euler
/// characteristic 2 - 2h.
SurfaceMesh build_mesh(const periods::CurveData& cd, int resolution);

/// Lumped quadrature against the canonical measure: sum f(v) mu_weight(v).
double integrate(const SurfaceMesh& mesh, const std::vector<double>& vertex_values);

/// Declared logarithmic singularity of an integrand at a marked vertex:
/// f = coeff * log|t| + regular near the vertex, in the branch t-chart.
struct LogSingularity {
  int vertex;          // lifted vertex id (a marked Weierstrass vertex)
  double coeff;        // coefficient of log|t|
  double regular_value;  // finite part of f at the vertex
};

/// Quadrature of a log-singular integrand: vertex_values must hold the plain
/// values away from the declared vertices and the regular part at them; the
/// singular parts are integrated in closed polar form against the smooth
/// t-chart density.
double integrate_log_singular(const SurfaceMesh& mesh, const std::vector<double>& vertex_values,
                              const std::vector<LogSingularity>& singularities);

/// Smooth radial cutoff used for the singular splits: 1 on [0, 1/2], 0 at 1.
double chi_cutoff(double s);

/// Radius (in the t-chart) of the cutoff support around marked vertex i.
double chi_radius(const SurfaceMesh& mesh, int disk_index);

/// Polar quadrature of chi(|t|/rho0) * g(|t|) * rho_t over branch disk i;
/// g is a radial profile (for example log). Used by the singular integrals
/// and the Poisson right-hand sides.
double disk_radial_integral(const SurfaceMesh& mesh, int disk_index,
                            const std::function<double(double)>& radial_profile);

/// Writes vertices, triangles and weights in a flat text format.
void dump_mesh(const SurfaceMesh& mesh, std::ostream& os);

}  // namespace hypgreen::surface
