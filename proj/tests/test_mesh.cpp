#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hypgreen/surface_mesh.hpp"
#include "support/brute_quadrature.hpp"
#include "support/random_sets.hpp"

using namespace hypgreen;
using branch::SpherePoint;
using surface::ChartKind;
using surface::SurfaceMesh;

namespace {

periods::CurveData genus1_curve() {
  return periods::analyze_curve(branch::validate_branch_set(
      {SpherePoint::finite(0.0), SpherePoint::finite(1.0), SpherePoint::finite(0.5),
       SpherePoint::infinity()},
      1));
}

periods::CurveData quintic_curve() {
  std::vector<SpherePoint> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(SpherePoint::finite(std::polar(1.0, 2.0 * kPi * k / 5)));
  pts.push_back(SpherePoint::infinity());
  return periods::analyze_curve(branch::validate_branch_set(pts, 2));
}

}  // namespace

TEST_CASE("Euler characteristic matches the genus") {
  const auto cd1 = genus1_curve();
  for (int R : {16, 32, 64}) {
    const auto mesh = surface::build_mesh(cd1, R);
    CHECK(mesh.euler_characteristic == 0);
  }
  const auto cd2 = quintic_curve();
  for (int R : {24, 64}) {
    const auto mesh = surface::build_mesh(cd2, R);
    CHECK(mesh.euler_characteristic == -2);
  }
  CHECK_THROWS_AS((void)surface::build_mesh(cd1, 4), Error);
}

TEST_CASE("unit mass: exact after normalization, raw defect shrinking") {
  const auto cd = quintic_curve();
  double prev_defect = 1e300;
  for (int R : {32, 64, 128}) {
    const auto mesh = surface::build_mesh(cd, R);
    const std::vector<double> ones(mesh.vertex_count(), 1.0);
    CHECK(std::abs(surface::integrate(mesh, ones) - 1.0) < 1e-6);
    const double defect = std::abs(mesh.raw_mass - 1.0);
    CHECK(defect < 0.8 * prev_defect);  // at least first-order in 1/R
    prev_defect = defect;
  }
}

TEST_CASE("marked points and involution") {
  const auto cd = quintic_curve();
  const auto mesh = surface::build_mesh(cd, 32);
  REQUIRE(mesh.marked_points.size() == 6);
  for (int i = 0; i < 6; ++i) {
    const int v = mesh.marked_points[i];
    REQUIRE(v >= 0);
    CHECK(mesh.vertices[v].chart == ChartKind::branch);
    CHECK(mesh.vertices[v].chart_index == i);
    CHECK(std::abs(mesh.vertices[v].x - cd.work_points[i]) < 1e-13);
    // Weierstrass vertices are the fixed points of the involution
    CHECK(mesh.involution[v] == v);
  }
  int fixed = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    CHECK(mesh.involution[mesh.involution[v]] == v);
    if (mesh.involution[v] == v) ++fixed;
  }
  CHECK(fixed == 6);
}

TEST_CASE("involution symmetry leaves the measure weights exactly invariant") {
  const auto cd = genus1_curve();
  const auto mesh = surface::build_mesh(cd, 32);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    CHECK(mesh.vertices[v].mu_weight == mesh.vertices[mesh.involution[v]].mu_weight);

  // integrate of a sheet-symmetric field is unchanged under relabeling
  std::vector<double> f(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) f[v] = std::cos(mesh.vertices[v].x.real());
  std::vector<double> g(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) g[v] = f[mesh.involution[v]];
  CHECK(surface::integrate(mesh, f) == surface::integrate(mesh, g));
}

TEST_CASE("integrate matches a brute-force quadrature for a harmonic polynomial") {
  const auto cd = genus1_curve();
  const auto mesh = surface::build_mesh(cd, 64);
  // harmonic in x and bounded on the cap through the 1/(1+|x|^2) taper
  auto f = [](cplx x) {
    const double n = 1.0 + std::norm(x);
    return (x.real() * x.real() - x.imag() * x.imag() + 2.0 * x.real()) / (n * n);
  };
  std::vector<double> vals(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& vx = mesh.vertices[v];
    if (vx.chart == ChartKind::infinity_cap && vx.chart_pos == cplx(0.0, 0.0)) {
      vals[v] = 0.0;  // limit of f at x = infinity
    } else {
      vals[v] = f(vx.x);
    }
  }
  const double mesh_val = surface::integrate(mesh, vals);
  testsupport::BruteCanonicalIntegral brute(cd);
  const double oracle = brute(f, 1e-8);
  CHECK(std::abs(mesh_val - oracle) < 1e-4);
}

TEST_CASE("mesh Gram test pins the chart constants") {
  // integrating the smooth wedge ratio reproduces the orthonormality of the
  // basis within a couple of percent at the default resolution
  for (const auto& cd : {genus1_curve(), quintic_curve()}) {
    const auto mesh = surface::build_mesh(cd, 64);
    const int h = cd.genus();
    for (int m = 0; m < h; ++m)
      for (int n = 0; n < h; ++n) {
        std::vector<double> vals(mesh.vertex_count());
        for (int v = 0; v < mesh.vertex_count(); ++v) {
          const auto& vx = mesh.vertices[v];
          Eigen::VectorXcd P;
          if (vx.chart == ChartKind::infinity_cap) {
            Eigen::VectorXcd mono(h);
            cplx wp(1.0, 0.0);
            for (int q = h - 1; q >= 0; --q) {
              mono[q] = wp;
              wp *= vx.chart_pos;
            }
            P = cd.ortho.transpose() * mono;
          } else {
            P = periods::ortho_poly_values(cd, vx.x);
          }
          vals[v] = (static_cast<double>(h) * P[m] * std::conj(P[n]) / P.squaredNorm()).real();
        }
        const double got = surface::integrate(mesh, vals);
        const double expect = (m == n) ? 1.0 : 0.0;
        CHECK(std::abs(got - expect) < 0.02);
      }
  }
}

TEST_CASE("log-singular integrand is finite and stable under refinement") {
  const auto cd = quintic_curve();
  const int i = 0, j = 1;
  double prev = 0.0;
  double prev_diff = 1e300;
  bool have_prev = false;
  for (int R : {32, 64, 128}) {
    const auto mesh = surface::build_mesh(cd, R);
    const cplx ai = cd.work_points[i], aj = cd.work_points[j];
    std::vector<double> vals(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const auto& vx = mesh.vertices[v];
      if (v == mesh.marked_points[i])
        vals[v] = -std::log(std::abs(ai - aj));
      else if (v == mesh.marked_points[j])
        vals[v] = std::log(std::abs(aj - ai));
      else if (vx.chart == ChartKind::infinity_cap)
        vals[v] = std::log(std::abs(1.0 - ai * vx.chart_pos)) -
                  std::log(std::abs(1.0 - aj * vx.chart_pos));
      else
        vals[v] = std::log(std::abs(vx.x - ai)) - std::log(std::abs(vx.x - aj));
    }
    const double got = surface::integrate_log_singular(
        mesh, vals,
        {surface::LogSingularity{mesh.marked_points[i], 2.0, vals[mesh.marked_points[i]]},
         surface::LogSingularity{mesh.marked_points[j], -2.0, vals[mesh.marked_points[j]]}});
    CHECK(std::isfinite(got));
    if (have_prev) {
      CHECK(std::abs(got - prev) < 1e-3);
      CHECK(std::abs(got - prev) < prev_diff + 1e-6);
      prev_diff = std::abs(got - prev);
    }
    prev = got;
    have_prev = true;
  }
}

TEST_CASE("integrate rejects non-finite values at undeclared vertices") {
  const auto cd = genus1_curve();
  const auto mesh = surface::build_mesh(cd, 16);
  std::vector<double> vals(mesh.vertex_count(), 1.0);
  vals[5] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS((void)surface::integrate(mesh, vals), Error);
}

TEST_CASE("mesh dump has the documented record structure") {
  const auto cd = genus1_curve();
  const auto mesh = surface::build_mesh(cd, 16);
  std::ostringstream os;
  surface::dump_mesh(mesh, os);
  const std::string text = os.str();
  CHECK(text.find("v 0 ") != std::string::npos);
  CHECK(text.find("t ") != std::string::npos);
  CHECK(text.find("m 0 ") != std::string::npos);
  std::istringstream is(text);
  std::string line;
  int v_count = 0, t_count = 0, m_count = 0;
  while (std::getline(is, line)) {
    if (line.rfind("v ", 0) == 0) ++v_count;
    if (line.rfind("t ", 0) == 0) ++t_count;
    if (line.rfind("m ", 0) == 0) ++m_count;
  }
  CHECK(v_count == mesh.vertex_count());
  CHECK(t_count == static_cast<int>(mesh.triangles.size()));
  CHECK(m_count == 4);
}
