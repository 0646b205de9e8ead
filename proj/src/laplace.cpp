#include "hypgreen/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hypgreen/branch_algebra.hpp"
#include "tri_quadrature.hpp"

namespace hypgreen::laplace {

using surface::ChartKind;
using surface::SurfaceMesh;

namespace {

// radial pieces of the smooth cutoff chi (see surface::chi_cutoff)
double chi_d1(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double u = 2.0 * s - 1.0;
  const double u2 = u * u;
  // d/ds of 1 - S(2s-1): S' = 140u^3 - 420u^4 + 420u^5 - 140u^6
  return -2.0 * (140.0 * u2 * u - 420.0 * u2 * u2 + 420.0 * u2 * u2 * u - 140.0 * u2 * u2 * u2);
}

double chi_d2(double s) {
  if (s <= 0.5 || s >= 1.0) return 0.0;
  const double u = 2.0 * s - 1.0;
  const double u2 = u * u;
  // S'' = 420u^2 - 1680u^3 + 2100u^4 - 840u^5
  return -4.0 * (420.0 * u2 - 1680.0 * u2 * u + 2100.0 * u2 * u2 - 840.0 * u2 * u2 * u);
}

// Laplacian of chi(r/rho0) log r away from the origin: the chi == 1 core is
// harmonic, so the result is supported on the cutoff annulus.
double split_rhs(double r, double rho0) {
  const double s = r / rho0;
  if (s <= 0.5 || s >= 1.0) return 0.0;
  return chi_d2(s) / (rho0 * rho0) * std::log(r) +
         chi_d1(s) / (rho0 * r) * (2.0 + std::log(r));
}

double rho_plane_at(const periods::CurveData& cd, cplx xi) {
  const Eigen::VectorXcd p = periods::ortho_poly_values(cd, xi);
  return p.squaredNorm() / (cd.genus() * std::abs(periods::sheet_polynomial(cd, xi)));
}

double tri_area(const std::array<cplx, 3>& c) {
  const cplx u = c[1] - c[0], v = c[2] - c[0];
  return 0.5 * (u.real() * v.imag() - u.imag() * v.real());
}

// chart radius available around a plane-chart source before hitting a disk
// or the cap region
double plane_clearance(const SurfaceMesh& mesh, cplx x_src) {
  const auto& cd = mesh.curve;
  double clear = 1e300;
  for (std::size_t i = 0; i < cd.work_points.size(); ++i)
    clear = std::min(clear, std::abs(x_src - cd.work_points[i]) - mesh.disk_radii[i]);
  double max_r = 0.0;
  for (const cplx& p : cd.work_points) max_r = std::max(max_r, std::abs(p));
  const double R_out = 2.0 * std::max(max_r, 0.5);
  clear = std::min(clear, R_out - std::abs(x_src));
  return clear;
}

// mean of chi(r/rho0) log r against the canonical measure around a plane
// source, by polar quadrature (the branch-vertex case lives in surface::)
double plane_log_mean(const SurfaceMesh& mesh, cplx x_src, double rho0) {
  const int n_r = 48, n_th = 72;
  double acc = 0.0;
  for (int i = 0; i < n_r; ++i) {
    // r = rho0 u^2 softens the log endpoint
    const double u = (i + 0.5) / n_r;
    const double r = rho0 * u * u;
    const double jac = 2.0 * rho0 * u / n_r;
    const double chi = surface::chi_cutoff(r / rho0);
    if (chi == 0.0 || r == 0.0) continue;
    double ang = 0.0;
    for (int j = 0; j < n_th; ++j)
      ang += rho_plane_at(mesh.curve, x_src + std::polar(r, 2.0 * kPi * j / n_th));
    ang *= 2.0 * kPi / n_th;
    acc += jac * chi * std::log(r) * ang * r;
  }
  return acc / mesh.raw_mass;
}

}  // namespace

CanonicalLaplacian assemble_laplacian(const SurfaceMesh& mesh) {
  const int n = mesh.vertex_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const auto& t : mesh.triangles) {
    // cotangent weights in the triangle's flat chart
    std::array<double, 3> cot{};
    for (int k = 0; k < 3; ++k) {
      const cplx e1 = t.corner[(k + 1) % 3] - t.corner[k];
      const cplx e2 = t.corner[(k + 2) % 3] - t.corner[k];
      const double cross = e1.real() * e2.imag() - e1.imag() * e2.real();
      const double dot = e1.real() * e2.real() + e1.imag() * e2.imag();
      cot[k] = dot / cross;
    }
    for (int k = 0; k < 3; ++k) {
      const int a = t.v[(k + 1) % 3], b = t.v[(k + 2) % 3];
      const double w = 0.5 * cot[k];
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
      trip.emplace_back(a, a, w);
      trip.emplace_back(b, b, w);
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  CanonicalLaplacian lap;
  lap.stiffness = K / (2.0 * kPi);
  lap.mass.resize(n);
  for (int v = 0; v < n; ++v) lap.mass[v] = mesh.vertices[v].mu_weight;

  // pin one vertex for the Poisson solves
  lap.pinned_vertex = 0;
  std::vector<Eigen::Triplet<double>> ptrip;
  ptrip.reserve(trip.size() + 1);
  for (int col = 0; col < K.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      if (it.row() == lap.pinned_vertex || it.col() == lap.pinned_vertex) continue;
      ptrip.emplace_back(it.row(), it.col(), it.value());
    }
  ptrip.emplace_back(lap.pinned_vertex, lap.pinned_vertex, 1.0);
  Eigen::SparseMatrix<double> Kp(n, n);
  Kp.setFromTriplets(ptrip.begin(), ptrip.end());
  lap.poisson = std::make_shared<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
  lap.poisson->compute(Kp);
  if (lap.poisson->info() != Eigen::Success)
    throw Error(errc::solver_failure, "factorization of the Dirichlet energy failed");
  return lap;
}

GreenField green_function(const SurfaceMesh& mesh, const CanonicalLaplacian& lap,
                          int source_vertex) {
  const int n = mesh.vertex_count();
  if (source_vertex < 0 || source_vertex >= n)
    throw Error(errc::index_out_of_range, "source vertex out of range");
  const auto& src = mesh.vertices[source_vertex];

  const bool branch_source = src.chart == ChartKind::branch;
  int disk = -1;
  cplx x_src;
  double rho0 = 0.0;
  if (branch_source) {
    disk = src.chart_index;
    if (mesh.marked_points[disk] != source_vertex)
      throw Error(errc::solver_failure, "branch-chart sources must be the marked vertices");
    rho0 = surface::chi_radius(mesh, disk);
  } else if (src.chart == ChartKind::plane) {
    x_src = src.x;
    rho0 = 0.8 * plane_clearance(mesh, x_src);
    double max_r = 0.0;
    for (const cplx& p : mesh.curve.work_points) max_r = std::max(max_r, std::abs(p));
    const double h_bg = 4.0 * std::max(max_r, 0.5) / mesh.resolution;
    if (rho0 < 4.0 * h_bg)
      throw Error(errc::solver_failure,
                  "plane source too close to a disk, the cap, or the mesh scale");
  } else {
    throw Error(errc::solver_failure, "cap sources are not supported");
  }

  // For a plane source the support ball meets the double cover in two
  // disjoint components; mark the one containing the source.
  std::vector<char> on_sheet;
  if (!branch_source) {
    on_sheet.assign(n, 0);
    std::vector<std::vector<int>> adj(n);
    for (const auto& t : mesh.triangles) {
      if (t.chart != ChartKind::plane) continue;
      bool near = false;
      for (int e = 0; e < 3; ++e)
        if (std::abs(mesh.vertices[t.v[e]].x - x_src) < 1.3 * rho0) near = true;
      if (!near) continue;
      for (int e = 0; e < 3; ++e) {
        adj[t.v[e]].push_back(t.v[(e + 1) % 3]);
        adj[t.v[(e + 1) % 3]].push_back(t.v[e]);
      }
    }
    std::vector<int> stack{source_vertex};
    on_sheet[source_vertex] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : adj[v])
        if (!on_sheet[u]) {
          on_sheet[u] = 1;
          stack.push_back(u);
        }
    }
  }

  // chart distance of every vertex to the source (negative: outside support)
  auto chart_r = [&](int v) -> double {
    const auto& vx = mesh.vertices[v];
    if (branch_source) {
      if (vx.chart != ChartKind::branch || vx.chart_index != disk) return -1.0;
      return std::abs(vx.chart_pos);
    }
    if (!on_sheet[v]) return -1.0;
    if (vx.chart == ChartKind::infinity_cap && !(vx.chart_pos != cplx(0.0, 0.0))) return -1.0;
    return std::abs(vx.x - x_src);
  };

  // right-hand side: 2 pi * consistent measure load + split term
  Eigen::VectorXd F(n);
  for (int v = 0; v < n; ++v) F[v] = 2.0 * kPi * mesh.vertices[v].mu_load;
  const hypgreen::detail::TriQuadRule& rule = hypgreen::detail::tri_rule();
  for (const auto& t : mesh.triangles) {
    // triangles in the source chart only; for a plane source only the copy
    // on the source's sheet carries the split term
    if (branch_source) {
      if (t.chart != ChartKind::branch || t.chart_index != disk) continue;
    } else {
      if (t.chart != ChartKind::plane) continue;
      bool sheet_ok = false;
      for (int e = 0; e < 3; ++e)
        if (on_sheet[t.v[e]]) sheet_ok = true;
      if (!sheet_ok) continue;
    }
    const cplx origin = branch_source ? cplx(0.0, 0.0) : x_src;
    // quick reject: all corners beyond the support
    bool any = false;
    for (int e = 0; e < 3; ++e)
      if (std::abs(t.corner[e] - origin) < rho0) any = true;
    if (!any) continue;
    // the annulus term oscillates on the cutoff scale; integrate on a
    // 4^2-fold barycentric subdivision of each triangle
    const double area = tri_area(t.corner);
    constexpr int kSub = 4;
    for (int si = 0; si < kSub; ++si) {
      for (int sj = 0; si + sj < kSub; ++sj) {
        for (int up = 0; up < (si + sj < kSub - 1 ? 2 : 1); ++up) {
          // barycentric corners of the sub-triangle
          std::array<std::array<double, 3>, 3> sub;
          const double f = 1.0 / kSub;
          if (up == 0) {
            sub[0] = {1.0 - (si + sj) * f, si * f, sj * f};
            sub[1] = {1.0 - (si + 1 + sj) * f, (si + 1) * f, sj * f};
            sub[2] = {1.0 - (si + sj + 1) * f, si * f, (sj + 1) * f};
          } else {
            sub[0] = {1.0 - (si + 1 + sj) * f, (si + 1) * f, sj * f};
            sub[1] = {1.0 - (si + 1 + sj + 1) * f, (si + 1) * f, (sj + 1) * f};
            sub[2] = {1.0 - (si + sj + 1) * f, si * f, (sj + 1) * f};
          }
          for (int q = 0; q < 13; ++q) {
            std::array<double, 3> lam{0.0, 0.0, 0.0};
            for (int c = 0; c < 3; ++c)
              for (int e = 0; e < 3; ++e) lam[e] += rule.bary[q][c] * sub[c][e];
            const cplx p = lam[0] * t.corner[0] + lam[1] * t.corner[1] + lam[2] * t.corner[2];
            const double r = std::abs(p - origin);
            const double s = split_rhs(r, rho0);
            if (s == 0.0) continue;
            const double wq = rule.weight[q] * (area / (kSub * kSub)) * s;
            for (int e = 0; e < 3; ++e) F[t.v[e]] += wq * lam[e];
          }
        }
      }
    }
  }
  // enforce exact compatibility, then pin
  const double defect = F.sum() / n;
  F.array() -= defect;
  F[lap.pinned_vertex] = 0.0;

  Eigen::VectorXd u = lap.poisson->solve(F);
  if (lap.poisson->info() != Eigen::Success)
    throw Error(errc::solver_failure, "Poisson solve failed");

  GreenField field;
  field.source = source_vertex;
  field.values.resize(n);
  for (int v = 0; v < n; ++v) {
    double g = u[v];
    if (v != source_vertex) {
      const double r = chart_r(v);
      if (r > 0.0 && r < rho0) g += surface::chi_cutoff(r / rho0) * std::log(r);
    }
    field.values[v] = g;
  }

  // additive constant from the singularity-aware quadrature
  double mean;
  if (branch_source) {
    mean = surface::integrate_log_singular(
        mesh, field.values,
        {surface::LogSingularity{source_vertex, 1.0, field.values[source_vertex]}});
  } else {
    double acc = 0.0;
    for (int v = 0; v < n; ++v) {
      double val = field.values[v];
      if (v != source_vertex) {
        const double r = chart_r(v);
        if (r > 0.0 && r < rho0) val -= surface::chi_cutoff(r / rho0) * std::log(r);
      }
      acc += val * mesh.vertices[v].mu_weight;
    }
    mean = acc + plane_log_mean(mesh, x_src, rho0);
  }
  for (double& g : field.values) g -= mean;
  field.constant_fixed = true;
  return field;
}

double green_value(const GreenField& field, int vertex) {
  if (vertex < 0 || vertex >= static_cast<int>(field.values.size()))
    throw Error(errc::index_out_of_range, "vertex out of range");
  return field.values[vertex];
}

double green_difference_oracle(const SurfaceMesh& mesh, int i, int j, int z_vertex) {
  const auto& cd = mesh.curve;
  const int nb = static_cast<int>(cd.work_points.size());
  if (i < 0 || i >= nb || j < 0 || j >= nb)
    throw Error(errc::index_out_of_range, "branch index out of range");
  if (i == j) throw Error(errc::equal_indices, "oracle requires i != j");
  const int wi = mesh.marked_points[i], wj = mesh.marked_points[j];
  if (z_vertex == wi || z_vertex == wj)
    throw Error(errc::evaluation_at_pole, "evaluation point coincides with a pole of the ratio");

  const cplx ai = cd.work_points[i], aj = cd.work_points[j];
  auto log_ratio = [&](int v) -> double {
    const auto& vx = mesh.vertices[v];
    if (vx.chart == ChartKind::infinity_cap) {
      const cplx w = vx.chart_pos;
      // log |(x - ai)/(x - aj)| = log |1 - ai w| - log |1 - aj w|
      return std::log(std::abs(1.0 - ai * w)) - std::log(std::abs(1.0 - aj * w));
    }
    return std::log(std::abs(vx.x - ai)) - std::log(std::abs(vx.x - aj));
  };

  std::vector<double> vals(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (v == wi)
      vals[v] = -std::log(std::abs(ai - aj));
    else if (v == wj)
      vals[v] = std::log(std::abs(aj - ai));
    else
      vals[v] = log_ratio(v);
  }
  const double mean = surface::integrate_log_singular(
      mesh, vals,
      {surface::LogSingularity{wi, 2.0, vals[wi]}, surface::LogSingularity{wj, -2.0, vals[wj]}});

  const double at_z = vals[z_vertex];
  return 0.5 * at_z - 0.5 * mean;
}

SpectralData eigenpairs(const SurfaceMesh& mesh, const CanonicalLaplacian& lap, int count) {
  const int n = mesh.vertex_count();
  const int want = count + 1;
  if (want < 2 || want > n / 3)
    throw Error(errc::solver_failure, "requested eigenpair count out of range");

  // shift-invert: (S + M)^{-1} M v = theta v, lambda = 1/theta - 1
  Eigen::SparseMatrix<double> shifted = lap.stiffness;
  for (int v = 0; v < n; ++v) shifted.coeffRef(v, v) += lap.mass[v];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(shifted);
  if (factor.info() != Eigen::Success)
    throw Error(errc::solver_failure, "shifted operator factorization failed");
  const Eigen::VectorXd& M = lap.mass;

  for (int m_dim = std::min(n - 2, 2 * want + 120);; m_dim = std::min(n - 2, m_dim * 2)) {
    // Lanczos with full reorthogonalization in the M inner product
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(m_dim);
    Eigen::VectorXd alpha(m_dim), beta(m_dim);
    std::mt19937 rng(20240815);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v[k] = unit(rng);
    v /= std::sqrt(v.dot(M.cwiseProduct(v)));
    basis.push_back(v);

    int built = 0;
    for (int j = 0; j < m_dim; ++j) {
      Eigen::VectorXd w = factor.solve(M.cwiseProduct(basis[j]));
      alpha[j] = w.dot(M.cwiseProduct(basis[j]));
      w -= alpha[j] * basis[j];
      if (j > 0) w -= beta[j - 1] * basis[j - 1];
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) w -= w.dot(M.cwiseProduct(b)) * b;
      const double nb = std::sqrt(w.dot(M.cwiseProduct(w)));
      built = j + 1;
      if (nb < 1e-14 || j + 1 == m_dim) {
        beta[j] = 0.0;
        break;
      }
      beta[j] = nb;
      basis.push_back(w / nb);
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(built, built);
    for (int j = 0; j < built; ++j) {
      T(j, j) = alpha[j];
      if (j + 1 < built) {
        T(j, j + 1) = beta[j];
        T(j + 1, j) = beta[j];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // largest theta <-> smallest lambda
    std::vector<int> order(built);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return es.eigenvalues()[a] > es.eigenvalues()[b]; });

    const int avail = std::min(want, built);
    SpectralData out;
    out.eigenvalues.resize(avail);
    out.eigenfunctions.resize(n, avail);
    bool converged = (avail == want);
    for (int k = 0; k < avail; ++k) {
      const double theta = es.eigenvalues()[order[k]];
      const double lambda = 1.0 / theta - 1.0;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < built; ++j) x += es.eigenvectors()(j, order[k]) * basis[j];
      x /= std::sqrt(x.dot(M.cwiseProduct(x)));
      const Eigen::VectorXd resid = lap.stiffness * x - lambda * M.cwiseProduct(x);
      if (resid.norm() > 1e-8 * (1.0 + std::abs(lambda))) converged = false;
      // deterministic sign
      int imax = 0;
      for (int q = 1; q < n; ++q)
        if (std::abs(x[q]) > std::abs(x[imax])) imax = q;
      if (x[imax] < 0) x = -x;
      out.eigenvalues[k] = lambda;
      out.eigenfunctions.col(k) = x;
    }
    if (!converged && m_dim < n - 2 && m_dim < 6 * want + 600) continue;
    if (!converged)
      throw Error(errc::solver_failure, "Lanczos did not converge the requested eigenpairs");

    double defect = 0.0;
    for (int a = 0; a < avail; ++a)
      for (int b = a; b < avail; ++b) {
        const double ip =
            out.eigenfunctions.col(a).dot(M.cwiseProduct(out.eigenfunctions.col(b)));
        defect = std::max(defect, std::abs(ip - (a == b ? 1.0 : 0.0)));
      }
    out.ortho_defect = defect;
    return out;
  }
}

PhiResult kawazumi_zhang_phi(const SurfaceMesh& mesh, const SpectralData& spec,
                             double tail_tolerance) {
  const auto& cd = mesh.curve;
  const int h = cd.genus();
  const int n = mesh.vertex_count();
  const int L = static_cast<int>(spec.eigenvalues.size()) - 1;
  if (L < 4) throw Error(errc::insufficient_spectrum, "spectral truncation too small");

  // F_mn(v) = h P_m conj(P_n) / sum_k |P_k|^2, smooth across the whole
  // surface; at the cap the reversed-coefficient polynomials give the same
  // ratio and stay finite at x = infinity.
  std::vector<Eigen::VectorXcd> P(n);
  for (int v = 0; v < n; ++v) {
    const auto& vx = mesh.vertices[v];
    if (vx.chart == ChartKind::infinity_cap) {
      const cplx w = vx.chart_pos;
      Eigen::VectorXcd mono(h);
      cplx wp(1.0, 0.0);
      for (int m = h - 1; m >= 0; --m) {
        mono[m] = wp;
        wp *= w;
      }
      P[v] = cd.ortho.transpose() * mono;
    } else {
      P[v] = periods::ortho_poly_values(cd, vx.x);
    }
  }

  std::vector<double> contribution(L + 1, 0.0);
  double phi = 0.0;
  double c0_defect = 0.0;
  for (int l = 0; l <= L; ++l) {
    const double lambda = spec.eigenvalues[l];
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(h, h);
    for (int v = 0; v < n; ++v) {
      const double w = spec.eigenfunctions(v, l) * mesh.vertices[v].mu_weight;
      const double denom = P[v].squaredNorm();
      if (denom == 0.0) continue;
      c += (w * h / denom) * (P[v] * P[v].adjoint());
    }
    if (l == 0) {
      // the constant mode pairs the wedge products into delta_mn and pins
      // the chart constants; phi_0 is 1/sqrt of the total mass
      const double phi0 = spec.eigenfunctions(0, 0);
      double defect = 0.0;
      for (int a = 0; a < h; ++a)
        for (int b = 0; b < h; ++b)
          defect = std::max(defect,
                            std::abs(c(a, b) / phi0 - (a == b ? cplx(1.0, 0.0) : cplx(0.0, 0.0))));
      c0_defect = defect;
      continue;
    }
    if (lambda < 1e-10) continue;
    // wedge integrals in the hermitian-pairing normalization (i/2) int a ^ conj(b);
    // the scale is pinned by the exact genus-2 identity behind theorem_B_residual
    const double term = 2.0 / lambda * c.squaredNorm();
    contribution[l] = term;
    phi += term;
  }

  double s_last = 0.0, s_prev = 0.0;
  for (int l = 1; l <= L; ++l) {
    if (l > L / 2)
      s_last += contribution[l];
    else if (l > L / 4)
      s_prev += contribution[l];
  }
  double tail = s_last;
  if (s_prev > 0.0 && s_last < s_prev) {
    const double q = std::min(0.95, s_last / s_prev);
    tail = s_last * q / (1.0 - q);
  }
  PhiResult out{phi, tail, c0_defect};
  if (tail > tail_tolerance)
    throw Error(errc::insufficient_spectrum, "spectral tail estimate exceeds the tolerance");
  return out;
}

EnergyResult weierstrass_energy_psi(const SurfaceMesh& mesh, const CanonicalLaplacian& lap) {
  const int nb = static_cast<int>(mesh.marked_points.size());
  EnergyResult out;
  out.fields.reserve(nb);
  for (int i = 0; i < nb; ++i)
    out.fields.push_back(green_function(mesh, lap, mesh.marked_points[i]));

  out.green_matrix = Eigen::MatrixXd::Zero(nb, nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      if (i == j) continue;
      out.green_matrix(i, j) = 0.5 * (out.fields[i].values[mesh.marked_points[j]] +
                                      out.fields[j].values[mesh.marked_points[i]]);
    }
  double sum = 0.0;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      if (i != j) sum += out.green_matrix(i, j);
  out.psi = sum / nb;
  return out;
}

Eigen::MatrixXd theorem_A_residuals(const branch::BranchSet& bs,
                                    const Eigen::MatrixXd& green_matrix, double psi) {
  const int h = bs.genus;
  const int nb = static_cast<int>(bs.size());
  const double coef = 1.0 / (4.0 * h * (2.0 * h + 1.0));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nb, nb);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      if (i == j) continue;
      const double logd = branch::delta_log(bs, i, j).real();
      out(i, j) = green_matrix(i, j) - coef * logd - psi / (2.0 * h + 1.0);
    }
  return out;
}

double theorem_A_spread(const branch::BranchSet& bs, const Eigen::MatrixXd& green_matrix) {
  const int h = bs.genus;
  const int nb = static_cast<int>(bs.size());
  const double coef = 1.0 / (4.0 * h * (2.0 * h + 1.0));
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j) {
      if (i == j) continue;
      const double v = green_matrix(i, j) - coef * branch::delta_log(bs, i, j).real();
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  return hi - lo;
}

double theorem_B_residual(double psi, double phi, int genus) {
  return psi - phi / (2.0 * genus) - std::log(2.0);
}

}  // namespace hypgreen::laplace
