#include "hypgreen/surface_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "delaunay.hpp"
#include "tri_quadrature.hpp"

namespace hypgreen::surface {

namespace {

constexpr double kGolden = 2.399963229728653;

// deterministic jitter in [-0.5, 0.5)
double hash_jitter(int k) {
  const double v = std::sin(k * 12.9898 + 4.1414) * 43758.5453;
  return v - std::floor(v) - 0.5;
}

struct BasePoint {
  cplx x;          // plane coordinate (cap center holds a placeholder)
  cplx w;          // 1/x chart coordinate (cap and ring points)
  int disk = -1;   // branch disk membership
  bool on_ring = false;
  bool cap_interior = false;
  bool is_center = false;  // branch center
};

struct PointFilter {
  explicit PointFilter(double cell) : cell_(cell) {}

  bool far_enough(cplx p, double radius) const {
    const int cx = static_cast<int>(std::floor(p.real() / cell_));
    const int cy = static_cast<int>(std::floor(p.imag() / cell_));
    const int reach = std::max(1, static_cast<int>(std::ceil(radius / cell_)));
    for (int ix = cx - reach; ix <= cx + reach; ++ix)
      for (int iy = cy - reach; iy <= cy + reach; ++iy) {
        const auto it = grid_.find(key(ix, iy));
        if (it == grid_.end()) continue;
        for (const cplx& q : it->second)
          if (std::abs(q - p) < radius) return false;
      }
    return true;
  }

  void accept(cplx p) {
    const int cx = static_cast<int>(std::floor(p.real() / cell_));
    const int cy = static_cast<int>(std::floor(p.imag() / cell_));
    grid_[key(cx, cy)].push_back(p);
  }

 private:
  static std::int64_t key(int ix, int iy) {
    return (static_cast<std::int64_t>(ix) << 32) ^ static_cast<std::uint32_t>(iy);
  }
  double cell_;
  std::unordered_map<std::int64_t, std::vector<cplx>> grid_;
};

double tri_area(const std::array<cplx, 3>& c) {
  const cplx u = c[1] - c[0], v = c[2] - c[0];
  return 0.5 * (u.real() * v.imag() - u.imag() * v.real());
}

// sqrt of prod(x - roots) continued along straight segments
class Continuer {
 public:
  Continuer(const std::vector<cplx>& roots, cplx x0) : roots_(roots), x_(x0) {
    y_ = std::sqrt(eval(x0));
  }
  cplx advance(cplx x) {
    const cplx start = x_;
    const cplx dir = x - start;
    const double len = std::abs(dir);
    if (len == 0.0) return y_;
    double done = 0.0;
    while (done < len) {
      const double step = std::max(0.35 * nearest(x_), 1e-13 * len);
      done = std::min(len, done + step);
      const cplx xn = start + dir * (done / len);
      const cplx s = std::sqrt(eval(xn));
      y_ = (std::abs(s - y_) <= std::abs(s + y_)) ? s : -s;
      x_ = xn;
    }
    return y_;
  }
  cplx value() const { return y_; }

 private:
  cplx eval(cplx x) const {
    cplx p(1.0, 0.0);
    for (const cplx& r : roots_) p *= (x - r);
    return p;
  }
  double nearest(cplx x) const {
    double d = 1e300;
    for (const cplx& r : roots_) d = std::min(d, std::abs(x - r));
    return d;
  }
  const std::vector<cplx>& roots_;
  cplx x_;
  cplx y_;
};

std::int64_t und_key(int a, int b) {
  const int lo = std::min(a, b), hi = std::max(a, b);
  return (static_cast<std::int64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
}

double rho_plane(const periods::CurveData& cd, cplx xi) {
  const Eigen::VectorXcd p = periods::ortho_poly_values(cd, xi);
  return p.squaredNorm() / (cd.genus() * std::abs(periods::sheet_polynomial(cd, xi)));
}

double rho_branch(const periods::CurveData& cd, int disk, cplx t) {
  const cplx u = t * t;
  const cplx center = cd.work_points[disk];
  cplx g(1.0, 0.0);
  for (std::size_t r = 0; r < cd.work_points.size(); ++r) {
    if (static_cast<int>(r) == disk) continue;
    g *= (center + u - cd.work_points[r]);
  }
  const Eigen::VectorXcd p = periods::ortho_poly_values(cd, center + u);
  return 4.0 * p.squaredNorm() / (cd.genus() * std::abs(g));
}

double rho_cap(const periods::CurveData& cd, cplx w) {
  const int h = cd.genus();
  // P~_k(w) = P_k(1/w) w^{h-1} = sum_m C_mk w^{h-1-(m-1)}, F(w) = prod(1 - p_r w)
  Eigen::VectorXcd mono(h);
  cplx wp(1.0, 0.0);
  for (int m = h - 1; m >= 0; --m) {
    mono[m] = wp;
    wp *= w;
  }
  const Eigen::VectorXcd pt = cd.ortho.transpose() * mono;
  cplx F(1.0, 0.0);
  for (const cplx& r : cd.work_points) F *= (1.0 - r * w);
  return pt.squaredNorm() / (h * std::abs(F));
}

}  // namespace

double chi_cutoff(double s) {
  if (s <= 0.5) return 1.0;
  if (s >= 1.0) return 0.0;
  const double u = 2.0 * s - 1.0;
  const double u2 = u * u;
  const double u4 = u2 * u2;
  return 1.0 - u4 * (35.0 - 84.0 * u + 70.0 * u2 - 20.0 * u2 * u);
}

double chi_radius(const SurfaceMesh& mesh, int disk_index) {
  return 0.9 * std::sqrt(mesh.disk_radii[disk_index]);
}

namespace {

SurfaceMesh build_mesh_attempt(const periods::CurveData& cd, int resolution, int salt) {
  if (resolution < 8) throw Error(errc::resolution_too_low, "resolution must be at least 8");
  auto jit = [salt](int k) { return hash_jitter(k + salt * 101159); };
  if (cd.ortho.size() == 0)
    throw Error(errc::solver_failure, "curve data must carry the orthonormal basis");

  const int h = cd.genus();
  const int n_branch = static_cast<int>(cd.work_points.size());

  double max_r = 0.0;
  for (const cplx& p : cd.work_points) max_r = std::max(max_r, std::abs(p));
  const double R_out = 2.0 * std::max(max_r, 0.5);
  const double h_bg = 2.0 * R_out / resolution;

  std::vector<double> disk_radius(n_branch);
  for (int i = 0; i < n_branch; ++i) {
    double dmin = 1e300;
    for (int j = 0; j < n_branch; ++j)
      if (j != i) dmin = std::min(dmin, std::abs(cd.work_points[i] - cd.work_points[j]));
    disk_radius[i] = std::min(dmin / 3.0, 0.45 * (R_out - std::abs(cd.work_points[i])));
  }

  // ---- point generation -------------------------------------------------
  std::vector<BasePoint> pts;
  PointFilter filter(0.5 * h_bg);
  auto push = [&](const BasePoint& bp, double clearance) {
    if (clearance > 0.0 && !filter.far_enough(bp.x, clearance)) return;
    filter.accept(bp.x);
    pts.push_back(bp);
  };

  for (int i = 0; i < n_branch; ++i) {
    BasePoint bp;
    bp.x = cd.work_points[i];
    bp.disk = i;
    bp.is_center = true;
    push(bp, 0.0);
  }

  // polar disks; x-radii quadratic in the ring index so t-chart rings are uniform
  for (int i = 0; i < n_branch; ++i) {
    const double r = disk_radius[i];
    const int P = std::max(10, static_cast<int>(std::ceil(2.0 * r / std::min(h_bg, 0.45 * r))));
    // half-step rings double the radial resolution across the cutoff
    // annulus, where the split right-hand side varies fastest
    std::vector<double> fracs;
    for (int m = 1; m <= P; ++m) {
      fracs.push_back(static_cast<double>(m) / P);
      const double mid = (m + 0.5) / P;
      if (m < P && mid > 0.40 && mid < 0.95) fracs.push_back(mid);
    }
    std::sort(fracs.begin(), fracs.end());
    for (std::size_t fi = 0; fi < fracs.size(); ++fi) {
      const double frac = fracs[fi];
      const bool outermost = fi + 1 == fracs.size();
      const double s = r * frac * frac;
      const double gap_lo = (fi > 0) ? s - r * fracs[fi - 1] * fracs[fi - 1] : s;
      const double gap_hi = outermost ? gap_lo : r * fracs[fi + 1] * fracs[fi + 1] - s;
      const double gap = std::min(gap_lo, gap_hi);
      const int m_eq = static_cast<int>(std::lround(frac * P));
      const int n_ang = std::max(6, static_cast<int>(std::ceil(kPi * frac * P)));
      const double phase = kGolden * (fi + 1);
      for (int k = 0; k < n_ang; ++k) {
        const double th = 2.0 * kPi * k / n_ang + phase +
                          0.25 * (2.0 * kPi / n_ang) * jit(i * 65537 + m_eq * 491 + k);
        const double dr = outermost ? -0.10 * gap * (1.0 + jit(i * 131071 + m_eq * 977 + k))
                                    : 0.30 * gap * jit(i * 131071 + m_eq * 977 + k);
        BasePoint bp;
        bp.x = cd.work_points[i] + std::polar(s + dr, th);
        bp.disk = i;
        push(bp, 0.0);
      }
    }
  }

  // domain boundary ring (shared with the cap)
  const int n_bd = std::max(24, static_cast<int>(std::ceil(2.0 * kPi * R_out / h_bg)));
  const int first_ring_id = static_cast<int>(pts.size());
  const double ring_sagitta = R_out * (2.0 * kPi / n_bd) * (2.0 * kPi / n_bd) / 8.0;
  for (int k = 0; k < n_bd; ++k) {
    const double th =
        2.0 * kPi * k / n_bd + 0.3 * (2.0 * kPi / n_bd) * jit(k * 7919 + 13);
    BasePoint bp;
    bp.x = std::polar(R_out - 0.2 * ring_sagitta * (1.0 + jit(k * 31 + 7)), th);
    bp.w = 1.0 / bp.x;
    bp.on_ring = true;
    push(bp, 0.0);
  }

  auto size_field = [&](cplx x) {
    double d = 1e300;
    for (int i = 0; i < n_branch; ++i) d = std::min(d, std::abs(x - cd.work_points[i]));
    return std::min(h_bg, std::max(0.45 * d, 1e-6));
  };
  auto inside_any_disk = [&](cplx x) {
    for (int i = 0; i < n_branch; ++i)
      if (std::abs(x - cd.work_points[i]) < 1.05 * disk_radius[i]) return true;
    return false;
  };

  // graded annuli around the disks, then the hex background
  for (int i = 0; i < n_branch; ++i) {
    double rho = disk_radius[i] * 1.45;
    int ring = 0;
    while (0.45 * rho < h_bg && rho < R_out) {
      const double spacing = 0.45 * rho;
      const int n_ang = std::max(10, static_cast<int>(std::ceil(2.0 * kPi * rho / spacing)));
      const double phase = kGolden * (ring + 7);
      for (int k = 0; k < n_ang; ++k) {
        const double th = 2.0 * kPi * k / n_ang + phase;
        const double jr = 0.05 * jit(i * 97 + ring * 37 + k);
        BasePoint bp;
        bp.x = cd.work_points[i] + std::polar(rho * (1.0 + jr), th);
        if (std::abs(bp.x) > R_out - 0.6 * h_bg) continue;
        if (inside_any_disk(bp.x)) continue;
        push(bp, 0.52 * size_field(bp.x));
      }
      rho *= 1.45;
      ++ring;
    }
  }
  {
    const double dy = h_bg * std::sqrt(3.0) / 2.0;
    const int rows = static_cast<int>(std::ceil(R_out / dy)) + 1;
    const int cols = static_cast<int>(std::ceil(R_out / h_bg)) + 1;
    for (int j = -rows; j <= rows; ++j) {
      const double y = j * dy;
      for (int k = -cols; k <= cols; ++k) {
        const double x0 = k * h_bg + ((j & 1) ? 0.5 * h_bg : 0.0);
        BasePoint bp;
        bp.x = cplx(x0 + 0.07 * h_bg * jit(j * 8191 + k),
                    y + 0.07 * h_bg * jit(j * 8191 + k + 4051));
        if (std::abs(bp.x) > R_out - 0.55 * h_bg) continue;
        if (inside_any_disk(bp.x)) continue;
        push(bp, 0.52 * size_field(bp.x));
      }
    }
  }
  const int n_plane = static_cast<int>(pts.size());

  // cap points in the w chart (ring first, then interior rings, then center)
  std::vector<cplx> cap_w;
  std::vector<int> cap_global;
  for (int k = 0; k < n_bd; ++k) {
    cap_w.push_back(pts[first_ring_id + k].w);
    cap_global.push_back(first_ring_id + k);
  }
  const int M_cap = std::max(3, static_cast<int>(std::lround(n_bd / (2.0 * kPi))));
  for (int m = 1; m < M_cap; ++m) {
    const double rho = (1.0 / R_out) * (1.0 - static_cast<double>(m) / M_cap);
    const double gap = (1.0 / R_out) / M_cap;
    const int n_ang =
        std::max(6, static_cast<int>(std::ceil(n_bd * (1.0 - static_cast<double>(m) / M_cap))));
    const double phase = kGolden * m;
    for (int k = 0; k < n_ang; ++k) {
      const double th = 2.0 * kPi * k / n_ang + phase;
      BasePoint bp;
      bp.w = std::polar(rho + 0.3 * gap * jit(m * 211 + k + 99991), th);
      bp.x = 1.0 / bp.w;
      bp.cap_interior = true;
      cap_w.push_back(bp.w);
      cap_global.push_back(static_cast<int>(pts.size()));
      pts.push_back(bp);
    }
  }
  {
    BasePoint bp;
    bp.w = cplx(0.0, 0.0);
    bp.x = cplx(0.0, 0.0);  // the cap center covers x = infinity
    bp.cap_interior = true;
    cap_w.push_back(bp.w);
    cap_global.push_back(static_cast<int>(pts.size()));
    pts.push_back(bp);
  }

  // ---- base triangulations ----------------------------------------------
  std::vector<cplx> plane_xy(n_plane);
  for (int i = 0; i < n_plane; ++i) plane_xy[i] = pts[i].x;
  detail::Delaunay plane_dt(plane_xy);
  detail::Delaunay cap_dt(cap_w);

  struct BaseTri {
    std::array<int, 3> v;
    ChartKind chart;
    int chart_index;
  };
  std::vector<BaseTri> base;
  for (const auto& t : plane_dt.triangles()) {
    BaseTri bt;
    bt.v = t;
    const int d0 = pts[t[0]].disk, d1 = pts[t[1]].disk, d2 = pts[t[2]].disk;
    if (d0 >= 0 && d0 == d1 && d1 == d2) {
      bt.chart = ChartKind::branch;
      bt.chart_index = d0;
    } else {
      bt.chart = ChartKind::plane;
      bt.chart_index = -1;
    }
    base.push_back(bt);
  }
  for (const auto& t : cap_dt.triangles()) {
    BaseTri bt;
    bt.v = {cap_global[t[0]], cap_global[t[1]], cap_global[t[2]]};
    bt.chart = ChartKind::infinity_cap;
    bt.chart_index = -1;
    base.push_back(bt);
  }
  const int n_base = static_cast<int>(base.size());

  // closed oriented sphere: every directed edge exactly once
  std::unordered_map<std::int64_t, int> directed;
  std::unordered_map<std::int64_t, std::array<int, 2>> und;
  for (int t = 0; t < n_base; ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = base[t].v[e], b = base[t].v[(e + 1) % 3];
      const std::int64_t dk = (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
      if (directed.count(dk))
        throw Error(errc::resolution_too_low, "base mesh is not an oriented manifold");
      directed[dk] = t;
      auto it = und.find(und_key(a, b));
      if (it == und.end())
        und[und_key(a, b)] = {t, -1};
      else if (it->second[1] < 0)
        it->second[1] = t;
      else
        throw Error(errc::resolution_too_low, "non-manifold base edge");
    }
  }
  for (const auto& [k, pr] : und)
    if (pr[1] < 0) throw Error(errc::resolution_too_low, "base mesh has boundary");

  // ---- sheet transition flags by analytic continuation -------------------
  std::vector<cplx> wroots;
  for (const cplx& p : cd.work_points) wroots.push_back(1.0 / p);
  auto F_of = [&](cplx w) {
    cplx v(1.0, 0.0);
    for (const cplx& r : cd.work_points) v *= (1.0 - r * w);
    return v;
  };
  auto f_of = [&](cplx x) {
    cplx v(1.0, 0.0);
    for (const cplx& r : cd.work_points) v *= (x - r);
    return v;
  };

  std::vector<cplx> centroid(n_base);
  std::vector<cplx> ref(n_base);
  std::vector<char> is_cap(n_base);
  for (int t = 0; t < n_base; ++t) {
    if (base[t].chart == ChartKind::infinity_cap) {
      is_cap[t] = 1;
      cplx c(0.0, 0.0);
      for (int e = 0; e < 3; ++e) c += pts[base[t].v[e]].w;
      centroid[t] = c / 3.0;
      ref[t] = std::sqrt(F_of(centroid[t]));
    } else {
      is_cap[t] = 0;
      cplx c(0.0, 0.0);
      for (int e = 0; e < 3; ++e) c += pts[base[t].v[e]].x;
      centroid[t] = c / 3.0;
      ref[t] = std::sqrt(f_of(centroid[t]));
    }
  }

  const double hp1 = h + 1.0;
  std::unordered_map<std::int64_t, char> edge_flip;
  for (const auto& [key, pr] : und) {
    const int ta = pr[0], tb = pr[1];
    bool flip = false;
    if (!is_cap[ta] && !is_cap[tb]) {
      Continuer c(cd.work_points, centroid[ta]);
      const cplx yb = c.advance(centroid[tb]);
      flip = std::abs(yb - ref[tb]) > std::abs(yb + ref[tb]);
    } else if (is_cap[ta] && is_cap[tb]) {
      // compare sqrt(F) continuations; the constant relating sqrt(F) to the
      // Continuer's sqrt(prod(w - 1/p_r)) is shared by both endpoints
      Continuer c(wroots, centroid[ta]);
      const cplx scale = ref[ta] / c.value();
      const cplx gb = c.advance(centroid[tb]) * scale;
      flip = std::abs(gb - ref[tb]) > std::abs(gb + ref[tb]);
    } else {
      const int tx = is_cap[ta] ? tb : ta;
      const int tw = is_cap[ta] ? ta : tb;
      const int va = static_cast<int>(key >> 32);  // shared vertex (ring point)
      const cplx xv = pts[va].x;
      const cplx wv = pts[va].w;
      Continuer cx(cd.work_points, centroid[tx]);
      const cplx yx = cx.advance(xv);
      Continuer cw(wroots, centroid[tw]);
      const cplx scale = ref[tw] / cw.value();
      const cplx gw = cw.advance(wv) * scale;
      const cplx y_from_cap = gw * std::pow(wv, -hp1);
      flip = std::abs(yx - y_from_cap) > std::abs(yx + y_from_cap);
    }
    edge_flip[key] = flip ? 1 : 0;
  }

  // ---- vertex stars and the lifted complex -------------------------------
  auto next_around = [&](int tri, int v) {
    const auto& tv = base[tri].v;
    int iv = -1;
    for (int e = 0; e < 3; ++e)
      if (tv[e] == v) iv = e;
    const int b = tv[(iv + 2) % 3];
    const std::int64_t dk = (static_cast<std::int64_t>(v) << 32) | static_cast<std::uint32_t>(b);
    const auto it = directed.find(dk);
    return it == directed.end() ? -1 : it->second;
  };

  const int n_base_pts = static_cast<int>(pts.size());
  std::vector<int> star_seed(n_base_pts, -1);
  for (int t = 0; t < n_base; ++t)
    for (int e = 0; e < 3; ++e)
      if (star_seed[base[t].v[e]] < 0) star_seed[base[t].v[e]] = t;

  std::vector<std::array<std::array<int, 3>, 2>> lift_vid(n_base);
  for (auto& a : lift_vid) a = {{{-1, -1, -1}, {-1, -1, -1}}};

  std::vector<SurfaceMesh::Vertex> lifted_vertices;
  std::vector<int> lifted_base;
  std::vector<std::array<int, 2>> orbit_rep;
  int ramified = 0;

  for (int v = 0; v < n_base_pts; ++v) {
    std::vector<int> cyc;
    std::vector<char> flips;
    int t = star_seed[v];
    if (t < 0) throw Error(errc::resolution_too_low, "isolated base vertex");
    do {
      cyc.push_back(t);
      const int tn = next_around(t, v);
      if (tn < 0) throw Error(errc::resolution_too_low, "open vertex star");
      const auto& tv = base[t].v;
      int iv = -1;
      for (int e = 0; e < 3; ++e)
        if (tv[e] == v) iv = e;
      const int shared = tv[(iv + 2) % 3];
      flips.push_back(edge_flip.at(und_key(v, shared)));
      t = tn;
    } while (t != star_seed[v]);

    const int L = static_cast<int>(cyc.size());
    std::vector<int> parity(L, 0);
    for (int k = 0; k + 1 < L; ++k) parity[k + 1] = parity[k] ^ flips[k];
    const int total = parity[L - 1] ^ flips[L - 1];

    auto corner_of = [&](int tri) {
      for (int e = 0; e < 3; ++e)
        if (base[tri].v[e] == v) return e;
      return -1;
    };

    if (total == 0) {
      for (int orbit = 0; orbit < 2; ++orbit) {
        const int vid = static_cast<int>(lifted_vertices.size());
        lifted_vertices.push_back({});
        lifted_base.push_back(v);
        orbit_rep.push_back({cyc[0], orbit});
        for (int k = 0; k < L; ++k) lift_vid[cyc[k]][parity[k] ^ orbit][corner_of(cyc[k])] = vid;
      }
    } else {
      ++ramified;
      const int vid = static_cast<int>(lifted_vertices.size());
      lifted_vertices.push_back({});
      lifted_base.push_back(v);
      orbit_rep.push_back({cyc[0], 0});
      for (int k = 0; k < L; ++k) {
        lift_vid[cyc[k]][parity[k]][corner_of(cyc[k])] = vid;
        lift_vid[cyc[k]][parity[k] ^ 1][corner_of(cyc[k])] = vid;
      }
    }
  }
  if (ramified != n_branch)
    throw Error(errc::resolution_too_low,
                "sheet transitions do not ramify exactly at the branch points");

  SurfaceMesh mesh;
  mesh.curve = cd;
  mesh.resolution = resolution;
  mesh.disk_radii = disk_radius;
  mesh.vertices = std::move(lifted_vertices);

  for (int lv = 0; lv < mesh.vertex_count(); ++lv) {
    const int v = lifted_base[lv];
    auto& out = mesh.vertices[lv];
    out.base_id = v;
    out.x = pts[v].x;
    out.sheet = orbit_rep[lv][1];
    if (pts[v].disk >= 0) {
      out.chart = ChartKind::branch;
      out.chart_index = pts[v].disk;
      out.chart_pos = cplx(0.0, 0.0);
    } else if (pts[v].cap_interior || pts[v].on_ring) {
      out.chart = ChartKind::infinity_cap;
      out.chart_index = -1;
      out.chart_pos = pts[v].w;
    } else {
      out.chart = ChartKind::plane;
      out.chart_index = -1;
      out.chart_pos = pts[v].x;
    }
    if (pts[v].is_center) out.sheet = 0;
  }

  mesh.involution.assign(mesh.vertex_count(), -1);
  for (int lv = 0; lv < mesh.vertex_count(); ++lv) {
    const int t0 = orbit_rep[lv][0];
    const int s0 = orbit_rep[lv][1];
    int corner = -1;
    for (int e = 0; e < 3; ++e)
      if (lift_vid[t0][s0][e] == lv) corner = e;
    mesh.involution[lv] = lift_vid[t0][s0 ^ 1][corner];
  }

  mesh.marked_points.assign(n_branch, -1);
  for (int lv = 0; lv < mesh.vertex_count(); ++lv) {
    const int v = lifted_base[lv];
    if (pts[v].is_center) mesh.marked_points[pts[v].disk] = lv;
  }

  // ---- t coordinates on the branch disks ---------------------------------
  std::vector<cplx> t_coord(mesh.vertex_count(), cplx(0.0, 0.0));
  std::vector<char> t_known(mesh.vertex_count(), 0);
  {
    std::map<int, std::vector<std::pair<int, int>>> disk_tris;
    for (int t = 0; t < n_base; ++t) {
      if (base[t].chart != ChartKind::branch) continue;
      for (int s = 0; s < 2; ++s) disk_tris[base[t].chart_index].push_back({t, s});
    }
    for (const auto& [disk, tris] : disk_tris) {
      const cplx center = cd.work_points[disk];
      std::map<std::pair<int, int>, char> done;
      for (const auto& seedp : tris) {
        if (done.count(seedp)) continue;
        std::vector<std::pair<int, int>> stack{seedp};
        done[seedp] = 1;
        while (!stack.empty()) {
          const auto [t, s] = stack.back();
          stack.pop_back();
          cplx ref_t(0.0, 0.0);
          bool have_ref = false;
          std::vector<int> unknown;
          for (int e = 0; e < 3; ++e) {
            const int lv = lift_vid[t][s][e];
            const int bv = lifted_base[lv];
            if (pts[bv].is_center) {
              t_known[lv] = 1;
              continue;
            }
            if (t_known[lv]) {
              ref_t = t_coord[lv];
              have_ref = true;
            } else {
              unknown.push_back(lv);
            }
          }
          for (int lv : unknown) {
            const cplx root = std::sqrt(pts[lifted_base[lv]].x - center);
            if (!have_ref) {
              t_coord[lv] = root;  // fresh component: principal branch seed
            } else {
              t_coord[lv] = (std::abs(root - ref_t) <= std::abs(root + ref_t)) ? root : -root;
            }
            t_known[lv] = 1;
            ref_t = t_coord[lv];
            have_ref = true;
          }
          for (int e = 0; e < 3; ++e) {
            const int a = base[t].v[e], b = base[t].v[(e + 1) % 3];
            const std::int64_t dk =
                (static_cast<std::int64_t>(b) << 32) | static_cast<std::uint32_t>(a);
            const auto it = directed.find(dk);
            if (it == directed.end()) continue;
            const int tn = it->second;
            if (base[tn].chart != ChartKind::branch || base[tn].chart_index != disk) continue;
            const int sn = s ^ edge_flip.at(und_key(a, b));
            if (done.count({tn, sn})) continue;
            done[{tn, sn}] = 1;
            stack.push_back({tn, sn});
          }
        }
      }
    }
  }
  for (int lv = 0; lv < mesh.vertex_count(); ++lv)
    if (mesh.vertices[lv].chart == ChartKind::branch) mesh.vertices[lv].chart_pos = t_coord[lv];

  // ---- lifted triangles with chart corners and masses --------------------
  const hypgreen::detail::TriQuadRule& rule = hypgreen::detail::tri_rule();
  mesh.triangles.reserve(2 * static_cast<std::size_t>(n_base));
  double raw_mass = 0.0;
  std::vector<double> raw_weight(mesh.vertex_count(), 0.0);
  std::vector<double> raw_load(mesh.vertex_count(), 0.0);

  for (int t = 0; t < n_base; ++t) {
    for (int s = 0; s < 2; ++s) {
      SurfaceMesh::Triangle tri;
      tri.chart = base[t].chart;
      tri.chart_index = base[t].chart_index;
      for (int e = 0; e < 3; ++e) tri.v[e] = lift_vid[t][s][e];
      for (int e = 0; e < 3; ++e) {
        const int lv = tri.v[e];
        const int bv = lifted_base[lv];
        switch (tri.chart) {
          case ChartKind::plane:
            tri.corner[e] = pts[bv].x;
            break;
          case ChartKind::branch:
            tri.corner[e] = pts[bv].is_center ? cplx(0.0, 0.0) : t_coord[lv];
            break;
          case ChartKind::infinity_cap:
            tri.corner[e] = pts[bv].w;
            break;
        }
      }
      const double area = tri_area(tri.corner);
      if (!(area > 0.0))
        throw Error(errc::resolution_too_low, "degenerate or misoriented triangle");

      double mass = 0.0;
      std::array<double, 3> corner_load{0.0, 0.0, 0.0};
      for (int q = 0; q < 13; ++q) {
        const auto& b = rule.bary[q];
        const cplx p = b[0] * tri.corner[0] + b[1] * tri.corner[1] + b[2] * tri.corner[2];
        double rho = 0.0;
        switch (tri.chart) {
          case ChartKind::plane:
            rho = rho_plane(cd, p);
            break;
          case ChartKind::branch:
            rho = rho_branch(cd, tri.chart_index, p);
            break;
          case ChartKind::infinity_cap:
            rho = rho_cap(cd, p);
            break;
        }
        const double wq = rule.weight[q] * area * rho;
        mass += wq;
        for (int e = 0; e < 3; ++e) corner_load[e] += wq * b[e];
      }
      tri.mass = mass;
      raw_mass += mass;
      for (int e = 0; e < 3; ++e) {
        raw_weight[tri.v[e]] += mass / 3.0;
        raw_load[tri.v[e]] += corner_load[e];
      }
      mesh.triangles.push_back(tri);
    }
  }

  mesh.raw_mass = raw_mass;
  for (int lv = 0; lv < mesh.vertex_count(); ++lv) {
    mesh.vertices[lv].mu_weight = raw_weight[lv] / raw_mass;
    mesh.vertices[lv].mu_load = raw_load[lv] / raw_mass;
  }
  for (auto& tri : mesh.triangles) tri.mass /= raw_mass;

  // ---- Euler characteristic and connectivity -----------------------------
  std::unordered_map<std::int64_t, int> lifted_edges;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) lifted_edges[und_key(tri.v[e], tri.v[(e + 1) % 3])]++;
  for (const auto& [k, cnt] : lifted_edges)
    if (cnt != 2) throw Error(errc::resolution_too_low, "lifted complex is not closed");
  mesh.euler_characteristic = mesh.vertex_count() - static_cast<int>(lifted_edges.size()) +
                              static_cast<int>(mesh.triangles.size());
  if (mesh.euler_characteristic != 2 - 2 * h)
    throw Error(errc::resolution_too_low, "Euler characteristic mismatch");

  {
    std::vector<std::vector<int>> adj(mesh.vertex_count());
    for (const auto& tri : mesh.triangles)
      for (int e = 0; e < 3; ++e) {
        adj[tri.v[e]].push_back(tri.v[(e + 1) % 3]);
        adj[tri.v[(e + 1) % 3]].push_back(tri.v[e]);
      }
    std::vector<char> seen(mesh.vertex_count(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : adj[v])
        if (!seen[u]) {
          seen[u] = 1;
          stack.push_back(u);
        }
    }
    for (int v = 0; v < mesh.vertex_count(); ++v)
      if (!seen[v]) throw Error(errc::disconnected_mesh, "lifted complex is disconnected");
  }

  return mesh;
}

}  // namespace

SurfaceMesh build_mesh(const periods::CurveData& cd, int resolution) {
  for (int salt = 0;; ++salt) {
    try {
      return build_mesh_attempt(cd, resolution, salt);
    } catch (const Error& e) {
      if (e.code() != errc::resolution_too_low || salt >= 3) throw;
    }
  }
}

double integrate(const SurfaceMesh& mesh, const std::vector<double>& vals) {
  if (static_cast<int>(vals.size()) != mesh.vertex_count())
    throw Error(errc::singular_value, "value vector size mismatch");
  double acc = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!std::isfinite(vals[v]))
      throw Error(errc::singular_value, "non-finite integrand at an undeclared vertex");
    acc += vals[v] * mesh.vertices[v].mu_weight;
  }
  return acc;
}

namespace {

// 64-point Gauss-Legendre nodes and weights on [0, 1]
const std::array<std::pair<double, double>, 64>& gl64() {
  static const auto nw = [] {
    std::array<std::pair<double, double>, 64> out{};
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double p1 = 0.0, dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double pa = 1.0, pb = x;
        for (int k = 2; k <= n; ++k) {
          const double pc = ((2.0 * k - 1.0) * x * pb - (k - 1.0) * pa) / k;
          pa = pb;
          pb = pc;
        }
        dp = n * (x * pb - pa) / (x * x - 1.0);
        p1 = pb;
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      out[i] = {0.5 * (x + 1.0), 1.0 / ((1.0 - x * x) * dp * dp)};
    }
    return out;
  }();
  return nw;
}

}  // namespace

double disk_radial_integral(const SurfaceMesh& mesh, int disk_index,
                            const std::function<double(double)>& radial_profile) {
  const double rho0 = chi_radius(mesh, disk_index);
  const int n_th = 96;
  double acc = 0.0;
  for (const auto& [u, wu] : gl64()) {
    // r = rho0 u^2 softens the radial derivative of log near 0
    const double r = rho0 * u * u;
    const double jac = 2.0 * rho0 * u;
    const double chi = chi_cutoff(r / rho0);
    if (chi == 0.0 || r == 0.0) continue;
    double ang = 0.0;
    for (int j = 0; j < n_th; ++j) {
      const double th = 2.0 * kPi * j / n_th;
      ang += rho_branch(mesh.curve, disk_index, std::polar(r, th));
    }
    ang *= 2.0 * kPi / n_th;
    acc += wu * jac * chi * radial_profile(r) * ang * r;
  }
  return acc / mesh.raw_mass;
}

double integrate_log_singular(const SurfaceMesh& mesh, const std::vector<double>& vals,
                              const std::vector<LogSingularity>& singularities) {
  if (static_cast<int>(vals.size()) != mesh.vertex_count())
    throw Error(errc::singular_value, "value vector size mismatch");
  double acc = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    double bracket = vals[v];
    if (!std::isfinite(bracket))
      throw Error(errc::singular_value, "non-finite integrand at an undeclared vertex");
    for (const auto& s : singularities) {
      if (v == s.vertex) continue;
      const int disk = mesh.vertices[s.vertex].chart_index;
      if (mesh.vertices[v].chart != ChartKind::branch || mesh.vertices[v].chart_index != disk)
        continue;
      const double r = std::abs(mesh.vertices[v].chart_pos);
      const double rho0 = chi_radius(mesh, disk);
      if (r >= rho0 || r == 0.0) continue;
      bracket -= s.coeff * chi_cutoff(r / rho0) * std::log(r);
    }
    acc += bracket * mesh.vertices[v].mu_weight;
  }
  for (const auto& s : singularities) {
    if (mesh.vertices[s.vertex].chart != ChartKind::branch)
      throw Error(errc::singular_value, "declared singularity is not at a marked branch vertex");
    const int disk = mesh.vertices[s.vertex].chart_index;
    acc += s.coeff * disk_radial_integral(mesh, disk, [](double r) { return std::log(r); });
  }
  return acc;
}

void dump_mesh(const SurfaceMesh& mesh, std::ostream& os) {
  os << "# hypgreen mesh dump\n";
  os << "# v id re im sheet chart chart_index mu_weight\n";
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& vx = mesh.vertices[v];
    const char* chart = vx.chart == ChartKind::plane
                            ? "plane"
                            : (vx.chart == ChartKind::branch ? "branch" : "infinity");
    os << "v " << v << ' ' << vx.x.real() << ' ' << vx.x.imag() << ' ' << vx.sheet << ' ' << chart
       << ' ' << vx.chart_index << ' ' << vx.mu_weight << '\n';
  }
  os << "# t v0 v1 v2 chart chart_index\n";
  for (const auto& t : mesh.triangles) {
    const char* chart = t.chart == ChartKind::plane
                            ? "plane"
                            : (t.chart == ChartKind::branch ? "branch" : "infinity");
    os << "t " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << chart << ' ' << t.chart_index
       << '\n';
  }
  os << "# m branch_index vertex\n";
  for (std::size_t i = 0; i < mesh.marked_points.size(); ++i)
    os << "m " << i << ' ' << mesh.marked_points[i] << '\n';
}

}  // namespace hypgreen::surface
