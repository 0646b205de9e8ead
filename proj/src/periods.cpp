#include "hypgreen/periods.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace hypgreen::periods {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;

struct Ellipse {
  cplx center;
  double ax;  // semi-axis along Re
  double ay;  // semi-axis along Im

  cplx point(double phi) const { return center + cplx(ax * std::cos(phi), ay * std::sin(phi)); }
  cplx tangent(double phi) const { return cplx(-ax * std::sin(phi), ay * std::cos(phi)); }
};

double min_pair_distance(const std::vector<cplx>& pts) {
  double d = 1e300;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::min(d, std::abs(pts[i] - pts[j]));
  return d;
}

// Quality of a rotation angle: worst ratio of the consecutive Re-gap to the
// full distance between the sorted neighbors.
double sort_score(const std::vector<cplx>& pts) {
  std::vector<int> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (pts[a].real() != pts[b].real()) return pts[a].real() < pts[b].real();
    return pts[a].imag() < pts[b].imag();
  });
  double score = 1e300;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const cplx d = pts[order[k + 1]] - pts[order[k]];
    score = std::min(score, d.real() / std::abs(d));
  }
  return score;
}

class SheetTracker {
 public:
  SheetTracker(const std::vector<cplx>& roots, cplx x0) : roots_(roots) {
    y_ = std::sqrt(poly(x0));
    x_ = x0;
  }

  // Continue y = sqrt(prod(x - a_r)) from the current position to x along a
  // straight segment, stepping no farther than a fraction of the distance to
  // the nearest branch point.
  cplx advance(cplx x) {
    const cplx target = x;
    const cplx start = x_;
    const cplx dir = target - start;
    const double len = std::abs(dir);
    if (len == 0.0) return y_;
    double done = 0.0;
    while (done < len) {
      const double step = std::max(0.35 * nearest(x_), 1e-14 * len);
      done = std::min(len, done + step);
      const cplx xn = start + dir * (done / len);
      const cplx s = std::sqrt(poly(xn));
      y_ = (std::abs(s - y_) <= std::abs(s + y_)) ? s : -s;
      x_ = xn;
    }
    return y_;
  }

  cplx value() const { return y_; }

 private:
  cplx poly(cplx x) const {
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

// One trapezoid pass of all h differentials x^{m-1} dx / y over the contour.
Eigen::VectorXcd contour_pass(const std::vector<cplx>& roots, const Ellipse& e, int genus, int n,
                              bool* sign_ok) {
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(genus);
  SheetTracker tracker(roots, e.point(0.0));
  const cplx y0 = tracker.value();
  for (int k = 0; k < n; ++k) {
    const double phi = 2.0 * kPi * k / n;
    const cplx x = e.point(phi);
    const cplx y = tracker.advance(x);
    const cplx w = e.tangent(phi) / y;
    cplx xp(1.0, 0.0);
    for (int m = 0; m < genus; ++m) {
      acc[m] += xp * w;
      xp *= x;
    }
  }
  const cplx y_back = tracker.advance(e.point(0.0));
  *sign_ok = std::abs(y_back - y0) < std::abs(y0);
  return acc * (2.0 * kPi / n);
}

Eigen::VectorXcd integrate_contour(const std::vector<cplx>& roots, const Ellipse& e, int genus,
                                   double* err_out) {
  bool sign_ok = false;
  Eigen::VectorXcd prev = contour_pass(roots, e, genus, 64, &sign_ok);
  for (int n = 128; n <= (1 << 17); n *= 2) {
    Eigen::VectorXcd cur = contour_pass(roots, e, genus, n, &sign_ok);
    const double scale = std::max(cur.norm(), 1e-30);
    const double change = (cur - prev).norm() / scale;
    if (sign_ok && change < 1e-11) {
      if (err_out) *err_out = change;
      return cur;
    }
    prev = cur;
  }
  throw Error(errc::quadrature_failure, "period contour integral did not converge");
}

// Ellipse enclosing exactly the sorted points [lo, hi], relying on the
// separation of consecutive real parts in the rotated frame.
Ellipse bracketing_ellipse(const std::vector<cplx>& sorted_pts, int lo, int hi) {
  const int n = static_cast<int>(sorted_pts.size());
  double re_min = 1e300, re_max = -1e300, im_min = 1e300, im_max = -1e300;
  for (int k = lo; k <= hi; ++k) {
    re_min = std::min(re_min, sorted_pts[k].real());
    re_max = std::max(re_max, sorted_pts[k].real());
    im_min = std::min(im_min, sorted_pts[k].imag());
    im_max = std::max(im_max, sorted_pts[k].imag());
  }
  const double span = re_max - re_min;
  const double far = 0.5 + 0.5 * span;
  const double gap_left = (lo > 0) ? re_min - sorted_pts[lo - 1].real() : far;
  const double gap_right = (hi + 1 < n) ? sorted_pts[hi + 1].real() - re_max : far;
  const double clearance = 0.45 * std::min(gap_left, gap_right);
  const cplx center(0.5 * (re_min + re_max), 0.5 * (im_min + im_max));
  const double ax = 0.5 * span + clearance;

  double ay = 0.25 * ax;
  for (int k = lo; k <= hi; ++k) {
    const double dx = (sorted_pts[k].real() - center.real()) / ax;
    const double dy = std::abs(sorted_pts[k].imag() - center.imag());
    const double need = dy / std::sqrt(std::max(1e-12, 1.0 - dx * dx));
    ay = std::max(ay, 1.25 * need + 0.05 * ax);
  }
  return Ellipse{center, ax, ay};
}

}  // namespace

cplx FrameMap::to_work(const branch::SpherePoint& p) const {
  cplx w;
  if (inverted)
    w = p.is_infinity() ? cplx(0.0, 0.0) : 1.0 / (p.value() - inv_center);
  else
    w = p.value();
  return scale * (w - shift);
}

cplx FrameMap::from_work(cplx xi) const {
  const cplx w = xi / scale + shift;
  if (!inverted) return w;
  return inv_center + 1.0 / w;
}

CurveData compute_periods(const branch::BranchSet& bs) {
  const int h = bs.genus;
  const int n_pts = static_cast<int>(bs.size());

  CurveData cd;
  cd.bs = bs;

  // Move infinity (when present) to a finite position, then center and scale.
  FrameMap frame;
  if (bs.infinity_index() >= 0) {
    frame.inverted = true;
    cplx centroid(0.0, 0.0);
    int nf = 0;
    for (const auto& p : bs.points)
      if (!p.is_infinity()) {
        centroid += p.value();
        ++nf;
      }
    centroid /= static_cast<double>(nf);
    const double sc = bs.scale() > 0 ? bs.scale() : 1.0;
    cplx center = centroid;
    for (int k = 0; k < 64; ++k) {
      double dmin = 1e300;
      for (const auto& p : bs.points)
        if (!p.is_infinity()) dmin = std::min(dmin, std::abs(p.value() - center));
      if (dmin > 0.15 * sc) break;
      center = centroid + sc * std::polar(0.37 * (k + 1), kGoldenAngle * (k + 1));
    }
    frame.inv_center = center;
  }

  std::vector<cplx> raw(n_pts);
  for (int i = 0; i < n_pts; ++i) {
    const auto& p = bs.points[i];
    raw[i] = frame.inverted
                 ? (p.is_infinity() ? cplx(0.0, 0.0) : 1.0 / (p.value() - frame.inv_center))
                 : p.value();
  }
  cplx mean(0.0, 0.0);
  for (const cplx& z : raw) mean += z;
  mean /= static_cast<double>(n_pts);
  double radius = 0.0;
  for (const cplx& z : raw) radius = std::max(radius, std::abs(z - mean));
  frame.shift = mean;

  // Rotation chosen so that sorting by real part gives well separated
  // abscissas; the frame scale carries the rotation.
  double best_score = -1.0;
  double best_angle = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double angle = kGoldenAngle * k;
    const cplx rot = std::polar(1.0 / radius, -angle);
    std::vector<cplx> cand(n_pts);
    for (int i = 0; i < n_pts; ++i) cand[i] = rot * (raw[i] - mean);
    const double score = sort_score(cand);
    if (score > best_score) {
      best_score = score;
      best_angle = angle;
    }
    if (best_score > 0.12) break;
  }
  frame.scale = std::polar(1.0 / radius, -best_angle);

  cd.frame = frame;
  cd.work_points.resize(n_pts);
  for (int i = 0; i < n_pts; ++i) cd.work_points[i] = frame.scale * (raw[i] - mean);

  if (min_pair_distance(cd.work_points) < 1e-10)
    throw Error(errc::near_degenerate, "branch points too close for period quadrature");

  std::vector<int> order(n_pts);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (cd.work_points[a].real() != cd.work_points[b].real())
      return cd.work_points[a].real() < cd.work_points[b].real();
    return cd.work_points[a].imag() < cd.work_points[b].imag();
  });
  std::vector<cplx> sorted_pts(n_pts);
  for (int k = 0; k < n_pts; ++k) sorted_pts[k] = cd.work_points[order[k]];

  cd.cut_pairing.clear();
  for (int c = 0; c <= h; ++c) cd.cut_pairing.push_back({order[2 * c], order[2 * c + 1]});

  // a_k around the k-th cut, b_k around the sorted points 2k+1 .. 2h.
  cd.A.resize(h, h);
  cd.B.resize(h, h);
  double max_err = 0.0;
  for (int k = 0; k < h; ++k) {
    double err = 0.0;
    const Ellipse ea = bracketing_ellipse(sorted_pts, 2 * k, 2 * k + 1);
    cd.A.col(k) = integrate_contour(cd.work_points, ea, h, &err);
    max_err = std::max(max_err, err);
    const Ellipse eb = bracketing_ellipse(sorted_pts, 2 * k + 1, 2 * h);
    cd.B.col(k) = integrate_contour(cd.work_points, eb, h, &err);
    max_err = std::max(max_err, err);
  }
  cd.quadrature_error = max_err;

  // Fix the relative orientations of the b-cycles: the sign pattern must make
  // A^{-1} B symmetric with positive-definite imaginary part.
  const Eigen::MatrixXcd Ainv = cd.A.fullPivLu().inverse();
  int best_mask = -1;
  double best_sym = 1e300;
  Eigen::MatrixXcd best_tau;
  for (int mask = 0; mask < (1 << h); ++mask) {
    Eigen::MatrixXcd Bm = cd.B;
    for (int k = 0; k < h; ++k)
      if (mask & (1 << k)) Bm.col(k) = -Bm.col(k);
    const Eigen::MatrixXcd tau = Ainv * Bm;
    const double sym = (tau - tau.transpose()).norm() / std::max(1e-30, tau.norm());
    if (sym < best_sym) {
      const Eigen::MatrixXd im = 0.5 * (tau.imag() + tau.imag().transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(im);
      if (llt.info() == Eigen::Success) {
        best_sym = sym;
        best_mask = mask;
        best_tau = tau;
      }
    }
  }
  if (best_mask < 0 || best_sym > 1e-6)
    throw Error(errc::not_positive_definite,
                "no b-cycle orientation yields a symmetric Riemann matrix");
  for (int k = 0; k < h; ++k)
    if (best_mask & (1 << k)) cd.B.col(k) = -cd.B.col(k);
  cd.tau_period = best_tau;
  return cd;
}

Eigen::MatrixXcd gram_matrix(CurveData& cd) {
  if (cd.A.size() == 0) throw Error(errc::solver_failure, "periods not computed");
  const cplx ihalf(0.0, 0.5);
  Eigen::MatrixXcd G = ihalf * (cd.A * cd.B.adjoint() - cd.B * cd.A.adjoint());
  G = 0.5 * (G + G.adjoint()).eval();
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw Error(errc::not_positive_definite, "Gram matrix is not positive definite");
  cd.gram = G;
  return G;
}

Eigen::MatrixXcd orthonormalize(CurveData& cd) {
  if (cd.gram.size() == 0) gram_matrix(cd);
  Eigen::LLT<Eigen::MatrixXcd> llt(cd.gram);
  if (llt.info() != Eigen::Success)
    throw Error(errc::not_positive_definite, "Gram matrix is not positive definite");
  const Eigen::MatrixXcd L = llt.matrixL();
  const int h = cd.genus();
  cd.ortho =
      L.adjoint().triangularView<Eigen::Upper>().solve(Eigen::MatrixXcd::Identity(h, h));
  return cd.ortho;
}

CurveData analyze_curve(const branch::BranchSet& bs) {
  CurveData cd = compute_periods(bs);
  gram_matrix(cd);
  orthonormalize(cd);
  return cd;
}

cplx sheet_polynomial(const CurveData& cd, cplx xi) {
  cplx p(1.0, 0.0);
  for (const cplx& r : cd.work_points) p *= (xi - r);
  return p;
}

Eigen::VectorXcd ortho_poly_values(const CurveData& cd, cplx xi) {
  const int h = cd.genus();
  if (cd.ortho.size() == 0) throw Error(errc::solver_failure, "orthonormal basis not computed");
  Eigen::VectorXcd mono(h);
  cplx xp(1.0, 0.0);
  for (int m = 0; m < h; ++m) {
    mono[m] = xp;
    xp *= xi;
  }
  return cd.ortho.transpose() * mono;
}

double canonical_density(const CurveData& cd, cplx xi, int /*sheet*/) {
  double dmin = 1e300;
  for (const cplx& r : cd.work_points) dmin = std::min(dmin, std::abs(xi - r));
  if (dmin < 1e-12)
    throw Error(errc::at_branch_point, "canonical density evaluated at a branch point");
  const Eigen::VectorXcd p = ortho_poly_values(cd, xi);
  return p.squaredNorm() / (cd.genus() * std::abs(sheet_polynomial(cd, xi)));
}

}  // namespace hypgreen::periods
