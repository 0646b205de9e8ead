#include "hypgreen/branch_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypgreen::branch {

namespace {

void check_index(const BranchSet& bs, int i) {
  if (i < 0 || static_cast<std::size_t>(i) >= bs.size())
    throw Error(errc::index_out_of_range, "branch index out of range");
}

cplx clog(cplx z) { return std::log(z); }

}  // namespace

int BranchSet::infinity_index() const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i].is_infinity()) return static_cast<int>(i);
  return -1;
}

double BranchSet::scale() const {
  double s = 0.0;
  for (const auto& p : points)
    if (!p.is_infinity()) s = std::max(s, std::abs(p.value()));
  return s;
}

SpherePoint MobiusMap::apply(const SpherePoint& p) const {
  if (p.is_infinity()) {
    if (c == cplx(0.0)) return SpherePoint::infinity();
    return SpherePoint::finite(a / c);
  }
  const cplx z = p.value();
  const cplx den = c * z + d;
  if (den == cplx(0.0)) return SpherePoint::infinity();
  return SpherePoint::finite((a * z + b) / den);
}

BranchSet validate_branch_set(const std::vector<SpherePoint>& points, int genus) {
  if (genus < 1) throw Error(errc::wrong_count, "genus must be positive");
  const std::size_t expected = 2 * static_cast<std::size_t>(genus) + 2;
  if (points.size() != expected) {
    std::ostringstream os;
    os << "expected " << expected << " branch points for genus " << genus << ", got "
       << points.size();
    throw Error(errc::wrong_count, os.str());
  }
  int inf_count = 0;
  double scale = 0.0;
  for (const auto& p : points) {
    if (p.is_infinity())
      ++inf_count;
    else
      scale = std::max(scale, std::abs(p.value()));
  }
  if (inf_count > 1) throw Error(errc::multiple_infinities, "more than one point at infinity");
  if (scale == 0.0) scale = 1.0;
  for (std::size_t r = 0; r < points.size(); ++r) {
    for (std::size_t s = r + 1; s < points.size(); ++s) {
      if (points[r].is_infinity() || points[s].is_infinity()) continue;
      if (std::abs(points[r].value() - points[s].value()) < 1e-13 * scale) {
        std::ostringstream os;
        os << "branch points " << r << " and " << s << " coincide";
        throw Error(errc::duplicate_point, os.str());
      }
    }
  }
  BranchSet bs;
  bs.points = points;
  bs.genus = genus;
  return bs;
}

// Sum of log factors for the defining display of delta_ij. Exponents reach
// 2h(2h+1) = 180 at h = 4, so everything stays in log space until the end.
cplx delta_log(const BranchSet& bs, int i, int j) {
  check_index(bs, i);
  check_index(bs, j);
  if (i == j) throw Error(errc::equal_indices, "delta requires i != j");
  const int n = static_cast<int>(bs.size());
  const int h = bs.genus;
  const double top_power = 2.0 * h * (2 * h + 1);
  const auto& pts = bs.points;

  cplx acc(0.0, 0.0);
  if (!pts[i].is_infinity() && !pts[j].is_infinity())
    acc += top_power * clog(pts[i].value() - pts[j].value());
  for (int r = 0; r < n; ++r) {
    if (pts[r].is_infinity()) continue;
    for (int s = 0; s < n; ++s) {
      if (s == r || pts[s].is_infinity()) continue;
      acc += clog(pts[r].value() - pts[s].value());
    }
  }
  for (int r = 0; r < n; ++r) {
    if (r == i || pts[r].is_infinity() || pts[i].is_infinity()) continue;
    acc -= (2.0 * h + 1.0) * clog(pts[i].value() - pts[r].value());
  }
  for (int r = 0; r < n; ++r) {
    if (r == j || pts[r].is_infinity() || pts[j].is_infinity()) continue;
    acc -= (2.0 * h + 1.0) * clog(pts[j].value() - pts[r].value());
  }
  return acc;
}

cplx delta(const BranchSet& bs, int i, int j) { return std::exp(delta_log(bs, i, j)); }

double delta_infinity_sign(const BranchSet& bs, int i, int j) {
  const int inf = bs.infinity_index();
  return (inf >= 0 && inf != i && inf != j) ? -1.0 : 1.0;
}

cplx eta_log(const BranchSet& bs, int i, int j, int k) {
  check_index(bs, i);
  check_index(bs, j);
  check_index(bs, k);
  if (i == j || i == k || j == k)
    throw Error(errc::repeated_indices, "eta requires pairwise distinct indices");
  return delta_log(bs, i, k) - delta_log(bs, j, k);
}

cplx eta(const BranchSet& bs, int i, int j, int k) { return std::exp(eta_log(bs, i, j, k)); }

cplx cross_ratio(const BranchSet& bs, int i, int j, int k, int r) {
  check_index(bs, i);
  check_index(bs, j);
  check_index(bs, k);
  check_index(bs, r);
  if (i == j || i == k || i == r || j == k || j == r || k == r)
    throw Error(errc::repeated_indices, "cross ratio requires pairwise distinct indices");
  const auto& p = bs.points;
  auto d = [&](int a, int b) { return p[a].value() - p[b].value(); };
  if (p[i].is_infinity()) return d(j, r) / d(j, k);
  if (p[j].is_infinity()) return d(i, k) / d(i, r);
  if (p[k].is_infinity()) return d(j, r) / d(i, r);
  if (p[r].is_infinity()) return d(i, k) / d(j, k);
  return (d(i, k) * d(j, r)) / (d(j, k) * d(i, r));
}

BranchSet apply_mobius(const BranchSet& bs, const MobiusMap& m) {
  if (std::abs(m.det()) == 0.0) throw Error(errc::degenerate_map, "Moebius map with ad - bc = 0");
  std::vector<SpherePoint> mapped;
  mapped.reserve(bs.size());
  for (const auto& p : bs.points) mapped.push_back(m.apply(p));
  return validate_branch_set(mapped, bs.genus);
}

NormalizedPair normalize_pair(const BranchSet& bs, int i, int j) {
  check_index(bs, i);
  check_index(bs, j);
  if (i == j) throw Error(errc::equal_indices, "normalize_pair requires i != j");
  const auto& pts = bs.points;

  // First stage: i -> 0, j -> infinity.
  MobiusMap m;
  if (pts[i].is_infinity()) {
    m = {cplx(0.0), cplx(1.0), cplx(1.0), -pts[j].value()};  // z -> 1/(z - a_j)
  } else if (pts[j].is_infinity()) {
    m = {cplx(1.0), -pts[i].value(), cplx(0.0), cplx(1.0)};  // z -> z - a_i
  } else {
    m = {cplx(1.0), -pts[i].value(), cplx(1.0), -pts[j].value()};  // (z-a_i)/(z-a_j)
  }
  BranchSet staged = apply_mobius(bs, m);

  // Second stage: scale the 2h remaining points so that their product is 1.
  // The scale is exp(-(mean of logs)), so the scaled product is exactly
  // exp(0) regardless of branch choices in the individual logs.
  cplx log_prod(0.0, 0.0);
  int count = 0;
  for (int r = 0; r < static_cast<int>(staged.size()); ++r) {
    if (r == i || r == j) continue;
    log_prod += std::log(staged.points[r].value());
    ++count;
  }
  const cplx scale = std::exp(-log_prod / static_cast<double>(count));
  MobiusMap ms{scale, cplx(0.0), cplx(0.0), cplx(1.0)};
  BranchSet out = apply_mobius(staged, ms);

  cplx disc_log(0.0, 0.0);
  for (int r = 0; r < static_cast<int>(out.size()); ++r) {
    if (r == i || r == j) continue;
    for (int s = 0; s < static_cast<int>(out.size()); ++s) {
      if (s == i || s == j || s == r) continue;
      disc_log += std::log(out.points[r].value() - out.points[s].value());
    }
  }
  return NormalizedPair{std::move(out), std::exp(disc_log)};
}

}  // namespace hypgreen::branch
