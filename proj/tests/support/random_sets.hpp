#pragma once

#include <random>
#include <vector>

#include "hypgreen/branch_algebra.hpp"

namespace hypgreen::testsupport {

using branch::BranchSet;
using branch::MobiusMap;
using branch::SpherePoint;

/// Random branch set with well-separated points; optionally one of them is
/// the point at infinity.
inline BranchSet random_branch_set(std::mt19937& rng, int genus, bool with_infinity) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  const int total = 2 * genus + 2;
  const int finite = with_infinity ? total - 1 : total;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<cplx> pts;
    while (static_cast<int>(pts.size()) < finite) {
      const cplx cand(coord(rng), coord(rng));
      bool ok = true;
      for (const cplx& p : pts)
        if (std::abs(cand - p) < 0.15) ok = false;
      if (ok) pts.push_back(cand);
    }
    std::vector<SpherePoint> sp;
    for (const cplx& p : pts) sp.push_back(SpherePoint::finite(p));
    if (with_infinity) sp.push_back(SpherePoint::infinity());
    try {
      return branch::validate_branch_set(sp, genus);
    } catch (const Error&) {
      continue;
    }
  }
  throw std::logic_error("random_branch_set failed to draw a valid configuration");
}

/// Random nondegenerate Moebius map whose pole stays away from the given
/// points, so images remain comfortably separated.
inline MobiusMap random_mobius(std::mt19937& rng, const BranchSet& bs) {
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    MobiusMap m{cplx(coord(rng), coord(rng)), cplx(coord(rng), coord(rng)),
                cplx(coord(rng), coord(rng)), cplx(coord(rng), coord(rng))};
    if (std::abs(m.det()) < 0.3) continue;
    bool ok = true;
    if (std::abs(m.c) > 1e-12) {
      const cplx pole = -m.d / m.c;
      for (const auto& p : bs.points)
        if (!p.is_infinity() && std::abs(p.value() - pole) < 0.2) ok = false;
    }
    if (!ok) continue;
    try {
      (void)branch::apply_mobius(bs, m);
      return m;
    } catch (const Error&) {
      continue;
    }
  }
  throw std::logic_error("random_mobius failed to draw a usable map");
}

}  // namespace hypgreen::testsupport
