#pragma once

#include <cstddef>
#include <vector>

#include "hypgreen/types.hpp"

namespace hypgreen::branch {

/// A point of the Riemann sphere: a finite complex value or the point at
/// infinity. Exactly one of the two states is active.
class SpherePoint {
 public:
  static SpherePoint finite(cplx z) { return SpherePoint(z, false); }
  static SpherePoint infinity() { return SpherePoint(cplx(0, 0), true); }

  bool is_infinity() const noexcept { return at_inf_; }
  cplx value() const {
    if (at_inf_) throw Error(errc::evaluation_at_pole, "value() of the point at infinity");
    return z_;
  }

 private:
  SpherePoint(cplx z, bool at_inf) : z_(z), at_inf_(at_inf) {}
  cplx z_;
  bool at_inf_;
};

/// Branch configuration of a hyperelliptic curve: 2h+2 pairwise distinct
/// sphere points. Immutable once validated.
struct BranchSet {
  std::vector<SpherePoint> points;
  int genus = 0;

  std::size_t size() const noexcept { return points.size(); }
  /// Index of the infinite point, or -1 when all points are finite.
  int infinity_index() const;
  /// Largest |value| over the finite points (0 if none; used for scale tests).
  double scale() const;
};

struct MobiusMap {
  cplx a, b, c, d;  // z -> (a z + b) / (c z + d), requires ad - bc != 0

  static MobiusMap identity() { return {1.0, 0.0, 0.0, 1.0}; }
  cplx det() const { return a * d - b * c; }
  SpherePoint apply(const SpherePoint& p) const;
};

/// Checks the count, mutual distinctness and the at-most-one-infinity rule.
/// Near-coincident finite points (closer than 1e-13 times the configuration
/// scale) are rejected as duplicates.
BranchSet validate_branch_set(const std::vector<SpherePoint>& points, int genus);

/// log delta_ij as a complex number (log magnitude + accumulated phase).
/// Factors involving the infinite point are omitted throughout.
cplx delta_log(const BranchSet& bs, int i, int j);

/// The pair invariant delta_ij itself.
cplx delta(const BranchSet& bs, int i, int j);

/// The omission rule for infinity drops an odd number of sign flips when the
/// infinite point sits outside the pair {i, j}: the all-finite limit of
/// delta_ij is (-1)^(2h+1) times the omitted form in that case. This factor
/// restores it; delta_infinity_sign * delta is strictly Moebius invariant.
double delta_infinity_sign(const BranchSet& bs, int i, int j);

/// eta_ijk = delta_ik / delta_jk.
cplx eta(const BranchSet& bs, int i, int j, int k);
cplx eta_log(const BranchSet& bs, int i, int j, int k);

/// Cross ratio (a_i - a_k)(a_j - a_r) / ((a_j - a_k)(a_i - a_r)); the two
/// factors containing an infinite point cancel to 1.
cplx cross_ratio(const BranchSet& bs, int i, int j, int k, int r);

/// Maps every point by z -> (az+b)/(cz+d) and revalidates.
BranchSet apply_mobius(const BranchSet& bs, const MobiusMap& m);

struct NormalizedPair {
  BranchSet bs;          // point i at 0, point j at infinity, others scaled
  cplx discriminant;     // ordered-pair product over the 2h finite points
};

/// Moebius-normalizes the pair (i, j) to (0, infinity) and rescales the
/// remaining 2h points so their product is 1. The ordered-pair discriminant
/// of the result reproduces delta_ij (the observed proportionality constant
/// is 1; see the report emitted by the CLI).
NormalizedPair normalize_pair(const BranchSet& bs, int i, int j);

}  // namespace hypgreen::branch
