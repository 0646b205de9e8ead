#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hypgreen/branch_algebra.hpp"

namespace hypgreen::io {

/// Curve specification file: { "genus": h, "branch_points": [[re,im]|"inf", ...] }.
/// Indices into branch_points are 0-based everywhere in files; reports label
/// them 1-based to match the usual conventions.
branch::BranchSet read_curve(std::istream& in);
branch::BranchSet read_curve_file(const std::string& path);

/// One-parameter pinching family: the curve fields plus "t_values" (strictly
/// decreasing positive reals) and "left_cluster" (0-based indices of the
/// 2 h1 + 1 points contracted by t around "left_center", default their
/// centroid).
struct DegenerationFamily {
  branch::BranchSet base;
  std::vector<int> left_cluster;
  std::vector<int> right_cluster;
  std::vector<double> t_values;
  cplx left_center;
  int h1 = 0;
  int h2 = 0;

  branch::BranchSet at(double t) const;
};

DegenerationFamily read_family(std::istream& in);
DegenerationFamily read_family_file(const std::string& path);

}  // namespace hypgreen::io
