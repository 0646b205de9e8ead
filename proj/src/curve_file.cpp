#include "hypgreen/curve_file.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>

namespace hypgreen::io {

using nlohmann::json;

namespace {

std::vector<branch::SpherePoint> parse_points(const json& arr) {
  std::vector<branch::SpherePoint> pts;
  for (const auto& e : arr) {
    if (e.is_string()) {
      if (e.get<std::string>() != "inf")
        throw Error(errc::parse_error, "branch point entries are [re,im] or \"inf\"");
      pts.push_back(branch::SpherePoint::infinity());
    } else if (e.is_array() && e.size() == 2) {
      pts.push_back(branch::SpherePoint::finite(cplx(e[0].get<double>(), e[1].get<double>())));
    } else {
      throw Error(errc::parse_error, "branch point entries are [re,im] or \"inf\"");
    }
  }
  return pts;
}

json parse_stream(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(errc::parse_error, std::string("malformed JSON: ") + e.what());
  }
  return j;
}

}  // namespace

branch::BranchSet read_curve(std::istream& in) {
  const json j = parse_stream(in);
  if (!j.contains("genus") || !j.contains("branch_points"))
    throw Error(errc::parse_error, "curve file needs \"genus\" and \"branch_points\"");
  return branch::validate_branch_set(parse_points(j["branch_points"]), j["genus"].get<int>());
}

branch::BranchSet read_curve_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::parse_error, "cannot open curve file: " + path);
  return read_curve(in);
}

branch::BranchSet DegenerationFamily::at(double t) const {
  std::vector<branch::SpherePoint> pts = base.points;
  for (int idx : left_cluster) {
    const cplx p = pts[idx].value();
    pts[idx] = branch::SpherePoint::finite(left_center + t * (p - left_center));
  }
  return branch::validate_branch_set(pts, base.genus);
}

DegenerationFamily read_family(std::istream& in) {
  const json j = parse_stream(in);
  for (const char* key : {"genus", "branch_points", "t_values", "left_cluster"})
    if (!j.contains(key))
      throw Error(errc::parse_error, std::string("family file needs \"") + key + "\"");

  DegenerationFamily fam;
  fam.base = branch::validate_branch_set(parse_points(j["branch_points"]), j["genus"].get<int>());

  std::set<int> left;
  for (const auto& e : j["left_cluster"]) {
    const int idx = e.get<int>();
    if (idx < 0 || idx >= static_cast<int>(fam.base.size()))
      throw Error(errc::parse_error, "left_cluster index out of range");
    if (fam.base.points[idx].is_infinity())
      throw Error(errc::parse_error, "the contracted cluster must consist of finite points");
    if (!left.insert(idx).second)
      throw Error(errc::parse_error, "repeated index in left_cluster");
  }
  fam.left_cluster.assign(left.begin(), left.end());
  for (int i = 0; i < static_cast<int>(fam.base.size()); ++i)
    if (!left.count(i)) fam.right_cluster.push_back(i);

  if (fam.left_cluster.size() % 2 == 0 || fam.right_cluster.size() % 2 == 0)
    throw Error(errc::parse_error,
                "cluster sizes must be odd (2 h1 + 1 and 2 h2 + 1, the node carries the rest)");
  fam.h1 = (static_cast<int>(fam.left_cluster.size()) - 1) / 2;
  fam.h2 = (static_cast<int>(fam.right_cluster.size()) - 1) / 2;
  if (fam.h1 < 1 || fam.h2 < 1)
    throw Error(errc::parse_error, "both limit components need genus at least 1");

  for (const auto& e : j["t_values"]) fam.t_values.push_back(e.get<double>());
  if (fam.t_values.size() < 2) throw Error(errc::parse_error, "need at least two t values");
  for (std::size_t k = 0; k < fam.t_values.size(); ++k) {
    if (fam.t_values[k] <= 0.0) throw Error(errc::parse_error, "t values must be positive");
    if (k > 0 && fam.t_values[k] >= fam.t_values[k - 1])
      throw Error(errc::parse_error, "t values must be strictly decreasing");
  }

  if (j.contains("left_center")) {
    const auto& c = j["left_center"];
    fam.left_center = cplx(c[0].get<double>(), c[1].get<double>());
  } else {
    cplx acc(0.0, 0.0);
    for (int idx : fam.left_cluster) acc += fam.base.points[idx].value();
    fam.left_center = acc / static_cast<double>(fam.left_cluster.size());
  }

  // every t must stay clear of the validator's coincidence threshold
  (void)fam.at(fam.t_values.back());
  return fam;
}

DegenerationFamily read_family_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::parse_error, "cannot open family file: " + path);
  return read_family(in);
}

}  // namespace hypgreen::io
