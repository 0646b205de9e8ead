#pragma once

#include <array>

namespace hypgreen::detail {

/// Degree-7 quadrature on the reference triangle (13 points, barycentric,
/// weights normalized to 1; the centroid weight is negative).
struct TriQuadRule {
  std::array<std::array<double, 3>, 13> bary;
  std::array<double, 13> weight;
};

inline const TriQuadRule& tri_rule() {
  static const TriQuadRule rule = [] {
    TriQuadRule r{};
    int k = 0;
    r.bary[k] = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    r.weight[k++] = -0.149570044467670;
    const double a2 = 0.260345966079038, w2 = 0.175615257433204;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 3> b{a2, a2, a2};
      b[i] = 1.0 - 2.0 * a2;
      r.bary[k] = b;
      r.weight[k++] = w2;
    }
    const double a3 = 0.065130102902216, w3 = 0.053347235608839;
    for (int i = 0; i < 3; ++i) {
      std::array<double, 3> b{a3, a3, a3};
      b[i] = 1.0 - 2.0 * a3;
      r.bary[k] = b;
      r.weight[k++] = w3;
    }
    const double b4 = 0.312865496004875, c4 = 0.048690315425316, w4 = 0.077113760890257;
    const double a4 = 1.0 - b4 - c4;
    const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& p : perms) {
      std::array<double, 3> b{};
      b[p[0]] = a4;
      b[p[1]] = b4;
      b[p[2]] = c4;
      r.bary[k] = b;
      r.weight[k++] = w4;
    }
    return r;
  }();
  return rule;
}

}  // namespace hypgreen::detail
