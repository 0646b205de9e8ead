#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hypgreen/types.hpp"

namespace hypgreen::surface::detail {

/// Incremental Bowyer-Watson triangulation with walk-based point location.
/// Input coordinates should be O(1); near-cocircular degeneracies are broken
/// upstream by jitter on the structured point patterns.
class Delaunay {
 public:
  explicit Delaunay(const std::vector<cplx>& pts) : pts_(pts) {
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const cplx& p : pts_) {
      lo_x = std::min(lo_x, p.real());
      hi_x = std::max(hi_x, p.real());
      lo_y = std::min(lo_y, p.imag());
      hi_y = std::max(hi_y, p.imag());
    }
    const double span = std::max(hi_x - lo_x, hi_y - lo_y) + 1.0;
    const cplx mid(0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
    const int n = static_cast<int>(pts_.size());
    pts_.push_back(mid + cplx(-8.0 * span, -5.0 * span));
    pts_.push_back(mid + cplx(8.0 * span, -5.0 * span));
    pts_.push_back(mid + cplx(0.0, 9.0 * span));
    add_triangle({n, n + 1, n + 2});
    for (int i = 0; i < n; ++i) insert(i);
  }

  /// Triangles over the original points, counter-clockwise.
  std::vector<std::array<int, 3>> triangles() const {
    const int n = static_cast<int>(pts_.size()) - 3;
    std::vector<std::array<int, 3>> out;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      if (!alive_[t]) continue;
      const auto& tr = tris_[t];
      if (tr[0] >= n || tr[1] >= n || tr[2] >= n) continue;
      out.push_back(tr);
    }
    return out;
  }

 private:
  static std::int64_t dir_key(int a, int b) {
    return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }
  static double cross(cplx o, cplx a, cplx b) {
    return (a.real() - o.real()) * (b.imag() - o.imag()) -
           (a.imag() - o.imag()) * (b.real() - o.real());
  }

  void add_triangle(const std::array<int, 3>& t) {
    tris_.push_back(t);
    alive_.push_back(true);
    const std::size_t id = tris_.size() - 1;
    for (int e = 0; e < 3; ++e) edge_owner_[dir_key(t[e], t[(e + 1) % 3])] = id;
    last_ = id;
  }

  void drop_triangle(std::size_t id) {
    alive_[id] = false;
    const auto& t = tris_[id];
    for (int e = 0; e < 3; ++e) {
      auto it = edge_owner_.find(dir_key(t[e], t[(e + 1) % 3]));
      if (it != edge_owner_.end() && it->second == id) edge_owner_.erase(it);
    }
  }

  bool in_circumcircle(const std::array<int, 3>& t, cplx p) const {
    const cplx a = pts_[t[0]] - p, b = pts_[t[1]] - p, c = pts_[t[2]] - p;
    const double det = std::norm(a) * (b.real() * c.imag() - b.imag() * c.real()) -
                       std::norm(b) * (a.real() * c.imag() - a.imag() * c.real()) +
                       std::norm(c) * (a.real() * b.imag() - a.imag() * b.real());
    const double m2 = std::max({std::norm(a), std::norm(b), std::norm(c)});
    return det > 1e-13 * m2 * m2;
  }

  std::size_t neighbor(std::size_t id, int e) const {
    const auto& t = tris_[id];
    auto it = edge_owner_.find(dir_key(t[(e + 1) % 3], t[e]));
    return it == edge_owner_.end() ? kNone : it->second;
  }

  std::size_t locate(cplx p) const {
    std::size_t cur = (last_ != kNone && alive_[last_]) ? last_ : kNone;
    if (cur == kNone) {
      for (std::size_t t = 0; t < tris_.size(); ++t)
        if (alive_[t]) {
          cur = t;
          break;
        }
    }
    const std::size_t max_steps = 4 * tris_.size() + 64;
    for (std::size_t step = 0; step < max_steps; ++step) {
      const auto& t = tris_[cur];
      bool moved = false;
      for (int e = 0; e < 3; ++e) {
        if (cross(pts_[t[e]], pts_[t[(e + 1) % 3]], p) < 0.0) {
          const std::size_t nb = neighbor(cur, e);
          if (nb != kNone) {
            cur = nb;
            moved = true;
            break;
          }
        }
      }
      if (!moved) return cur;
    }
    // walk got stuck (should not happen with valid input): linear fallback
    for (std::size_t t = 0; t < tris_.size(); ++t)
      if (alive_[t] && in_circumcircle(tris_[t], p)) return t;
    return kNone;
  }

  void insert(int ip) {
    const cplx p = pts_[ip];
    std::size_t seed = locate(p);
    if (seed == kNone || !in_circumcircle(tris_[seed], p)) {
      // location landed on a triangle whose circumcircle misses p; scan its
      // neighborhood first, then everything
      bool found = false;
      if (seed != kNone) {
        for (int e = 0; e < 3 && !found; ++e) {
          const std::size_t nb = neighbor(seed, e);
          if (nb != kNone && in_circumcircle(tris_[nb], p)) {
            seed = nb;
            found = true;
          }
        }
      }
      if (!found) {
        seed = kNone;
        for (std::size_t t = 0; t < tris_.size(); ++t)
          if (alive_[t] && in_circumcircle(tris_[t], p)) {
            seed = t;
            break;
          }
      }
      if (seed == kNone) return;  // duplicate or unreachable point, skip
    }

    // flood-fill the cavity
    std::vector<std::size_t> bad;
    std::unordered_set<std::size_t> seen;
    std::vector<std::size_t> stack{seed};
    seen.insert(seed);
    while (!stack.empty()) {
      const std::size_t t = stack.back();
      stack.pop_back();
      bad.push_back(t);
      for (int e = 0; e < 3; ++e) {
        const std::size_t nb = neighbor(t, e);
        if (nb == kNone || seen.count(nb)) continue;
        if (in_circumcircle(tris_[nb], p)) {
          seen.insert(nb);
          stack.push_back(nb);
        }
      }
    }

    // cavity boundary: directed edges of bad triangles whose mirror lies
    // outside the cavity
    std::vector<std::pair<int, int>> boundary;
    for (std::size_t t : bad) {
      const auto& tr = tris_[t];
      for (int e = 0; e < 3; ++e) {
        const std::size_t nb = neighbor(t, e);
        if (nb == kNone || !seen.count(nb)) boundary.push_back({tr[e], tr[(e + 1) % 3]});
      }
    }
    for (std::size_t t : bad) drop_triangle(t);
    for (const auto& [a, b] : boundary) add_triangle({a, b, ip});
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::vector<cplx> pts_;
  std::vector<std::array<int, 3>> tris_;
  std::vector<char> alive_;
  std::unordered_map<std::int64_t, std::size_t> edge_owner_;
  std::size_t last_ = kNone;
};

}  // namespace hypgreen::surface::detail
