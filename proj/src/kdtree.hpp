#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace mmlab::detail {

// Static kd-tree over a subset of points stored row-major in `coords`.
// Used as a candidate filter only: callers confirm hits with the exact metric.
class KdTree {
 public:
  KdTree(std::span<const double> coords, std::size_t dim, std::vector<std::size_t> members)
      : coords_(coords), dim_(dim), idx_(std::move(members)) {
    build(0, idx_.size(), 0);
  }

  // True if some member p with |p - q| <= radius satisfies accept(p).
  template <class Accept>
  bool any_within(std::span<const double> q, double radius, Accept&& accept) const {
    return search(0, idx_.size(), 0, q, radius, radius * radius, accept);
  }

 private:
  double coord(std::size_t p, std::size_t d) const { return coords_[p * dim_ + d]; }

  void build(std::size_t lo, std::size_t hi, std::size_t depth) {
    if (hi - lo <= kLeaf) return;
    const std::size_t axis = depth % dim_;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(lo),
                     idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(hi),
                     [&](std::size_t a, std::size_t b) { return coord(a, axis) < coord(b, axis); });
    build(lo, mid, depth + 1);
    build(mid + 1, hi, depth + 1);
  }

  template <class Accept>
  bool search(std::size_t lo, std::size_t hi, std::size_t depth, std::span<const double> q,
              double radius, double radius_sq, Accept& accept) const {
    if (lo >= hi) return false;
    if (hi - lo <= kLeaf) {
      for (std::size_t k = lo; k < hi; ++k) {
        if (sq_dist(idx_[k], q) <= radius_sq && accept(idx_[k])) return true;
      }
      return false;
    }
    const std::size_t axis = depth % dim_;
    const std::size_t mid = lo + (hi - lo) / 2;
    const std::size_t p = idx_[mid];
    if (sq_dist(p, q) <= radius_sq && accept(p)) return true;
    const double delta = q[axis] - coord(p, axis);
    const bool left_first = delta < 0;
    if (left_first) {
      if (search(lo, mid, depth + 1, q, radius, radius_sq, accept)) return true;
      if (delta >= -radius) return search(mid + 1, hi, depth + 1, q, radius, radius_sq, accept);
    } else {
      if (search(mid + 1, hi, depth + 1, q, radius, radius_sq, accept)) return true;
      if (delta <= radius) return search(lo, mid, depth + 1, q, radius, radius_sq, accept);
    }
    return false;
  }

  double sq_dist(std::size_t p, std::span<const double> q) const {
    double s = 0;
    for (std::size_t d = 0; d < dim_; ++d) {
      const double diff = coord(p, d) - q[d];
      s += diff * diff;
    }
    return s;
  }

  static constexpr std::size_t kLeaf = 8;
  std::span<const double> coords_;
  std::size_t dim_;
  std::vector<std::size_t> idx_;
};

}  // namespace mmlab::detail
