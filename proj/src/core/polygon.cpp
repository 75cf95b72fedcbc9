#include "voxflow/core/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace voxflow {

void even_odd_fill(const std::vector<Polygon2> &polygons, std::size_t nx, std::size_t ny,
                   const std::function<void(std::size_t, std::size_t)> &visit) {
  std::vector<double> xs;
  for (std::size_t row = 0; row < ny; ++row) {
    const double y = static_cast<double>(row);
    xs.clear();
    for (const auto &poly : polygons) {
      const std::size_t n = poly.size();
      for (std::size_t a = 0, b = n - 1; a < n; b = a++) {
        const auto [xa, ya] = poly[a];
        const auto [xb, yb] = poly[b];
        if ((ya > y) != (yb > y)) xs.push_back(xa + (y - ya) * (xb - xa) / (yb - ya));
      }
    }
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    for (std::size_t col = 0; col < nx; ++col) {
      const double x = static_cast<double>(col);
      // crossings strictly to the right of x
      const auto right = static_cast<std::size_t>(xs.end() - std::upper_bound(xs.begin(), xs.end(), x));
      if (right % 2 == 1) visit(col, row);
    }
  }
}

std::size_t distinct_vertex_count(const Polygon2 &poly) {
  std::set<Point2> s(poly.begin(), poly.end());
  return s.size();
}

} // namespace voxflow
