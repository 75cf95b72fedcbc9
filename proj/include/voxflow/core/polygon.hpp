#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace voxflow {

using Point2 = std::pair<double, double>;
using Polygon2 = std::vector<Point2>; // implicitly closed

// Even-odd fill of a set of polygons sampled at integer lattice points
// (x, y) with 0 <= x < nx, 0 <= y < ny. A point is inside when a ray towards
// +x crosses an odd number of edges, where an edge counts iff its endpoints
// lie strictly on opposite sides of the half-open test (y_a > y) != (y_b > y).
// Crossings are pooled across all polygons, so nested contours form holes.
void even_odd_fill(const std::vector<Polygon2> &polygons, std::size_t nx, std::size_t ny,
                   const std::function<void(std::size_t x, std::size_t y)> &visit);

// Number of distinct vertices (exact comparison).
std::size_t distinct_vertex_count(const Polygon2 &poly);

} // namespace voxflow
