#pragma once

#include <array>
#include <span>
#include <vector>

#include "bowtie/geometry.hpp"

namespace bowtie::detail {

/// Delaunay triangulation of a set of distinct points (Bowyer-Watson with
/// exact predicates). Returns counter-clockwise vertex triples indexing
/// `points`. Triangles near the convex hull can be missing if the hull has
/// long collinear runs whose edges are not locally Delaunay; callers that
/// need a specific boundary check for it.
std::vector<std::array<int, 3>> delaunay_triangulate(std::span<const Point2> points);

}  // namespace bowtie::detail
