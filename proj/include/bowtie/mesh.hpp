#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bowtie/geometry.hpp"

namespace bowtie {

/// Size-field parameters of the graded mesher. All lengths are absolute.
///
/// The target element size is
///   s(x) = min(clamp(slope * d_neck(x), grading_target, h) + far_growth * d_box(x), far_h_max)
/// where d_neck is the distance to the neck (the segment joining the two
/// apexes) and d_box the distance to the bounding box of the wings. The
/// quadtree that seeds interior points halves its cells ring by ring toward
/// the neck, so the grading is geometric with ratio 1/2.
struct MeshOptions {
    double h = 0.1;
    double grading_target = 0.0125;
    double grading_slope = 0.1;
    double far_growth = 0.5;
    double far_h_max = 1.0;
};

/// Defaults tied to the wing size: h = 0.1 r0, slope 0.1, far sizes capped at r0.
MeshOptions default_mesh_options(const BowtieSpec& spec, double h, double grading_target);

struct TriangleMesh {
    std::vector<Point2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise
    std::vector<Region> region;                 // per triangle
    std::vector<std::uint8_t> boundary_flag;    // per vertex, 1 on the boundary of Omega
    double h_max = 0.0;
    double h_min = 0.0;
    BowtieSpec spec;      // geometry the tags refer to
    MeshOptions options;  // size field the mesh was built with

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }

    double signed_area(std::size_t t) const;
    Point2 centroid(std::size_t t) const;
    double max_edge(std::size_t t) const;

    /// Re-checks every TriangleMesh invariant; throws MeshingError on failure.
    void check_invariants() const;
};

TriangleMesh mesh(const BowtieSpec& spec, double h, double grading_target);
TriangleMesh mesh(const BowtieSpec& spec, const MeshOptions& options);

/// One mesh whose edges conform to the wings of `base.with_delta(d)` for
/// every d in `deltas` (and to `base` itself). Tags refer to `base`.
TriangleMesh compatible_mesh(const BowtieSpec& base, std::span<const double> deltas,
                             const MeshOptions& options);

/// Region tags of `m` with respect to another wing configuration. Throws
/// MeshingError if those wings are not unions of mesh triangles.
std::vector<Region> retag(const TriangleMesh& m, const BowtieSpec& spec);

/// Largest edge of any triangle with a vertex within `radius` of the origin.
double local_size_near_origin(const TriangleMesh& m, double radius);

/// Smallest edge of any triangle with a vertex within `radius` of the origin.
double min_size_near_origin(const TriangleMesh& m, double radius);

/// Largest and smallest edge of any triangle with a vertex within `radius` of `center`.
double local_size_near(const TriangleMesh& m, Point2 center, double radius);
double min_size_near(const TriangleMesh& m, Point2 center, double radius);

/// Plain-text export: "vertices N triangles M", N lines "x y flag",
/// M lines "i j k tag", 17 significant digits.
void write_mesh(std::ostream& os, const TriangleMesh& m);
std::string mesh_text(const TriangleMesh& m);

/// 64-bit FNV-1a of mesh_text(m), as 16 hex digits.
std::string mesh_hash(const TriangleMesh& m);

}  // namespace bowtie
