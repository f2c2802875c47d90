#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_map>

#include "bowtie/errors.hpp"
#include "bowtie/mesh.hpp"
#include "delaunay.hpp"
#include "predicates.hpp"

namespace bowtie {

MeshOptions default_mesh_options(const BowtieSpec& spec, double h, double grading_target) {
    MeshOptions o;
    o.h = h;
    o.grading_target = grading_target;
    o.grading_slope = 0.1;
    o.far_growth = 0.5;
    o.far_h_max = std::max(spec.r0, h);
    return o;
}

namespace {

double interval_gap(double a0, double a1, double b0, double b1) {
    return std::max({0.0, b0 - a1, a0 - b1});
}

struct SizeField {
    MeshOptions o;
    double neck_half;  // apexes at (+-neck_half, 0)
    double box_x, box_y;

    double from_distances(double d_neck, double d_box) const {
        return std::min(std::clamp(o.grading_slope * d_neck, o.grading_target, o.h) + o.far_growth * d_box,
                        o.far_h_max);
    }
    double operator()(Point2 p) const {
        const double dn = std::hypot(std::max(std::abs(p.x) - neck_half, 0.0), p.y);
        const double db = std::hypot(std::max(std::abs(p.x) - box_x, 0.0), std::max(std::abs(p.y) - box_y, 0.0));
        return from_distances(dn, db);
    }
    // Lower bound of the field over an axis-aligned cell (monotone in both distances).
    double lower(double x0, double x1, double y0, double y1) const {
        const double dn = std::hypot(interval_gap(x0, x1, -neck_half, neck_half), interval_gap(y0, y1, 0.0, 0.0));
        const double db = std::hypot(interval_gap(x0, x1, -box_x, box_x), interval_gap(y0, y1, -box_y, box_y));
        return from_distances(dn, db);
    }
};

SizeField make_field(const std::vector<BowtieSpec>& configs, const MeshOptions& o) {
    double neck = 0.0, bx = 0.0, by = 0.0;
    for (const auto& s : configs) {
        neck = std::max(neck, 0.5 * s.delta);
        bx = std::max(bx, 0.5 * s.delta + s.r0);
        by = std::max(by, s.r0 * std::sin(0.5 * s.alpha));
    }
    return SizeField{o, neck, bx, by};
}

void validate_options(const BowtieSpec& spec, const MeshOptions& o) {
    auto finite_pos = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!finite_pos(o.h) || o.h > spec.r0 / 4) throw ValidationError("h", "must lie in (0, r0/4]");
    if (!finite_pos(o.grading_target) || o.grading_target > o.h)
        throw ValidationError("grading_target", "must lie in (0, h]");
    if (!finite_pos(o.grading_slope)) throw ValidationError("grading_slope", "must be positive");
    if (!std::isfinite(o.far_growth) || o.far_growth < 0.0)
        throw ValidationError("far_growth", "must be non-negative");
    if (!std::isfinite(o.far_h_max) || o.far_h_max < o.h)
        throw ValidationError("far_h_max", "must be at least h");
}

// Quadtree over [-L, L]^2 on the integer lattice m / N, N = 2^depth.
// Coordinates are L * (m / N), so the point set is exactly symmetric in both axes.
class Quadtree {
public:
    Quadtree(double L, const SizeField& f) : L_(L), f_(f) {
        // m / N stays exact in double for depth <= 53.
        depth_ = 1;
        while (2.0 * L / std::ldexp(1.0, depth_) > 0.25 * f.o.grading_target) {
            if (++depth_ > 53)
                throw ValidationError("grading_target", "below the resolution of the mesh lattice (about 1e-15 * L)");
        }
        N_ = std::int64_t{1} << (depth_ - 1);  // lattice spans [-N, N]
        refine(-N_, -N_, 2 * N_);
        std::sort(corners_.begin(), corners_.end());
        corners_.erase(std::unique(corners_.begin(), corners_.end()), corners_.end());
    }

    std::vector<Point2> points() const {
        std::vector<Point2> out;
        out.reserve(corners_.size());
        for (const auto& [i, j] : corners_) out.push_back({coord(i), coord(j)});
        return out;
    }

private:
    double coord(std::int64_t m) const { return L_ * (static_cast<double>(m) / static_cast<double>(N_)); }

    void refine(std::int64_t i0, std::int64_t j0, std::int64_t size) {
        const double x0 = coord(i0), x1 = coord(i0 + size);
        const double y0 = coord(j0), y1 = coord(j0 + size);
        if (size > 1 && (x1 - x0) > f_.lower(x0, x1, y0, y1)) {
            const std::int64_t s = size / 2;
            refine(i0, j0, s);
            refine(i0 + s, j0, s);
            refine(i0, j0 + s, s);
            refine(i0 + s, j0 + s, s);
            return;
        }
        corners_.push_back({i0, j0});
        corners_.push_back({i0 + size, j0});
        corners_.push_back({i0, j0 + size});
        corners_.push_back({i0 + size, j0 + size});
    }

    double L_;
    const SizeField& f_;
    int depth_ = 1;
    std::int64_t N_ = 1;
    std::vector<std::pair<std::int64_t, std::int64_t>> corners_;
};

struct Seg {
    Point2 a, b;
};

// Boundary of the right wing in the closed first quadrant, from the apex to
// the point where the outline meets the x1 axis again.
std::vector<Point2> upper_chain(const BowtieSpec& spec) {
    const Polygon w = wing_outlines(spec).first;
    std::vector<Point2> chain;
    chain.push_back(w[0]);
    if (spec.wing_shape == WingShape::Triangle) {
        chain.push_back(w[2]);
        chain.push_back({w[2].x, 0.0});
    } else {
        // w = apex, lower cap (outer to bisector), bisector point, upper cap (bisector to outer)
        const std::size_t m = kSectorSegments / 2;
        for (std::size_t j = w.size() - 1; j >= m + 1; --j) chain.push_back(w[j]);
    }
    return chain;
}

// Exact segment intersection used for compatible meshes. Only crossings and
// T-junctions occur for translated wing outlines (no collinear overlaps).
std::vector<Seg> split_at_intersections(std::vector<Seg> segs) {
    std::vector<std::vector<Point2>> cuts(segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            const Seg& s = segs[i];
            const Seg& t = segs[j];
            const int o1 = detail::orient2d(s.a, s.b, t.a), o2 = detail::orient2d(s.a, s.b, t.b);
            const int o3 = detail::orient2d(t.a, t.b, s.a), o4 = detail::orient2d(t.a, t.b, s.b);
            if (o1 == 0 && o2 == 0) {
                if (detail::on_segment(s.a, s.b, t.a) || detail::on_segment(s.a, s.b, t.b) ||
                    detail::on_segment(t.a, t.b, s.a))
                    throw MeshingError("EXTERIOR", "overlapping collinear wing edges");
                continue;
            }
            if (o1 * o2 < 0 && o3 * o4 < 0) {
                const Point2 r = s.b - s.a, q = t.b - t.a;
                const double u = cross(t.a - s.a, q) / cross(r, q);
                const Point2 x = s.a + u * r;
                cuts[i].push_back(x);
                cuts[j].push_back(x);
                continue;
            }
            auto touch = [&](const Seg& host, std::size_t hi, Point2 p) {
                if (p == host.a || p == host.b) return;
                if (detail::on_segment(host.a, host.b, p)) cuts[hi].push_back(p);
            };
            if (o1 == 0) touch(s, i, t.a);
            if (o2 == 0) touch(s, i, t.b);
            if (o3 == 0) touch(t, j, s.a);
            if (o4 == 0) touch(t, j, s.b);
        }
    }
    std::vector<Seg> out;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        auto& c = cuts[i];
        const Point2 a = segs[i].a, d = segs[i].b - segs[i].a;
        std::sort(c.begin(), c.end(), [&](Point2 p, Point2 q) { return dot(p - a, d) < dot(q - a, d); });
        c.erase(std::unique(c.begin(), c.end()), c.end());
        Point2 prev = a;
        for (Point2 p : c) {
            out.push_back({prev, p});
            prev = p;
        }
        out.push_back({prev, segs[i].b});
    }
    return out;
}

// Graded points on [a, b]: piece lengths follow the size field, by inverting
// the cumulative integral of 1/s along the segment.
std::vector<Point2> discretize(const Seg& seg, const SizeField& f) {
    const Point2 d = seg.b - seg.a;
    const double len = norm(d);
    std::vector<double> ts{0.0}, F{0.0};
    double t = 0.0, acc = 0.0;
    while (t < len) {
        const double s0 = f(seg.a + (t / len) * d);
        const double dt = std::min(0.05 * s0, len - t);
        const double s1 = f(seg.a + ((t + dt) / len) * d);
        acc += dt * 0.5 * (1.0 / s0 + 1.0 / s1);
        t += dt;
        ts.push_back(t);
        F.push_back(acc);
    }
    const int n = std::max(1, static_cast<int>(std::lround(acc)));
    std::vector<Point2> pts{seg.a};
    std::size_t k = 0;
    for (int i = 1; i < n; ++i) {
        const double target = acc * i / n;
        while (F[k + 1] < target) ++k;
        const double w = (target - F[k]) / (F[k + 1] - F[k]);
        const double tt = ts[k] + w * (ts[k + 1] - ts[k]);
        pts.push_back(seg.a + (tt / len) * d);
    }
    pts.push_back(seg.b);
    return pts;
}

using Key = std::pair<double, double>;
Key key_of(Point2 p) { return {p.x, p.y}; }

struct PointIndex {
    // Points sorted by x for range queries.
    std::vector<std::pair<Point2, int>> by_x;

    explicit PointIndex(const std::vector<Point2>& pts) {
        by_x.reserve(pts.size());
        for (int i = 0; i < static_cast<int>(pts.size()); ++i) by_x.push_back({pts[i], i});
        std::sort(by_x.begin(), by_x.end(), [](const auto& a, const auto& b) {
            return a.first.x != b.first.x ? a.first.x < b.first.x : a.first.y < b.first.y;
        });
    }

    template <class Fn>
    void within(Point2 c, double r, Fn&& fn) const {
        auto lo = std::lower_bound(by_x.begin(), by_x.end(), c.x - r,
                                   [](const auto& e, double v) { return e.first.x < v; });
        for (auto it = lo; it != by_x.end() && it->first.x <= c.x + r; ++it) {
            if (std::abs(it->first.y - c.y) <= r) fn(it->first, it->second);
        }
    }
};

double seg_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
    return norm(p - (a + t * ab));
}

constexpr double kSliverRatio = 1e-10;

TriangleMesh build(const BowtieSpec& base, const std::vector<BowtieSpec>& configs, const MeshOptions& o) {
    base.validate();
    validate_options(base, o);
    const SizeField field = make_field(configs, o);
    const double L = base.omega_halfwidth;

    // Constraint polylines in the first quadrant, mirrored at the end.
    std::vector<Seg> quarter;
    for (const auto& c : configs) {
        const auto chain = upper_chain(c);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i) quarter.push_back({chain[i], chain[i + 1]});
    }
    {
        std::sort(quarter.begin(), quarter.end(), [](const Seg& s, const Seg& t) {
            return std::tie(s.a.x, s.a.y, s.b.x, s.b.y) < std::tie(t.a.x, t.a.y, t.b.x, t.b.y);
        });
        quarter.erase(std::unique(quarter.begin(), quarter.end(),
                                  [](const Seg& s, const Seg& t) { return s.a == t.a && s.b == t.b; }),
                      quarter.end());
    }
    if (configs.size() > 1) quarter = split_at_intersections(std::move(quarter));

    std::vector<Seg> sub;
    for (const auto& s : quarter) {
        // Start from the finer end so the pieces do not depend on segment direction.
        Seg oriented = s;
        const double fa = field(s.a), fb = field(s.b);
        if (fb < fa || (fb == fa && std::tie(s.b.x, s.b.y) < std::tie(s.a.x, s.a.y)))
            std::swap(oriented.a, oriented.b);
        const auto pts = discretize(oriented, field);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            for (int sx : {1, -1})
                for (int sy : {1, -1}) {
                    const Point2 p{sx * pts[i].x, sy * pts[i].y}, q{sx * pts[i + 1].x, sy * pts[i + 1].y};
                    sub.push_back({p, q});
                }
        }
    }
    {
        // Mirror images of segments on an axis coincide; drop duplicates.
        auto canon = [](Seg s) {
            if (std::tie(s.b.x, s.b.y) < std::tie(s.a.x, s.a.y)) std::swap(s.a, s.b);
            return s;
        };
        for (auto& s : sub) s = canon(s);
        std::sort(sub.begin(), sub.end(), [](const Seg& s, const Seg& t) {
            return std::tie(s.a.x, s.a.y, s.b.x, s.b.y) < std::tie(t.a.x, t.a.y, t.b.x, t.b.y);
        });
        sub.erase(std::unique(sub.begin(), sub.end(),
                              [](const Seg& s, const Seg& t) { return s.a == t.a && s.b == t.b; }),
                  sub.end());
    }

    std::set<Key> fixed;
    for (const auto& s : sub) {
        fixed.insert(key_of(s.a));
        fixed.insert(key_of(s.b));
    }

    // Free points: quadtree corners away from the constraints.
    std::vector<Point2> free_pts = Quadtree(L, field).points();
    {
        std::vector<char> keep(free_pts.size(), 1);
        const PointIndex idx(free_pts);
        for (const auto& s : sub) {
            const Point2 m = 0.5 * (s.a + s.b);
            const double ell = norm(s.b - s.a);
            const double reach = std::max(1.2 * 0.5 * ell, 0.45 * ell) + 0.5 * ell;
            idx.within(m, reach, [&](Point2 p, int i) {
                if (norm(p - m) < 1.2 * 0.5 * ell || seg_distance(p, s.a, s.b) < 0.45 * ell) keep[i] = 0;
            });
        }
        std::vector<Point2> kept;
        for (std::size_t i = 0; i < free_pts.size(); ++i) {
            if (keep[i] && !fixed.count(key_of(free_pts[i]))) kept.push_back(free_pts[i]);
        }
        free_pts.swap(kept);
    }

    // Make every constraint subsegment strongly Delaunay: its closed diametral
    // disk holds no other point. Encroaching free points are removed,
    // encroached subsegments are split at the midpoint.
    for (int round = 0;; ++round) {
        if (round > 64) throw MeshingError("EXTERIOR", "constraint recovery did not converge");
        std::vector<Point2> all(free_pts);
        const std::size_t n_free = all.size();
        for (const auto& k : fixed) all.push_back({k.first, k.second});
        const PointIndex idx(all);
        std::vector<char> drop(n_free, 0);
        std::vector<Seg> next;
        bool changed = false;
        for (const auto& s : sub) {
            const Point2 m = 0.5 * (s.a + s.b);
            const double r2 = 0.25 * dot(s.b - s.a, s.b - s.a) * (1.0 + 1e-9);
            bool split = false;
            idx.within(m, std::sqrt(r2), [&](Point2 p, int i) {
                if (p == s.a || p == s.b) return;
                if (dot(p - m, p - m) > r2) return;
                if (static_cast<std::size_t>(i) < n_free) {
                    drop[i] = 1;
                } else {
                    split = true;
                }
            });
            if (split) {
                next.push_back({s.a, m});
                next.push_back({m, s.b});
                fixed.insert(key_of(m));
                changed = true;
            } else {
                next.push_back(s);
            }
        }
        std::vector<Point2> kept;
        for (std::size_t i = 0; i < n_free; ++i) {
            if (drop[i]) {
                changed = true;
            } else {
                kept.push_back(free_pts[i]);
            }
        }
        free_pts.swap(kept);
        sub.swap(next);
        if (!changed) break;
    }

    TriangleMesh m;
    m.spec = base;
    m.options = o;
    m.vertices = free_pts;
    for (const auto& k : fixed) m.vertices.push_back({k.first, k.second});
    std::sort(m.vertices.begin(), m.vertices.end(),
              [](Point2 a, Point2 b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    m.triangles = detail::delaunay_triangulate(m.vertices);

    std::map<Key, int> vid;
    for (int i = 0; i < static_cast<int>(m.vertices.size()); ++i) vid[key_of(m.vertices[i])] = i;
    {
        std::set<std::pair<int, int>> edges;
        for (const auto& t : m.triangles) {
            for (int e = 0; e < 3; ++e) {
                const int a = t[e], b = t[(e + 1) % 3];
                edges.insert({std::min(a, b), std::max(a, b)});
            }
        }
        for (const auto& s : sub) {
            const int a = vid.at(key_of(s.a)), b = vid.at(key_of(s.b));
            if (!edges.count({std::min(a, b), std::max(a, b)}))
                throw MeshingError(std::string(to_string(classify(wing_outlines(base), s.a))),
                                   "wing edge missing from triangulation");
        }
    }

    m.boundary_flag.assign(m.vertices.size(), 0);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        const Point2 p = m.vertices[i];
        m.boundary_flag[i] = (std::abs(p.x) == L || std::abs(p.y) == L) ? 1 : 0;
    }
    const auto wings = wing_outlines(base);
    m.region.resize(m.triangles.size());
    m.h_max = 0.0;
    m.h_min = INFINITY;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        m.region[t] = classify(wings, m.centroid(t));
        const double e = m.max_edge(t);
        if (m.signed_area(t) < kSliverRatio * e * e)
            throw MeshingError(std::string(to_string(m.region[t])), "degenerate sliver triangle");
        m.h_max = std::max(m.h_max, e);
        for (int k = 0; k < 3; ++k) {
            const auto& tri = m.triangles[t];
            m.h_min = std::min(m.h_min, norm(m.vertices[tri[(k + 1) % 3]] - m.vertices[tri[k]]));
        }
    }
    m.check_invariants();
    for (const auto& c : configs) retag(m, c);
    return m;
}

}  // namespace

double TriangleMesh::signed_area(std::size_t t) const {
    const auto& tri = triangles[t];
    return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

Point2 TriangleMesh::centroid(std::size_t t) const {
    const auto& tri = triangles[t];
    const Point2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double TriangleMesh::max_edge(std::size_t t) const {
    const auto& tri = triangles[t];
    double e = 0.0;
    for (int k = 0; k < 3; ++k) e = std::max(e, norm(vertices[tri[(k + 1) % 3]] - vertices[tri[k]]));
    return e;
}

void TriangleMesh::check_invariants() const {
    const double L = spec.omega_halfwidth;
    if (region.size() != triangles.size() || boundary_flag.size() != vertices.size())
        throw MeshingError("EXTERIOR", "tag arrays do not match mesh size");
    std::map<std::pair<int, int>, int> edge_use;
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        const auto& tri = triangles[t];
        for (int k = 0; k < 3; ++k) {
            if (tri[k] < 0 || tri[k] >= static_cast<int>(vertices.size()))
                throw MeshingError(std::string(to_string(region[t])), "vertex index out of range");
        }
        if (!(signed_area(t) > 0.0))
            throw MeshingError(std::string(to_string(region[t])), "non-positive triangle area");
        for (int k = 0; k < 3; ++k) {
            const int a = tri[k], b = tri[(k + 1) % 3];
            ++edge_use[{std::min(a, b), std::max(a, b)}];
        }
    }
    for (const auto& [e, n] : edge_use) {
        const Point2 a = vertices[e.first], b = vertices[e.second];
        const bool on_box = (a.x == b.x && std::abs(a.x) == L) || (a.y == b.y && std::abs(a.y) == L);
        if (n > 2 || (n == 1 && !on_box) || (n == 2 && on_box))
            throw MeshingError("EXTERIOR", "mesh is not conforming");
    }
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Point2 p = vertices[i];
        const bool on = std::abs(p.x) == L || std::abs(p.y) == L;
        if (static_cast<bool>(boundary_flag[i]) != on)
            throw MeshingError("EXTERIOR", "boundary flag disagrees with vertex position");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t) total += signed_area(t);
    if (std::abs(total - 4 * L * L) > 1e-12 * 4 * L * L)
        throw MeshingError("EXTERIOR", "triangles do not tile the hold-all square");
    const auto tags = retag(*this, spec);
    if (tags != region) throw MeshingError("WING1", "region tags disagree with the wing outlines");
}

std::vector<Region> retag(const TriangleMesh& m, const BowtieSpec& spec) {
    const auto wings = wing_outlines(spec);
    std::vector<Region> tags(m.triangles.size());
    double a1 = 0.0, a2 = 0.0;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        tags[t] = classify(wings, m.centroid(t));
        if (tags[t] != Region::Exterior) {
            // A wing triangle must lie in the closed wing.
            const Polygon& w = tags[t] == Region::Wing1 ? wings.first : wings.second;
            for (int v : m.triangles[t]) {
                const Point2 p = m.vertices[v];
                for (std::size_t i = 0; i < w.size(); ++i) {
                    const Point2 a = w[i], b = w[(i + 1) % w.size()];
                    if (cross(b - a, p - a) < -1e-12 * norm(b - a))
                        throw MeshingError(std::string(to_string(tags[t])), "wing is not a union of triangles");
                }
            }
        }
        if (tags[t] == Region::Wing1) a1 += m.signed_area(t);
        if (tags[t] == Region::Wing2) a2 += m.signed_area(t);
    }
    const double e1 = polygon_area(wings.first), e2 = polygon_area(wings.second);
    if (std::abs(a1 - e1) > 1e-12 * e1) throw MeshingError("WING1", "tagged area differs from wing area");
    if (std::abs(a2 - e2) > 1e-12 * e2) throw MeshingError("WING2", "tagged area differs from wing area");
    return tags;
}

TriangleMesh mesh(const BowtieSpec& spec, const MeshOptions& options) {
    return build(spec, {spec}, options);
}

TriangleMesh mesh(const BowtieSpec& spec, double h, double grading_target) {
    spec.validate();
    return mesh(spec, default_mesh_options(spec, h, grading_target));
}

TriangleMesh compatible_mesh(const BowtieSpec& base, std::span<const double> deltas, const MeshOptions& options) {
    std::vector<BowtieSpec> configs{base};
    for (double d : deltas) {
        const BowtieSpec s = base.with_delta(d);
        s.validate();
        if (d != base.delta) configs.push_back(s);
    }
    return build(base, configs, options);
}

namespace {

template <class Pick>
double size_near(const TriangleMesh& m, Point2 c, double radius, double init, Pick pick) {
    double v = init;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        bool near = false;
        for (int i : m.triangles[t]) near = near || norm(m.vertices[i] - c) <= radius;
        if (!near) continue;
        const auto& tri = m.triangles[t];
        for (int k = 0; k < 3; ++k) v = pick(v, norm(m.vertices[tri[(k + 1) % 3]] - m.vertices[tri[k]]));
    }
    return v;
}

}  // namespace

double local_size_near_origin(const TriangleMesh& m, double radius) {
    return local_size_near(m, {0.0, 0.0}, radius);
}

double min_size_near_origin(const TriangleMesh& m, double radius) { return min_size_near(m, {0.0, 0.0}, radius); }

double min_size_near(const TriangleMesh& m, Point2 center, double radius) {
    return size_near(m, center, radius, INFINITY, [](double a, double b) { return std::min(a, b); });
}

double local_size_near(const TriangleMesh& m, Point2 center, double radius) {
    return size_near(m, center, radius, 0.0, [](double a, double b) { return std::max(a, b); });
}

}  // namespace bowtie
