#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "bowtie/errors.hpp"
#include "bowtie/geometry.hpp"
#include "bowtie/mesh.hpp"
#include "geometry/delaunay.hpp"
#include "geometry/predicates.hpp"

using namespace bowtie;
constexpr double pi = std::numbers::pi;

namespace {

double tagged_area(const TriangleMesh& m, Region r) {
    double a = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
        if (m.region[t] == r) a += m.signed_area(t);
    return a;
}

std::set<std::pair<double, double>> vertex_set(const TriangleMesh& m) {
    std::set<std::pair<double, double>> s;
    for (auto p : m.vertices) s.insert({p.x, p.y});
    return s;
}

}  // namespace

TEST_CASE("geometry validation names the offending field") {
    auto field_of = [](BowtieSpec s) {
        try {
            s.validate();
        } catch (const ValidationError& e) {
            return e.field();
        }
        return std::string("none");
    };
    BowtieSpec s;
    CHECK(field_of(s) == "none");
    s.alpha = pi / 3;
    CHECK(field_of(s) == "alpha");
    s = {};
    s.alpha = 0.0;
    CHECK(field_of(s) == "alpha");
    s = {};
    s.delta = 1.0;
    CHECK(field_of(s) == "delta");
    s = {};
    s.delta = -0.1;
    CHECK(field_of(s) == "delta");
    s = {};
    s.omega_halfwidth = 3.9;
    CHECK(field_of(s) == "omega_halfwidth");
}

TEST_CASE("touching wings share the apex at the origin") {
    BowtieSpec s;
    const auto [w1, w2] = wing_outlines(s);
    REQUIRE(w1.size() == 3);
    REQUIRE(w2.size() == 3);
    CHECK(std::count(w1.begin(), w1.end(), Point2{0.0, 0.0}) == 1);
    CHECK(std::count(w2.begin(), w2.end(), Point2{0.0, 0.0}) == 1);
    // Apex angle between the two sides that leave the origin.
    Point2 a = w1[1], b = w1[2];
    if (w1[1] == Point2{0.0, 0.0}) a = w1[2], b = w1[0];
    if (w1[2] == Point2{0.0, 0.0}) a = w1[0], b = w1[1];
    CHECK(std::acos(dot(a, b) / (norm(a) * norm(b))) == doctest::Approx(pi / 4).epsilon(1e-14));
    CHECK(norm(a) == doctest::Approx(1.0));
    CHECK(norm(b) == doctest::Approx(1.0));
}

TEST_CASE("separated wings have apexes at plus and minus delta/2") {
    BowtieSpec s;
    s.delta = 0.1;
    const auto [w1, w2] = wing_outlines(s);
    CHECK(std::count(w1.begin(), w1.end(), Point2{0.05, 0.0}) == 1);
    CHECK(std::count(w2.begin(), w2.end(), Point2{-0.05, 0.0}) == 1);
    double min1 = 1e9, max2 = -1e9;
    for (auto p : w1) min1 = std::min(min1, p.x);
    for (auto p : w2) max2 = std::max(max2, p.x);
    CHECK(min1 - max2 == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("reflection across the x2 axis maps wing 1 onto wing 2") {
    for (auto shape : {WingShape::Triangle, WingShape::Sector}) {
        BowtieSpec s;
        s.delta = 0.3;
        s.alpha = 0.9;
        s.wing_shape = shape;
        const auto [w1, w2] = wing_outlines(s);
        REQUIRE(w1.size() == w2.size());
        std::set<std::pair<double, double>> a, b;
        for (auto p : w1) a.insert({-p.x, p.y});
        for (auto p : w2) b.insert({p.x, p.y});
        CHECK(a == b);
        // Also symmetric under x2 -> -x2.
        std::set<std::pair<double, double>> c;
        for (auto p : w1) c.insert({p.x, -p.y});
        std::set<std::pair<double, double>> d;
        for (auto p : w1) d.insert({p.x, p.y});
        CHECK(c == d);
    }
}

TEST_CASE("region_of examples") {
    BowtieSpec s;
    CHECK(region_of(s, {0.5, 0.0}) == Region::Wing1);
    CHECK(region_of(s, {-0.5, 0.0}) == Region::Wing2);
    CHECK(region_of(s, {0.9 * s.omega_halfwidth, 0.9 * s.omega_halfwidth}) == Region::Exterior);
    BowtieSpec g = s.with_delta(0.1);
    CHECK(region_of(g, {0.0, 0.0}) == Region::Exterior);
    CHECK(region_of(g, {0.05, 0.0}) == Region::Wing1);  // closed wings
    CHECK_THROWS_AS(region_of(s, {4.5, 0.0}), ValidationError);
}

TEST_CASE("reference mesh resolves the neck") {
    BowtieSpec s;
    const auto m = mesh(s, 0.1, 0.0125);
    CHECK_NOTHROW(m.check_invariants());
    CHECK(min_size_near_origin(m, 0.1) <= 0.0125);
    // Sizes bound the quadtree cell side; edges are at most its diagonal.
    CHECK(m.h_max <= std::sqrt(2.0) * s.r0 * (1 + 1e-12));
    const double mid = local_size_near(m, {0.7, 0.0}, 0.05);
    CHECK(mid <= std::sqrt(2.0) * 0.1 * (1 + 1e-12));
    CHECK(mid >= 0.025);
}

TEST_CASE("wing areas are meshed exactly and tags agree with region_of") {
    for (double delta : {0.0, 0.1, 0.4}) {
        for (auto shape : {WingShape::Triangle, WingShape::Sector}) {
            BowtieSpec s;
            s.delta = delta;
            s.wing_shape = shape;
            const auto m = mesh(s, 0.1, 0.025);
            CHECK_NOTHROW(m.check_invariants());
            const auto [w1, w2] = wing_outlines(s);
            CHECK(tagged_area(m, Region::Wing1) == doctest::Approx(polygon_area(w1)).epsilon(1e-12));
            CHECK(tagged_area(m, Region::Wing2) == doctest::Approx(polygon_area(w2)).epsilon(1e-12));
            double total = 0.0;
            for (std::size_t t = 0; t < m.triangle_count(); ++t) total += m.signed_area(t);
            const double L = s.omega_halfwidth;
            CHECK(total == doctest::Approx(4 * L * L).epsilon(1e-12));
            int mismatched = 0;
            for (std::size_t t = 0; t < m.triangle_count(); ++t)
                mismatched += region_of(s, m.centroid(t)) != m.region[t];
            CHECK(mismatched == 0);
        }
    }
}

TEST_CASE("boundary flags sit exactly on the hold-all square") {
    BowtieSpec s;
    s.delta = 0.2;
    const auto m = mesh(s, 0.1, 0.05);
    const double L = s.omega_halfwidth;
    int flagged = 0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const auto p = m.vertices[v];
        const bool on = std::abs(p.x) == L || std::abs(p.y) == L;
        CHECK(on == bool(m.boundary_flag[v]));
        flagged += m.boundary_flag[v];
    }
    CHECK(flagged >= 4);
}

TEST_CASE("touching mesh carries one shared vertex at the origin") {
    const auto m = mesh(BowtieSpec{}, 0.1, 0.0125);
    int at_origin = 0;
    bool wing1 = false, wing2 = false;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) at_origin += m.vertices[v] == Point2{0.0, 0.0};
    REQUIRE(at_origin == 1);
    for (std::size_t t = 0; t < m.triangle_count(); ++t)
        for (int i : m.triangles[t])
            if (m.vertices[i] == Point2{0.0, 0.0}) {
                wing1 |= m.region[t] == Region::Wing1;
                wing2 |= m.region[t] == Region::Wing2;
            }
    CHECK(wing1);
    CHECK(wing2);
}

TEST_CASE("meshes are mirror symmetric") {
    for (double delta : {0.0, 0.1}) {
        BowtieSpec s;
        s.delta = delta;
        const auto m = mesh(s, 0.1, 0.0125);
        const auto vs = vertex_set(m);
        int missing = 0;
        for (auto p : m.vertices) missing += !vs.count({-p.x, p.y}) + !vs.count({p.x, -p.y});
        CHECK(missing == 0);
    }
}

TEST_CASE("doubling the hold-all keeps every invariant") {
    BowtieSpec s;
    s.delta = 0.1;
    const auto a = mesh(s, 0.1, 0.025);
    s.omega_halfwidth *= 2;
    const auto b = mesh(s, 0.1, 0.025);
    CHECK_NOTHROW(b.check_invariants());
    CHECK(b.vertex_count() > a.vertex_count());
    CHECK(tagged_area(b, Region::Wing1) == doctest::Approx(tagged_area(a, Region::Wing1)).epsilon(1e-12));
}

TEST_CASE("halving the grading target never loses vertices") {
    BowtieSpec s;
    std::size_t last = 0;
    for (double gt : {0.05, 0.025, 0.0125, 0.00625, 0.003125}) {
        const auto m = mesh(s, 0.1, gt);
        CHECK_NOTHROW(m.check_invariants());
        CHECK(m.vertex_count() >= last);
        CHECK(min_size_near_origin(m, 0.1) <= gt);
        last = m.vertex_count();
    }
}

TEST_CASE("grading below the lattice resolution is rejected") {
    CHECK_THROWS_AS(mesh(BowtieSpec{}, 0.1, 1e-18), ValidationError);
    CHECK_THROWS_AS(mesh(BowtieSpec{}, 0.5, 0.01), ValidationError);  // h > r0 / 4
    CHECK_THROWS_AS(mesh(BowtieSpec{}, 0.1, 0.2), ValidationError);   // target above h
}

TEST_CASE("compatible meshes conform to every shifted geometry") {
    BowtieSpec s;
    const std::vector<double> ds{0.2, 0.1, 0.05};
    const auto m = compatible_mesh(s, ds, default_mesh_options(s, 0.1, 0.0125));
    CHECK_NOTHROW(m.check_invariants());
    for (double d : ds) {
        const auto sd = s.with_delta(d);
        const auto tags = retag(m, sd);
        const auto [w1, w2] = wing_outlines(sd);
        double a1 = 0.0;
        for (std::size_t t = 0; t < m.triangle_count(); ++t)
            if (tags[t] == Region::Wing1) a1 += m.signed_area(t);
        CHECK(a1 == doctest::Approx(polygon_area(w1)).epsilon(1e-12));
    }
    // A plain touching mesh does not contain the shifted wing edges.
    const auto plain = mesh(s, 0.1, 0.0125);
    CHECK_THROWS_AS(retag(plain, s.with_delta(0.0371)), MeshingError);
}

TEST_CASE("mesh export format") {
    BowtieSpec s;
    s.delta = 0.4;
    const auto m = mesh(s, 0.25, 0.1);
    const std::string text = mesh_text(m);
    std::istringstream in(text);
    std::string w1, w2;
    std::size_t nv = 0, nt = 0;
    in >> w1 >> nv >> w2 >> nt;
    CHECK(w1 == "vertices");
    CHECK(w2 == "triangles");
    REQUIRE(nv == m.vertex_count());
    REQUIRE(nt == m.triangle_count());
    for (std::size_t v = 0; v < nv; ++v) {
        double x = 0, y = 0;
        int f = -1;
        in >> x >> y >> f;
        CHECK(x == m.vertices[v].x);  // 17 digits round-trip exactly
        CHECK(y == m.vertices[v].y);
        CHECK(f == m.boundary_flag[v]);
    }
    for (std::size_t t = 0; t < nt; ++t) {
        int i = 0, j = 0, k = 0, tag = -1;
        in >> i >> j >> k >> tag;
        CHECK(std::array<int, 3>{i, j, k} == m.triangles[t]);
        CHECK(tag == static_cast<int>(m.region[t]));
    }
    std::string rest;
    in >> rest;
    CHECK(rest.empty());
    CHECK(mesh_hash(m) == mesh_hash(mesh(s, 0.25, 0.1)));
    CHECK(mesh_hash(m).size() == 16);
}

TEST_CASE("exact predicates decide near-degenerate configurations") {
    using detail::incircle;
    using detail::orient2d;
    CHECK(orient2d({0, 0}, {1, 0}, {0, 1}) == 1);
    CHECK(orient2d({0, 0}, {0, 1}, {1, 0}) == -1);
    // Collinear points whose floating-point orientation is pure rounding noise.
    const Point2 a{0.1, 0.1}, b{0.3, 0.3}, c{0.7, 0.7};
    CHECK(orient2d(a, b, c) == 0);
    const Point2 cn{0.7, std::nextafter(0.7, 1.0)};
    CHECK(orient2d(a, b, cn) == 1);
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {1, 1}) == 0);
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {0.5, 0.5}) == 1);
    CHECK(incircle({0, 0}, {1, 0}, {0, 1}, {2, 2}) == -1);
    CHECK(detail::on_segment({0, 0}, {1, 1}, {0.5, 0.5}));
    CHECK_FALSE(detail::on_segment({0, 0}, {1, 1}, {1.5, 1.5}));
}

TEST_CASE("delaunay triangulation is empty-circle and covers the hull") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Point2> pts{{-1.5, -1.5}, {1.5, -1.5}, {1.5, 1.5}, {-1.5, 1.5}};
    for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng)});
    const auto tris = detail::delaunay_triangulate(pts);
    double area = 0.0;
    for (const auto& t : tris) {
        REQUIRE(detail::orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) == 1);
        area += 0.5 * cross(pts[t[1]] - pts[t[0]], pts[t[2]] - pts[t[0]]);
    }
    CHECK(area == doctest::Approx(9.0).epsilon(1e-12));
    int violations = 0;
    for (const auto& t : tris)
        for (std::size_t p = 0; p < pts.size(); p += 7)
            violations += detail::incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p]) > 0;
    CHECK(violations == 0);
}
