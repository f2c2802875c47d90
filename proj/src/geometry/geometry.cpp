#include "bowtie/geometry.hpp"

#include <cmath>
#include <numbers>

#include "bowtie/errors.hpp"
#include "predicates.hpp"

namespace bowtie {

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Exterior: return "EXTERIOR";
        case Region::Wing1: return "WING1";
        case Region::Wing2: return "WING2";
    }
    return "UNKNOWN";
}

void BowtieSpec::validate() const {
    constexpr double pi = std::numbers::pi;
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < pi / 3))
        throw ValidationError("alpha", "must lie in (0, pi/3)");
    if (!std::isfinite(r0) || !(r0 > 0.0)) throw ValidationError("r0", "must be positive");
    if (!std::isfinite(delta) || !(delta >= 0.0) || !(delta < r0))
        throw ValidationError("delta", "must lie in [0, r0)");
    if (!std::isfinite(omega_halfwidth) || !(omega_halfwidth >= 4.0 * r0))
        throw ValidationError("omega_halfwidth", "must be at least 4 r0");
}

std::pair<Polygon, Polygon> wing_outlines(const BowtieSpec& spec) {
    spec.validate();
    const double ax = 0.5 * spec.delta;
    const double half = 0.5 * spec.alpha;
    Polygon right;
    right.push_back({ax, 0.0});
    if (spec.wing_shape == WingShape::Triangle) {
        const double c = spec.r0 * std::cos(half), s = spec.r0 * std::sin(half);
        right.push_back({ax + c, -s});
        right.push_back({ax + c, s});
    } else {
        // Angles are built from the bisector outward so the cap is exactly
        // symmetric under x2 -> -x2.
        constexpr int m = kSectorSegments / 2;
        std::vector<Point2> upper(m + 1);
        for (int j = 0; j <= m; ++j) {
            const double th = half * (static_cast<double>(j) / m);
            upper[j] = {ax + spec.r0 * std::cos(th), spec.r0 * std::sin(th)};
        }
        for (int j = m; j >= 1; --j) right.push_back({upper[j].x, -upper[j].y});
        for (int j = 0; j <= m; ++j) right.push_back(upper[j]);
    }
    // Mirror across the x2 axis reverses orientation; rebuild counter-clockwise.
    Polygon left;
    left.reserve(right.size());
    left.push_back({-right[0].x, right[0].y});
    for (std::size_t i = right.size() - 1; i >= 1; --i) left.push_back({-right[i].x, right[i].y});
    return {right, left};
}

double polygon_area(const Polygon& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2 p = poly[i], q = poly[(i + 1) % poly.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

namespace {

// Both wing shapes are convex for alpha < pi.
bool in_closed_convex(const Polygon& poly, Point2 p) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (detail::orient2d(poly[i], poly[(i + 1) % poly.size()], p) < 0) return false;
    }
    return true;
}

}  // namespace

Region classify(const std::pair<Polygon, Polygon>& wings, Point2 p) {
    if (in_closed_convex(wings.first, p)) return Region::Wing1;
    if (in_closed_convex(wings.second, p)) return Region::Wing2;
    return Region::Exterior;
}

Region region_of(const BowtieSpec& spec, Point2 p) {
    const double L = spec.omega_halfwidth;
    if (!(std::abs(p.x) <= L) || !(std::abs(p.y) <= L))
        throw ValidationError("point", "outside the hold-all domain");
    return classify(wing_outlines(spec), p);
}

}  // namespace bowtie
