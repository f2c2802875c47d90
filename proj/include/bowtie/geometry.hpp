#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace bowtie {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

enum class WingShape { Triangle, Sector };

enum class Region : int { Exterior = 0, Wing1 = 1, Wing2 = 2 };

std::string_view to_string(Region r);

/// Closed polygon, counter-clockwise, last vertex not repeated.
using Polygon = std::vector<Point2>;

/// Two wings with apex angle `alpha` meeting (delta = 0) or separated by
/// `delta` along x1, inside the square hold-all [-L, L]^2 with
/// L = omega_halfwidth.
struct BowtieSpec {
    double alpha = std::numbers::pi / 4;
    double delta = 0.0;
    double r0 = 1.0;
    WingShape wing_shape = WingShape::Triangle;
    double omega_halfwidth = 4.0;

    /// Throws ValidationError naming the first offending field.
    void validate() const;

    bool touching() const { return delta == 0.0; }

    BowtieSpec with_delta(double d) const {
        BowtieSpec s = *this;
        s.delta = d;
        return s;
    }
};

/// Number of straight pieces used to approximate the circular cap of a
/// SECTOR wing.
inline constexpr int kSectorSegments = 32;

/// Right wing D1 (apex at (delta/2, 0), opening toward +x1) and left wing D2
/// (its mirror image across the x2 axis).
std::pair<Polygon, Polygon> wing_outlines(const BowtieSpec& spec);

double polygon_area(const Polygon& poly);

/// Closed wings: points on a wing boundary classify as that wing. Throws
/// ValidationError for points outside the hold-all square.
Region region_of(const BowtieSpec& spec, Point2 p);

/// Same classification against precomputed outlines (no Omega check).
Region classify(const std::pair<Polygon, Polygon>& wings, Point2 p);

}  // namespace bowtie
