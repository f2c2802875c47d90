#pragma once

#include "bowtie/geometry.hpp"

namespace bowtie::detail {

/// Sign of the orientation determinant of (a, b, c): +1 counter-clockwise,
/// -1 clockwise, 0 collinear. Exact: a floating-point filter first, GMP
/// rationals when the filter cannot decide.
int orient2d(Point2 a, Point2 b, Point2 c);

/// +1 if d lies strictly inside the circle through the counter-clockwise
/// triangle (a, b, c), -1 strictly outside, 0 on it. Exact.
int incircle(Point2 a, Point2 b, Point2 c, Point2 d);

/// Exact test: p on the closed segment [a, b].
bool on_segment(Point2 a, Point2 b, Point2 p);

}  // namespace bowtie::detail
