#include "predicates.hpp"

#include <gmpxx.h>

#include <algorithm>
#include <cmath>

namespace bowtie::detail {

namespace {

// Error-bound constants of the static filters (Shewchuk's A-level bounds).
constexpr double kEps = 1.1102230246251565e-16;  // 2^-53
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kInCircleBound = (10.0 + 96.0 * kEps) * kEps;

int sign(const mpq_class& v) { return sgn(v); }

int orient_exact(Point2 a, Point2 b, Point2 c) {
    const mpq_class acx = mpq_class(a.x) - mpq_class(c.x);
    const mpq_class bcx = mpq_class(b.x) - mpq_class(c.x);
    const mpq_class acy = mpq_class(a.y) - mpq_class(c.y);
    const mpq_class bcy = mpq_class(b.y) - mpq_class(c.y);
    return sign(acx * bcy - acy * bcx);
}

int incircle_exact(Point2 a, Point2 b, Point2 c, Point2 d) {
    const mpq_class dx(d.x), dy(d.y);
    const mpq_class adx = mpq_class(a.x) - dx, ady = mpq_class(a.y) - dy;
    const mpq_class bdx = mpq_class(b.x) - dx, bdy = mpq_class(b.y) - dy;
    const mpq_class cdx = mpq_class(c.x) - dx, cdy = mpq_class(c.y) - dy;
    const mpq_class alift = adx * adx + ady * ady;
    const mpq_class blift = bdx * bdx + bdy * bdy;
    const mpq_class clift = cdx * cdx + cdy * cdy;
    const mpq_class det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                          clift * (adx * bdy - bdx * ady);
    return sign(det);
}

}  // namespace

int orient2d(Point2 a, Point2 b, Point2 c) {
    const double detleft = (a.x - c.x) * (b.y - c.y);
    const double detright = (a.y - c.y) * (b.x - c.x);
    const double det = detleft - detright;
    double detsum = 0.0;
    if (detleft > 0.0) {
        if (detright <= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
        detsum = detleft + detright;
    } else if (detleft < 0.0) {
        if (detright >= 0.0) return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
        detsum = -detleft - detright;
    } else {
        return det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    }
    const double bound = kOrientBound * detsum;
    if (det >= bound) return 1;
    if (-det >= bound) return -1;
    return orient_exact(a, b, c);
}

int incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;

    const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
    const double alift = adx * adx + ady * ady;
    const double cdxady = cdx * ady, adxcdy = adx * cdy;
    const double blift = bdx * bdx + bdy * bdy;
    const double adxbdy = adx * bdy, bdxady = bdx * ady;
    const double clift = cdx * cdx + cdy * cdy;

    const double det =
        alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
    const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                             (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                             (std::abs(adxbdy) + std::abs(bdxady)) * clift;
    const double bound = kInCircleBound * permanent;
    if (det > bound) return 1;
    if (-det > bound) return -1;
    return incircle_exact(a, b, c, d);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
    if (orient2d(a, b, p) != 0) return false;
    return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
           p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

}  // namespace bowtie::detail
