#include "bowtie/dispersion.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "bowtie/errors.hpp"
#include "common/gauss_legendre.hpp"

namespace bowtie {

namespace {

constexpr double kPi = std::numbers::pi;

struct HalfAngles {
    double a;  // xi alpha / 2
    double b;  // xi (pi - alpha) / 2
};

HalfAngles half_angles(double xi, double alpha) {
    if (!std::isfinite(xi) || xi == 0.0) throw ValidationError("xi", "must be finite and nonzero");
    if (!std::isfinite(alpha) || !(alpha > 0.0) || !(alpha < kPi))
        throw ValidationError("alpha", "must lie in (0, pi)");
    const double x = std::abs(xi);
    return {0.5 * x * alpha, 0.5 * x * (kPi - alpha)};
}

// e^{-x} cosh x and e^{-x} sinh x for x >= 0.
double cosh_s(double x) { return 0.5 * (1.0 + std::exp(-2.0 * x)); }
double sinh_s(double x) { return -0.5 * std::expm1(-2.0 * x); }

double coth(double x) { return 1.0 / std::tanh(x); }

struct Quadratic {
    double c2, c1, c0;
};

// Coefficients scaled by e^{-2a-2b}; the common factor cancels in ratios.
Quadratic scaled_dD(HalfAngles h) {
    const double ca = cosh_s(h.a), sa = sinh_s(h.a);
    return {ca * ca * sinh_s(2 * h.b), cosh_s(2 * h.b) * sinh_s(2 * h.a), sa * sa * sinh_s(2 * h.b)};
}

Quadratic scaled_dN(HalfAngles h) {
    const double ca = cosh_s(h.a), sa = sinh_s(h.a);
    return {sa * sa * sinh_s(2 * h.b), cosh_s(2 * h.b) * sinh_s(2 * h.a), ca * ca * sinh_s(2 * h.b)};
}

double normalized(const Quadratic& q, double k) {
    const double d = (q.c2 * k + q.c1) * k + q.c0;
    const double s = std::abs(q.c2) * k * k + std::abs(q.c1) * std::abs(k) + std::abs(q.c0);
    return std::abs(d) / s;
}

// 1 + k_{D,+} = cosh(b - a) / (cosh a cosh b), written with scaled functions.
double one_plus_kDplus(HalfAngles h) {
    return cosh_s(h.b - h.a) * std::exp(-2.0 * h.a) / (cosh_s(h.a) * cosh_s(h.b));
}

// -1 - k_{N,-} = cosh(b - a) / (sinh a sinh b).
double minus_one_minus_kNminus(HalfAngles h) {
    return cosh_s(h.b - h.a) * std::exp(-2.0 * h.a) / (sinh_s(h.a) * sinh_s(h.b));
}

}  // namespace

std::string_view to_string(Branch b) {
    switch (b) {
        case Branch::DPlus: return "D_PLUS";
        case Branch::DMinus: return "D_MINUS";
        case Branch::NPlus: return "N_PLUS";
        case Branch::NMinus: return "N_MINUS";
    }
    return "UNKNOWN";
}

double eval_dD(double k, double xi, double alpha) {
    const auto [a, b] = half_angles(xi, alpha);
    const double ca = std::cosh(a), sa = std::sinh(a);
    return ca * ca * std::sinh(2 * b) * k * k + std::cosh(2 * b) * std::sinh(2 * a) * k +
           sa * sa * std::sinh(2 * b);
}

double eval_dN(double k, double xi, double alpha) {
    const auto [a, b] = half_angles(xi, alpha);
    const double ca = std::cosh(a), sa = std::sinh(a);
    return sa * sa * std::sinh(2 * b) * k * k + std::cosh(2 * b) * std::sinh(2 * a) * k +
           ca * ca * std::sinh(2 * b);
}

double normalized_dD(double k, double xi, double alpha) {
    return normalized(scaled_dD(half_angles(xi, alpha)), k);
}

double normalized_dN(double k, double xi, double alpha) {
    return normalized(scaled_dN(half_angles(xi, alpha)), k);
}

double root_kD(double xi, double alpha, Sign sign) {
    const auto [a, b] = half_angles(xi, alpha);
    return sign == Sign::Plus ? -std::tanh(a) * std::tanh(b) : -std::tanh(a) * coth(b);
}

double root_kN(double xi, double alpha, Sign sign) {
    const auto [a, b] = half_angles(xi, alpha);
    return sign == Sign::Plus ? -coth(a) * std::tanh(b) : -coth(a) * coth(b);
}

double root_kD_quadratic(double xi, double alpha, Sign sign) {
    const auto [a, b] = half_angles(xi, alpha);
    const double ch = std::cosh(a);
    const double num = (std::cosh(2 * b) + (sign == Sign::Plus ? -1.0 : 1.0)) * std::sinh(2 * a);
    return -num / (2.0 * ch * ch * std::sinh(2 * b));
}

double root_kN_quadratic(double xi, double alpha, Sign sign) {
    const auto [a, b] = half_angles(xi, alpha);
    const double sh = std::sinh(a);
    const double num = (std::cosh(2 * b) + (sign == Sign::Plus ? -1.0 : 1.0)) * std::sinh(2 * a);
    return -num / (2.0 * sh * sh * std::sinh(2 * b));
}

double root_of(Branch branch, double xi, double alpha) {
    switch (branch) {
        case Branch::DPlus: return root_kD(xi, alpha, Sign::Plus);
        case Branch::DMinus: return root_kD(xi, alpha, Sign::Minus);
        case Branch::NPlus: return root_kN(xi, alpha, Sign::Plus);
        case Branch::NMinus: return root_kN(xi, alpha, Sign::Minus);
    }
    return 0.0;
}

RootGaps root_gaps(double xi, double alpha) {
    const HalfAngles h = half_angles(xi, alpha);
    const double a = h.a, b = h.b;
    const double ta = std::tanh(a), tb = std::tanh(b);
    const double inv_sinh2b = std::exp(-2.0 * b) / sinh_s(2.0 * b);
    // sinh(b - a) / (sinh a cosh b) and sinh(b - a) / (cosh a sinh b)
    const double e = std::exp(-2.0 * a);
    const double r_n = sinh_s(b - a) * e / (sinh_s(a) * cosh_s(b));
    const double r_d = sinh_s(b - a) * e / (cosh_s(a) * sinh_s(b));
    return {2.0 / ta * inv_sinh2b, r_n, r_d, 2.0 * ta * inv_sinh2b, ta * tb};
}

CornerMode make_mode(Branch branch, double xi, double alpha) {
    CornerMode m;
    m.branch = branch;
    m.xi = std::abs(xi);
    m.alpha = alpha;
    m.k = root_of(branch, xi, alpha);
    m.beta = beta_of_k(m.k);
    return m;
}

CornerMode invert_xi(double k, double alpha) {
    if (!std::isfinite(k)) throw ValidationError("k", "must be finite");
    if (k >= 0.0) throw ValidationError("k", "positive contrast has no oscillatory mode");
    if (k == -1.0) throw ValidationError("k", "critical contrast k = -1 is reached by no branch");
    half_angles(1.0, alpha);

    const bool d_branch = k > -1.0;
    // f is decreasing along D_PLUS and increasing along N_MINUS; g = sign-normalized so that
    // g > 0 below the root and g < 0 above it.
    auto g = [&](double xi) {
        const HalfAngles h = half_angles(xi, alpha);
        if (d_branch) {
            if (k > -0.5) return -std::tanh(h.a) * std::tanh(h.b) - k;
            return one_plus_kDplus(h) - (1.0 + k);
        }
        if (k < -2.0) return k - (-coth(h.a) * coth(h.b));
        return minus_one_minus_kNminus(h) - (-1.0 - k);
    };

    double lo = 1e-8, hi = 1.0;
    if (!(g(lo) > 0.0)) throw NumericalError("invert_xi: |k| too close to the xi -> 0 limit");
    while (g(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericalError("invert_xi: xi exceeds 1e6 (k too close to -1)");
    }
    // Bisect down to adjacent doubles, then keep the endpoint with the smaller miss.
    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (g(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    CornerMode m;
    m.branch = d_branch ? Branch::DPlus : Branch::NMinus;
    m.xi = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
    m.k = k;
    m.alpha = alpha;
    m.beta = beta_of_k(k);
    return m;
}

CornerMode mode_for_beta(double beta, double alpha) { return invert_xi(k_of_beta(beta), alpha); }

double beta_of_k(double k) {
    if (k == 1.0) throw ValidationError("k", "pole of beta = 1/(1-k) at k = 1");
    return 1.0 / (1.0 - k);
}

double k_of_beta(double beta) {
    if (beta == 0.0) throw ValidationError("beta", "pole of k = 1 - 1/beta at beta = 0");
    return 1.0 - 1.0 / beta;
}

double np_lambda_of_beta(double beta) { return 0.5 - beta; }

// ---------------------------------------------------------------- profiles

namespace {

int interval_of(double alpha, double t) {
    if (t < 0.5 * alpha) return 0;
    if (t <= kPi - 0.5 * alpha) return 1;
    return 2;
}

constexpr double kCenter[3] = {0.0, 0.5 * kPi, kPi};

double piece(const AngularProfile& p, int j, double t) {
    const double s = p.xi * (t - kCenter[j]);
    return p.coeffs[2 * j] * std::cosh(s) + p.coeffs[2 * j + 1] * std::sinh(s);
}

double piece_d(const AngularProfile& p, int j, double t) {
    const double s = p.xi * (t - kCenter[j]);
    return p.xi * (p.coeffs[2 * j] * std::sinh(s) + p.coeffs[2 * j + 1] * std::cosh(s));
}

// Folds theta into [0, pi]; returns the parity sign of the value.
double fold(const AngularProfile& p, double& t) {
    t = std::fmod(t, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    if (t <= kPi) return 1.0;
    t = 2 * kPi - t;
    return p.parity == Parity::Odd ? -1.0 : 1.0;
}

}  // namespace

double AngularProfile::value(double theta) const {
    double t = theta;
    const double s = fold(*this, t);
    return s * piece(*this, interval_of(alpha, t), t);
}

double AngularProfile::derivative(double theta) const {
    double t = theta;
    const bool reflected = std::fmod(std::fmod(theta, 2 * kPi) + 2 * kPi, 2 * kPi) > kPi;
    const double s = fold(*this, t);
    const double d = piece_d(*this, interval_of(alpha, t), t);
    return reflected ? -s * d : d;
}

double AngularProfile::coefficient(double theta) const {
    double t = theta;
    fold(*this, t);
    return interval_of(alpha, t) == 1 ? 1.0 : k;
}

AngularProfile solve_angular_profile(const CornerMode& mode) {
    const double xi = mode.xi, k = mode.k, alpha = mode.alpha;
    half_angles(xi, alpha);
    const bool dirichlet = mode.branch == Branch::DPlus || mode.branch == Branch::DMinus;
    const double t1 = 0.5 * alpha, t2 = kPi - 0.5 * alpha;
    // Local hyperbolic functions keep the columns O(cosh(xi pi / 2)) rather than O(cosh(xi pi)).
    auto c = [&](double t, int j) { return std::cosh(xi * (t - kCenter[j])); };
    auto s = [&](double t, int j) { return std::sinh(xi * (t - kCenter[j])); };

    // Derivative rows carry phi'/xi.
    Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
    M.row(0) << c(t1, 0), s(t1, 0), -c(t1, 1), -s(t1, 1), 0, 0;
    M.row(1) << k * s(t1, 0), k * c(t1, 0), -s(t1, 1), -c(t1, 1), 0, 0;
    M.row(2) << 0, 0, c(t2, 1), s(t2, 1), -c(t2, 2), -s(t2, 2);
    M.row(3) << 0, 0, s(t2, 1), c(t2, 1), -k * s(t2, 2), -k * c(t2, 2);
    // phi(0) = a1, phi(pi) = a3; phi'(0) = xi b1, phi'(pi) = xi b3.
    const int bc = dirichlet ? 0 : 1;
    M(4, bc) = 1.0;
    M(5, 4 + bc) = 1.0;
    for (int i = 0; i < 6; ++i) M.row(i) /= M.row(i).cwiseAbs().maxCoeff();

    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(M, Eigen::ComputeFullV);
    const double smin = svd.singularValues()(5);
    if (!(smin <= 1e-6))
        throw NumericalError("inconsistent mode: interface system has no nullspace (smallest singular value " +
                             std::to_string(smin) + ")");

    AngularProfile p;
    p.alpha = alpha;
    p.xi = xi;
    p.k = k;
    p.parity = dirichlet ? Parity::Odd : Parity::Even;
    p.smallest_singular_value = smin;
    const Eigen::Matrix<double, 6, 1> v = svd.matrixV().col(5);
    for (int i = 0; i < 6; ++i) p.coeffs[i] = v(i);
    // The boundary rows pin these to zero; drop the rounding so phi(0), phi(pi) (Odd)
    // or phi'(0), phi'(pi) (Even) vanish exactly.
    p.coeffs[bc] = 0.0;
    p.coeffs[4 + bc] = 0.0;

    // Exact max |phi| over [0, pi]: endpoints and interior critical points of each piece.
    const double ends[4] = {0.0, t1, t2, kPi};
    double best = -1.0, best_val = 0.0;
    for (int j = 0; j < 3; ++j) {
        double cand[3] = {ends[j], ends[j + 1], -1.0};
        // phi_j' = 0 where tanh(xi (t - c_j)) = -b_j / a_j.
        const double A = p.coeffs[2 * j], B = p.coeffs[2 * j + 1];
        if (A != 0.0 && std::abs(B / A) < 1.0) {
            const double ts = kCenter[j] + std::atanh(-B / A) / xi;
            if (ts > ends[j] && ts < ends[j + 1]) cand[2] = ts;
        }
        std::sort(cand, cand + 3);
        for (double t : cand) {
            if (t < 0.0) continue;
            const double f = piece(p, j, t);
            if (std::abs(f) > best) {
                best = std::abs(f);
                best_val = f;
            }
        }
    }
    const double scale = 1.0 / best_val;
    for (double& x : p.coeffs) x *= scale;
    return p;
}

ProfileResiduals profile_residuals(const AngularProfile& p) {
    ProfileResiduals r;
    const double t1 = 0.5 * p.alpha, t2 = kPi - 0.5 * p.alpha;
    r.continuity = std::max(std::abs(piece(p, 0, t1) - piece(p, 1, t1)), std::abs(piece(p, 1, t2) - piece(p, 2, t2)));
    auto rel = [&](double x, double y) { return std::abs(x - y) / std::max({std::abs(x), std::abs(y), p.xi}); };
    r.flux = std::max(rel(p.k * piece_d(p, 0, t1), piece_d(p, 1, t1)), rel(piece_d(p, 1, t2), p.k * piece_d(p, 2, t2)));
    if (p.parity == Parity::Odd) {
        r.boundary = std::max(std::abs(piece(p, 0, 0.0)), std::abs(piece(p, 2, kPi)));
    } else {
        r.boundary = std::max(std::abs(piece_d(p, 0, 0.0)), std::abs(piece_d(p, 2, kPi)));
    }
    const auto [x, w] = detail::gauss_legendre(64);
    const double cuts[7] = {0.0, t1, t2, kPi, 2 * kPi - t2, 2 * kPi - t1, 2 * kPi};
    double integral = 0.0;
    for (int j = 0; j < 6; ++j) {
        const double lo = cuts[j], hi = cuts[j + 1], half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        for (std::size_t q = 0; q < x.size(); ++q) {
            const double t = mid + half * x[q];
            integral += half * w[q] * p.coefficient(t) * p.value(t);
        }
    }
    r.mean_zero = std::abs(integral);
    return r;
}

SingularValue eval_singular_solution(const AngularProfile& p, Point2 x) {
    const double r = std::hypot(x.x, x.y);
    if (r == 0.0) throw ValidationError("point", "singular solution is undefined at the origin");
    double theta = std::atan2(x.y, x.x);
    if (theta < 0.0) theta += 2 * kPi;
    const double phi = p.value(theta), dphi = p.derivative(theta);
    const double lr = p.xi * std::log(r);
    const double cr = std::cos(lr), sr = std::sin(lr);
    const double du_dr = -p.xi / r * sr * phi;
    const double du_dt_over_r = cr * dphi / r;
    const double ct = x.x / r, st = x.y / r;
    return {cr * phi, {du_dr * ct - du_dt_over_r * st, du_dr * st + du_dt_over_r * ct}};
}

void write_dispersion_csv(std::ostream& os, double alpha, std::span<const double> xis) {
    os << "xi,kD_plus,kD_minus,kN_plus,kN_minus,beta_D_plus,beta_N_minus\n";
    char buf[512];
    for (double xi : xis) {
        const double dp = root_kD(xi, alpha, Sign::Plus), dm = root_kD(xi, alpha, Sign::Minus);
        const double np = root_kN(xi, alpha, Sign::Plus), nm = root_kN(xi, alpha, Sign::Minus);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", xi, dp, dm, np, nm,
                      beta_of_k(dp), beta_of_k(nm));
        os << buf;
    }
}

}  // namespace bowtie
