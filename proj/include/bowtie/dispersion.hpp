#pragma once

#include <array>
#include <iosfwd>
#include <span>

#include "bowtie/geometry.hpp"

namespace bowtie {

// Corner analysis at the neck. With a = xi alpha / 2 and b = xi (pi - alpha) / 2
// the transmission problem for r^{i xi} phi(theta) has a nontrivial solution
// iff the contrast k is a root of d_D (phi odd in theta) or d_N (phi even).

enum class Sign { Plus, Minus };
enum class Branch { DPlus, DMinus, NPlus, NMinus };

std::string_view to_string(Branch b);

/// cosh^2(a) sinh(2b) k^2 + cosh(2b) sinh(2a) k + sinh^2(a) sinh(2b).
double eval_dD(double k, double xi, double alpha);
/// sinh^2(a) sinh(2b) k^2 + cosh(2b) sinh(2a) k + cosh^2(a) sinh(2b).
double eval_dN(double k, double xi, double alpha);

/// |d(k)| / (|c2| k^2 + |c1| |k| + |c0|), evaluated with scaled hyperbolic
/// functions so it stays finite for any xi.
double normalized_dD(double k, double xi, double alpha);
double normalized_dN(double k, double xi, double alpha);

/// Roots in tanh/coth form: k_{D,+} = -tanh(a) tanh(b), k_{D,-} = -tanh(a) coth(b),
/// k_{N,+} = -coth(a) tanh(b), k_{N,-} = -coth(a) coth(b). Even in xi.
double root_kD(double xi, double alpha, Sign sign);
double root_kN(double xi, double alpha, Sign sign);

/// The same roots from the quadratic formula in hyperbolic functions of
/// 2a and 2b. Overflows for large xi; kept for cross-checking.
double root_kD_quadratic(double xi, double alpha, Sign sign);
double root_kN_quadratic(double xi, double alpha, Sign sign);

double root_of(Branch branch, double xi, double alpha);

/// Separations along k_{N,-} < k_{N,+} < -1 < k_{D,-} < k_{D,+} < 0, each in a
/// cancellation-free closed form. All entries are positive for 0 < alpha < pi/2.
struct RootGaps {
    double nminus_nplus;  // k_{N,+} - k_{N,-}
    double nplus_crit;    // -1 - k_{N,+}
    double crit_dminus;   // k_{D,-} + 1
    double dminus_dplus;  // k_{D,+} - k_{D,-}
    double dplus_zero;    // -k_{D,+}
};
RootGaps root_gaps(double xi, double alpha);

struct CornerMode {
    Branch branch = Branch::DPlus;
    double xi = 0.0;
    double k = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Mode of branch `branch` at exponent xi; k is the closed-form root.
CornerMode make_mode(Branch branch, double xi, double alpha);

/// Unique xi with k_{D,+}(xi) = k for -1 < k < 0, or k_{N,-}(xi) = k for
/// k < -1. Bisection on [1e-8, 1], doubling the upper end up to 1e6.
CornerMode invert_xi(double k, double alpha);

/// Mode whose contrast corresponds to beta in (0,1), beta != 1/2.
CornerMode mode_for_beta(double beta, double alpha);

double beta_of_k(double k);
double k_of_beta(double beta);
/// Neumann-Poincare spectral value lambda = 1/2 - beta.
double np_lambda_of_beta(double beta);

enum class Parity { Odd, Even };

/// phi on [0, pi] is a_j cosh(xi (theta - c_j)) + b_j sinh(xi (theta - c_j)) on
/// the three intervals [0, alpha/2), [alpha/2, pi - alpha/2], (pi - alpha/2, pi]
/// with centers c = 0, pi/2, pi (so phi(0) = a_1 and phi(pi) = a_3), and
/// a(theta) = k on the first and last (wings) and 1 in between. On (pi, 2 pi)
/// it is extended by phi(2 pi - theta) = -phi(theta) (Odd) or +phi(theta) (Even).
struct AngularProfile {
    double alpha = 0.0;
    double xi = 0.0;
    double k = 0.0;
    std::array<double, 6> coeffs{};  // a1, b1, a2, b2, a3, b3
    Parity parity = Parity::Odd;
    double smallest_singular_value = 0.0;

    double value(double theta) const;
    double derivative(double theta) const;
    /// Coefficient a(theta): k inside the wings, 1 outside.
    double coefficient(double theta) const;
};

/// Nullspace of the 6x6 interface system, normalized to max |phi| = 1.
AngularProfile solve_angular_profile(const CornerMode& mode);

struct ProfileResiduals {
    double continuity = 0.0;  // max jump of phi at the interfaces
    double flux = 0.0;        // max relative jump of a phi'
    double boundary = 0.0;    // |phi| (Odd) or |phi'| (Even) at 0 and pi
    double mean_zero = 0.0;   // |integral of a phi over [0, 2 pi]|
};
ProfileResiduals profile_residuals(const AngularProfile& p);

struct SingularValue {
    double u = 0.0;
    Point2 grad;
};

/// u = cos(xi ln r) phi(theta) and its Cartesian gradient.
SingularValue eval_singular_solution(const AngularProfile& p, Point2 x);

/// xi, kD_plus, kD_minus, kN_plus, kN_minus, beta_D_plus, beta_N_minus.
void write_dispersion_csv(std::ostream& os, double alpha, std::span<const double> xis);

}  // namespace bowtie
