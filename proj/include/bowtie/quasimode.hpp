#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bowtie/dispersion.hpp"
#include "bowtie/spectral.hpp"

namespace bowtie {

/// 6t^5 - 15t^4 + 10t^3 clamped to [0, 1]; derivative bounded by 15/8.
double smoothstep(double t);
double smoothstep_derivative(double t);

/// chi1 ramps 0 -> 1 over r/eps in [1, 2]; chi2 ramps 1 -> 0 over r in [rho, 2 rho].
struct CutoffPair {
    double rho = 0.2;
    double eps = 0.01;

    double chi1(double r) const { return smoothstep(r / eps - 1.0); }
    double chi1_derivative(double r) const { return smoothstep_derivative(r / eps - 1.0) / eps; }
    double chi2(double r) const { return 1.0 - smoothstep(r / rho - 1.0); }
    double chi2_derivative(double r) const { return -smoothstep_derivative(r / rho - 1.0) / rho; }
    double value(double r) const { return chi1(r) * chi2(r); }

    /// 0 < 2 eps < rho and 2 rho < r0 / 2.
    void validate(double r0) const;
};

struct Quasimode {
    CornerMode mode;
    AngularProfile profile;
    CutoffPair cutoffs;
    double s_eps = 0.0;  // values = s_eps * (interpolated cut-off singular solution)
    Vector values;        // unit A_omega energy
    double beta = 0.0;
    double delta = 0.0;  // 0 for u_eps; the strip width for w_delta
};

/// Cut-off singular solution chi1(r/eps) chi2(r) cos(xi ln r) phi(theta), unnormalized.
double cutoff_singular_value(const AngularProfile& profile, const CutoffPair& cut, Point2 x);
/// Its strip extension v_{delta,eps}: shifted by -+delta/2 on the half-planes
/// x1 > delta/2 and x1 < -delta/2, and equal to the trace at x1 = 0 between.
double shifted_singular_value(const AngularProfile& profile, const CutoffPair& cut, double delta, Point2 x);

/// Throws ResolutionError unless the smallest edge of the triangles meeting
/// B_eps(center) is at most eps / 4.
void require_resolution(const TriangleMesh& m, Point2 center, double eps);

Quasimode build_quasimode(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                          const AngularProfile& profile, double rho, double eps);

/// w_delta = v_{delta,delta} on the delta-separated mesh, unit energy.
Quasimode build_w_delta(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                        const AngularProfile& profile, double rho, double delta);

/// || beta u - T u || in the A_omega norm; the second form overrides beta.
double residual(const StiffnessPair& pair, const Quasimode& q);
double residual(const StiffnessPair& pair, const Quasimode& q, double beta);

/// (u' A_D u) / (u' A_omega u).
double energy_ratio(const StiffnessPair& pair, const Vector& u);

/// A_omega norm of a - b.
double energy_distance(const StiffnessPair& pair, const Vector& a, const Vector& b);

/// L2(Omega) norm of the P1 function with the given dof values, exact mass matrix.
double l2_norm(const TriangleMesh& m, const StiffnessPair& pair, const Vector& u);

/// Exact integral of |grad(chi1 chi2 u)|^2 by tensor Gauss-Legendre quadrature on
/// panels in (ln r, theta) that respect the cutoff and interface breakpoints.
double annulus_energy_quadrature(const AngularProfile& profile, const CutoffPair& cut, int radial_panels = 64,
                                 int angular_panels = 64);

enum class Side { Low, High };

/// D_PLUS quasimodes sit above the band, N_MINUS ones below.
Side side_for(Branch branch);

/// A_omega-orthogonal projection onto the trivial eigenspace of the side:
/// High is span of the interior-wing hats (eigenvalue 1), Low is the span of
/// the exterior-only hats and one indicator per closed wing component (eigenvalue 0).
Vector project_trivial(const StiffnessPair& pair, const Vector& u, Side side);

struct ProjectionReport {
    Side side = Side::High;
    double proj_norm = 0.0;         // ||W||
    double remainder_norm = 0.0;    // ||Z||, Z = w - W
    double remainder_ratio = 0.0;   // energy_ratio(Z)
    double ratio_error = 0.0;       // |remainder_ratio - beta|
    double extreme_nontrivial = 0.0;  // min (Low) or max (High) nontrivial eigenvalue, NaN without a spectrum
    bool minmax_holds = true;       // extreme_nontrivial bounds remainder_ratio on the side, 1e-10 slack
};

ProjectionReport projection_diagnostics(const StiffnessPair& pair, const SpectrumResult* spectrum,
                                        const Quasimode& w, Side side);

struct QuasimodeRow {
    double eps_or_delta = 0.0;
    double s_eps = 0.0;
    double residual = 0.0;
    double energy_ratio = 0.0;
    double ratio_error = 0.0;
    double l2_norm = 0.0;
    double proj_norm = 0.0;
    std::string mesh_hash;  // not a CSV column
};

QuasimodeRow measure(const TriangleMesh& m, const StiffnessPair& pair, const Quasimode& q);

/// u_eps for every eps (strictly descending) on one touching mesh.
std::vector<QuasimodeRow> eps_sweep(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                                    const AngularProfile& profile, double rho, std::span<const double> eps,
                                    int jobs = 1);

/// w_delta for every delta (strictly descending), one mesh per delta built by `rule`.
std::vector<QuasimodeRow> w_delta_sweep(const BowtieSpec& templ, const CornerMode& mode, const AngularProfile& profile,
                                        double rho, std::span<const double> deltas, const MeshRule& rule,
                                        int jobs = 1);

void write_quasimode_csv(std::ostream& os, std::span<const QuasimodeRow> rows);

}  // namespace bowtie
