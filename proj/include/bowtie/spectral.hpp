#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bowtie/mesh.hpp"

namespace bowtie {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

using LocalStiffness = std::array<std::array<double, 3>, 3>;

/// P1 element stiffness of the triangle (a, b, c), integrated exactly.
LocalStiffness local_stiffness(Point2 a, Point2 b, Point2 c);

struct OmegaFactor;

/// Stiffness matrices over Omega and over the wings on the non-boundary
/// vertices (homogeneous Dirichlet condition on the boundary of Omega).
struct StiffnessPair {
    SparseMatrix A_omega;
    SparseMatrix A_D;
    std::vector<int> dof_of_vertex;  // -1 on the boundary of Omega
    std::vector<int> vertex_of_dof;
    std::vector<int> interior_D_dofs;  // every incident triangle is a wing triangle
    std::vector<int> exterior_dofs;    // no incident wing triangle
    int wing_components = 0;           // connected components of the closed wings
    std::vector<std::vector<int>> wing_closure_dofs;  // dofs of each closed wing component
    std::shared_ptr<const OmegaFactor> factor;

    Eigen::Index size() const { return A_omega.rows(); }

    Vector solve_omega(const Vector& b) const;
    double energy(const Vector& u) const { return u.dot(A_omega * u); }
    double energy_D(const Vector& u) const { return u.dot(A_D * u); }
};

/// Tags default to the mesh's own region tags.
StiffnessPair assemble(const TriangleMesh& m);
StiffnessPair assemble(const TriangleMesh& m, std::span<const Region> tags);

/// z with A_omega z = A_D u, the discrete T_D u.
Vector apply_T(const StiffnessPair& pair, const Vector& u);

/// Values of a function at the vertices, restricted to the degrees of freedom.
Vector interpolate(const TriangleMesh& m, const StiffnessPair& pair, const std::function<double(Point2)>& f);

inline constexpr double kTrivialTol = 1e-8;

struct SpectrumResult {
    double delta = 0.0;
    double h = 0.0;
    double alpha = 0.0;
    Eigen::Index n_dofs = 0;
    std::vector<double> eigenvalues;  // ascending, raw (not clamped)
    std::pair<double, double> band{0.0, 0.0};
    int n_below_band = 0;
    int n_above_band = 0;
    int trivial_0_mult = 0;
    int trivial_1_mult = 0;
    double min_nontrivial = 0.0;
    double max_nontrivial = 0.0;
    /// A_omega-orthonormal eigenvectors in dof space, one column per
    /// eigenvalue; empty unless requested.
    Eigen::MatrixXd eigenvectors;

    bool is_trivial(double lambda) const { return lambda < kTrivialTol || lambda > 1.0 - kTrivialTol; }
};

struct EigensolveOptions {
    Eigen::Index dense_cap = 6000;
    bool vectors = false;
};

/// All eigenvalues of A_D x = lambda A_omega x by Cholesky reduction of
/// A_omega and a dense symmetric eigensolve. Throws ResourceError above
/// the dense cap.
SpectrumResult eigensolve(const StiffnessPair& pair, const TriangleMesh& m, const EigensolveOptions& options = {});

/// (alpha / 2 pi, 1 - alpha / 2 pi) for 0 < alpha < pi/3.
std::pair<double, double> essential_band(double alpha);
/// The same formula without the geometric restriction, for 0 < alpha < pi.
std::pair<double, double> essential_band_formula(double alpha);

struct DensifyEntry {
    double delta = 0.0;
    bool ok = false;
    std::string failure;
    std::string mesh_hash;
    SpectrumResult spectrum;
};

struct DensifySweep {
    std::vector<DensifyEntry> entries;  // in the order of the requested deltas
};

using MeshRule = std::function<MeshOptions(const BowtieSpec&)>;

/// One mesh, assembly and eigensolve per delta (strictly descending, > 0),
/// run on up to `jobs` threads. Failures are recorded per entry.
DensifySweep densify_sweep(const BowtieSpec& templ, std::span<const double> deltas, const MeshRule& rule,
                           int jobs = 1, const EigensolveOptions& options = {});

struct ConvergenceRow {
    double delta = 0.0;
    double difference = 0.0;  // ||T_{D_delta} u - T_D u|| in the A_omega norm
    double bound = 0.0;       // (sum over D_delta sym-diff D of |grad u|^2)^{1/2}
    double u_norm = 0.0;
    int sym_diff_triangles = 0;
};

/// `m` must be a compatible mesh for `deltas`; its own tags define D.
std::vector<ConvergenceRow> pointwise_convergence_test(const TriangleMesh& m, const Vector& u_seed,
                                                       std::span<const double> deltas);

/// Smooth seed vanishing on the boundary of Omega, used by the convergence command.
Vector default_seed(const TriangleMesh& m, const StiffnessPair& pair);

struct SourceReport {
    Vector u;
    double u_norm = 0.0;              // A_omega norm
    double nearest_eigenvalue = 0.0;  // over all eigenvalues
    double distance = 0.0;
    double nearest_nontrivial = 0.0;
    double distance_nontrivial = 0.0;
    double conditioning = 0.0;  // max |beta - lambda| / min |beta - lambda|
    bool near_singular = false;
};

/// Solves (beta A_omega - A_D) u = beta A_omega g.
SourceReport solve_source(const StiffnessPair& pair, const SpectrumResult& spectrum, double beta, const Vector& g);

/// A_omega-orthogonal projection onto the span of the nontrivial eigenvectors.
Vector project_nontrivial(const StiffnessPair& pair, const SpectrumResult& spectrum, const Vector& g);

void write_spectrum_csv(std::ostream& os, const SpectrumResult& s);
void write_sweep_summary_csv(std::ostream& os, const DensifySweep& sweep);

}  // namespace bowtie
