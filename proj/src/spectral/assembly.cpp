#include <Eigen/SparseCholesky>
#include <numeric>

#include "bowtie/errors.hpp"
#include "bowtie/spectral.hpp"
#include "spectral/factor.hpp"

namespace bowtie {

LocalStiffness local_stiffness(Point2 a, Point2 b, Point2 c) {
    const Point2 p[3] = {a, b, c};
    const double area = 0.5 * cross(b - a, c - a);
    Point2 e[3];
    for (int i = 0; i < 3; ++i) e[i] = p[(i + 2) % 3] - p[(i + 1) % 3];
    LocalStiffness K{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) K[i][j] = dot(e[i], e[j]) / (4.0 * area);
    return K;
}

namespace {

int find_root(std::vector<int>& parent, int x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

StiffnessPair assemble(const TriangleMesh& m) { return assemble(m, m.region); }

StiffnessPair assemble(const TriangleMesh& m, std::span<const Region> tags) {
    const std::size_t nv = m.vertex_count();
    if (tags.size() != m.triangle_count() || m.boundary_flag.size() != nv)
        throw MeshingError("EXTERIOR", "assembly: tag arrays do not match the mesh");
    StiffnessPair pair;
    pair.dof_of_vertex.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (!m.boundary_flag[v]) {
            pair.dof_of_vertex[v] = static_cast<int>(pair.vertex_of_dof.size());
            pair.vertex_of_dof.push_back(static_cast<int>(v));
        }
    }
    const int n = static_cast<int>(pair.vertex_of_dof.size());

    std::vector<Eigen::Triplet<double>> to, td;
    to.reserve(9 * m.triangle_count());
    std::vector<int> wing_tris(nv, 0), all_tris(nv, 0);
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles[t];
        if (!(m.signed_area(t) > 0.0)) throw MeshingError(std::string(to_string(tags[t])), "assembly: inverted triangle");
        const bool wing = tags[t] != Region::Exterior;
        const LocalStiffness K = local_stiffness(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
        for (int i = 0; i < 3; ++i) {
            ++all_tris[tri[i]];
            if (wing) ++wing_tris[tri[i]];
            const int di = pair.dof_of_vertex[tri[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = pair.dof_of_vertex[tri[j]];
                if (dj < 0) continue;
                to.emplace_back(di, dj, K[i][j]);
                if (wing) td.emplace_back(di, dj, K[i][j]);
            }
        }
        if (wing) {
            parent[find_root(parent, tri[1])] = find_root(parent, tri[0]);
            parent[find_root(parent, tri[2])] = find_root(parent, tri[0]);
        }
    }
    pair.A_omega.resize(n, n);
    pair.A_omega.setFromTriplets(to.begin(), to.end());
    pair.A_D.resize(n, n);
    pair.A_D.setFromTriplets(td.begin(), td.end());

    for (int d = 0; d < n; ++d) {
        const int v = pair.vertex_of_dof[d];
        if (all_tris[v] > 0 && wing_tris[v] == all_tris[v]) pair.interior_D_dofs.push_back(d);
        if (wing_tris[v] == 0) pair.exterior_dofs.push_back(d);
    }
    std::vector<int> component(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
        if (wing_tris[v] == 0) continue;
        const int r = find_root(parent, static_cast<int>(v));
        if (component[r] < 0) {
            component[r] = pair.wing_components++;
            pair.wing_closure_dofs.emplace_back();
        }
        if (pair.dof_of_vertex[v] >= 0) pair.wing_closure_dofs[component[r]].push_back(pair.dof_of_vertex[v]);
    }

    auto f = std::make_shared<OmegaFactor>();
    f->llt.compute(pair.A_omega);
    if (f->llt.info() != Eigen::Success) throw NumericalError("assembly: A_omega is not positive definite");
    pair.factor = std::move(f);
    return pair;
}

Vector StiffnessPair::solve_omega(const Vector& b) const {
    if (b.size() != size()) throw ValidationError("u", "dimension mismatch");
    Vector z = factor->llt.solve(b);
    if (factor->llt.info() != Eigen::Success) throw NumericalError("A_omega solve failed");
    return z;
}

Vector apply_T(const StiffnessPair& pair, const Vector& u) { return pair.solve_omega(pair.A_D * u); }

Vector interpolate(const TriangleMesh& m, const StiffnessPair& pair, const std::function<double(Point2)>& f) {
    Vector u(pair.size());
    for (Eigen::Index d = 0; d < pair.size(); ++d) u(d) = f(m.vertices[pair.vertex_of_dof[d]]);
    return u;
}

}  // namespace bowtie
