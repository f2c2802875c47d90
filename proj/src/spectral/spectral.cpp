#include <Eigen/SparseLU>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "bowtie/errors.hpp"
#include "bowtie/spectral.hpp"

namespace bowtie {

DensifySweep densify_sweep(const BowtieSpec& templ, std::span<const double> deltas, const MeshRule& rule, int jobs,
                           const EigensolveOptions& options) {
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (!(deltas[i] > 0.0)) throw ValidationError("deltas", "every delta must be positive");
        if (i > 0 && !(deltas[i] < deltas[i - 1])) throw ValidationError("deltas", "must be strictly descending");
    }
    DensifySweep sweep;
    sweep.entries.resize(deltas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < deltas.size(); i = next++) {
            DensifyEntry& e = sweep.entries[i];
            e.delta = deltas[i];
            try {
                const BowtieSpec spec = templ.with_delta(deltas[i]);
                const TriangleMesh m = mesh(spec, rule(spec));
                e.mesh_hash = mesh_hash(m);
                const StiffnessPair pair = assemble(m);
                e.spectrum = eigensolve(pair, m, options);
                e.ok = true;
            } catch (const std::exception& ex) {
                e.ok = false;
                e.failure = ex.what();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(deltas.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return sweep;
}

std::vector<ConvergenceRow> pointwise_convergence_test(const TriangleMesh& m, const Vector& u_seed,
                                                       std::span<const double> deltas) {
    const StiffnessPair base = assemble(m);
    if (u_seed.size() != base.size()) throw ValidationError("u_seed", "dimension does not match the mesh");
    const Vector Du0 = base.A_D * u_seed;

    // Full nodal vector (zero on the boundary of Omega) for per-triangle energies.
    std::vector<double> nodal(m.vertex_count(), 0.0);
    for (Eigen::Index d = 0; d < base.size(); ++d) nodal[base.vertex_of_dof[d]] = u_seed(d);

    std::vector<ConvergenceRow> rows;
    for (double d : deltas) {
        std::vector<Region> tags;
        try {
            tags = retag(m, m.spec.with_delta(d));
        } catch (const MeshingError& e) {
            throw MeshingError(e.region(), std::string("convergence test needs a compatible mesh: ") + e.what());
        }
        const StiffnessPair pd = assemble(m, tags);
        const Vector z = base.solve_omega(pd.A_D * u_seed - Du0);
        ConvergenceRow row;
        row.delta = d;
        row.difference = std::sqrt(std::max(0.0, base.energy(z)));
        row.u_norm = std::sqrt(base.energy(u_seed));
        double b2 = 0.0;
        for (std::size_t t = 0; t < m.triangle_count(); ++t) {
            const bool in0 = m.region[t] != Region::Exterior, in1 = tags[t] != Region::Exterior;
            if (in0 == in1) continue;
            ++row.sym_diff_triangles;
            const auto& tri = m.triangles[t];
            const auto K = local_stiffness(m.vertices[tri[0]], m.vertices[tri[1]], m.vertices[tri[2]]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) b2 += nodal[tri[i]] * K[i][j] * nodal[tri[j]];
        }
        row.bound = std::sqrt(std::max(0.0, b2));
        rows.push_back(row);
    }
    return rows;
}

Vector default_seed(const TriangleMesh& m, const StiffnessPair& pair) {
    const double L = m.spec.omega_halfwidth;
    return interpolate(m, pair, [L](Point2 p) {
        const double bump = (1.0 - (p.x / L) * (p.x / L)) * (1.0 - (p.y / L) * (p.y / L));
        return bump * (std::sin(2.0 * p.x + 0.3) + p.x * std::cos(3.0 * p.y));
    });
}

SourceReport solve_source(const StiffnessPair& pair, const SpectrumResult& spectrum, double beta, const Vector& g) {
    if (!std::isfinite(beta)) throw ValidationError("beta", "must be finite");
    if (g.size() != pair.size()) throw ValidationError("g", "dimension does not match the pair");
    if (spectrum.eigenvalues.empty()) throw ValidationError("spectrum", "no eigenvalues");
    SourceReport r;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    r.distance_nontrivial = std::numeric_limits<double>::infinity();
    r.nearest_nontrivial = std::numeric_limits<double>::quiet_NaN();
    for (double lam : spectrum.eigenvalues) {
        const double d = std::abs(beta - lam);
        if (d < dmin) {
            dmin = d;
            r.nearest_eigenvalue = lam;
        }
        dmax = std::max(dmax, d);
        if (!spectrum.is_trivial(lam) && d < r.distance_nontrivial) {
            r.distance_nontrivial = d;
            r.nearest_nontrivial = lam;
        }
    }
    r.distance = dmin;
    r.conditioning = dmax / dmin;
    if (dmin <= 1e-12) {
        r.near_singular = true;
        r.u_norm = std::numeric_limits<double>::infinity();
        return r;
    }
    const SparseMatrix M = beta * pair.A_omega - pair.A_D;
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(M);
    if (lu.info() != Eigen::Success) {
        r.near_singular = true;
        r.u_norm = std::numeric_limits<double>::infinity();
        return r;
    }
    r.u = lu.solve(beta * (pair.A_omega * g));
    if (lu.info() != Eigen::Success) throw NumericalError("solve_source: LU solve failed");
    r.u_norm = std::sqrt(std::max(0.0, pair.energy(r.u)));
    return r;
}

Vector project_nontrivial(const StiffnessPair& pair, const SpectrumResult& spectrum, const Vector& g) {
    const auto& V = spectrum.eigenvectors;
    if (V.cols() != static_cast<Eigen::Index>(spectrum.eigenvalues.size()) || V.rows() != pair.size())
        throw ValidationError("spectrum", "eigenvectors were not computed for this pair");
    const Vector Ag = pair.A_omega * g;
    Vector out = Vector::Zero(pair.size());
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
        if (spectrum.is_trivial(spectrum.eigenvalues[i])) continue;
        out += V.col(i).dot(Ag) * V.col(i);
    }
    return out;
}

void write_spectrum_csv(std::ostream& os, const SpectrumResult& s) {
    os << "index,eigenvalue,is_trivial,below_band,above_band\n";
    char buf[128];
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
        const double lam = s.eigenvalues[i];
        const bool triv = s.is_trivial(lam);
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%d,%d\n", i, lam, triv ? 1 : 0,
                      (!triv && lam < s.band.first) ? 1 : 0, (!triv && lam > s.band.second) ? 1 : 0);
        os << buf;
    }
}

void write_sweep_summary_csv(std::ostream& os, const DensifySweep& sweep) {
    os << "delta,n_dofs,n_below_band,n_above_band,min_nontrivial,max_nontrivial,failures\n";
    char buf[256];
    for (const auto& e : sweep.entries) {
        if (e.ok) {
            std::snprintf(buf, sizeof buf, "%.17g,%lld,%d,%d,%.17g,%.17g,\n", e.delta,
                          static_cast<long long>(e.spectrum.n_dofs), e.spectrum.n_below_band,
                          e.spectrum.n_above_band, e.spectrum.min_nontrivial, e.spectrum.max_nontrivial);
            os << buf;
        } else {
            std::string msg = e.failure;
            std::replace(msg.begin(), msg.end(), ',', ';');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            std::snprintf(buf, sizeof buf, "%.17g,,,,,,", e.delta);
            os << buf << '"' << msg << "\"\n";
        }
    }
}

}  // namespace bowtie
