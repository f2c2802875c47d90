#include "bowtie/quasimode.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <ostream>
#include <thread>

#include "bowtie/errors.hpp"
#include "common/gauss_legendre.hpp"

namespace bowtie {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
void run_indexed(std::size_t n, int jobs, F&& task) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void require_descending(std::span<const double> v, const char* field) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ValidationError(field, "every value must be positive");
        if (i > 0 && !(v[i] < v[i - 1])) throw ValidationError(field, "must be strictly descending");
    }
}

Quasimode normalized(const StiffnessPair& pair, const CornerMode& mode, const AngularProfile& profile,
                     const CutoffPair& cut, double delta, Vector v) {
    const double e = pair.energy(v);
    if (!(e > 0.0)) throw ResolutionError("quasimode has zero discrete energy; the mesh misses the annulus", cut.eps / 4);
    Quasimode q;
    q.mode = mode;
    q.profile = profile;
    q.cutoffs = cut;
    q.s_eps = 1.0 / std::sqrt(e);
    q.values = q.s_eps * v;
    q.beta = mode.beta;
    q.delta = delta;
    return q;
}

}  // namespace

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

double smoothstep_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double s = t * (1.0 - t);
    return 30.0 * s * s;
}

void CutoffPair::validate(double r0) const {
    if (!std::isfinite(eps) || !(eps > 0.0)) throw ValidationError("eps", "must be positive");
    if (!std::isfinite(rho) || !(2.0 * eps < rho)) throw ValidationError("rho", "cutoffs need 2 eps < rho");
    if (!(2.0 * rho < 0.5 * r0)) throw ValidationError("rho", "cutoffs need 2 rho < r0 / 2");
}

double cutoff_singular_value(const AngularProfile& profile, const CutoffPair& cut, Point2 x) {
    const double r = norm(x);
    if (r <= cut.eps || r >= 2.0 * cut.rho) return 0.0;
    return cut.value(r) * eval_singular_solution(profile, x).u;
}

double shifted_singular_value(const AngularProfile& profile, const CutoffPair& cut, double delta, Point2 x) {
    const double half = 0.5 * delta;
    if (x.x < -half) return cutoff_singular_value(profile, cut, {x.x + half, x.y});
    if (x.x > half) return cutoff_singular_value(profile, cut, {x.x - half, x.y});
    return cutoff_singular_value(profile, cut, {0.0, x.y});
}

void require_resolution(const TriangleMesh& m, Point2 center, double eps) {
    const double hmin = min_size_near(m, center, eps);
    if (!(hmin <= 0.25 * eps * (1.0 + 1e-12))) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "mesh does not resolve eps = %.6g at (%.6g, %.6g): local h_min = %.6g > eps/4; "
                      "set mesh.grading_target <= %.6g",
                      eps, center.x, center.y, hmin, 0.25 * eps);
        throw ResolutionError(buf, 0.25 * eps);
    }
}

Quasimode build_quasimode(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                          const AngularProfile& profile, double rho, double eps) {
    const CutoffPair cut{rho, eps};
    cut.validate(m.spec.r0);
    require_resolution(m, {0.0, 0.0}, eps);
    Vector v = interpolate(m, pair, [&](Point2 x) { return cutoff_singular_value(profile, cut, x); });
    return normalized(pair, mode, profile, cut, 0.0, std::move(v));
}

Quasimode build_w_delta(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                        const AngularProfile& profile, double rho, double delta) {
    const CutoffPair cut{rho, delta};
    cut.validate(m.spec.r0);
    require_resolution(m, {-0.5 * delta, 0.0}, delta);
    require_resolution(m, {0.5 * delta, 0.0}, delta);
    Vector v = interpolate(m, pair, [&](Point2 x) { return shifted_singular_value(profile, cut, delta, x); });
    return normalized(pair, mode, profile, cut, delta, std::move(v));
}

double residual(const StiffnessPair& pair, const Quasimode& q) { return residual(pair, q, q.beta); }

double residual(const StiffnessPair& pair, const Quasimode& q, double beta) {
    if (q.values.size() != pair.size()) throw ValidationError("q", "quasimode was built on another pair");
    const Vector r = beta * q.values - apply_T(pair, q.values);
    return std::sqrt(std::max(0.0, pair.energy(r)));
}

double energy_ratio(const StiffnessPair& pair, const Vector& u) {
    const double den = pair.energy(u);
    if (!(den > 0.0)) throw ValidationError("values", "energy ratio of a zero-energy vector");
    return pair.energy_D(u) / den;
}

double energy_distance(const StiffnessPair& pair, const Vector& a, const Vector& b) {
    const Vector d = a - b;
    return std::sqrt(std::max(0.0, pair.energy(d)));
}

double l2_norm(const TriangleMesh& m, const StiffnessPair& pair, const Vector& u) {
    if (u.size() != pair.size()) throw ValidationError("values", "dimension does not match the pair");
    std::vector<double> nodal(m.vertex_count(), 0.0);
    for (Eigen::Index d = 0; d < pair.size(); ++d) nodal[pair.vertex_of_dof[d]] = u(d);
    double s = 0.0;
    for (std::size_t t = 0; t < m.triangle_count(); ++t) {
        const auto& tri = m.triangles[t];
        const double a = nodal[tri[0]], b = nodal[tri[1]], c = nodal[tri[2]];
        // (area/12) [a b c] [[2 1 1][1 2 1][1 1 2]] [a b c]'
        s += m.signed_area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
    }
    return std::sqrt(std::max(0.0, s));
}

double annulus_energy_quadrature(const AngularProfile& profile, const CutoffPair& cut, int radial_panels,
                                 int angular_panels) {
    const auto [gx, gw] = detail::gauss_legendre(5);
    // Panel counts proportional to length, at least one per smooth piece.
    auto split = [](std::span<const double> breaks, int total) {
        const double len = breaks.back() - breaks.front();
        std::vector<double> out{breaks.front()};
        int used = 0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            int n = i + 2 == breaks.size() ? std::max(1, total - used)
                                           : std::max(1, static_cast<int>(std::lround(total * (breaks[i + 1] - breaks[i]) / len)));
            used += n;
            for (int j = 1; j <= n; ++j) out.push_back(breaks[i] + (breaks[i + 1] - breaks[i]) * j / n);
        }
        return out;
    };
    const double eps = cut.eps, rho = cut.rho, a = profile.alpha;
    const double rb[] = {std::log(eps), std::log(2 * eps), std::log(rho), std::log(2 * rho)};
    const double tb[] = {0.0, a / 2, kPi - a / 2, kPi + a / 2, 2 * kPi - a / 2, 2 * kPi};
    const auto tpan = split(rb, radial_panels);
    const auto apan = split(tb, angular_panels);

    // Separable: |grad w|^2 r dr dtheta = (c g)'^2 r dr phi^2 + (c g)^2 / r dr phi'^2.
    double radial_dr = 0.0, radial_dt = 0.0;
    for (std::size_t i = 0; i + 1 < tpan.size(); ++i) {
        const double lo = tpan[i], hi = tpan[i + 1];
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
            const double wq = 0.5 * (hi - lo) * gw[q];
            const double r = std::exp(t);
            const double c = cut.value(r);
            const double dc = cut.chi1_derivative(r) * cut.chi2(r) + cut.chi1(r) * cut.chi2_derivative(r);
            const double g = std::cos(profile.xi * t), dg = -profile.xi * std::sin(profile.xi * t) / r;
            const double d = dc * g + c * dg;
            radial_dr += wq * d * d * r * r;  // dr = r dt
            radial_dt += wq * c * c * g * g;
        }
    }
    double ang_phi = 0.0, ang_dphi = 0.0;
    for (std::size_t i = 0; i + 1 < apan.size(); ++i) {
        const double lo = apan[i], hi = apan[i + 1];
        for (std::size_t q = 0; q < gx.size(); ++q) {
            const double th = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
            const double wq = 0.5 * (hi - lo) * gw[q];
            const double p = profile.value(th), dp = profile.derivative(th);
            ang_phi += wq * p * p;
            ang_dphi += wq * dp * dp;
        }
    }
    return radial_dr * ang_phi + radial_dt * ang_dphi;
}

Side side_for(Branch branch) {
    switch (branch) {
        case Branch::DPlus: return Side::High;
        case Branch::NMinus: return Side::Low;
        default: throw ValidationError("branch", "only D_PLUS and N_MINUS quasimodes have a projection side");
    }
}

Vector project_trivial(const StiffnessPair& pair, const Vector& u, Side side) {
    const Eigen::Index n = pair.size();
    if (u.size() != n) throw ValidationError("values", "dimension does not match the pair");
    // Basis B (n x m); W = B (B' A B)^{-1} B' A u.
    std::vector<Eigen::Triplet<double>> tb;
    Eigen::Index cols = 0;
    if (side == Side::High) {
        for (int d : pair.interior_D_dofs) tb.emplace_back(d, cols++, 1.0);
    } else {
        for (int d : pair.exterior_dofs) tb.emplace_back(d, cols++, 1.0);
        for (const auto& comp : pair.wing_closure_dofs) {
            if (comp.empty()) continue;
            for (int d : comp) tb.emplace_back(d, cols, 1.0);
            ++cols;
        }
    }
    if (cols == 0) return Vector::Zero(n);
    SparseMatrix B(n, cols);
    B.setFromTriplets(tb.begin(), tb.end());
    const SparseMatrix AB = pair.A_omega * B;
    const SparseMatrix G = SparseMatrix(B.transpose()) * AB;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt(G);
    if (ldlt.info() != Eigen::Success) throw NumericalError("project_trivial: Gram matrix factorization failed");
    const Vector c = ldlt.solve(AB.transpose() * u);
    return B * c;
}

ProjectionReport projection_diagnostics(const StiffnessPair& pair, const SpectrumResult* spectrum,
                                        const Quasimode& w, Side side) {
    ProjectionReport r;
    r.side = side;
    const Vector W = project_trivial(pair, w.values, side);
    const Vector Z = w.values - W;
    r.proj_norm = std::sqrt(std::max(0.0, pair.energy(W)));
    r.remainder_norm = std::sqrt(std::max(0.0, pair.energy(Z)));
    r.remainder_ratio = energy_ratio(pair, Z);
    r.ratio_error = std::abs(r.remainder_ratio - w.beta);
    r.extreme_nontrivial = std::numeric_limits<double>::quiet_NaN();
    if (spectrum) {
        constexpr double slack = 1e-10;
        r.extreme_nontrivial = side == Side::Low ? spectrum->min_nontrivial : spectrum->max_nontrivial;
        r.minmax_holds = side == Side::Low ? r.extreme_nontrivial <= r.remainder_ratio + slack
                                           : r.extreme_nontrivial >= r.remainder_ratio - slack;
    }
    return r;
}

QuasimodeRow measure(const TriangleMesh& m, const StiffnessPair& pair, const Quasimode& q) {
    QuasimodeRow row;
    row.eps_or_delta = q.delta > 0.0 ? q.delta : q.cutoffs.eps;
    row.s_eps = q.s_eps;
    row.residual = residual(pair, q);
    row.energy_ratio = energy_ratio(pair, q.values);
    row.ratio_error = std::abs(row.energy_ratio - q.beta);
    row.l2_norm = l2_norm(m, pair, q.values);
    row.proj_norm = projection_diagnostics(pair, nullptr, q, side_for(q.mode.branch)).proj_norm;
    return row;
}

std::vector<QuasimodeRow> eps_sweep(const TriangleMesh& m, const StiffnessPair& pair, const CornerMode& mode,
                                    const AngularProfile& profile, double rho, std::span<const double> eps,
                                    int jobs) {
    require_descending(eps, "eps");
    std::vector<QuasimodeRow> rows(eps.size());
    run_indexed(eps.size(), jobs, [&](std::size_t i) {
        rows[i] = measure(m, pair, build_quasimode(m, pair, mode, profile, rho, eps[i]));
    });
    return rows;
}

std::vector<QuasimodeRow> w_delta_sweep(const BowtieSpec& templ, const CornerMode& mode, const AngularProfile& profile,
                                        double rho, std::span<const double> deltas, const MeshRule& rule, int jobs) {
    require_descending(deltas, "deltas");
    std::vector<QuasimodeRow> rows(deltas.size());
    run_indexed(deltas.size(), jobs, [&](std::size_t i) {
        const BowtieSpec spec = templ.with_delta(deltas[i]);
        const TriangleMesh m = mesh(spec, rule(spec));
        const StiffnessPair pair = assemble(m);
        rows[i] = measure(m, pair, build_w_delta(m, pair, mode, profile, rho, deltas[i]));
        rows[i].mesh_hash = mesh_hash(m);
    });
    return rows;
}

void write_quasimode_csv(std::ostream& os, std::span<const QuasimodeRow> rows) {
    os << "eps_or_delta,s_eps,residual,energy_ratio,ratio_error,l2_norm,proj_norm\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.eps_or_delta, r.s_eps,
                      r.residual, r.energy_ratio, r.ratio_error, r.l2_norm, r.proj_norm);
        os << buf;
    }
}

}  // namespace bowtie
