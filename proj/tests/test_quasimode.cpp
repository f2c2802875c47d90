#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "bowtie/errors.hpp"
#include "bowtie/quasimode.hpp"

using namespace bowtie;
constexpr double pi = std::numbers::pi;
constexpr double kRho = 0.2;

namespace {

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] < v[i - 1])) return false;
    return true;
}

struct Fixture {
    TriangleMesh m;
    StiffnessPair pair;
};

// Touching bowtie resolving eps = 0.01: h_min <= 0.0025 inside B_0.01.
const Fixture& touching() {
    static const Fixture f = [] {
        BowtieSpec s;
        Fixture x;
        x.m = mesh(s, default_mesh_options(s, 0.1, 0.0025));
        x.pair = assemble(x.m);
        return x;
    }();
    return f;
}

struct ModeSet {
    CornerMode mode;
    AngularProfile profile;
};

ModeSet mode_set(double beta) {
    const auto mode = mode_for_beta(beta, pi / 4);
    return {mode, solve_angular_profile(mode)};
}

MeshOptions delta_rule(const BowtieSpec& s, double slope) {
    auto o = default_mesh_options(s, 0.1, s.delta / 4);
    o.grading_slope = slope;
    return o;
}

}  // namespace

TEST_CASE("smoothstep and cutoffs") {
    CHECK(smoothstep(-1.0) == 0.0);
    CHECK(smoothstep(0.0) == 0.0);
    CHECK(smoothstep(1.0) == 1.0);
    CHECK(smoothstep(2.0) == 1.0);
    CHECK(smoothstep(0.5) == doctest::Approx(0.5).epsilon(1e-15));
    double worst = 0.0, prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        CHECK(smoothstep(t) >= prev);
        prev = smoothstep(t);
        worst = std::max(worst, smoothstep_derivative(t));
        // Symmetry about the midpoint.
        CHECK(smoothstep(1 - t) == doctest::Approx(1 - smoothstep(t)).epsilon(1e-14).scale(1.0));
    }
    CHECK(worst <= 15.0 / 8.0 + 1e-15);
    CHECK(smoothstep_derivative(0.0) == 0.0);
    CHECK(smoothstep_derivative(1.0) == 0.0);

    const CutoffPair c{0.2, 0.01};
    CHECK(c.chi1(0.01) == 0.0);
    CHECK(c.chi1(0.005) == 0.0);
    CHECK(c.chi1(0.02) == 1.0);
    CHECK(c.chi2(0.2) == 1.0);
    CHECK(c.chi2(0.4) == 0.0);
    CHECK(c.value(0.5) == 0.0);
    for (int i = 0; i <= 200; ++i) {
        const double r = 0.5 * i / 200;
        CHECK(std::abs(c.chi1_derivative(r)) <= 30.0 / c.eps);
        CHECK(std::abs(c.chi2_derivative(r)) <= 30.0 / c.rho);
    }
    CHECK_NOTHROW(c.validate(1.0));
    CHECK_THROWS_AS((CutoffPair{0.2, 0.1}.validate(1.0)), ValidationError);
    CHECK_THROWS_AS((CutoffPair{0.3, 0.01}.validate(1.0)), ValidationError);
    CHECK_THROWS_AS((CutoffPair{0.2, 0.0}.validate(1.0)), ValidationError);
}

TEST_CASE("quasimode support and unit energy") {
    const auto& f = touching();
    for (double beta : {0.95, 0.05}) {
        const auto ms = mode_set(beta);
        for (double eps : {0.08, 0.01}) {
            const auto q = build_quasimode(f.m, f.pair, ms.mode, ms.profile, kRho, eps);
            CHECK(f.pair.energy(q.values) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(q.s_eps > 0.0);
            CHECK(q.beta == ms.mode.beta);
            int inside = 0;
            for (std::size_t v = 0; v < f.m.vertex_count(); ++v) {
                const int d = f.pair.dof_of_vertex[v];
                if (d < 0) continue;
                const double r = norm(f.m.vertices[v]);
                if (r <= eps || r >= 2 * kRho) {
                    CHECK(q.values[d] == 0.0);
                    ++inside;
                }
            }
            CHECK(inside > 0);
        }
    }
}

TEST_CASE("an under-resolved mesh is rejected with the required target") {
    BowtieSpec s;
    const auto m = mesh(s, default_mesh_options(s, 0.1, 0.0125));
    const auto p = assemble(m);
    const auto ms = mode_set(0.95);
    try {
        build_quasimode(m, p, ms.mode, ms.profile, kRho, 0.01);
        FAIL("expected a resolution error");
    } catch (const ResolutionError& e) {
        CHECK(e.required_grading_target() == doctest::Approx(0.0025));
    }
    CHECK_NOTHROW(build_quasimode(m, p, ms.mode, ms.profile, kRho, 0.08));
}

TEST_CASE("interpolated energy agrees with annulus quadrature") {
    const auto& f = touching();
    for (double beta : {0.95, 0.05}) {
        const auto ms = mode_set(beta);
        for (double eps : {0.08, 0.04, 0.02, 0.01}) {
            const auto q = build_quasimode(f.m, f.pair, ms.mode, ms.profile, kRho, eps);
            const double quad = annulus_energy_quadrature(ms.profile, q.cutoffs);
            const double discrete = 1.0 / (q.s_eps * q.s_eps);
            CHECK(discrete == doctest::Approx(quad).epsilon(0.02));
            // The quadrature itself is converged in the panel count.
            CHECK(annulus_energy_quadrature(ms.profile, q.cutoffs, 128, 128) == doctest::Approx(quad).epsilon(1e-8));
        }
    }
}

TEST_CASE("residual decay on the desk sweep") {
    const auto& f = touching();
    const double eps[] = {0.08, 0.04, 0.02, 0.01};
    for (double beta : {0.95, 0.05}) {
        CAPTURE(beta);
        const auto ms = mode_set(beta);
        const auto rows = eps_sweep(f.m, f.pair, ms.mode, ms.profile, kRho, eps);
        REQUIRE(rows.size() == 4);
        std::vector<double> res, res_s, s_log;
        for (const auto& r : rows) {
            res.push_back(r.residual);
            res_s.push_back(r.residual / r.s_eps);
            s_log.push_back(r.s_eps * std::sqrt(std::abs(std::log(r.eps_or_delta))));
        }
        CHECK(strictly_decreasing(res));
        CHECK(spread(res_s) < 4.0);
        CHECK(spread(s_log) < 4.0);
    }
}

TEST_CASE("eps sweep is independent of the thread count") {
    const auto& f = touching();
    const double eps[] = {0.08, 0.04, 0.02};
    const auto ms = mode_set(0.95);
    const auto a = eps_sweep(f.m, f.pair, ms.mode, ms.profile, kRho, eps, 1);
    const auto b = eps_sweep(f.m, f.pair, ms.mode, ms.profile, kRho, eps, 3);
    std::ostringstream x, y;
    write_quasimode_csv(x, a);
    write_quasimode_csv(y, b);
    CHECK(x.str() == y.str());
    CHECK(x.str().rfind("eps_or_delta,s_eps,residual,energy_ratio,ratio_error,l2_norm,proj_norm\n", 0) == 0);
    const double bad[] = {0.02, 0.04};
    CHECK_THROWS_AS(eps_sweep(f.m, f.pair, ms.mode, ms.profile, kRho, bad), ValidationError);
}

TEST_CASE("triangle inequality for a shifted contrast") {
    const auto& f = touching();
    for (double beta : {0.95, 0.05}) {
        const auto ms = mode_set(beta);
        const auto q = build_quasimode(f.m, f.pair, ms.mode, ms.profile, kRho, 0.02);
        const double r = residual(f.pair, q);
        CHECK(residual(f.pair, q, q.beta) == r);
        for (double shift : {0.3, -0.3, 0.01}) CHECK(residual(f.pair, q, beta + shift) >= std::abs(shift) - r - 1e-12);
    }
}

TEST_CASE("deep sweep: s_eps and the L2 norm decrease") {
    // Graded to well below the smallest cutoff; only sparse solves are involved.
    BowtieSpec s;
    const auto m = mesh(s, default_mesh_options(s, 0.1, 2.5e-9));
    const auto p = assemble(m);
    const double eps[] = {1e-2, 1e-4, 1e-6, 1e-8};
    for (double beta : {0.95, 0.05}) {
        CAPTURE(beta);
        const auto ms = mode_set(beta);
        const auto rows = eps_sweep(m, p, ms.mode, ms.profile, kRho, eps);
        std::vector<double> sv, l2, s_log;
        for (const auto& r : rows) {
            sv.push_back(r.s_eps);
            l2.push_back(r.l2_norm);
            s_log.push_back(r.s_eps * std::sqrt(std::abs(std::log(r.eps_or_delta))));
        }
        CHECK(strictly_decreasing(sv));
        CHECK(strictly_decreasing(l2));
        CHECK(spread(s_log) < 4.0);
    }
}

TEST_CASE("energy ratio of wing-only and exterior-only functions") {
    const auto& f = touching();
    Vector wing = Vector::Zero(f.pair.size()), ext = Vector::Zero(f.pair.size());
    for (int d : f.pair.interior_D_dofs) wing[d] = std::sin(7.0 * d);
    for (int d : f.pair.exterior_dofs) ext[d] = std::cos(3.0 * d);
    CHECK(energy_ratio(f.pair, wing) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(energy_ratio(f.pair, ext) == 0.0);
    CHECK_THROWS_AS(energy_ratio(f.pair, Vector::Zero(f.pair.size())), ValidationError);
    CHECK(energy_distance(f.pair, wing, wing) == 0.0);
    // Edge-midpoint quadrature is exact for the squared P1 function.
    Vector u(f.pair.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = std::sin(0.01 * i) + 0.5;
    double sq = 0.0;
    for (std::size_t t = 0; t < f.m.triangle_count(); ++t) {
        double a[3];
        for (int k = 0; k < 3; ++k) {
            const int d = f.pair.dof_of_vertex[f.m.triangles[t][k]];
            a[k] = d < 0 ? 0.0 : u[d];
        }
        const double m01 = 0.5 * (a[0] + a[1]), m12 = 0.5 * (a[1] + a[2]), m20 = 0.5 * (a[2] + a[0]);
        sq += f.m.signed_area(t) * (m01 * m01 + m12 * m12 + m20 * m20) / 3.0;
    }
    CHECK(l2_norm(f.m, f.pair, u) == doctest::Approx(std::sqrt(sq)).epsilon(1e-12));
}

TEST_CASE("trivial projections") {
    const auto& f = touching();
    Vector wing = Vector::Zero(f.pair.size());
    for (int d : f.pair.interior_D_dofs) wing[d] = 1.0 + 0.1 * std::sin(double(d));
    // High side: interior hats are reproduced exactly.
    const Vector w = project_trivial(f.pair, wing, Side::High);
    CHECK((w - wing).norm() < 1e-9 * wing.norm());
    // Low side of a closed-wing indicator is the indicator itself.
    Vector ind = Vector::Zero(f.pair.size());
    for (int d : f.pair.wing_closure_dofs[0]) ind[d] = 1.0;
    CHECK((project_trivial(f.pair, ind, Side::Low) - ind).norm() < 1e-9 * ind.norm());
    CHECK(side_for(Branch::DPlus) == Side::High);
    CHECK(side_for(Branch::NMinus) == Side::Low);
    CHECK_THROWS_AS(side_for(Branch::DMinus), ValidationError);
}

TEST_CASE("w_delta: strip values depend on x2 only") {
    BowtieSpec s;
    const double delta = 0.04;
    const auto sd = s.with_delta(delta);
    const auto m = mesh(sd, delta_rule(sd, 0.12));
    const auto p = assemble(m);
    const auto ms = mode_set(0.95);
    const auto w = build_w_delta(m, p, ms.mode, ms.profile, kRho, delta);
    CHECK(p.energy(w.values) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(w.delta == delta);
    std::map<double, double> by_x2;
    int strip = 0;
    for (std::size_t v = 0; v < m.vertex_count(); ++v) {
        const auto x = m.vertices[v];
        if (!(std::abs(x.x) < delta / 2)) continue;
        const int d = p.dof_of_vertex[v];
        if (d < 0) continue;
        ++strip;
        CHECK(w.values[d] == doctest::Approx(w.s_eps * shifted_singular_value(ms.profile, w.cutoffs, delta, {0.0, x.y})).epsilon(1e-14).scale(1e-14));
        const auto [it, fresh] = by_x2.emplace(x.y, w.values[d]);
        if (!fresh) CHECK(it->second == w.values[d]);
    }
    CHECK(strip > 10);
    // Outside the strip it is the shifted cut-off singular solution.
    CHECK(shifted_singular_value(ms.profile, w.cutoffs, delta, {0.1 + delta / 2, 0.05}) ==
          cutoff_singular_value(ms.profile, w.cutoffs, {0.1, 0.05}));
    CHECK(shifted_singular_value(ms.profile, w.cutoffs, delta, {-0.1 - delta / 2, 0.05}) ==
          cutoff_singular_value(ms.profile, w.cutoffs, {-0.1, 0.05}));
}

TEST_CASE("w_delta desk sweep: log rate, convergence to u_delta, projections") {
    BowtieSpec s;
    const double deltas[] = {0.08, 0.04, 0.02, 0.01};
    std::vector<TriangleMesh> meshes;
    std::vector<StiffnessPair> pairs;
    for (double d : deltas) {
        meshes.push_back(mesh(s.with_delta(d), delta_rule(s.with_delta(d), 0.12)));
        pairs.push_back(assemble(meshes.back()));
    }
    for (double beta : {0.95, 0.05}) {
        CAPTURE(beta);
        const auto ms = mode_set(beta);
        std::vector<double> err_log, zerr_log, dist, proj;
        for (std::size_t i = 0; i < 4; ++i) {
            const auto w = build_w_delta(meshes[i], pairs[i], ms.mode, ms.profile, kRho, deltas[i]);
            const auto u = build_quasimode(meshes[i], pairs[i], ms.mode, ms.profile, kRho, deltas[i]);
            const double L = std::abs(std::log(deltas[i]));
            err_log.push_back(std::abs(beta - energy_ratio(pairs[i], w.values)) * L);
            const auto rep = projection_diagnostics(pairs[i], nullptr, w, side_for(ms.mode.branch));
            CHECK(std::isnan(rep.extreme_nontrivial));
            CHECK(rep.remainder_norm <= 1.0 + 1e-12);
            zerr_log.push_back(rep.ratio_error * L);
            dist.push_back(energy_distance(pairs[i], u.values, w.values));
            proj.push_back(rep.proj_norm);
        }
        CHECK(spread(err_log) < 4.0);
        CHECK(spread(zerr_log) < 4.0);
        CHECK(strictly_decreasing(dist));
        if (beta > 0.5) CHECK(strictly_decreasing(proj));
    }
    const auto ms = mode_set(0.95);
    const MeshRule rule = [](const BowtieSpec& g) { return delta_rule(g, 0.12); };
    const double two[] = {0.08, 0.04};
    const auto rows = w_delta_sweep(s, ms.mode, ms.profile, kRho, two, rule, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].mesh_hash == mesh_hash(meshes[0]));
    CHECK(rows[1].eps_or_delta == 0.04);
}

TEST_CASE("min-max bound against the discrete spectrum") {
    BowtieSpec s;
    const double delta = 0.08;
    const auto sd = s.with_delta(delta);
    const auto m = mesh(sd, delta_rule(sd, 0.12));
    const auto p = assemble(m);
    const auto spec = eigensolve(p, m);
    for (double beta : {0.95, 0.05}) {
        const auto ms = mode_set(beta);
        const auto w = build_w_delta(m, p, ms.mode, ms.profile, kRho, delta);
        const auto side = side_for(ms.mode.branch);
        const auto rep = projection_diagnostics(p, &spec, w, side);
        CHECK(rep.minmax_holds);
        if (side == Side::Low) {
            CHECK(rep.extreme_nontrivial == spec.min_nontrivial);
            CHECK(spec.min_nontrivial <= rep.remainder_ratio + 1e-10);
        } else {
            CHECK(rep.extreme_nontrivial == spec.max_nontrivial);
            CHECK(spec.max_nontrivial >= rep.remainder_ratio - 1e-10);
        }
    }
}

TEST_CASE("Rayleigh witness on a phase-locked deep sweep") {
    // delta_j = 0.01 exp(-j pi / xi) keeps cos(xi ln delta) fixed, so the
    // log-rate comparison is not polluted by the oscillation phase.
    BowtieSpec s;
    const auto hi = mode_set(0.95), lo = mode_set(0.05);
    const auto [band_lo, band_hi] = essential_band(s.alpha);
    std::vector<double> err_hi, err_lo;
    for (int j = 0; j < 4; ++j) {
        const double d = 0.01 * std::exp(-j * pi / hi.mode.xi);
        const auto sd = s.with_delta(d);
        const auto m = mesh(sd, delta_rule(sd, 0.12));
        const auto p = assemble(m);
        for (const auto* ms : {&hi, &lo}) {
            const auto w = build_w_delta(m, p, ms->mode, ms->profile, kRho, d);
            const auto rep = projection_diagnostics(p, nullptr, w, side_for(ms->mode.branch));
            (ms == &hi ? err_hi : err_lo).push_back(rep.ratio_error);
        }
    }
    CHECK(strictly_decreasing(err_hi));
    CHECK(strictly_decreasing(err_lo));
    CHECK(err_hi.back() < 0.95 - band_hi);
    CHECK(err_lo.back() < band_lo - 0.05);
}
