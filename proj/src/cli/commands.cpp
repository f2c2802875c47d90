#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bowtie/cli.hpp"
#include "bowtie/dispersion.hpp"
#include "bowtie/errors.hpp"
#include "bowtie/quasimode.hpp"
#include "bowtie/spectral.hpp"

namespace bowtie::cli {

namespace {

namespace fs = std::filesystem;

std::string real17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

int resolve_jobs(const Invocation& inv, const RunConfig& c) {
    if (inv.jobs) {
        if (*inv.jobs < 1) throw ValidationError("--jobs", "must be at least 1");
        return *inv.jobs;
    }
    if (const char* env = std::getenv("BOWTIE_JOBS"); env && *env) {
        char* end = nullptr;
        const long j = std::strtol(env, &end, 10);
        if (*end != '\0' || j < 1) throw ValidationError("BOWTIE_JOBS", "must be a positive integer");
        return static_cast<int>(j);
    }
    return c.jobs;
}

/// Files of one run: every CSV starts with the same comment header.
class Output {
public:
    Output(fs::path dir, std::string command, const RunConfig& c) : dir_(std::move(dir)), command_(std::move(command)) {
        header_ = "# bowtie " + command_ + "\n";
        std::istringstream in(canonical_text(c));
        for (std::string line; std::getline(in, line);) header_ += "# config " + line + "\n";
    }

    /// `meta` lines are appended to the header as "# key: value".
    void write(const std::string& name, const std::vector<std::string>& meta, const std::string& body) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
        out << header_;
        for (const auto& m : meta) out << "# " << m << "\n";
        out << body;
        if (!out) throw ConfigError("error writing '" + (dir_ / name).string() + "'");
        files_.push_back(name);
    }

    void write_raw(const std::string& name, const std::string& body) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
        out << body;
        files_.push_back(name);
    }

    /// Written last: its presence marks a complete result.
    void finish() {
        std::string body;
        for (const auto& f : files_) body += f + "\n";
        write_raw("manifest.txt", body);
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::string command_;
    std::string header_;
    std::vector<std::string> files_;
};

std::string mesh_meta(const TriangleMesh& m) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "mesh_hash: %s (vertices %zu, h %.17g, grading_target %.17g, grading_slope %.17g)",
                  mesh_hash(m).c_str(), m.vertex_count(), m.options.h, m.options.grading_target,
                  m.options.grading_slope);
    return buf;
}

double eps_min(const RunConfig& c) { return c.eps.empty() ? 0.0 : c.eps.back(); }

int cmd_dispersion(const RunConfig& c, Output& out, std::ostream& log) {
    const double alpha = c.geometry.alpha;
    if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw ValidationError("geometry.alpha", "must lie in (0, pi)");
    std::vector<double> xis(static_cast<std::size_t>(c.xi_count));
    const double l0 = std::log(c.xi_min), l1 = std::log(c.xi_max);
    for (int i = 0; i < c.xi_count; ++i) xis[i] = std::exp(l0 + (l1 - l0) * i / (c.xi_count - 1));
    xis.front() = c.xi_min;
    xis.back() = c.xi_max;
    std::ostringstream body;
    write_dispersion_csv(body, alpha, xis);
    out.write("dispersion.csv", {"mesh_hash: none"}, body.str());
    log << "dispersion: " << xis.size() << " xi values written\n";
    return kOk;
}

std::string summary_line(const SpectrumResult& s, bool touching) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "delta=%.17g geometry=%s n_dofs=%lld band=[%.17g, %.17g] n_below_band=%d n_above_band=%d "
                  "trivial_0=%d trivial_1=%d min_nontrivial=%.17g max_nontrivial=%.17g",
                  s.delta, touching ? "touching" : "separated", static_cast<long long>(s.n_dofs), s.band.first,
                  s.band.second, s.n_below_band, s.n_above_band, s.trivial_0_mult, s.trivial_1_mult,
                  s.min_nontrivial, s.max_nontrivial);
    return buf;
}

int cmd_spectrum(const RunConfig& c, Output& out, std::ostream& log) {
    c.geometry.validate();
    const TriangleMesh m = mesh(c.geometry, c.mesh_options(c.geometry, eps_min(c)));
    const StiffnessPair pair = assemble(m);
    EigensolveOptions eo;
    eo.dense_cap = c.dense_cap;
    const SpectrumResult s = eigensolve(pair, m, eo);
    const std::string summary = summary_line(s, c.geometry.touching());
    std::ostringstream body;
    write_spectrum_csv(body, s);
    out.write("spectrum.csv", {mesh_meta(m), "summary: " + summary}, body.str());
    out.write("summary.txt", {mesh_meta(m)}, summary + "\n");
    if (c.wants("mesh")) out.write_raw("mesh.txt", mesh_text(m));
    log << summary << "\n";
    return kOk;
}

std::string plot_script(const DensifySweep& sweep, std::pair<double, double> band) {
    std::ostringstream gp;
    gp << "# gnuplot script: eigenvalues against delta, essential band shaded\n";
    gp << "set datafile separator ','\n";
    gp << "set datafile commentschars '#'\n";
    gp << "set xlabel 'delta'\nset ylabel 'eigenvalue'\nset logscale x\nset yrange [0:1]\n";
    gp << "set object 1 rect from graph 0, first " << real17(band.first) << " to graph 1, first "
       << real17(band.second) << " fillcolor rgb '#dddddd' fillstyle solid 0.5 noborder behind\n";
    gp << "plot \\\n";
    bool first = true;
    for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
        const auto& e = sweep.entries[i];
        if (!e.ok) continue;
        gp << (first ? "" : ", \\\n") << "  'spectrum_" << i << ".csv' every ::1 using (" << real17(e.delta)
           << "):($3 == 0 ? $2 : 1/0) with points pt 7 ps 0.3 lc rgb 'black' notitle";
        first = false;
    }
    if (first) gp << "  NaN notitle";
    gp << "\n";
    return gp.str();
}

int cmd_densify(const RunConfig& c, Output& out, std::ostream& log, std::ostream& err, int jobs) {
    c.geometry.validate();
    if (c.deltas.empty()) throw ValidationError("sweep.deltas", "densify needs a delta list");
    EigensolveOptions eo;
    eo.dense_cap = c.dense_cap;
    const double em = eps_min(c);
    const DensifySweep sweep = densify_sweep(
        c.geometry, c.deltas, [&](const BowtieSpec& s) { return c.mesh_options(s, em); }, jobs, eo);

    std::vector<std::string> hashes;
    int ok = 0;
    for (std::size_t i = 0; i < sweep.entries.size(); ++i) {
        const auto& e = sweep.entries[i];
        hashes.push_back("mesh_hash delta=" + real17(e.delta) + ": " + (e.ok ? e.mesh_hash : "none"));
        if (!e.ok) {
            err << "densify: delta=" << real17(e.delta) << " failed: " << e.failure << "\n";
            continue;
        }
        ++ok;
        std::ostringstream body;
        write_spectrum_csv(body, e.spectrum);
        out.write("spectrum_" + std::to_string(i) + ".csv",
                  {"delta: " + real17(e.delta), "mesh_hash: " + e.mesh_hash,
                   "summary: " + summary_line(e.spectrum, false)},
                  body.str());
    }
    std::ostringstream summary;
    write_sweep_summary_csv(summary, sweep);
    out.write("summary.csv", hashes, summary.str());
    if (c.wants("plot")) out.write_raw("densify.gp", plot_script(sweep, essential_band(c.geometry.alpha)));

    // Densification is expected, not guaranteed at a fixed mesh rule.
    int prev = -1;
    for (const auto& e : sweep.entries) {
        if (!e.ok) continue;
        if (e.spectrum.n_below_band < prev)
            err << "WARN: n_below_band decreases at delta=" << real17(e.delta) << " (" << prev << " -> "
                << e.spectrum.n_below_band << ")\n";
        prev = e.spectrum.n_below_band;
    }
    log << "densify: " << ok << " of " << sweep.entries.size() << " deltas succeeded\n";
    return ok > 0 ? kOk : kSweepFailed;
}

int cmd_quasimode(const RunConfig& c, Output& out, std::ostream& log, int jobs) {
    c.geometry.validate();
    const bool by_delta = !c.deltas.empty();
    if (by_delta == !c.eps.empty())
        throw ValidationError("sweep.eps", "quasimode needs exactly one of sweep.eps (touching) or sweep.deltas");
    if (!by_delta && !c.geometry.touching())
        throw ValidationError("geometry.delta", "an eps sweep builds u_eps on the touching geometry (delta = 0)");

    std::optional<TriangleMesh> touching;
    std::optional<StiffnessPair> pair;
    if (!by_delta) {
        touching = mesh(c.geometry, c.mesh_options(c.geometry, eps_min(c)));
        pair = assemble(*touching);
    }
    for (std::size_t b = 0; b < c.betas.size(); ++b) {
        const double beta = c.betas[b];
        const CornerMode mode = mode_for_beta(beta, c.geometry.alpha);
        const AngularProfile profile = solve_angular_profile(mode);
        std::vector<QuasimodeRow> rows;
        std::vector<std::string> meta{"beta: " + real17(beta), "branch: " + std::string(to_string(mode.branch)),
                                      "xi: " + real17(mode.xi), "k: " + real17(mode.k),
                                      std::string("sweep: ") + (by_delta ? "w_delta over delta" : "u_eps over eps")};
        if (by_delta) {
            rows = w_delta_sweep(c.geometry, mode, profile, c.rho, c.deltas,
                                 [&](const BowtieSpec& s) { return c.mesh_options(s, s.delta); }, jobs);
            for (const auto& r : rows) meta.push_back("mesh_hash delta=" + real17(r.eps_or_delta) + ": " + r.mesh_hash);
        } else {
            rows = eps_sweep(*touching, *pair, mode, profile, c.rho, c.eps, jobs);
            meta.push_back(mesh_meta(*touching));
        }
        std::ostringstream body;
        write_quasimode_csv(body, rows);
        char name[64];
        std::snprintf(name, sizeof name, "quasimode_%zu.csv", b);
        out.write(name, meta, body.str());
        log << "quasimode: beta=" << real17(beta) << " (" << to_string(mode.branch) << "), " << rows.size()
            << " rows\n";
    }
    if (touching && c.wants("mesh")) out.write_raw("mesh.txt", mesh_text(*touching));
    return kOk;
}

int cmd_convergence(const RunConfig& c, Output& out, std::ostream& log) {
    c.geometry.validate();
    if (!c.geometry.touching())
        throw ValidationError("geometry.delta", "convergence compares D_delta with the touching D (delta = 0)");
    if (c.deltas.empty()) throw ValidationError("sweep.deltas", "convergence needs a delta list");
    const TriangleMesh m = compatible_mesh(c.geometry, c.deltas, c.mesh_options(c.geometry, c.deltas.back()));
    const StiffnessPair pair = assemble(m);
    const auto rows = pointwise_convergence_test(m, default_seed(m, pair), c.deltas);
    std::ostringstream body;
    body << "delta,difference,bound,u_norm,sym_diff_triangles\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.delta, r.difference, r.bound, r.u_norm,
                      r.sym_diff_triangles);
        body << buf;
    }
    out.write("convergence.csv", {mesh_meta(m)}, body.str());
    if (c.wants("mesh")) out.write_raw("mesh.txt", mesh_text(m));
    log << "convergence: " << rows.size() << " deltas on one compatible mesh\n";
    return kOk;
}

}  // namespace

fs::path result_directory(const Invocation& inv, const RunConfig& c) {
    const fs::path base = inv.out ? *inv.out : fs::path(c.output_directory);
    return base / (inv.command + "-" + config_hash(inv.command, c));
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
    static const char* const commands[] = {"dispersion", "spectrum", "densify", "quasimode", "convergence"};
    if (std::find(std::begin(commands), std::end(commands), inv.command) == std::end(commands)) {
        err << "error: unknown subcommand '" << inv.command << "'\n";
        return kValidation;
    }
    try {
        const RunConfig c = load_config(inv.config_path);
        const int jobs = resolve_jobs(inv, c);
        const fs::path dir = result_directory(inv, c);
        if (fs::exists(dir / "manifest.txt") && !inv.overwrite) {
            log << "up to date: " << dir.string() << " (use --overwrite to recompute)\n";
            return kOk;
        }
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
        fs::remove(dir / "manifest.txt", ec);

        Output out(dir, inv.command, c);
        int code = kOk;
        if (inv.command == "dispersion") code = cmd_dispersion(c, out, log);
        else if (inv.command == "spectrum") code = cmd_spectrum(c, out, log);
        else if (inv.command == "densify") code = cmd_densify(c, out, log, err, jobs);
        else if (inv.command == "quasimode") code = cmd_quasimode(c, out, log, jobs);
        else code = cmd_convergence(c, out, log);
        if (code == kOk) {
            out.finish();
            log << "results: " << dir.string() << "\n";
        }
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigIO;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const ResolutionError& e) {
        err << "resolution error: " << e.what() << "\n";
        return kResource;
    } catch (const ResourceError& e) {
        err << "resource limit: " << e.what() << " (suggested mesh.h = " << real17(e.suggested_h()) << ")\n";
        return kResource;
    } catch (const MeshingError& e) {
        err << "meshing failed: " << e.what() << "\n";
        return kResource;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kResource;
    }
}

}  // namespace bowtie::cli
