#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "bowtie/cli.hpp"
#include "bowtie/errors.hpp"

namespace bowtie::cli {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_real(const std::string& key, const std::string& v) {
    double x = 0.0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end || !std::isfinite(x)) throw ValidationError(key, "not a finite number: '" + v + "'");
    return x;
}

long parse_int(const std::string& key, const std::string& v) {
    long x = 0;
    const char* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, x);
    if (ec != std::errc() || p != end) throw ValidationError(key, "not an integer: '" + v + "'");
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> parse_reals(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split_list(v)) out.push_back(parse_real(key, s));
    return out;
}

void require_descending(const std::string& key, const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw ValidationError(key, "every value must be positive");
        if (i > 0 && !(v[i] < v[i - 1])) throw ValidationError(key, "must be strictly descending");
    }
}

std::string real17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string reals17(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + real17(v[i]);
    return s;
}

}  // namespace

bool RunConfig::wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

MeshOptions RunConfig::mesh_options(const BowtieSpec& spec, double eps_min) const {
    MeshOptions o;
    o.h = mesh_h;
    o.grading_target = grading_target ? *grading_target : [&] {
        const double scale = std::max(spec.delta, eps_min > 0.0 ? eps_min : 0.0);
        return std::min(mesh_h, scale > 0.0 ? scale / 4.0 : 0.0125 * spec.r0);
    }();
    o.grading_slope = grading_slope;
    o.far_growth = far_growth;
    o.far_h_max = far_h_max ? *far_h_max : std::max(spec.r0, mesh_h);
    return o;
}

void RunConfig::validate() const {
    if (!(mesh_h > 0.0)) throw ValidationError("mesh.h", "must be positive");
    if (grading_target && !(*grading_target > 0.0)) throw ValidationError("mesh.grading_target", "must be positive");
    if (!(grading_slope > 0.0)) throw ValidationError("mesh.grading_slope", "must be positive");
    if (!(far_growth >= 0.0)) throw ValidationError("mesh.far_growth", "must be non-negative");
    if (far_h_max && !(*far_h_max >= mesh_h)) throw ValidationError("mesh.far_h_max", "must be at least mesh.h");
    if (dense_cap < 1) throw ValidationError("mesh.dense_cap", "must be positive");
    require_descending("sweep.deltas", deltas);
    require_descending("sweep.eps", eps);
    if (jobs < 1) throw ValidationError("sweep.jobs", "must be at least 1");
    if (!(xi_min > 0.0) || !(xi_max > xi_min)) throw ValidationError("sweep.xi_min", "need 0 < xi_min < xi_max");
    if (xi_count < 2) throw ValidationError("sweep.xi_count", "must be at least 2");
    for (double b : betas)
        if (!(b > 0.0 && b < 1.0)) throw ValidationError("mode.betas", "beta targets must lie in (0, 1)");
    if (!(rho > 0.0)) throw ValidationError("mode.rho", "must be positive");
    for (const auto& f : formats)
        if (f != "csv" && f != "plot" && f != "mesh") throw ValidationError("output.formats", "unknown format '" + f + "'");
    if (output_directory.empty()) throw ValidationError("output.directory", "must not be empty");
}

RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty() || key.find('.') == std::string::npos || key.find('.') != key.rfind('.'))
            throw ConfigError("line " + std::to_string(lineno) + ": key must be 'section.name'");
        if (!kv.emplace(key, value).second) throw ValidationError(key, "given twice");
    }

    RunConfig c;
    bool have_ks = false, have_betas = false;
    for (const auto& [key, v] : kv) {
        if (key == "geometry.alpha") c.geometry.alpha = parse_real(key, v);
        else if (key == "geometry.delta") c.geometry.delta = parse_real(key, v);
        else if (key == "geometry.r0") c.geometry.r0 = parse_real(key, v);
        else if (key == "geometry.omega_halfwidth") c.geometry.omega_halfwidth = parse_real(key, v);
        else if (key == "geometry.wing_shape") {
            std::string s = v;
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
            if (s == "triangle") c.geometry.wing_shape = WingShape::Triangle;
            else if (s == "sector") c.geometry.wing_shape = WingShape::Sector;
            else throw ValidationError(key, "must be TRIANGLE or SECTOR");
        }
        else if (key == "mesh.h") c.mesh_h = parse_real(key, v);
        else if (key == "mesh.grading_target") c.grading_target = parse_real(key, v);
        else if (key == "mesh.grading_slope") c.grading_slope = parse_real(key, v);
        else if (key == "mesh.far_growth") c.far_growth = parse_real(key, v);
        else if (key == "mesh.far_h_max") c.far_h_max = parse_real(key, v);
        else if (key == "mesh.dense_cap") c.dense_cap = parse_int(key, v);
        else if (key == "sweep.deltas") c.deltas = parse_reals(key, v);
        else if (key == "sweep.eps") c.eps = parse_reals(key, v);
        else if (key == "sweep.jobs") c.jobs = static_cast<int>(parse_int(key, v));
        else if (key == "sweep.xi_min") c.xi_min = parse_real(key, v);
        else if (key == "sweep.xi_max") c.xi_max = parse_real(key, v);
        else if (key == "sweep.xi_count") c.xi_count = static_cast<int>(parse_int(key, v));
        else if (key == "mode.betas") {
            c.betas = parse_reals(key, v);
            have_betas = true;
        } else if (key == "mode.ks") {
            // beta = 1 / (1 - k); only negative contrasts give targets in (0, 1).
            c.betas.clear();
            for (double k : parse_reals(key, v)) {
                if (!(k < 0.0)) throw ValidationError(key, "contrast values must be negative");
                c.betas.push_back(1.0 / (1.0 - k));
            }
            have_ks = true;
        }
        else if (key == "mode.rho") c.rho = parse_real(key, v);
        else if (key == "output.directory") c.output_directory = v;
        else if (key == "output.formats") c.formats = split_list(v);
        else throw ValidationError(key, "unknown configuration key");
    }
    if (have_ks && have_betas) throw ValidationError("mode.ks", "give either mode.betas or mode.ks, not both");
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw ConfigError("error reading config file '" + path.string() + "'");
    return parse_config(ss.str());
}

std::string canonical_text(const RunConfig& c) {
    std::map<std::string, std::string> kv;
    kv["geometry.alpha"] = real17(c.geometry.alpha);
    kv["geometry.delta"] = real17(c.geometry.delta);
    kv["geometry.r0"] = real17(c.geometry.r0);
    kv["geometry.omega_halfwidth"] = real17(c.geometry.omega_halfwidth);
    kv["geometry.wing_shape"] = c.geometry.wing_shape == WingShape::Triangle ? "TRIANGLE" : "SECTOR";
    kv["mesh.h"] = real17(c.mesh_h);
    kv["mesh.grading_target"] = c.grading_target ? real17(*c.grading_target) : "auto";
    kv["mesh.grading_slope"] = real17(c.grading_slope);
    kv["mesh.far_growth"] = real17(c.far_growth);
    kv["mesh.far_h_max"] = c.far_h_max ? real17(*c.far_h_max) : "auto";
    kv["mesh.dense_cap"] = std::to_string(c.dense_cap);
    kv["sweep.deltas"] = reals17(c.deltas);
    kv["sweep.eps"] = reals17(c.eps);
    kv["sweep.xi_min"] = real17(c.xi_min);
    kv["sweep.xi_max"] = real17(c.xi_max);
    kv["sweep.xi_count"] = std::to_string(c.xi_count);
    kv["mode.betas"] = reals17(c.betas);
    kv["mode.rho"] = real17(c.rho);
    std::string formats;
    for (std::size_t i = 0; i < c.formats.size(); ++i) formats += (i ? ", " : "") + c.formats[i];
    kv["output.formats"] = formats;
    std::string out;
    for (const auto& [k, v] : kv) out += k + (v.empty() ? " =\n" : " = " + v + "\n");
    return out;
}

std::string config_hash(const std::string& command, const RunConfig& c) {
    const std::string text = command + "\n" + canonical_text(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace bowtie::cli
