#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bowtie/geometry.hpp"
#include "bowtie/mesh.hpp"

namespace bowtie::cli {

/// The configuration file is missing, unreadable or not key = value text.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int {
    kOk = 0,
    kConfigIO = 1,
    kValidation = 2,
    kResource = 3,
    kSweepFailed = 4,
};

struct RunConfig {
    BowtieSpec geometry;

    double mesh_h = 0.1;
    std::optional<double> grading_target;  // default max(delta, eps_min) / 4
    double grading_slope = 0.1;
    double far_growth = 0.5;
    std::optional<double> far_h_max;  // default max(r0, h)
    long dense_cap = 6000;

    std::vector<double> deltas;  // strictly descending
    std::vector<double> eps;     // strictly descending
    int jobs = 1;
    double xi_min = 1e-2;
    double xi_max = 1e2;
    int xi_count = 200;

    std::vector<double> betas{0.95, 0.05};
    double rho = 0.2;

    std::string output_directory = "bowtie-out";
    std::vector<std::string> formats{"csv", "plot"};

    bool wants(const std::string& format) const;
    /// Mesh options for one geometry; `eps_min` <= 0 means no cutoff radius.
    MeshOptions mesh_options(const BowtieSpec& spec, double eps_min) const;
    void validate() const;
};

/// Parses flat "section.key = value" text; '#' starts a comment.
/// Throws ConfigError on syntax and ValidationError on bad values or unknown keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Sorted "key = value" lines with 17-digit floats; the parallelism degree
/// is excluded because it never changes results.
std::string canonical_text(const RunConfig& c);
/// 16 hex digits of FNV-1a over the command name and the canonical text.
std::string config_hash(const std::string& command, const RunConfig& c);

struct Invocation {
    std::string command;
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out;
    bool overwrite = false;
    std::optional<int> jobs;  // overrides BOWTIE_JOBS and sweep.jobs
};

/// Runs one subcommand and returns its exit code; errors are reported on `err`.
int run(const Invocation& inv, std::ostream& log, std::ostream& err);

/// Directory that `run` writes to for this invocation.
std::filesystem::path result_directory(const Invocation& inv, const RunConfig& c);

}  // namespace bowtie::cli
