#include <CLI11.hpp>
#include <iostream>

#include "bowtie/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Spectral laboratory for bowtie-shaped inclusions"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    bowtie::cli::Invocation inv;
    std::string config, out;
    int jobs = 0;
    app.add_option("--config", config, "key = value configuration file")->required();
    auto* out_opt = app.add_option("--out", out, "output directory (overrides output.directory)");
    app.add_flag("--overwrite", inv.overwrite, "recompute even if results for this config exist");
    auto* jobs_opt = app.add_option("--jobs", jobs, "parallel sweep tasks (fallback: BOWTIE_JOBS, sweep.jobs)");

    for (const char* name : {"dispersion", "spectrum", "densify", "quasimode", "convergence"})
        app.add_subcommand(name)->callback([&inv, name] { inv.command = name; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return bowtie::cli::kValidation;
    }
    inv.config_path = config;
    if (*out_opt) inv.out = out;
    if (*jobs_opt) inv.jobs = jobs;
    return bowtie::cli::run(inv, std::cout, std::cerr);
}
