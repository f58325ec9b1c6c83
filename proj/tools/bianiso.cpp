#include "bianiso/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace bianiso;
    CLI::App app{"Layered bi-anisotropic media solver"};
    std::string config, output, mode;
    int threads = 1;
    bool validate_only = false;
    std::uint64_t seed = 0;
    app.add_option("--config", config, "Run configuration (YAML)")->required()->envname("BIANISO_CONFIG");
    auto* out_opt = app.add_option("--output", output, "Output directory (overrides the config)")
                        ->envname("BIANISO_OUTPUT");
    auto* mode_opt = app.add_option("--mode", mode, "scattering | initial-value | time-reconstruction")
                         ->envname("BIANISO_MODE")
                         ->check(CLI::IsMember({"scattering", "initial-value", "time-reconstruction"}));
    app.add_option("--threads", threads, "Worker threads for the sweep")
        ->envname("BIANISO_THREADS")
        ->check(CLI::Range(1, 1024));
    app.add_flag("--validate-only", validate_only, "Check the config and exit")->envname("BIANISO_VALIDATE_ONLY");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized materials")->envname("BIANISO_SEED");
    CLI11_PARSE(app, argc, argv);

    cli::RunOptions opt;
    opt.threads = threads;
    opt.validate_only = validate_only;
    if (out_opt->count()) opt.overrides.output_dir = output;
    if (mode_opt->count()) opt.overrides.mode = cli::parse_mode(mode);
    if (seed_opt->count()) opt.overrides.seed = seed;
    return cli::run(config, opt, std::cerr);
}
