#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"

#include "helmlab/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"helmlab: weighted resolvent and local-smoothing laboratory for radial Schrodinger operators"};
    app.require_subcommand(1);

    helmlab::RunnerOptions opt;
    std::string seed_str;
    app.add_option("--config", opt.config_path, "experiment config file")->required();
    app.add_option("--out", opt.out_dir, "output directory (overrides output.path)");
    app.add_option("--threads", opt.threads, "worker threads for sweep lattices");
    app.add_option("--seed", seed_str, "override data.seed");

    for (const char* name : {"check-potential", "multiplier", "solve", "verify-identities", "sweep",
                             "evolve", "spectrum"})
        app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (!seed_str.empty()) opt.seed_override = std::stoull(seed_str);
        const std::string cmd = app.get_subcommands().front()->get_name();
        return helmlab::run_subcommand(cmd, opt);
    } catch (const helmlab::CheckFailure& e) {
        std::fprintf(stderr, "check failed: %s\n", e.what());
        return 2;
    } catch (const helmlab::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
