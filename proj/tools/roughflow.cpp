// Command line front end: parse one experiment file, run the requested
// scenario, and map the library's error taxonomy onto process exit codes
// (0 success, 2 configuration, 3 numerical abort, 4 io).
#include <cstdio>
#include <filesystem>
#include <string>

#include <CLI11.hpp>

#include "roughflow/cli/config.hpp"
#include "roughflow/cli/runner.hpp"
#include "roughflow/core/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"rough driver lifts, particle flows, and rough fluid models"};
    std::string scenario_arg, config_path, out_dir;
    unsigned long long seed = 0;
    std::size_t levels = 0;

    app.add_option("scenario", scenario_arg,
                   "one of: lift, rde, burgers, camassa_holm, euler2d, wong_zakai, audit")
        ->required();
    app.add_option("--config", config_path, "experiment file (json)")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)")
        ->envname("ROUGHFLOW_OUT");
    auto* seed_opt = app.add_option("--seed", seed, "override the Gaussian driver seed");
    auto* levels_opt =
        app.add_option("--levels", levels, "override the study level count (minimum 3)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // help exits cleanly; anything else is a usage problem
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        auto scenario = roughflow::parse_scenario(scenario_arg);
        auto cfg = roughflow::load_config(config_path, scenario);
        if (seed_opt->count() > 0) {
            if (!cfg.driver.fbm)
                throw roughflow::ConfigError("--seed only applies to fbm drivers");
            cfg.driver.spec.seed = seed;
        }
        if (levels_opt->count() > 0) {
            if (levels < 3) throw roughflow::ConfigError("--levels needs at least 3");
            cfg.levels = levels;
        }
        std::filesystem::path out =
            !out_dir.empty()  ? std::filesystem::path(out_dir)
            : !cfg.out.empty() ? std::filesystem::path(cfg.out)
                               : std::filesystem::path("runs") / scenario_arg;
        return roughflow::run_experiment(cfg, out);
    } catch (const roughflow::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const roughflow::NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return 3;
    } catch (const roughflow::IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    }
}
