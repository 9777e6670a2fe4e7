#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "phi4lab/config.hpp"
#include "phi4lab/scenarios.hpp"

using namespace phi4lab;

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory for the transformed phi^4 dynamics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string profile = "smoke";
    std::string out_dir;
    std::uint64_t seed = 0;
    auto* opt_config = app.add_option(
        "--config", config_path, "key = value document layered over the profile");
    app.add_option("--profile", profile, "base defaults: smoke or full")
        ->check(CLI::IsMember({"smoke", "full"}));
    auto* opt_seed =
        app.add_option("--seed", seed, "root seed (overrides config)");
    auto* opt_out = app.add_option("--out-dir", out_dir,
                                   "artifact directory (overrides config)");

    for (const std::string& name : scenario_names()) {
        app.add_subcommand(name, "run the " + name + " experiment");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // --help is a clean exit
    }

    try {
        LabConfig cfg = default_config(profile);
        if (opt_config->count() > 0) cfg = load_config(config_path, cfg);
        if (opt_seed->count() > 0) cfg.seed = seed;
        if (opt_out->count() > 0) cfg.out_dir = out_dir;

        const std::string scenario = app.get_subcommands().front()->get_name();
        const ScenarioResult res = run_scenario(scenario, cfg);
        for (const auto& c : res.criteria) {
            std::printf("%-26s %s  (observed=%.6g, threshold=%.6g)\n",
                        c.criterion.c_str(), c.pass ? "PASS" : "FAIL",
                        c.observed, c.threshold);
            if (!c.note.empty()) std::printf("    %s\n", c.note.c_str());
        }
        for (const auto& path : res.artifacts) {
            std::printf("wrote %s\n", path.c_str());
        }
        std::printf("%s: %s in %.1f s\n", scenario.c_str(),
                    res.pass() ? "all criteria pass" : "CRITERION FAILURE",
                    res.wall_seconds);
        if (!res.pass()) {
            for (const auto& c : res.criteria) {
                if (!c.pass) {
                    std::fprintf(stderr, "failing criterion: %s\n",
                                 c.criterion.c_str());
                }
            }
            return 1;
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
