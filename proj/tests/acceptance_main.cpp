// Full acceptance sweep: every quantitative estimate the laboratory
// verifies, one line per criterion, exit 0 only when all twelve hold.
#include <cstdio>
#include <exception>
#include <map>
#include <string>

#include "phi4lab/config.hpp"
#include "phi4lab/scenarios.hpp"

using namespace phi4lab;

namespace {

struct Pin {
    const char* criterion;
    const char* scenario;
};

// report order is fixed; scenarios are shared between related criteria
const Pin kPins[12] = {
    {"bony-exactness", "paraproduct-bench"},
    {"semigroup-laws", "seminorm-bench"},
    {"max-principle", "max-principle"},
    {"coming-down", "come-down"},
    {"l2-contraction", "couple"},
    {"girsanov-normalization", "girsanov"},
    {"coupling-uniformity", "couple"},
    {"monotonicity-regression", "couple"},
    {"harnack", "harnack"},
    {"refined-paraproduct", "paraproduct-bench"},
    {"mollifier-exponent", "seminorm-bench"},
    {"exponent-table", "come-down"},
};

}  // namespace

int main() {
    LabConfig cfg = default_config("smoke");
    cfg.seed = 20260401;
    cfg.out_dir = "acceptance-out";

    std::map<std::string, ScenarioResult> results;
    try {
        for (const std::string& name : scenario_names()) {
            std::printf("# running %s ...\n", name.c_str());
            std::fflush(stdout);
            results[name] = run_scenario(name, cfg);
            std::printf("# %s done in %.1f s\n", name.c_str(),
                        results[name].wall_seconds);
            std::fflush(stdout);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "scenario aborted: %s\n", e.what());
        return 3;
    }

    int passed = 0;
    for (int k = 0; k < 12; ++k) {
        const VerdictEntry& c =
            results.at(kPins[k].scenario).criterion(kPins[k].criterion);
        std::printf("[%2d/12] %-26s %s  (observed=%.6g, threshold=%.6g)\n",
                    k + 1, c.criterion.c_str(), c.pass ? "PASS" : "FAIL",
                    c.observed, c.threshold);
        if (!c.note.empty()) std::printf("        %s\n", c.note.c_str());
        passed += c.pass;
    }
    for (const auto& c : results.at("strong-norm").criteria) {
        std::printf("[info ] %-26s %s  (observed=%.6g, threshold=%.6g)\n",
                    c.criterion.c_str(), c.pass ? "PASS" : "FAIL", c.observed,
                    c.threshold);
    }
    std::printf("%d/12 criteria pass\n", passed);
    return passed == 12 ? 0 : 1;
}
