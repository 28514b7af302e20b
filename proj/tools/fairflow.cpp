// fairflow: run, sweep, list and validate scenarios.
//
//   fairflow run --preset heavy --out results
//   fairflow run --config my.ini --policy robust_fair --set system.theta_d=0.3
//   fairflow sweep --preset k1_sweep --format csv
//   fairflow presets
//   fairflow validate --config my.ini

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fairflow/app.hpp"
#include "fairflow/config.hpp"
#include "fairflow/text.hpp"

namespace {

struct Flags {
    std::string preset;
    std::string config;
    std::vector<std::string> policies;
    std::string out;
    std::string seed;
    std::vector<std::string> sets;
    std::vector<std::string> formats;
};

void add_scenario_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--preset", f.preset, "built-in scenario (see `presets`)");
    cmd->add_option("--config", f.config, "scenario config file")->check(CLI::ExistingFile);
    cmd->add_option("--set", f.sets, "override, key=value (repeatable), e.g. system.theta_d=0.3");
    cmd->add_option("--seed", f.seed, "arrival noise seed");
}

void add_output_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--policy", f.policies,
                    "robust_fair, surge or all (repeatable or comma-separated; default all)")
        ->delimiter(',');
    cmd->add_option("--out", f.out, "output directory (default $FAIRFLOW_OUT, else .)");
    cmd->add_option("--format", f.formats, "csv, json (repeatable or comma-separated)")
        ->delimiter(',');
}

fairflow::RunConfig to_run_config(const Flags& f) {
    fairflow::RunConfig rc;
    rc.preset = f.preset;
    rc.config = f.config;
    rc.out_dir = f.out;
    if (!f.seed.empty()) rc.seed = fairflow::parse_uint(f.seed, "seed");
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw fairflow::ConfigError("--set expects key=value, got '" + s + "'");
        rc.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (!f.policies.empty()) {
        rc.policies.clear();
        for (const auto& p : f.policies) {
            if (p == "all") {
                rc.policies = {fairflow::Policy::robust_fair, fairflow::Policy::surge};
                break;
            }
            const auto pol = fairflow::parse_policy(p);
            if (std::find(rc.policies.begin(), rc.policies.end(), pol) == rc.policies.end()) {
                rc.policies.push_back(pol);
            }
        }
    }
    if (!f.formats.empty()) {
        rc.csv = rc.json = false;
        for (const auto& fmt : f.formats) {
            if (fmt == "csv") rc.csv = true;
            else if (fmt == "json") rc.json = true;
            else throw fairflow::ConfigError("unknown format '" + fmt + "'");
        }
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fairness-constrained pricing and admission control simulator"};
    app.require_subcommand(1);
    Flags f;

    auto* run = app.add_subcommand("run", "simulate one scenario under each selected policy");
    add_scenario_flags(run, f);
    add_output_flags(run, f);
    auto* sweep = app.add_subcommand("sweep", "run every point of a sweep preset");
    add_scenario_flags(sweep, f);
    add_output_flags(sweep, f);
    auto* list = app.add_subcommand("presets", "list built-in scenarios");
    list->add_option("--format", f.formats, "text or json");
    auto* validate = app.add_subcommand("validate", "check a config or preset with overrides");
    add_scenario_flags(validate, f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            const bool json = !f.formats.empty() && f.formats.front() == "json";
            return fairflow::presets_command(std::cout, json);
        }
        const auto rc = to_run_config(f);
        if (run->parsed()) return fairflow::run_command(rc, std::cout);
        if (sweep->parsed()) return fairflow::sweep_command(rc, std::cout);
        return fairflow::validate_command(rc, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "fairflow: " << e.what() << "\n";
        return fairflow::kExitError;
    }
}
