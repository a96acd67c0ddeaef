#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nslab/experiments.hpp"
#include "nslab/io.hpp"

using nlohmann::json;

namespace {

json load_config(const std::string& experiment, const std::string& config_file,
                 const std::vector<std::string>& overrides, const std::string& out_dir) {
    json cfg = nslab::default_config(experiment);
    if (!config_file.empty()) {
        json user = json::parse(nslab::read_text_file(config_file));
        cfg.merge_patch(user);
        cfg["experiment"] = experiment;
    }
    for (const auto& kv : overrides) nslab::apply_override(cfg, kv);
    if (!out_dir.empty()) cfg["out_dir"] = out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for weighted-estimate verification and "
                 "lateral-data reconstruction"};
    app.require_subcommand(1);

    std::string experiment, config_file, out_dir;
    std::vector<std::string> overrides;

    auto* run = app.add_subcommand("run", "run a named experiment");
    run->add_option("experiment", experiment, "experiment name (see `list`)")->required();
    run->add_option("--config", config_file, "JSON config file merged over the defaults");
    run->add_option("--set", overrides, "dotted key=value overrides");
    run->add_option("--out", out_dir, "output directory");

    auto* list = app.add_subcommand("list", "print the experiment catalog");

    std::string v_experiment = "carleman_thm1", v_config;
    std::vector<std::string> v_overrides;
    auto* validate = app.add_subcommand("validate", "check a config against the schema");
    validate->add_option("experiment", v_experiment, "experiment name");
    validate->add_option("--config", v_config, "JSON config file");
    validate->add_option("--set", v_overrides, "dotted key=value overrides");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            json out = json::array();
            for (const auto& e : nslab::experiment_catalog())
                out.push_back({{"name", e.name},
                               {"tier", e.tier},
                               {"verifies", e.verifies},
                               {"description", e.description}});
            std::cout << out.dump(2) << "\n";
            return 0;
        }
        if (validate->parsed()) {
            json cfg = load_config(v_experiment, v_config, v_overrides, "");
            auto problems = nslab::validate_config(cfg);
            if (problems.empty()) {
                std::cout << "valid\n" << cfg.dump(2) << "\n";
                return 0;
            }
            for (const auto& p : problems) std::cerr << "error: " << p << "\n";
            return 1;
        }
        // run
        json cfg = load_config(experiment, config_file, overrides, out_dir);
        nslab::ExperimentOutcome out = nslab::run_experiment(cfg);
        for (const auto& c : out.checks) {
            const char* tag = c.status == nslab::CheckStatus::Pass
                                  ? "PASS"
                                  : (c.status == nslab::CheckStatus::Soft ? "SOFT" : "FAIL");
            std::printf("[%s] %s%s%s\n", tag, c.name.c_str(), c.detail.empty() ? "" : ": ",
                        c.detail.c_str());
        }
        std::printf("summary: %s/%s/summary.json\n", cfg["out_dir"].get<std::string>().c_str(),
                    experiment.c_str());
        return out.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
