// Command-line front end. Links only the C API of the shared library.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "mcn/mcn.h"

namespace {

int finish(mcn_status status, mcn_report* report, const std::string& out_dir, bool quiet) {
    if (status != MCN_OK) {
        std::fprintf(stderr, "error: %s\n", mcn_last_error());
        mcn_report_free(report);
        switch (status) {
            case MCN_ERR_INFEASIBLE:
            case MCN_ERR_BUDGET:
            case MCN_ERR_CONFIG:
                return static_cast<int>(status);
            default:
                return 1;
        }
    }
    if (!out_dir.empty()) {
        const mcn_status ws = mcn_report_write(report, out_dir.c_str());
        if (ws != MCN_OK) {
            std::fprintf(stderr, "error: %s\n", mcn_last_error());
            mcn_report_free(report);
            return 1;
        }
        if (!quiet) {
            std::fprintf(stderr, "wrote report.json");
            const size_t n = mcn_report_file_count(report);
            for (size_t i = 0; i < n; ++i) {
                std::fprintf(stderr, ", %s", mcn_report_file_name(report, i));
            }
            std::fprintf(stderr, " to %s\n", out_dir.c_str());
        }
    } else {
        std::fputs(mcn_report_json(report), stdout);
    }
    mcn_report_free(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deadbeat controller / multi-hop network co-design toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, solution_path;
    std::string model, pi_max, rate_sweep, seed, horizon, amplitude;
    bool oracle = false, quiet = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration JSON")->required();
        cmd->add_option("--out", out_dir, "output directory (report JSON to stdout when absent)");
        cmd->add_option("--model", model, "computational model override (1|2)");
        cmd->add_option("--pi-max", pi_max, "schedule period bound override");
        cmd->add_option("--rate-sweep", rate_sweep, "rate bound sweep lo:hi:step (Hz)");
        cmd->add_option("--horizon", horizon, "simulation horizon override (samples)");
        cmd->add_option("--amplitude", amplitude, "step amplitude override");
        cmd->add_option("--seed", seed, "reserved; no numeric effect");
        cmd->add_flag("--oracle", oracle, "cross-check against the brute-force oracle");
        cmd->add_flag("--quiet", quiet, "suppress the output-file summary");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "network transfer functions and rates");
    CLI::App* codesign = app.add_subcommand("codesign", "controller + weight co-design");
    CLI::App* search = app.add_subcommand("schedule-search", "rank admissible schedules");
    CLI::App* simulate = app.add_subcommand("simulate", "replay an emitted solution");
    for (CLI::App* cmd : {analyze, codesign, search, simulate}) add_common(cmd);
    simulate->add_option("--solution", solution_path, "codesign report.json to replay")
        ->required();

    CLI11_PARSE(app, argc, argv);

    mcn_config* cfg = nullptr;
    mcn_status status = mcn_config_load(config_path.c_str(), &cfg);
    if (status != MCN_OK) {
        std::fprintf(stderr, "error: %s\n", mcn_last_error());
        return static_cast<int>(MCN_ERR_CONFIG);
    }

    auto override_or_die = [&](const char* key, const std::string& value) {
        if (value.empty()) return true;
        if (mcn_config_set(cfg, key, value.c_str()) != MCN_OK) {
            std::fprintf(stderr, "error: %s\n", mcn_last_error());
            return false;
        }
        return true;
    };
    if (!override_or_die("model", model) || !override_or_die("pi-max", pi_max) ||
        !override_or_die("rate-sweep", rate_sweep) || !override_or_die("horizon", horizon) ||
        !override_or_die("amplitude", amplitude) || !override_or_die("seed", seed) ||
        (oracle && !override_or_die("oracle", "true"))) {
        mcn_config_free(cfg);
        return static_cast<int>(MCN_ERR_CONFIG);
    }

    mcn_report* report = nullptr;
    if (app.got_subcommand(analyze)) {
        status = mcn_run_analyze(cfg, &report);
    } else if (app.got_subcommand(codesign)) {
        status = mcn_run_codesign(cfg, &report);
    } else if (app.got_subcommand(search)) {
        status = mcn_run_schedule_search(cfg, &report);
    } else {
        status = mcn_run_simulate(cfg, solution_path.c_str(), &report);
    }
    mcn_config_free(cfg);
    return finish(status, report, out_dir, quiet);
}
