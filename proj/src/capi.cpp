#include "mcn/mcn.h"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "runner.hpp"

using namespace mcn;

struct mcn_config {
    ProblemConfig cfg;
};

struct mcn_report {
    RunReport report;
    std::string json_text;
    std::vector<std::pair<std::string, std::string>> files;
};

namespace {

thread_local std::string g_last_error;

mcn_status set_error(mcn_status code, const std::string& message) {
    g_last_error = message;
    return code;
}

template <typename Fn>
mcn_status guarded(Fn&& fn) {
    try {
        fn();
        return MCN_OK;
    } catch (const ConfigError& e) {
        return set_error(MCN_ERR_CONFIG, e.what());
    } catch (const StructureError& e) {
        return set_error(MCN_ERR_CONFIG, e.what());
    } catch (const InfeasibleError& e) {
        return set_error(MCN_ERR_INFEASIBLE, e.what());
    } catch (const BudgetError& e) {
        return set_error(MCN_ERR_BUDGET, e.what());
    } catch (const std::exception& e) {
        return set_error(MCN_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(MCN_ERR_INTERNAL, "unknown error");
    }
}

mcn_report* wrap_report(RunReport&& rep) {
    auto* out = new mcn_report;
    out->report = std::move(rep);
    out->json_text = out->report.json_text();
    for (const auto& [name, contents] : out->report.files) {
        out->files.emplace_back(name, contents);
    }
    return out;
}

}  // namespace

extern "C" {

const char* mcn_version(void) { return "0.1.0"; }

const char* mcn_last_error(void) { return g_last_error.c_str(); }

mcn_status mcn_config_parse(const char* json_text, mcn_config** out) {
    if (!json_text || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new mcn_config{parse_config_text(json_text)}; });
}

mcn_status mcn_config_load(const char* path, mcn_config** out) {
    if (!path || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = new mcn_config{load_config(path)}; });
}

mcn_status mcn_config_set(mcn_config* cfg, const char* key, const char* value) {
    if (!cfg || !key || !value) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    return guarded([&] {
        const auto doc = apply_override(cfg->cfg.resolved, key, value);
        cfg->cfg = parse_config(doc);
    });
}

void mcn_config_free(mcn_config* cfg) { delete cfg; }

mcn_status mcn_run_analyze(const mcn_config* cfg, mcn_report** out) {
    if (!cfg || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = wrap_report(run_analyze(cfg->cfg)); });
}

mcn_status mcn_run_codesign(const mcn_config* cfg, mcn_report** out) {
    if (!cfg || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = wrap_report(run_codesign(cfg->cfg)); });
}

mcn_status mcn_run_schedule_search(const mcn_config* cfg, mcn_report** out) {
    if (!cfg || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] { *out = wrap_report(run_schedule_search(cfg->cfg)); });
}

mcn_status mcn_run_simulate(const mcn_config* cfg, const char* solution_path, mcn_report** out) {
    if (!cfg || !solution_path || !out) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    *out = nullptr;
    return guarded([&] {
        std::ifstream in(solution_path);
        if (!in) throw ConfigError(std::string("cannot open solution file '") + solution_path + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        *out = wrap_report(run_simulate(cfg->cfg, buf.str()));
    });
}

const char* mcn_report_json(const mcn_report* report) {
    return report ? report->json_text.c_str() : nullptr;
}

size_t mcn_report_file_count(const mcn_report* report) { return report ? report->files.size() : 0; }

const char* mcn_report_file_name(const mcn_report* report, size_t index) {
    if (!report || index >= report->files.size()) return nullptr;
    return report->files[index].first.c_str();
}

const char* mcn_report_file_contents(const mcn_report* report, size_t index) {
    if (!report || index >= report->files.size()) return nullptr;
    return report->files[index].second.c_str();
}

mcn_status mcn_report_write(const mcn_report* report, const char* out_dir) {
    if (!report || !out_dir) return set_error(MCN_ERR_INVALID_ARG, "null argument");
    return guarded([&] { write_report(report->report, out_dir); });
}

void mcn_report_free(mcn_report* report) { delete report; }

}  // extern "C"
