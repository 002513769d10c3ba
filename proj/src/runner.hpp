#ifndef MCN_RUNNER_HPP
#define MCN_RUNNER_HPP

#include "config.hpp"

namespace mcn {

/// Result of one CLI-level command: a JSON report plus the side files
/// (CSV traces, plots, rankings) keyed by filename.
struct RunReport {
    nlohmann::json doc;
    std::map<std::string, std::string> files;

    std::string json_text() const { return doc.dump(2) + "\n"; }
};

RunReport run_analyze(const ProblemConfig& cfg);
RunReport run_codesign(const ProblemConfig& cfg);
RunReport run_schedule_search(const ProblemConfig& cfg);
RunReport run_simulate(const ProblemConfig& cfg, const std::string& solution_json_text);

/// Write report.json and every side file into the directory (created if
/// needed).
void write_report(const RunReport& report, const std::string& out_dir);

}  // namespace mcn

#endif
