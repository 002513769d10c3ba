#ifndef MCN_CONFIG_HPP
#define MCN_CONFIG_HPP

#include <json.hpp>
#include <memory>
#include <optional>
#include <string>

#include "scheduler.hpp"

namespace mcn {

/// Parsed, validated run configuration. Error messages out of the parser
/// carry JSON-pointer paths into the offending field.
struct NetworkConfig {
    std::shared_ptr<RadioGraph> graph;

    enum class WeightsMode { Free, Preset, Explicit };
    WeightsMode weights_mode = WeightsMode::Free;
    WeightPreset preset = WeightPreset::IndegreeSplit;
    std::vector<double> explicit_weights;

    enum class ScheduleMode { Explicit, Candidates, Search };
    ScheduleMode schedule_mode = ScheduleMode::Explicit;
    Scheduling schedule;                      // Explicit
    std::vector<Scheduling> candidates;       // Candidates
    std::vector<std::string> candidate_ids;
    InterferenceSpec interference;            // Search
    int pi_max = 1;

    QuantizationSpec quant;
    double uniform_rate_bound_hz = 0.0;
    std::map<std::string, double> rate_bounds_hz;
    std::optional<std::vector<double>> gamma_pinned;

    std::vector<double> resolved_weights() const;
};

struct ProblemConfig {
    double slot_duration = 0.0;
    int model = 2;
    double amplitude = 1.0;

    std::optional<RationalTF> plant;  // continuous or discrete
    std::optional<int> controller_s;
    double overshoot_y = std::numeric_limits<double>::infinity();
    double overshoot_u = std::numeric_limits<double>::infinity();

    std::optional<NetworkConfig> ctrl;
    std::optional<NetworkConfig> obs;

    AlphaPreset alpha_preset = AlphaPreset::Uniform;
    std::optional<int> horizon;
    bool run_oracle = false;

    struct RateSweep {
        double lo = 0.0, hi = 0.0, step = 0.0;
    };
    std::optional<RateSweep> rate_sweep;

    nlohmann::json resolved;  // the normalized document the run is keyed on

    /// FNV-1a hash of the resolved document, hex-encoded.
    std::string hash() const;
};

ProblemConfig parse_config(const nlohmann::json& doc);
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig load_config(const std::string& path);

/// Apply a dotted-key override (the CLI flag surface): model, pi-max,
/// rate-sweep (lo:hi:step), horizon, oracle, seed, amplitude.
nlohmann::json apply_override(nlohmann::json doc, const std::string& key,
                              const std::string& value);

}  // namespace mcn

#endif
