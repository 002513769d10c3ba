#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "report_util.hpp"

namespace mcn {

using nlohmann::json;

namespace {

json poly_json(const Polynomial& p) {
    json arr = json::array();
    for (double c : p.coeffs()) arr.push_back(c);
    return arr;
}

json tf_json(const RationalTF& tf) {
    json out;
    out["num"] = poly_json(tf.num);
    out["den"] = poly_json(tf.den);
    if (tf.sample_time) out["sample_time"] = *tf.sample_time;
    return out;
}

json map_json(const std::map<std::string, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = v;
    return out;
}

json rate_json(const RateReport& r) {
    json out;
    out["model"] = r.model;
    out["alphas"] = map_json(r.alphas);
    out["rates_hz"] = map_json(r.rates_hz);
    json bits = json::object();
    for (const auto& [k, v] : r.bits) bits[k] = v;
    out["bits_per_slot"] = bits;
    out["max_rate_hz"] = r.max_rate_hz();
    return out;
}

json gamma_json(const NetworkDynamics& d) {
    json out = json::object();
    for (int delay : d.delays) out[std::to_string(delay)] = d.gamma_at(delay);
    return out;
}

json weights_json(const RadioGraph& g, const std::vector<double>& w) {
    json out = json::object();
    for (int e = 0; e < g.edge_count(); ++e) out[g.edge_name(e)] = w[static_cast<size_t>(e)];
    return out;
}

// One fully weighted network, analyzed.
json analyzed_network_json(const RadioGraph& weighted, const Scheduling& sched, int model,
                           const QuantizationSpec& quant) {
    const auto profile = delay_profile(weighted, sched);
    const auto tf = network_tf(profile, sched.frame_duration());
    json out;
    out["delays"] = profile.delays;
    out["min_delay"] = profile.min_delay;
    out["max_delay"] = profile.max_delay;
    json gammas = json::object();
    for (int d : profile.delays) gammas[std::to_string(d)] = profile.gamma_at(d);
    out["gamma"] = gammas;
    out["tf"] = tf_json(tf);
    out["total_delay_s"] = profile.min_delay * sched.frame_duration();
    out["frame_duration_s"] = sched.frame_duration();
    json paths = json::object();
    for (const auto& [d, plist] : profile.paths_by_delay) {
        json arr = json::array();
        for (const auto& path : plist) {
            json nodes = json::array();
            for (int v : path.nodes) nodes.push_back(weighted.node_name(v));
            arr.push_back(nodes);
        }
        paths[std::to_string(d)] = arr;
    }
    out["paths_by_delay"] = paths;

    std::map<std::string, double> alphas;
    if (model == 1) {
        const auto la = alpha_links(weighted, sched);
        for (int e = 0; e < weighted.edge_count(); ++e) {
            alphas[weighted.edge_name(e)] = la.total[static_cast<size_t>(e)];
        }
    } else {
        const auto na = alpha_nodes(weighted, sched);
        for (int v = 0; v < weighted.node_count(); ++v) {
            if (v == weighted.sink()) continue;
            alphas[weighted.node_name(v)] = na.total[static_cast<size_t>(v)];
        }
    }
    out["rates"] = rate_json(rates(alphas, quant, sched.slot_duration, model));

    const auto sep = check_delay_separation(weighted, sched);
    json sepj;
    sepj["separated"] = sep.separated;
    if (!sep.separated) {
        sepj["witness_node"] = weighted.node_name(sep.witness_node);
        sepj["witness_edges"] = {weighted.edge_name(sep.witness_edge1),
                                 weighted.edge_name(sep.witness_edge2)};
    }
    out["delay_separation"] = sepj;
    return out;
}

struct ResolvedPlant {
    RationalTF discrete;
    PlantSplit split;
    std::vector<std::string> warnings;
};

ResolvedPlant resolve_plant(const ProblemConfig& cfg, double frame_duration) {
    if (!cfg.plant) throw ConfigError("config error at /plant: this command needs a plant");
    ResolvedPlant out;
    if (cfg.plant->discrete()) {
        out.discrete = *cfg.plant;
        const double ts = *cfg.plant->sample_time;
        if (ts > 0.0 && std::abs(ts - frame_duration) > 1e-9 * std::max(1.0, frame_duration)) {
            out.warnings.push_back("discrete plant sample time " + std::to_string(ts) +
                                   " s differs from the frame duration " +
                                   std::to_string(frame_duration) + " s");
        }
    } else {
        out.discrete = zoh_discretize(*cfg.plant, frame_duration);
    }
    out.split = make_plant_split(out.discrete);
    return out;
}

CodesignProblem build_problem(const ProblemConfig& cfg, const Scheduling& ctrl_sched,
                              const std::optional<Scheduling>& obs_sched,
                              std::vector<std::string>& warnings,
                              std::optional<double> bound_override = std::nullopt) {
    if (!cfg.ctrl) throw ConfigError("config error at /controllability: required");
    if (cfg.obs && !obs_sched) {
        throw ConfigError("config error at /observability/schedule: a schedule is required");
    }
    if (obs_sched && obs_sched->period != ctrl_sched.period) {
        throw ConfigError(
            "config error at /observability/schedule: both networks share one frame, so the "
            "periods must match");
    }

    CodesignProblem p;
    const double frame = ctrl_sched.frame_duration();
    ResolvedPlant plant = resolve_plant(cfg, frame);
    warnings.insert(warnings.end(), plant.warnings.begin(), plant.warnings.end());
    p.plant = plant.split;

    p.ctrl.graph = cfg.ctrl->graph;
    p.ctrl.sched = ctrl_sched;
    p.ctrl.quant = cfg.ctrl->quant;
    p.ctrl.uniform_rate_bound_hz =
        bound_override ? *bound_override : cfg.ctrl->uniform_rate_bound_hz;
    if (!bound_override) p.ctrl.rate_bounds_hz = cfg.ctrl->rate_bounds_hz;

    if (cfg.obs) {
        CodesignNetwork o;
        o.graph = cfg.obs->graph;
        o.sched = *obs_sched;
        o.quant = cfg.obs->quant;
        o.uniform_rate_bound_hz =
            bound_override ? *bound_override : cfg.obs->uniform_rate_bound_hz;
        if (!bound_override) o.rate_bounds_hz = cfg.obs->rate_bounds_hz;
        p.obs = std::move(o);
    }

    p.model = cfg.model;
    p.overshoot_y_bound = cfg.overshoot_y;
    p.overshoot_u_bound = cfg.overshoot_u;
    p.amplitude = cfg.amplitude;
    p.alpha_preset = cfg.alpha_preset;

    if (cfg.ctrl->gamma_pinned) {
        const auto delays = p.delays_r();
        if (cfg.ctrl->gamma_pinned->size() != delays.size()) {
            throw ConfigError(
                "config error at /controllability/gamma: expected one value per induced "
                "delay (" + std::to_string(delays.size()) + " classes)");
        }
        p.gamma_r_pinned = cfg.ctrl->gamma_pinned;
    }
    if (cfg.obs && cfg.obs->gamma_pinned) {
        const auto delays = p.delays_o();
        if (cfg.obs->gamma_pinned->size() != delays.size()) {
            throw ConfigError(
                "config error at /observability/gamma: expected one value per induced delay");
        }
        p.gamma_o_pinned = cfg.obs->gamma_pinned;
    }

    if (cfg.controller_s) {
        p.s = *cfg.controller_s;
    } else {
        const bool pinned = p.gamma_r_pinned.has_value();
        const bool naive = p.delays_r().size() == 1 && p.delays_o().size() == 1;
        p.s = (pinned || naive) ? p.plant.r : 0;
    }
    return p;
}

std::string traces_csv(const ClosedLoop& loop, double amplitude, int horizon) {
    const auto traces = step_response(loop, amplitude, horizon);
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < horizon; ++k) {
        rows.push_back({std::to_string(k), csv_number(amplitude),
                        csv_number(traces.u[static_cast<size_t>(k)]),
                        csv_number(traces.y[static_cast<size_t>(k)]),
                        csv_number(traces.y[static_cast<size_t>(k)] - amplitude)});
    }
    return csv_table({"k", "r", "u", "y", "e"}, rows);
}

std::string traces_svg(const ClosedLoop& loop, double amplitude, int horizon) {
    const auto traces = step_response(loop, amplitude, horizon);
    std::vector<double> err(traces.y.size());
    for (size_t i = 0; i < traces.y.size(); ++i) err[i] = traces.y[i] - amplitude;
    return svg_line_plot("step response",
                         {PlotSeries{"y", "#1f77b4", traces.y}, PlotSeries{"e", "#d62728", err}});
}

json metrics_json(const CodesignSolution& sol) {
    json out;
    out["l2"] = sol.metrics.l2;
    out["l2_sq"] = sol.metrics.l2_sq;
    out["overshoot_y"] = sol.metrics.overshoot_y;
    out["overshoot_u"] = sol.metrics.overshoot_u;
    out["settled_at"] = sol.metrics.settled_at;
    out["response_time"] = sol.loop.l;
    out["nu"] = sol.loop.nu;
    out["deadbeat_residual"] = [&] {
        double r = 0.0;
        for (double v : sol.loop.residual.coeffs()) r = std::max(r, std::abs(v));
        return r;
    }();
    return out;
}

json solution_json(const CodesignProblem& p, const CodesignSolution& sol) {
    json out;
    out["c"] = sol.controller.c;
    out["d"] = sol.controller.d;
    out["m"] = sol.controller.m;
    out["s"] = sol.controller.s;
    out["stable_factor"] = poly_json(sol.controller.M);
    out["controller_tf"] = tf_json(sol.controller.controller_tf());
    out["delays_r"] = sol.gr.delays;
    out["gamma_r"] = gamma_json(sol.gr);
    out["weights_r"] = weights_json(*p.ctrl.graph, sol.weights_r);
    if (p.obs) {
        out["delays_o"] = sol.go.delays;
        out["gamma_o"] = gamma_json(sol.go);
        out["weights_o"] = weights_json(*p.obs->graph, sol.weights_o);
    }
    return out;
}

}  // namespace

RunReport run_analyze(const ProblemConfig& cfg) {
    if (!cfg.ctrl) throw ConfigError("config error at /controllability: required");
    if (cfg.ctrl->schedule_mode != NetworkConfig::ScheduleMode::Explicit) {
        throw ConfigError("config error at /controllability/schedule: analyze needs an "
                          "explicit slot map");
    }
    RunReport rep;
    rep.doc["command"] = "analyze";
    rep.doc["config_hash"] = cfg.hash();
    rep.doc["resolved_config"] = cfg.resolved;

    auto analyze_side = [&](const NetworkConfig& net, const char* key) {
        if (net.schedule_mode != NetworkConfig::ScheduleMode::Explicit) {
            throw ConfigError(std::string("config error at /") + key +
                              "/schedule: analyze needs an explicit slot map");
        }
        RadioGraph weighted = *net.graph;
        weighted.set_weights(net.resolved_weights());
        rep.doc["networks"][key] =
            analyzed_network_json(weighted, net.schedule, cfg.model, net.quant);
    };
    analyze_side(*cfg.ctrl, "controllability");
    if (cfg.obs) analyze_side(*cfg.obs, "observability");

    rep.doc["frame"] = {{"period", cfg.ctrl->schedule.period},
                        {"slot_duration_s", cfg.slot_duration},
                        {"duration_s", cfg.ctrl->schedule.frame_duration()}};

    if (cfg.plant) {
        ResolvedPlant plant = resolve_plant(cfg, cfg.ctrl->schedule.frame_duration());
        rep.doc["plant"]["discrete"] = tf_json(plant.discrete);
        rep.doc["plant"]["stable_factor"] = poly_json(plant.split.stable);
        rep.doc["plant"]["unstable_den"] = poly_json(plant.split.unstable_den);
        rep.doc["plant"]["r"] = plant.split.r;
        if (!plant.warnings.empty()) rep.doc["warnings"] = plant.warnings;
    }
    return rep;
}

RunReport run_codesign(const ProblemConfig& cfg) {
    if (!cfg.ctrl) throw ConfigError("config error at /controllability: required");
    if (cfg.ctrl->schedule_mode != NetworkConfig::ScheduleMode::Explicit) {
        throw ConfigError("config error at /controllability/schedule: codesign needs an "
                          "explicit slot map (use schedule-search to rank candidates)");
    }
    if (cfg.ctrl->weights_mode != NetworkConfig::WeightsMode::Free) {
        throw ConfigError("config error at /controllability/weights: codesign designs the "
                          "weights; set them to \"free\" (analyze inspects fixed weights)");
    }

    std::vector<std::string> warnings;
    std::optional<Scheduling> obs_sched;
    if (cfg.obs) {
        if (cfg.obs->schedule_mode != NetworkConfig::ScheduleMode::Explicit) {
            throw ConfigError("config error at /observability/schedule: codesign needs an "
                              "explicit slot map");
        }
        obs_sched = cfg.obs->schedule;
    }
    CodesignProblem p = build_problem(cfg, cfg.ctrl->schedule, obs_sched, warnings);
    const CodesignSolution sol = codesign(p);

    RunReport rep;
    rep.doc["command"] = "codesign";
    rep.doc["config_hash"] = cfg.hash();
    rep.doc["resolved_config"] = cfg.resolved;
    if (!warnings.empty()) rep.doc["warnings"] = warnings;
    rep.doc["frame"] = {{"period", p.ctrl.sched.period},
                        {"slot_duration_s", cfg.slot_duration},
                        {"duration_s", p.ctrl.sched.frame_duration()}};
    rep.doc["plant"] = {{"discrete", tf_json(p.plant.tf(p.ctrl.sched.frame_duration()))},
                        {"stable_factor", poly_json(p.plant.stable)},
                        {"unstable_den", poly_json(p.plant.unstable_den)},
                        {"r", p.plant.r}};
    rep.doc["convexifiability"] = [&] {
        const auto c = check_convexifiable(p);
        json out;
        out["verdict"] = c.verdict;
        out["detail"] = c.detail;
        out["stage2_guaranteed"] = c.stage2_guaranteed;
        return out;
    }();

    // Realized networks, re-analyzed end to end from the recovered weights.
    {
        RadioGraph weighted = *p.ctrl.graph;
        weighted.set_weights(sol.weights_r);
        rep.doc["networks"]["controllability"] =
            analyzed_network_json(weighted, p.ctrl.sched, p.model, p.ctrl.quant);
    }
    if (p.obs) {
        RadioGraph weighted = *p.obs->graph;
        weighted.set_weights(sol.weights_o);
        rep.doc["networks"]["observability"] =
            analyzed_network_json(weighted, p.obs->sched, p.model, p.obs->quant);
    }

    rep.doc["solution"] = solution_json(p, sol);
    rep.doc["metrics"] = metrics_json(sol);
    rep.doc["metrics"]["rates_controllability"] = rate_json(sol.rates_r);
    if (sol.rates_o) rep.doc["metrics"]["rates_observability"] = rate_json(*sol.rates_o);

    json diag;
    diag["path"] = sol.diag.path;
    diag["branch"] = sol.diag.branch;
    diag["qp_iterations"] = sol.diag.qp_iterations;
    diag["kkt_residual"] = sol.diag.kkt_residual;
    diag["stage1_l2"] = std::sqrt(std::max(0.0, sol.diag.stage1_value_l2sq));
    diag["stage2_residual"] = sol.diag.stage2_residual;
    if (cfg.run_oracle) {
        GridSpec grid;
        json oj;
        if (p.gamma_r_pinned) {
            const auto oracle = brute_force_codesign(p, grid);
            oj["kind"] = "problem-grid";
            oj["feasible"] = oracle.any_feasible;
            if (oracle.any_feasible) {
                oj["best_l2"] = oracle.best_value_l2;
                oj["best_point"] = oracle.best_point;
                oj["cell_variation"] = oracle.cell_variation;
                oj["agrees"] = sol.metrics.l2 <= oracle.best_value_l2 + oracle.cell_variation +
                                                     1e-3 * oracle.best_value_l2;
            }
        } else {
            const auto oracle = oracle_stage1(p, grid);
            oj["kind"] = "stage1-grid";
            oj["feasible"] = oracle.any_feasible;
            if (oracle.any_feasible) {
                oj["best_l2"] = oracle.best_value_l2;
                oj["cell_variation"] = oracle.cell_variation;
                const double qp_l2 = std::sqrt(std::max(0.0, sol.diag.stage1_value_l2sq));
                oj["agrees"] = std::abs(qp_l2 - oracle.best_value_l2) <=
                               std::max(1e-3 * oracle.best_value_l2, oracle.cell_variation);
            }
        }
        diag["oracle"] = oj;
    }
    rep.doc["diagnostics"] = diag;

    int horizon = cfg.horizon.value_or(sol.loop.l + 10);
    horizon = std::max(horizon, sol.loop.l + 2);
    rep.files["step_response.csv"] = traces_csv(sol.loop, p.amplitude, horizon);
    rep.files["response.svg"] = traces_svg(sol.loop, p.amplitude, horizon);
    return rep;
}

RunReport run_schedule_search(const ProblemConfig& cfg) {
    if (!cfg.ctrl) throw ConfigError("config error at /controllability: required");
    if (cfg.ctrl->schedule_mode == NetworkConfig::ScheduleMode::Explicit) {
        throw ConfigError("config error at /controllability/schedule: schedule-search needs "
                          "'candidates' or 'search'");
    }
    if (cfg.ctrl->weights_mode != NetworkConfig::WeightsMode::Free) {
        throw ConfigError("config error at /controllability/weights: schedule-search designs "
                          "the weights; set them to \"free\"");
    }

    // Candidate schedules per side.
    std::vector<Scheduling> ctrl_scheds;
    std::vector<std::string> ctrl_ids;
    if (cfg.ctrl->schedule_mode == NetworkConfig::ScheduleMode::Candidates) {
        ctrl_scheds = cfg.ctrl->candidates;
        ctrl_ids = cfg.ctrl->candidate_ids;
    } else {
        ctrl_scheds = enumerate_schedules(*cfg.ctrl->graph, cfg.ctrl->interference,
                                          cfg.ctrl->pi_max, cfg.slot_duration);
        for (const auto& s : ctrl_scheds) ctrl_ids.push_back(schedule_encoding(s));
    }

    std::vector<std::optional<Scheduling>> obs_scheds{std::nullopt};
    std::vector<std::string> obs_ids{""};
    if (cfg.obs) {
        obs_scheds.clear();
        obs_ids.clear();
        if (cfg.obs->schedule_mode == NetworkConfig::ScheduleMode::Explicit) {
            obs_scheds.push_back(cfg.obs->schedule);
            obs_ids.push_back("");
        } else if (cfg.obs->schedule_mode == NetworkConfig::ScheduleMode::Candidates) {
            for (size_t i = 0; i < cfg.obs->candidates.size(); ++i) {
                obs_scheds.push_back(cfg.obs->candidates[i]);
                obs_ids.push_back(cfg.obs->candidate_ids[i]);
            }
        } else {
            const auto list = enumerate_schedules(*cfg.obs->graph, cfg.obs->interference,
                                                  cfg.obs->pi_max, cfg.slot_duration);
            for (const auto& s : list) {
                obs_scheds.push_back(s);
                obs_ids.push_back(schedule_encoding(s));
            }
        }
    }

    std::vector<SchedulePair> pairs;
    for (size_t i = 0; i < ctrl_scheds.size(); ++i) {
        for (size_t j = 0; j < obs_scheds.size(); ++j) {
            if (obs_scheds[j] && obs_scheds[j]->period != ctrl_scheds[i].period) continue;
            SchedulePair pair;
            pair.id = obs_ids[j].empty() ? ctrl_ids[i] : ctrl_ids[i] + "+" + obs_ids[j];
            pair.ctrl = ctrl_scheds[i];
            pair.obs = obs_scheds[j];
            pairs.push_back(std::move(pair));
        }
    }
    if (pairs.size() > 1'000'000) {
        throw BudgetError("schedule search candidate budget exceeded");
    }
    if (pairs.empty()) {
        throw ConfigError("no admissible schedule pairs (periods of the two sides never match)");
    }

    std::vector<std::string> warnings;
    auto factory = [&](std::optional<double> bound) {
        return [&cfg, &warnings, bound](const SchedulePair& pair) {
            return build_problem(cfg, pair.ctrl, pair.obs, warnings, bound);
        };
    };

    const std::optional<double> primary_bound =
        cfg.rate_sweep ? std::optional<double>(cfg.rate_sweep->hi) : std::nullopt;
    const ScheduleSearchResult result = schedule_search(pairs, factory(primary_bound));

    RunReport rep;
    rep.doc["command"] = "schedule-search";
    rep.doc["config_hash"] = cfg.hash();
    rep.doc["resolved_config"] = cfg.resolved;
    if (!warnings.empty()) {
        std::sort(warnings.begin(), warnings.end());
        warnings.erase(std::unique(warnings.begin(), warnings.end()), warnings.end());
        rep.doc["warnings"] = warnings;
    }

    json ranking = json::array();
    std::vector<std::vector<std::string>> csv_rows;
    for (size_t rank = 0; rank < result.ordering.size(); ++rank) {
        const auto& e = result.evaluated[result.ordering[rank]];
        const bool optimal = std::find(result.optimal_set.begin(), result.optimal_set.end(),
                                       result.ordering[rank]) != result.optimal_set.end();
        json entry;
        entry["id"] = e.id;
        entry["period"] = e.ctrl.period;
        entry["delays"] = e.delays;
        entry["feasible"] = e.feasible;
        if (e.feasible) {
            entry["l2"] = e.l2;
            entry["overshoot_y"] = e.metrics.overshoot_y;
            entry["overshoot_u"] = e.metrics.overshoot_u;
            entry["max_rate_hz"] = e.max_rate_hz;
        } else {
            entry["note"] = e.note;
        }
        entry["optimal"] = optimal;
        ranking.push_back(entry);

        std::string delays_str;
        for (size_t i = 0; i < e.delays.size(); ++i) {
            delays_str += (i ? " " : "") + std::to_string(e.delays[i]);
        }
        csv_rows.push_back({e.id, std::to_string(e.ctrl.period), delays_str,
                            e.feasible ? csv_number(e.l2) : "inf",
                            e.feasible ? csv_number(e.metrics.overshoot_y) : "",
                            e.feasible ? csv_number(e.metrics.overshoot_u) : "",
                            e.feasible ? csv_number(e.max_rate_hz) : "",
                            optimal ? "1" : "0"});
    }
    rep.doc["ranking"] = ranking;
    rep.files["ranking.csv"] = csv_table(
        {"schedule_id", "period", "delays", "l2", "overshoot_y", "overshoot_u", "max_rate_hz",
         "optimal"},
        csv_rows);

    if (cfg.rate_sweep) {
        json sweep = json::array();
        std::vector<std::vector<std::string>> sweep_rows;
        std::map<std::string, std::vector<std::pair<double, double>>> per_candidate;
        for (double bound = cfg.rate_sweep->lo; bound <= cfg.rate_sweep->hi + 1e-9;
             bound += cfg.rate_sweep->step) {
            const auto res = schedule_search(pairs, factory(bound));
            for (const auto& e : res.evaluated) {
                json row;
                row["id"] = e.id;
                row["rate_bound_hz"] = bound;
                if (e.feasible) row["l2"] = e.l2;
                sweep.push_back(row);
                sweep_rows.push_back(
                    {e.id, csv_number(bound), e.feasible ? csv_number(e.l2) : "inf"});
                if (e.feasible) per_candidate[e.id].emplace_back(bound, e.l2);
            }
        }
        rep.doc["rate_sweep"] = sweep;
        rep.files["sweep.csv"] = csv_table({"schedule_id", "rate_bound_hz", "l2"}, sweep_rows);

        // plateau: longest run of consecutive sweep points with no improvement
        json plateaus = json::object();
        for (const auto& [id, series] : per_candidate) {
            int best_len = 1, cur_len = 1;
            double best_start = series.empty() ? 0.0 : series.front().first;
            double cur_start = best_start;
            for (size_t i = 1; i < series.size(); ++i) {
                const double improvement = series[i - 1].second - series[i].second;
                if (std::abs(improvement) <= 1e-9 * std::max(1.0, series[i].second)) {
                    ++cur_len;
                } else {
                    cur_len = 1;
                    cur_start = series[i].first;
                }
                if (cur_len > best_len) {
                    best_len = cur_len;
                    best_start = cur_start;
                }
            }
            plateaus[id] = {{"points", best_len},
                            {"from_rate_bound_hz", best_start},
                            {"plateau", best_len >= 3}};
        }
        rep.doc["plateaus"] = plateaus;
    }
    return rep;
}

RunReport run_simulate(const ProblemConfig& cfg, const std::string& solution_json_text) {
    json sol;
    try {
        sol = json::parse(solution_json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("solution file is not valid JSON: ") + e.what());
    }
    if (!sol.contains("config_hash") || !sol.contains("solution")) {
        throw ConfigError("solution file is not a codesign report");
    }
    if (sol.at("config_hash").get<std::string>() != cfg.hash()) {
        throw ConfigError("solution/config mismatch: the solution was produced from a "
                          "different configuration (hash check failed)");
    }
    if (!cfg.ctrl || cfg.ctrl->schedule_mode != NetworkConfig::ScheduleMode::Explicit) {
        throw ConfigError("config error at /controllability/schedule: simulate needs the "
                          "explicit slot map the solution was built with");
    }

    std::vector<std::string> warnings;
    ResolvedPlant plant = resolve_plant(cfg, cfg.ctrl->schedule.frame_duration());

    const json& s = sol.at("solution");
    ControllerStructure ctrl;
    ctrl.M = plant.split.stable;
    ctrl.m = s.at("m").get<int>();
    ctrl.s = s.at("s").get<int>();
    ctrl.c = s.at("c").get<std::vector<double>>();
    ctrl.d = s.at("d").get<std::vector<double>>();

    auto dynamics_from = [&](const char* delays_key, const char* gamma_key) {
        const auto delays = s.at(delays_key).get<std::vector<int>>();
        std::vector<double> gamma;
        for (int d : delays) gamma.push_back(s.at(gamma_key).at(std::to_string(d)).get<double>());
        return NetworkDynamics::from_gamma(delays, gamma);
    };
    const NetworkDynamics gr = dynamics_from("delays_r", "gamma_r");
    const NetworkDynamics go =
        s.contains("gamma_o") ? dynamics_from("delays_o", "gamma_o") : NetworkDynamics::identity();
    ctrl.ddr = gr.max_delay();
    ctrl.ddo = go.max_delay();

    const ClosedLoop loop = assemble_closed_loop(plant.split, gr, go, ctrl);
    const int horizon = cfg.horizon.value_or(loop.l + 10);
    if (horizon < loop.l + 2) {
        throw ConfigError("config error at /horizon: must reach past the response time l = " +
                          std::to_string(loop.l));
    }

    RunReport rep;
    rep.doc["command"] = "simulate";
    rep.doc["config_hash"] = cfg.hash();
    rep.doc["resolved_config"] = cfg.resolved;
    rep.doc["metrics"] = [&] {
        const auto m = step_metrics(loop, cfg.amplitude);
        json out;
        out["l2"] = m.l2;
        out["overshoot_y"] = m.overshoot_y;
        out["overshoot_u"] = m.overshoot_u;
        out["settled_at"] = m.settled_at;
        out["response_time"] = loop.l;
        return out;
    }();
    rep.files["step_response.csv"] = traces_csv(loop, cfg.amplitude, horizon);
    return rep;
}

void write_report(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        if (!out) throw Error("cannot write report.json under " + out_dir);
        out << report.json_text();
    }
    for (const auto& [name, contents] : report.files) {
        std::ofstream out(fs::path(out_dir) / name, std::ios::binary);
        if (!out) throw Error("cannot write " + name + " under " + out_dir);
        out << contents;
    }
}

}  // namespace mcn
