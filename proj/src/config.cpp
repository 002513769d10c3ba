#include "config.hpp"

#include <fstream>
#include <sstream>

namespace mcn {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config error at " + path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) fail(path + "/" + key, "missing field");
    return obj.at(key);
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) fail(path + "/" + key, "expected a number");
    return v.get<double>();
}

std::vector<double> number_list(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a nonempty array of numbers");
    std::vector<double> out;
    for (size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(path + "/" + std::to_string(i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

RationalTF parse_plant(const json& v, const std::string& path) {
    if (v.contains("continuous") && v.contains("discrete")) {
        fail(path, "give either a continuous or a discrete plant, not both");
    }
    if (v.contains("continuous")) {
        const json& p = v.at("continuous");
        return RationalTF(Polynomial(number_list(require(p, "num", path + "/continuous"),
                                                 path + "/continuous/num")),
                          Polynomial(number_list(require(p, "den", path + "/continuous"),
                                                 path + "/continuous/den")),
                          std::nullopt);
    }
    if (v.contains("discrete")) {
        const json& p = v.at("discrete");
        std::optional<double> ts = 0.0;
        if (p.contains("sample_time")) {
            if (!p.at("sample_time").is_number()) {
                fail(path + "/discrete/sample_time", "expected a number");
            }
            ts = p.at("sample_time").get<double>();
        }
        return RationalTF(Polynomial(number_list(require(p, "num", path + "/discrete"),
                                                 path + "/discrete/num")),
                          Polynomial(number_list(require(p, "den", path + "/discrete"),
                                                 path + "/discrete/den")),
                          ts);
    }
    fail(path, "plant needs a 'continuous' or 'discrete' entry");
}

Scheduling parse_slots(const json& v, const RadioGraph& g, double slot_duration,
                       const std::string& path) {
    Scheduling sched;
    sched.slot_duration = slot_duration;
    sched.slot_of_edge.assign(static_cast<size_t>(g.edge_count()), -1);
    const json& slots = require(v, "slots", path);
    if (!slots.is_object() || slots.empty()) fail(path + "/slots", "expected slot -> edge map");
    int max_slot = 0;
    for (const auto& [key, edges] : slots.items()) {
        int slot = 0;
        try {
            slot = std::stoi(key);
        } catch (...) {
            fail(path + "/slots/" + key, "slot keys must be positive integers");
        }
        if (slot < 1) fail(path + "/slots/" + key, "slot keys must be positive integers");
        max_slot = std::max(max_slot, slot);
        if (!edges.is_array()) fail(path + "/slots/" + key, "expected an array of edges");
        for (size_t i = 0; i < edges.size(); ++i) {
            const json& e = edges[i];
            const std::string epath = path + "/slots/" + key + "/" + std::to_string(i);
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                fail(epath, "expected [from, to] node names");
            }
            const int idx = g.edge_index(g.node_index(e[0].get<std::string>()),
                                         g.node_index(e[1].get<std::string>()));
            if (idx < 0) fail(epath, "edge is not part of the graph");
            if (sched.slot_of_edge[static_cast<size_t>(idx)] != -1) {
                fail(epath, "edge is scheduled twice; one slot per frame is allowed");
            }
            sched.slot_of_edge[static_cast<size_t>(idx)] = slot;
        }
    }
    sched.period = v.contains("period") ? v.at("period").get<int>() : max_slot;
    if (sched.period < max_slot) fail(path + "/period", "period smaller than the largest slot");
    for (int e = 0; e < g.edge_count(); ++e) {
        if (sched.slot_of_edge[static_cast<size_t>(e)] < 1) {
            fail(path + "/slots", "edge " + g.edge_name(e) + " is not scheduled");
        }
    }
    return sched;
}

InterferenceSpec parse_interference(const json& v, const RadioGraph& g, const std::string& path) {
    InterferenceSpec spec;
    if (v.contains("compat_sets")) {
        const json& sets = v.at("compat_sets");
        if (!sets.is_array()) fail(path + "/compat_sets", "expected an array of node arrays");
        for (size_t i = 0; i < sets.size(); ++i) {
            std::set<int> s;
            if (!sets[i].is_array()) {
                fail(path + "/compat_sets/" + std::to_string(i), "expected node array");
            }
            for (const auto& name : sets[i]) {
                if (!name.is_string()) {
                    fail(path + "/compat_sets/" + std::to_string(i), "expected node names");
                }
                s.insert(g.node_index(name.get<std::string>()));
            }
            spec.compat_sets.push_back(std::move(s));
        }
    }
    if (v.contains("edge_conflicts")) {
        const json& conf = v.at("edge_conflicts");
        if (!conf.is_array()) fail(path + "/edge_conflicts", "expected an array of edge pairs");
        for (size_t i = 0; i < conf.size(); ++i) {
            const json& pair = conf[i];
            const std::string ppath = path + "/edge_conflicts/" + std::to_string(i);
            if (!pair.is_array() || pair.size() != 2) fail(ppath, "expected [edge, edge]");
            auto edge_of = [&](const json& e) {
                if (!e.is_array() || e.size() != 2) fail(ppath, "expected [from, to] pairs");
                const int idx = g.edge_index(g.node_index(e[0].get<std::string>()),
                                             g.node_index(e[1].get<std::string>()));
                if (idx < 0) fail(ppath, "edge is not part of the graph");
                return idx;
            };
            spec.edge_conflicts.emplace_back(edge_of(pair[0]), edge_of(pair[1]));
        }
    }
    return spec;
}

NetworkConfig parse_network(const json& v, GraphKind kind, double slot_duration,
                            const std::string& path) {
    NetworkConfig net;
    std::vector<std::string> nodes;
    for (const auto& n : require(v, "nodes", path)) {
        if (!n.is_string()) fail(path + "/nodes", "expected node names");
        nodes.push_back(n.get<std::string>());
    }
    std::vector<std::pair<std::string, std::string>> edges;
    const json& edge_doc = require(v, "edges", path);
    for (size_t i = 0; i < edge_doc.size(); ++i) {
        const json& e = edge_doc[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
            fail(path + "/edges/" + std::to_string(i), "expected [from, to] node names");
        }
        edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    try {
        net.graph = std::make_shared<RadioGraph>(
            nodes, edges, require(v, "source", path).get<std::string>(),
            require(v, "sink", path).get<std::string>(), kind);
    } catch (const StructureError& e) {
        fail(path, e.what());
    }

    const json& w = require(v, "weights", path);
    if (w.is_string()) {
        const std::string s = w.get<std::string>();
        if (s == "free") net.weights_mode = NetworkConfig::WeightsMode::Free;
        else fail(path + "/weights", "unknown weights mode '" + s + "'");
    } else if (w.is_object() && w.contains("preset")) {
        net.weights_mode = NetworkConfig::WeightsMode::Preset;
        const std::string p = w.at("preset").get<std::string>();
        if (p == "indegree") net.preset = WeightPreset::IndegreeSplit;
        else if (p == "unit-alpha") net.preset = WeightPreset::UnitAlphaLinks;
        else fail(path + "/weights/preset", "unknown preset '" + p + "'");
    } else if (w.is_object() && w.contains("explicit")) {
        net.weights_mode = NetworkConfig::WeightsMode::Explicit;
        net.explicit_weights.assign(static_cast<size_t>(net.graph->edge_count()), 0.0);
        std::vector<bool> seen(net.explicit_weights.size(), false);
        for (const auto& [name, value] : w.at("explicit").items()) {
            const auto arrow = name.find("->");
            if (arrow == std::string::npos) {
                fail(path + "/weights/explicit/" + name, "edge keys look like 'from->to'");
            }
            const int idx = net.graph->edge_index(net.graph->node_index(name.substr(0, arrow)),
                                                  net.graph->node_index(name.substr(arrow + 2)));
            if (idx < 0) fail(path + "/weights/explicit/" + name, "edge is not part of the graph");
            if (!value.is_number()) fail(path + "/weights/explicit/" + name, "expected a number");
            net.explicit_weights[static_cast<size_t>(idx)] = value.get<double>();
            seen[static_cast<size_t>(idx)] = true;
        }
        for (int e = 0; e < net.graph->edge_count(); ++e) {
            if (!seen[static_cast<size_t>(e)]) {
                fail(path + "/weights/explicit",
                     "missing weight for edge " + net.graph->edge_name(e));
            }
        }
    } else {
        fail(path + "/weights", "expected 'free', {preset}, or {explicit}");
    }

    const json& sched = require(v, "schedule", path);
    if (sched.contains("slots")) {
        net.schedule_mode = NetworkConfig::ScheduleMode::Explicit;
        net.schedule = parse_slots(sched, *net.graph, slot_duration, path + "/schedule");
    } else if (sched.contains("candidates")) {
        net.schedule_mode = NetworkConfig::ScheduleMode::Candidates;
        const json& cands = sched.at("candidates");
        if (!cands.is_array() || cands.empty()) {
            fail(path + "/schedule/candidates", "expected a nonempty array");
        }
        for (size_t i = 0; i < cands.size(); ++i) {
            const std::string cpath = path + "/schedule/candidates/" + std::to_string(i);
            net.candidates.push_back(parse_slots(cands[i], *net.graph, slot_duration, cpath));
            net.candidate_ids.push_back(cands[i].contains("id")
                                            ? cands[i].at("id").get<std::string>()
                                            : "candidate-" + std::to_string(i));
        }
    } else if (sched.contains("search")) {
        net.schedule_mode = NetworkConfig::ScheduleMode::Search;
        const json& search = sched.at("search");
        net.interference = parse_interference(search, *net.graph, path + "/schedule/search");
        net.pi_max = search.contains("pi_max") ? search.at("pi_max").get<int>() : 1;
        if (net.pi_max < 1) fail(path + "/schedule/search/pi_max", "must be at least 1");
    } else {
        fail(path + "/schedule", "expected 'slots', 'candidates', or 'search'");
    }

    const json& q = require(v, "quantization", path);
    net.quant.delta = require_number(q, "delta", path + "/quantization");
    net.quant.max_value = require_number(q, "max", path + "/quantization");
    try {
        net.quant.validate();
    } catch (const ConfigError& e) {
        fail(path + "/quantization", e.what());
    }

    if (v.contains("rate_bound")) {
        const json& rb = v.at("rate_bound");
        if (rb.is_number()) {
            net.uniform_rate_bound_hz = rb.get<double>();
        } else if (rb.is_object()) {
            if (rb.contains("default")) net.uniform_rate_bound_hz = rb.at("default").get<double>();
            if (rb.contains("per_element")) {
                for (const auto& [name, value] : rb.at("per_element").items()) {
                    net.rate_bounds_hz[name] = value.get<double>();
                }
            }
        } else {
            fail(path + "/rate_bound", "expected a number or {default, per_element}");
        }
    }

    if (v.contains("gamma")) {
        net.gamma_pinned = number_list(v.at("gamma"), path + "/gamma");
    }
    return net;
}

}  // namespace

std::vector<double> NetworkConfig::resolved_weights() const {
    switch (weights_mode) {
        case WeightsMode::Preset:
            return preset_weights(*graph, preset);
        case WeightsMode::Explicit:
            return explicit_weights;
        case WeightsMode::Free:
            throw ConfigError("this command needs fixed weights, but they are 'free'");
    }
    throw ConfigError("unreachable weights mode");
}

ProblemConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config error at /: expected a JSON object");
    ProblemConfig cfg;
    cfg.slot_duration = require_number(doc, "slot_duration", "");
    if (!(cfg.slot_duration > 0.0)) fail("/slot_duration", "must be positive");

    if (doc.contains("model")) {
        cfg.model = doc.at("model").get<int>();
        if (cfg.model != 1 && cfg.model != 2) fail("/model", "computational model is 1 or 2");
    }
    if (doc.contains("amplitude")) cfg.amplitude = doc.at("amplitude").get<double>();
    if (doc.contains("plant")) cfg.plant = parse_plant(doc.at("plant"), "/plant");
    if (doc.contains("controller")) {
        const json& c = doc.at("controller");
        if (c.contains("s")) {
            cfg.controller_s = c.at("s").get<int>();
            if (*cfg.controller_s < 0) fail("/controller/s", "must be nonnegative");
        }
    }
    if (doc.contains("bounds")) {
        const json& b = doc.at("bounds");
        if (b.contains("overshoot_y")) cfg.overshoot_y = b.at("overshoot_y").get<double>();
        if (b.contains("overshoot_u")) cfg.overshoot_u = b.at("overshoot_u").get<double>();
    }
    if (doc.contains("controllability")) {
        cfg.ctrl = parse_network(doc.at("controllability"), GraphKind::Controllability,
                                 cfg.slot_duration, "/controllability");
    }
    if (doc.contains("observability")) {
        cfg.obs = parse_network(doc.at("observability"), GraphKind::Observability,
                                cfg.slot_duration, "/observability");
    }
    if (doc.contains("alpha_preset")) {
        const std::string p = doc.at("alpha_preset").get<std::string>();
        if (p == "uniform") cfg.alpha_preset = AlphaPreset::Uniform;
        else if (p == "gamma-mass") cfg.alpha_preset = AlphaPreset::GammaMass;
        else fail("/alpha_preset", "expected 'uniform' or 'gamma-mass'");
    }
    if (doc.contains("horizon")) {
        cfg.horizon = doc.at("horizon").get<int>();
        if (*cfg.horizon < 1) fail("/horizon", "must be positive");
    }
    if (doc.contains("oracle")) cfg.run_oracle = doc.at("oracle").get<bool>();
    if (doc.contains("rate_sweep")) {
        const json& s = doc.at("rate_sweep");
        ProblemConfig::RateSweep sweep;
        sweep.lo = require_number(s, "lo", "/rate_sweep");
        sweep.hi = require_number(s, "hi", "/rate_sweep");
        sweep.step = require_number(s, "step", "/rate_sweep");
        if (!(sweep.step > 0.0) || sweep.hi < sweep.lo) {
            fail("/rate_sweep", "need lo <= hi and a positive step");
        }
        cfg.rate_sweep = sweep;
    }

    cfg.resolved = doc;
    return cfg;
}

ProblemConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string ProblemConfig::hash() const {
    const std::string text = resolved.dump();
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

nlohmann::json apply_override(json doc, const std::string& key, const std::string& value) {
    if (key == "model") {
        doc["model"] = std::stoi(value);
    } else if (key == "pi-max") {
        for (const char* side : {"controllability", "observability"}) {
            if (doc.contains(side) && doc[side].contains("schedule") &&
                doc[side]["schedule"].contains("search")) {
                doc[side]["schedule"]["search"]["pi_max"] = std::stoi(value);
            }
        }
    } else if (key == "rate-sweep") {
        const auto c1 = value.find(':');
        const auto c2 = value.rfind(':');
        if (c1 == std::string::npos || c2 == c1) {
            throw ConfigError("--rate-sweep expects lo:hi:step");
        }
        doc["rate_sweep"] = {{"lo", std::stod(value.substr(0, c1))},
                             {"hi", std::stod(value.substr(c1 + 1, c2 - c1 - 1))},
                             {"step", std::stod(value.substr(c2 + 1))}};
    } else if (key == "horizon") {
        doc["horizon"] = std::stoi(value);
    } else if (key == "oracle") {
        doc["oracle"] = value == "true" || value == "1";
    } else if (key == "seed") {
        doc["seed"] = std::stoll(value);  // reserved; no numeric effect
    } else if (key == "amplitude") {
        doc["amplitude"] = std::stod(value);
    } else {
        throw ConfigError("unknown override '" + key + "'");
    }
    return doc;
}

}  // namespace mcn
