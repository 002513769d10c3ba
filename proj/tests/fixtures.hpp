#ifndef MCN_TESTS_FIXTURES_HPP
#define MCN_TESTS_FIXTURES_HPP

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "network.hpp"
#include "optimize.hpp"

namespace fixtures {

using EdgeName = std::pair<std::string, std::string>;

// Seven-node mesh used across the worked examples: v1 feeds v2..v4, the
// middle layer feeds v5/v6 and the sink v7 directly.
inline std::shared_ptr<mcn::RadioGraph> mesh7(
    mcn::GraphKind kind = mcn::GraphKind::Controllability) {
    return std::make_shared<mcn::RadioGraph>(
        std::vector<std::string>{"v1", "v2", "v3", "v4", "v5", "v6", "v7"},
        std::vector<EdgeName>{{"v1", "v2"}, {"v1", "v3"}, {"v1", "v4"}, {"v2", "v5"},
                              {"v2", "v7"}, {"v3", "v5"}, {"v3", "v6"}, {"v3", "v7"},
                              {"v4", "v6"}, {"v4", "v7"}, {"v5", "v7"}, {"v6", "v7"}},
        "v1", "v7", kind);
}

inline mcn::Scheduling make_sched(const mcn::RadioGraph& g, int period, double slot_duration,
                                  const std::map<int, std::vector<EdgeName>>& slots) {
    mcn::Scheduling sched;
    sched.period = period;
    sched.slot_duration = slot_duration;
    sched.slot_of_edge.assign(static_cast<size_t>(g.edge_count()), -1);
    for (const auto& [slot, edges] : slots) {
        for (const auto& [from, to] : edges) {
            const int e = g.edge_index(g.node_index(from), g.node_index(to));
            sched.slot_of_edge[static_cast<size_t>(e)] = slot;
        }
    }
    return sched;
}

// Three-slot schedule where every path takes one frame.
inline mcn::Scheduling eta_all_same_delay(const mcn::RadioGraph& g, double dt = 0.01) {
    return make_sched(g, 3, dt,
                      {{1, {{"v1", "v2"}, {"v1", "v3"}, {"v1", "v4"}}},
                       {2,
                        {{"v2", "v5"},
                         {"v2", "v7"},
                         {"v3", "v5"},
                         {"v3", "v6"},
                         {"v3", "v7"},
                         {"v4", "v6"},
                         {"v4", "v7"}}},
                       {3, {{"v5", "v7"}, {"v6", "v7"}}}});
}

// Two-slot schedule mixing one- and two-frame paths (delays {1, 2}).
inline mcn::Scheduling eta_mixed_delay(const mcn::RadioGraph& g, double dt = 0.01) {
    return make_sched(g, 2, dt,
                      {{1, {{"v1", "v2"}, {"v1", "v3"}, {"v1", "v4"}, {"v5", "v7"}, {"v6", "v7"}}},
                       {2,
                        {{"v2", "v5"},
                         {"v2", "v7"},
                         {"v3", "v5"},
                         {"v3", "v6"},
                         {"v3", "v7"},
                         {"v4", "v6"},
                         {"v4", "v7"}}}});
}

// Two-slot schedule where every path takes two frames (single delay class 2).
inline mcn::Scheduling eta_single_class2(const mcn::RadioGraph& g, double dt = 0.01) {
    return make_sched(g, 2, dt,
                      {{1,
                        {{"v1", "v2"},
                         {"v1", "v3"},
                         {"v1", "v4"},
                         {"v2", "v7"},
                         {"v3", "v7"},
                         {"v4", "v7"},
                         {"v5", "v7"},
                         {"v6", "v7"}}},
                       {2, {{"v2", "v5"}, {"v3", "v5"}, {"v3", "v6"}, {"v4", "v6"}}}});
}

// Two-slot schedule with three delay classes {1, 2, 3}.
inline mcn::Scheduling eta_three_classes(const mcn::RadioGraph& g, double dt = 0.01) {
    return make_sched(g, 2, dt,
                      {{1,
                        {{"v1", "v2"},
                         {"v1", "v3"},
                         {"v1", "v4"},
                         {"v2", "v5"},
                         {"v3", "v5"},
                         {"v3", "v6"},
                         {"v4", "v6"},
                         {"v4", "v7"},
                         {"v6", "v7"}}},
                       {2, {{"v2", "v7"}, {"v3", "v7"}, {"v5", "v7"}}}});
}

// Everything in the first of two slots: delays {2, 3} (the sensing-side
// schedule of the ranking fixture).
inline mcn::Scheduling eta_one_shot(const mcn::RadioGraph& g, double dt = 0.01) {
    return make_sched(g, 2, dt,
                      {{1,
                        {{"v1", "v2"},
                         {"v1", "v3"},
                         {"v1", "v4"},
                         {"v2", "v5"},
                         {"v2", "v7"},
                         {"v3", "v5"},
                         {"v3", "v6"},
                         {"v3", "v7"},
                         {"v4", "v6"},
                         {"v4", "v7"},
                         {"v5", "v7"},
                         {"v6", "v7"}}}});
}

// P(z) = 1/(z+3): one unstable pole, no stable factor.
inline mcn::PlantSplit plant_1_over_zp3() {
    return mcn::make_plant_split(
        mcn::RationalTF(mcn::Polynomial{1.0}, mcn::Polynomial{3.0, 1.0}, 0.02));
}

inline mcn::QuantizationSpec quant_input() { return {0.1, 500.0}; }

// The two-delay tracking fixture: mesh7 under the mixed-delay schedule,
// computational model 2, input-side quantizer (0.1, 500).
inline mcn::CodesignProblem two_delay_problem(std::optional<std::vector<double>> gamma_pinned,
                                              int s, double dt = 0.01) {
    mcn::CodesignProblem p;
    p.plant = plant_1_over_zp3();
    p.ctrl.graph = mesh7();
    p.ctrl.sched = eta_mixed_delay(*p.ctrl.graph, dt);
    p.ctrl.quant = quant_input();
    p.model = 2;
    p.s = s;
    p.gamma_r_pinned = std::move(gamma_pinned);
    return p;
}

// Random layered DAG for property tests: every node lies on a source->sink
// path by construction. Returns the graph and a random full schedule.
struct RandomNetwork {
    std::shared_ptr<mcn::RadioGraph> graph;
    mcn::Scheduling sched;
};

inline RandomNetwork random_network(std::mt19937& rng, int max_nodes = 12, int max_period = 3,
                                    double dt = 0.01) {
    const int n = std::uniform_int_distribution<int>(3, max_nodes)(rng);
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));

    // Random layering with the source alone in layer 0 and the sink alone in
    // the last layer.
    const int layers = std::uniform_int_distribution<int>(2, std::max(2, n - 1))(rng);
    std::vector<int> layer_of(static_cast<size_t>(n));
    layer_of[0] = 0;
    layer_of[static_cast<size_t>(n - 1)] = layers;
    for (int i = 1; i < n - 1; ++i) {
        layer_of[static_cast<size_t>(i)] = std::uniform_int_distribution<int>(1, layers - 1)(rng);
    }

    std::set<std::pair<int, int>> edge_set;
    auto candidates_below = [&](int v) {
        std::vector<int> out;
        for (int u = 0; u < n; ++u) {
            if (layer_of[static_cast<size_t>(u)] < layer_of[static_cast<size_t>(v)]) {
                out.push_back(u);
            }
        }
        return out;
    };
    auto candidates_above = [&](int v) {
        std::vector<int> out;
        for (int u = 0; u < n; ++u) {
            if (layer_of[static_cast<size_t>(u)] > layer_of[static_cast<size_t>(v)]) {
                out.push_back(u);
            }
        }
        return out;
    };
    for (int v = 1; v < n; ++v) {
        auto below = candidates_below(v);
        if (!below.empty()) {
            edge_set.emplace(below[std::uniform_int_distribution<size_t>(0, below.size() - 1)(rng)],
                             v);
        }
    }
    for (int v = 0; v < n - 1; ++v) {
        auto above = candidates_above(v);
        if (!above.empty()) {
            edge_set.emplace(v,
                             above[std::uniform_int_distribution<size_t>(0, above.size() - 1)(rng)]);
        }
    }
    // sprinkle extra forward edges
    const int extras = std::uniform_int_distribution<int>(0, n)(rng);
    for (int i = 0; i < extras; ++i) {
        const int a = std::uniform_int_distribution<int>(0, n - 1)(rng);
        const int b = std::uniform_int_distribution<int>(0, n - 1)(rng);
        if (layer_of[static_cast<size_t>(a)] < layer_of[static_cast<size_t>(b)]) {
            edge_set.emplace(a, b);
        }
    }

    std::vector<EdgeName> edges;
    for (const auto& [a, b] : edge_set) {
        edges.emplace_back(names[static_cast<size_t>(a)], names[static_cast<size_t>(b)]);
    }
    RandomNetwork out;
    out.graph = std::make_shared<mcn::RadioGraph>(names, edges, names.front(), names.back());
    out.sched.period = std::uniform_int_distribution<int>(1, max_period)(rng);
    out.sched.slot_duration = dt;
    out.sched.slot_of_edge.resize(static_cast<size_t>(out.graph->edge_count()));
    for (auto& s : out.sched.slot_of_edge) {
        s = std::uniform_int_distribution<int>(1, out.sched.period)(rng);
    }
    return out;
}

}  // namespace fixtures

#endif
