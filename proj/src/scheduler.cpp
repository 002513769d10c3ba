#include "scheduler.hpp"

#include <algorithm>
#include <sstream>

namespace mcn {

void InterferenceSpec::validate(const RadioGraph& g) const {
    if (compat_sets.empty()) return;
    for (int v = 0; v < g.node_count(); ++v) {
        if (g.out_edges(v).empty()) continue;  // never transmits
        bool covered = false;
        for (const auto& s : compat_sets) {
            if (s.count(v)) covered = true;
        }
        if (!covered) {
            throw ConfigError("transmitting node '" + g.node_name(v) +
                              "' appears in no compatibility set");
        }
    }
}

bool InterferenceSpec::admissible_slot(const RadioGraph& g,
                                       const std::vector<int>& slot_edges) const {
    if (slot_edges.empty()) return true;
    if (!compat_sets.empty()) {
        std::set<int> transmitters;
        for (int e : slot_edges) transmitters.insert(g.edge(e).from);
        bool fits = false;
        for (const auto& s : compat_sets) {
            if (std::includes(s.begin(), s.end(), transmitters.begin(), transmitters.end())) {
                fits = true;
                break;
            }
        }
        if (!fits) return false;
    }
    for (const auto& [e1, e2] : edge_conflicts) {
        const bool has1 = std::find(slot_edges.begin(), slot_edges.end(), e1) != slot_edges.end();
        const bool has2 = std::find(slot_edges.begin(), slot_edges.end(), e2) != slot_edges.end();
        if (has1 && has2) return false;
    }
    return true;
}

std::vector<Scheduling> enumerate_schedules(const RadioGraph& g, const InterferenceSpec& ifr,
                                            int pi_max, double slot_duration, size_t budget) {
    if (pi_max < 1) throw ConfigError("schedule period bound must be at least 1");
    ifr.validate(g);
    std::vector<Scheduling> out;
    const int e_count = g.edge_count();
    size_t visited = 0;

    for (int period = 1; period <= pi_max; ++period) {
        std::vector<int> slot_of_edge(static_cast<size_t>(e_count), 0);
        std::vector<std::vector<int>> edges_in_slot(static_cast<size_t>(period) + 1);

        std::function<void(int)> assign = [&](int e) {
            if (++visited > 20 * budget) {
                throw BudgetError("schedule enumeration visited too many partial assignments; "
                                  "reduce the period bound");
            }
            if (e == e_count) {
                // canonical form: used slots are exactly 1..k
                int max_used = 0;
                for (int s = 1; s <= period; ++s) {
                    if (!edges_in_slot[static_cast<size_t>(s)].empty()) max_used = s;
                }
                for (int s = 1; s <= max_used; ++s) {
                    if (edges_in_slot[static_cast<size_t>(s)].empty()) return;
                }
                Scheduling sched;
                sched.period = period;
                sched.slot_of_edge = slot_of_edge;
                sched.slot_duration = slot_duration;
                out.push_back(std::move(sched));
                if (out.size() > budget) {
                    throw BudgetError(
                        "schedule enumeration exceeded the candidate budget of " +
                        std::to_string(budget) + "; reduce the period bound");
                }
                return;
            }
            for (int s = 1; s <= period; ++s) {
                edges_in_slot[static_cast<size_t>(s)].push_back(e);
                if (ifr.admissible_slot(g, edges_in_slot[static_cast<size_t>(s)])) {
                    slot_of_edge[static_cast<size_t>(e)] = s;
                    assign(e + 1);
                }
                edges_in_slot[static_cast<size_t>(s)].pop_back();
            }
            slot_of_edge[static_cast<size_t>(e)] = 0;
        };
        assign(0);
    }
    return out;
}

std::string schedule_encoding(const Scheduling& sched) {
    std::ostringstream os;
    os << "P" << sched.period << "[";
    for (size_t e = 0; e < sched.slot_of_edge.size(); ++e) {
        if (e) os << ",";
        os << sched.slot_of_edge[e];
    }
    os << "]";
    return os.str();
}

std::vector<SchedulePair> enumerate_schedule_pairs(const RadioGraph& g_r,
                                                   const InterferenceSpec& ifr_r,
                                                   const RadioGraph* g_o,
                                                   const InterferenceSpec& ifr_o, int pi_max,
                                                   double slot_duration, size_t budget) {
    const auto scheds_r = enumerate_schedules(g_r, ifr_r, pi_max, slot_duration, budget);
    std::vector<SchedulePair> out;
    if (!g_o) {
        for (const auto& r : scheds_r) {
            out.push_back(SchedulePair{schedule_encoding(r), r, std::nullopt});
        }
        return out;
    }
    const auto scheds_o = enumerate_schedules(*g_o, ifr_o, pi_max, slot_duration, budget);
    for (const auto& r : scheds_r) {
        for (const auto& o : scheds_o) {
            if (o.period != r.period) continue;  // one frame clock for both networks
            out.push_back(SchedulePair{schedule_encoding(r) + "/" + schedule_encoding(o), r, o});
            if (out.size() > budget) {
                throw BudgetError("schedule pair enumeration exceeded the candidate budget");
            }
        }
    }
    return out;
}

ScheduleSearchResult schedule_search(
    const std::vector<SchedulePair>& candidates,
    const std::function<CodesignProblem(const SchedulePair&)>& make_problem) {
    ScheduleSearchResult res;
    for (const auto& cand : candidates) {
        SearchEntry entry;
        entry.id = cand.id;
        entry.ctrl = cand.ctrl;
        entry.obs = cand.obs;
        try {
            const CodesignProblem problem = make_problem(cand);
            entry.delays = problem.delays_r();
            const CodesignSolution sol = codesign(problem);
            entry.feasible = true;
            entry.metrics = sol.metrics;
            entry.l2 = sol.metrics.l2;
            entry.max_rate_hz = sol.rates_r.max_rate_hz();
            if (sol.rates_o) entry.max_rate_hz = std::max(entry.max_rate_hz,
                                                          sol.rates_o->max_rate_hz());
        } catch (const Error& e) {
            entry.feasible = false;
            entry.note = e.what();
        }
        res.evaluated.push_back(std::move(entry));
    }

    res.ordering.resize(res.evaluated.size());
    for (size_t i = 0; i < res.ordering.size(); ++i) res.ordering[i] = i;
    std::stable_sort(res.ordering.begin(), res.ordering.end(), [&](size_t a, size_t b) {
        const auto& ea = res.evaluated[a];
        const auto& eb = res.evaluated[b];
        if (ea.l2 != eb.l2) return ea.l2 < eb.l2;
        return ea.id < eb.id;
    });

    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : res.evaluated) {
        if (e.feasible) best = std::min(best, e.l2);
    }
    if (std::isfinite(best)) {
        for (size_t i = 0; i < res.evaluated.size(); ++i) {
            const auto& e = res.evaluated[i];
            if (e.feasible && e.l2 <= best + 1e-9 * std::max(1.0, best)) {
                res.optimal_set.push_back(i);
            }
        }
    }
    return res;
}

}  // namespace mcn
