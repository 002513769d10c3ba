#ifndef MCN_SCHEDULER_HPP
#define MCN_SCHEDULER_HPP

#include <functional>
#include <optional>

#include "optimize.hpp"

namespace mcn {

/// Which transmissions may share a slot. With compat sets, every slot's
/// transmitter set must fit inside a single set; edge conflicts additionally
/// forbid listed pairs from sharing a slot. An empty spec admits everything.
struct InterferenceSpec {
    std::vector<std::set<int>> compat_sets;            // node-index sets
    std::vector<std::pair<int, int>> edge_conflicts;   // edge-index pairs

    void validate(const RadioGraph& g) const;
    bool admissible_slot(const RadioGraph& g, const std::vector<int>& slot_edges) const;
};

/// Every admissible assignment of edges to slots for frame lengths up to
/// pi_max. Slot-relabeling duplicates are removed by keeping only schedules
/// whose used slots form the prefix 1..k (order preserved, so the induced
/// delays are untouched). Deterministic order: period ascending, then
/// lexicographic in the per-edge slot vector.
std::vector<Scheduling> enumerate_schedules(const RadioGraph& g, const InterferenceSpec& ifr,
                                            int pi_max, double slot_duration,
                                            size_t budget = 1'000'000);

/// Compact canonical encoding, the tie-break key of the search ordering.
std::string schedule_encoding(const Scheduling& sched);

struct SchedulePair {
    std::string id;
    Scheduling ctrl;
    std::optional<Scheduling> obs;
};

/// Cartesian pairs of admissible controllability/observability schedules
/// sharing the same period.
std::vector<SchedulePair> enumerate_schedule_pairs(const RadioGraph& g_r,
                                                   const InterferenceSpec& ifr_r,
                                                   const RadioGraph* g_o,
                                                   const InterferenceSpec& ifr_o, int pi_max,
                                                   double slot_duration,
                                                   size_t budget = 1'000'000);

struct SearchEntry {
    std::string id;
    Scheduling ctrl;
    std::optional<Scheduling> obs;
    bool feasible = false;
    double l2 = std::numeric_limits<double>::infinity();
    StepMetrics metrics;
    double max_rate_hz = 0.0;
    std::vector<int> delays;
    std::string note;
};

struct ScheduleSearchResult {
    std::vector<SearchEntry> evaluated;   // candidate order
    std::vector<size_t> ordering;         // indices sorted by (l2, encoding)
    std::vector<size_t> optimal_set;      // all argmin entries
};

/// Solve the co-design for every candidate pair and rank by the optimal
/// error norm; infeasible candidates sort last.
ScheduleSearchResult schedule_search(
    const std::vector<SchedulePair>& candidates,
    const std::function<CodesignProblem(const SchedulePair&)>& make_problem);

}  // namespace mcn

#endif
