#include "network.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "exactlog.hpp"

namespace mcn {

namespace {
constexpr size_t kPathBudget = 2'000'000;
}

RadioGraph::RadioGraph(std::vector<std::string> node_names,
                       std::vector<std::pair<std::string, std::string>> edge_names,
                       const std::string& source, const std::string& sink, GraphKind kind)
    : names_(std::move(node_names)), kind_(kind) {
    if (names_.empty()) throw StructureError("graph has no nodes");
    std::map<std::string, int> index;
    for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
        if (!index.emplace(names_[static_cast<size_t>(i)], i).second) {
            throw StructureError("duplicate node id '" + names_[static_cast<size_t>(i)] + "'");
        }
    }
    auto lookup = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw StructureError("undeclared node id '" + name + "'");
        return it->second;
    };
    source_ = lookup(source);
    sink_ = lookup(sink);
    if (source_ == sink_) throw StructureError("source and sink must differ");

    in_.resize(names_.size());
    out_.resize(names_.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& [from, to] : edge_names) {
        const int f = lookup(from), t = lookup(to);
        if (f == t) throw StructureError("self loop at '" + from + "'");
        if (!seen.emplace(f, t).second) {
            throw StructureError("duplicate edge " + from + "->" + to);
        }
        const int e = static_cast<int>(edges_.size());
        edges_.push_back(Edge{f, t});
        out_[static_cast<size_t>(f)].push_back(e);
        in_[static_cast<size_t>(t)].push_back(e);
    }
    for (auto& v : out_) {
        std::sort(v.begin(), v.end(), [&](int a, int b) {
            return names_[static_cast<size_t>(edges_[static_cast<size_t>(a)].to)] <
                   names_[static_cast<size_t>(edges_[static_cast<size_t>(b)].to)];
        });
    }
    for (auto& v : in_) {
        std::sort(v.begin(), v.end(), [&](int a, int b) {
            return names_[static_cast<size_t>(edges_[static_cast<size_t>(a)].from)] <
                   names_[static_cast<size_t>(edges_[static_cast<size_t>(b)].from)];
        });
    }

    // Kahn topological sort; leftover nodes mean a cycle.
    std::vector<int> indeg(names_.size(), 0);
    for (const auto& e : edges_) ++indeg[static_cast<size_t>(e.to)];
    std::vector<int> queue;
    for (int v = 0; v < node_count(); ++v) {
        if (indeg[static_cast<size_t>(v)] == 0) queue.push_back(v);
    }
    while (!queue.empty()) {
        const int v = queue.back();
        queue.pop_back();
        topo_.push_back(v);
        for (int e : out_[static_cast<size_t>(v)]) {
            if (--indeg[static_cast<size_t>(edges_[static_cast<size_t>(e)].to)] == 0) {
                queue.push_back(edges_[static_cast<size_t>(e)].to);
            }
        }
    }
    if (topo_.size() != names_.size()) {
        throw StructureError("radio connectivity graph contains a cycle");
    }

    // Every node must sit on some source->sink path.
    std::vector<bool> fwd(names_.size(), false), bwd(names_.size(), false);
    std::function<void(int)> walk_fwd = [&](int v) {
        if (fwd[static_cast<size_t>(v)]) return;
        fwd[static_cast<size_t>(v)] = true;
        for (int e : out_[static_cast<size_t>(v)]) walk_fwd(edges_[static_cast<size_t>(e)].to);
    };
    std::function<void(int)> walk_bwd = [&](int v) {
        if (bwd[static_cast<size_t>(v)]) return;
        bwd[static_cast<size_t>(v)] = true;
        for (int e : in_[static_cast<size_t>(v)]) walk_bwd(edges_[static_cast<size_t>(e)].from);
    };
    walk_fwd(source_);
    walk_bwd(sink_);
    for (int v = 0; v < node_count(); ++v) {
        if (!fwd[static_cast<size_t>(v)] || !bwd[static_cast<size_t>(v)]) {
            throw StructureError("node '" + names_[static_cast<size_t>(v)] +
                                 "' lies on no source->sink path");
        }
    }
}

int RadioGraph::node_index(const std::string& name) const {
    for (int i = 0; i < node_count(); ++i) {
        if (names_[static_cast<size_t>(i)] == name) return i;
    }
    throw StructureError("undeclared node id '" + name + "'");
}

std::string RadioGraph::edge_name(int e) const {
    const auto& ed = edges_[static_cast<size_t>(e)];
    return names_[static_cast<size_t>(ed.from)] + "->" + names_[static_cast<size_t>(ed.to)];
}

int RadioGraph::edge_index(int from, int to) const {
    for (int e = 0; e < edge_count(); ++e) {
        if (edges_[static_cast<size_t>(e)].from == from && edges_[static_cast<size_t>(e)].to == to)
            return e;
    }
    return -1;
}

const std::vector<double>& RadioGraph::weights() const {
    if (!has_weights()) throw StructureError("graph carries no weight function");
    return weights_;
}

void RadioGraph::set_weights(std::vector<double> w) {
    if (w.size() != edges_.size()) throw StructureError("weight vector size mismatch");
    weights_ = std::move(w);
}

std::vector<double> preset_weights(const RadioGraph& g, WeightPreset preset) {
    std::vector<double> w(static_cast<size_t>(g.edge_count()), 0.0);
    for (int e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edge(e);
        switch (preset) {
            case WeightPreset::IndegreeSplit:
                w[static_cast<size_t>(e)] = 1.0 / static_cast<double>(g.in_edges(ed.to).size());
                break;
            case WeightPreset::UnitAlphaLinks:
                w[static_cast<size_t>(e)] =
                    ed.from == g.source()
                        ? 1.0
                        : 1.0 / static_cast<double>(g.in_edges(ed.from).size());
                break;
        }
    }
    return w;
}

bool Scheduling::fully_scheduled() const {
    return std::all_of(slot_of_edge.begin(), slot_of_edge.end(), [](int s) { return s >= 1; });
}

std::map<int, std::vector<int>> Scheduling::slots() const {
    std::map<int, std::vector<int>> out;
    for (int e = 0; e < static_cast<int>(slot_of_edge.size()); ++e) {
        if (slot_of_edge[static_cast<size_t>(e)] >= 1) {
            out[slot_of_edge[static_cast<size_t>(e)]].push_back(e);
        }
    }
    return out;
}

std::vector<Path> enumerate_paths(const RadioGraph& g) {
    std::vector<Path> out;
    Path current;
    current.nodes.push_back(g.source());
    std::function<void(int)> dfs = [&](int v) {
        if (v == g.sink()) {
            out.push_back(current);
            if (out.size() > kPathBudget) {
                throw BudgetError("path enumeration exceeded budget");
            }
            return;
        }
        for (int e : g.out_edges(v)) {
            current.nodes.push_back(g.edge(e).to);
            current.edges.push_back(e);
            dfs(g.edge(e).to);
            current.nodes.pop_back();
            current.edges.pop_back();
        }
    };
    dfs(g.source());
    return out;
}

int path_delay(const Path& path, const Scheduling& sched) {
    if (path.edges.empty()) throw StructureError("empty path");
    int d = 1;
    int prev = -1;
    for (int e : path.edges) {
        const int s = sched.slot(e);
        if (s < 1) throw StructureError("path crosses an unscheduled edge");
        if (prev >= 1 && s <= prev) ++d;
        prev = s;
    }
    return d;
}

double DelayProfile::gamma_at(int d) const {
    auto it = gamma.find(d);
    return it == gamma.end() ? 0.0 : it->second;
}

std::vector<double> DelayProfile::gamma_vector() const {
    std::vector<double> out;
    out.reserve(delays.size());
    for (int d : delays) out.push_back(gamma_at(d));
    return out;
}

DelayProfile delay_profile(const RadioGraph& g, const Scheduling& sched) {
    const auto& w = g.weights();
    DelayProfile profile;
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        double mass = 1.0;
        for (int e : path.edges) mass *= w[static_cast<size_t>(e)];
        profile.paths_by_delay[d].push_back(path);
        profile.gamma[d] += mass;
    }
    for (const auto& [d, paths] : profile.paths_by_delay) profile.delays.push_back(d);
    std::sort(profile.delays.begin(), profile.delays.end());
    profile.min_delay = profile.delays.front();
    profile.max_delay = profile.delays.back();
    return profile;
}

RationalTF network_tf(const DelayProfile& profile, std::optional<double> frame_duration) {
    const int dbar = profile.max_delay;
    std::vector<double> num(static_cast<size_t>(dbar - profile.min_delay) + 1, 0.0);
    for (int d : profile.delays) num[static_cast<size_t>(dbar - d)] = profile.gamma_at(d);
    return RationalTF(Polynomial(std::move(num)), Polynomial::monomial(dbar), frame_duration);
}

LinkAlphas alpha_links(const RadioGraph& g, const Scheduling& sched) {
    const auto& w = g.weights();
    LinkAlphas out;
    out.total.assign(static_cast<size_t>(g.edge_count()), 0.0);
    out.by_class.resize(static_cast<size_t>(g.edge_count()));
    out.classes.resize(static_cast<size_t>(g.edge_count()));

    // Totals by the acyclic recursion: alpha_e = W(e) * (prefix mass at tail).
    std::vector<double> node_mass(static_cast<size_t>(g.node_count()), 0.0);
    node_mass[static_cast<size_t>(g.source())] = 1.0;
    for (int v : g.topo_order()) {
        if (v != g.source()) {
            double acc = 0.0;
            for (int e : g.in_edges(v)) acc += out.total[static_cast<size_t>(e)];
            node_mass[static_cast<size_t>(v)] = acc;
        }
        for (int e : g.out_edges(v)) {
            out.total[static_cast<size_t>(e)] =
                w[static_cast<size_t>(e)] * node_mass[static_cast<size_t>(v)];
        }
    }

    // Class decomposition from full paths, one count per distinct prefix and
    // class (the split is a true partition only for final edges).
    std::vector<std::set<std::pair<std::vector<int>, int>>> seen(
        static_cast<size_t>(g.edge_count()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        double prefix = 1.0;
        for (size_t i = 0; i < path.edges.size(); ++i) {
            const int e = path.edges[i];
            prefix *= w[static_cast<size_t>(e)];
            out.classes[static_cast<size_t>(e)].insert(d);
            std::vector<int> key(path.nodes.begin(), path.nodes.begin() + static_cast<long>(i) + 2);
            if (seen[static_cast<size_t>(e)].emplace(std::move(key), d).second) {
                out.by_class[static_cast<size_t>(e)][d] += prefix;
            }
        }
    }
    return out;
}

NodeAlphas alpha_nodes(const RadioGraph& g, const Scheduling& sched) {
    const auto& w = g.weights();
    NodeAlphas out;
    out.total.assign(static_cast<size_t>(g.node_count()), 0.0);
    out.by_class.resize(static_cast<size_t>(g.node_count()));
    out.classes.resize(static_cast<size_t>(g.node_count()));

    out.total[static_cast<size_t>(g.source())] = 1.0;
    for (int v : g.topo_order()) {
        if (v == g.source() || v == g.sink()) continue;
        double acc = 0.0;
        for (int e : g.in_edges(v)) {
            acc += w[static_cast<size_t>(e)] * out.total[static_cast<size_t>(g.edge(e).from)];
        }
        out.total[static_cast<size_t>(v)] = acc;
    }

    std::vector<std::set<std::pair<std::vector<int>, int>>> seen(
        static_cast<size_t>(g.node_count()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        // Prefix weights along the path; nodes[j] has prefix product of the
        // first j edges.
        double prefix = 1.0;
        for (size_t j = 0; j < path.nodes.size(); ++j) {
            const int v = path.nodes[j];
            if (j > 0) prefix *= w[static_cast<size_t>(path.edges[j - 1])];
            out.classes[static_cast<size_t>(v)].insert(d);
            if (v == g.sink()) continue;
            if (j + 2 == path.nodes.size()) {
                // Predecessor of the sink reached through its final hop: the
                // class split is exact and drives the gamma relation.
                out.by_class[static_cast<size_t>(v)][d] += prefix;
            } else {
                std::vector<int> key(path.nodes.begin(),
                                     path.nodes.begin() + static_cast<long>(j) + 1);
                if (seen[static_cast<size_t>(v)].emplace(std::move(key), d).second &&
                    g.edge_index(v, g.sink()) < 0) {
                    out.by_class[static_cast<size_t>(v)][d] += prefix;
                }
            }
        }
    }
    return out;
}

void QuantizationSpec::validate() const {
    if (!(delta > 0.0)) throw ConfigError("quantization width must be positive");
    if (!(max_value > 0.0)) throw ConfigError("quantization range bound must be positive");
    if (!(levels() >= 2.0)) throw ConfigError("quantizer must resolve at least two levels");
}

double RateReport::max_rate_hz() const {
    double best = 0.0;
    for (const auto& [_, r] : rates_hz) best = std::max(best, r);
    return best;
}

RateReport rates(const std::map<std::string, double>& alphas, const QuantizationSpec& q,
                 double slot_duration, int model) {
    q.validate();
    if (!(slot_duration > 0.0)) throw ConfigError("slot duration must be positive");
    if (alphas.empty()) throw StructureError("rates: empty alpha map");
    double min_mag = std::numeric_limits<double>::infinity();
    for (const auto& [name, a] : alphas) {
        if (a == 0.0) {
            throw InfeasibleError("degenerate routing: data never reaches '" + name +
                                  "' (alpha = 0)");
        }
        min_mag = std::min(min_mag, std::abs(a));
    }
    RateReport out;
    out.model = model;
    out.alphas = alphas;
    for (const auto& [name, a] : alphas) {
        const int bits = ceil_log2_exact({2.0, q.max_value, std::abs(a)}, {q.delta, min_mag});
        out.bits[name] = bits;
        out.rates_hz[name] = static_cast<double>(bits) / slot_duration;
    }
    return out;
}

RateBound RateBound::from_bound(double bound_hz, const QuantizationSpec& q,
                                double slot_duration) {
    q.validate();
    RateBound rb;
    rb.bound_hz = bound_hz;
    const double exponent = bound_hz * slot_duration;
    rb.kappa = exponent > 1020.0 ? std::numeric_limits<double>::infinity()
                                 : q.delta * std::exp2(exponent) / (2.0 * q.max_value);
    return rb;
}

std::vector<double> weights_from_alpha_links(const RadioGraph& g,
                                             const std::vector<double>& target_alpha) {
    if (target_alpha.size() != static_cast<size_t>(g.edge_count())) {
        throw StructureError("alpha target vector size mismatch");
    }
    std::vector<double> w(target_alpha.size(), 0.0);
    for (int v : g.topo_order()) {
        double in_mass = 1.0;
        if (v != g.source()) {
            in_mass = 0.0;
            for (int e : g.in_edges(v)) in_mass += target_alpha[static_cast<size_t>(e)];
        }
        for (int e : g.out_edges(v)) {
            const double target = target_alpha[static_cast<size_t>(e)];
            if (in_mass == 0.0) {
                if (target != 0.0) {
                    throw InfeasibleError(
                        "alpha targets vanish entering '" + g.node_name(v) +
                        "' but a nonzero target leaves it (singular weight recovery)");
                }
                w[static_cast<size_t>(e)] = 0.0;
            } else {
                w[static_cast<size_t>(e)] = target / in_mass;
            }
        }
    }
    return w;
}

DelaySeparation check_delay_separation(const RadioGraph& g, const Scheduling& sched) {
    std::vector<std::set<int>> classes(static_cast<size_t>(g.edge_count()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        for (int e : path.edges) classes[static_cast<size_t>(e)].insert(d);
    }
    DelaySeparation out;
    for (int v = 0; v < g.node_count(); ++v) {
        if (v == g.sink()) continue;
        const auto& inc = g.in_edges(v);
        if (inc.size() < 2) continue;
        for (size_t i = 0; i < inc.size(); ++i) {
            for (size_t j = i + 1; j < inc.size(); ++j) {
                const auto& c1 = classes[static_cast<size_t>(inc[i])];
                const auto& c2 = classes[static_cast<size_t>(inc[j])];
                for (int d1 : c1) {
                    for (int d2 : c2) {
                        if (d1 != d2) {
                            out.separated = false;
                            out.witness_node = v;
                            out.witness_edge1 = inc[i];
                            out.witness_edge2 = inc[j];
                            return out;
                        }
                    }
                }
            }
        }
    }
    return out;
}

std::vector<int> induced_delays(const RadioGraph& g, const Scheduling& sched) {
    std::set<int> delays;
    for (const auto& path : enumerate_paths(g)) delays.insert(path_delay(path, sched));
    return {delays.begin(), delays.end()};
}

std::vector<std::set<int>> node_path_classes(const RadioGraph& g, const Scheduling& sched) {
    std::vector<std::set<int>> classes(static_cast<size_t>(g.node_count()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        for (int v : path.nodes) classes[static_cast<size_t>(v)].insert(d);
    }
    return classes;
}

std::map<int, std::vector<int>> final_edges_by_class(const RadioGraph& g,
                                                     const Scheduling& sched) {
    std::vector<std::set<int>> classes(static_cast<size_t>(g.edge_count()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        classes[static_cast<size_t>(path.edges.back())].insert(d);
    }
    std::map<int, std::vector<int>> out;
    for (int e : g.in_edges(g.sink())) {
        const auto& c = classes[static_cast<size_t>(e)];
        if (c.size() != 1) {
            throw StructureError("final edge " + g.edge_name(e) +
                                 " carries several delay classes; gamma is not a subset sum");
        }
        out[*c.begin()].push_back(e);
    }
    return out;
}

std::vector<double> weights_from_gamma_model2(const RadioGraph& g, const Scheduling& sched,
                                              const std::map<int, double>& target_gamma,
                                              const std::vector<double>& target_alpha_nodes) {
    if (target_alpha_nodes.size() != static_cast<size_t>(g.node_count())) {
        throw StructureError("alpha target vector size mismatch");
    }
    auto alpha_of = [&](int v) {
        return v == g.source() ? 1.0 : target_alpha_nodes[static_cast<size_t>(v)];
    };

    std::vector<double> w(static_cast<size_t>(g.edge_count()), 0.0);

    // Interior in-weights: uniform defaults, one designated predecessor per
    // node absorbs the correction that pins alpha_v exactly.
    for (int v : g.topo_order()) {
        if (v == g.source() || v == g.sink()) continue;
        const auto& inc = g.in_edges(v);
        int designated = -1;
        for (int e : inc) {
            if (alpha_of(g.edge(e).from) != 0.0) {
                designated = e;
                break;
            }
        }
        if (designated < 0) {
            if (alpha_of(v) != 0.0) {
                throw InfeasibleError("node '" + g.node_name(v) +
                                      "' receives zero alpha mass but has a nonzero target");
            }
            continue;  // all-zero in-mass and zero target: keep zero weights
        }
        double rest = 0.0;
        for (int e : inc) {
            if (e == designated) continue;
            w[static_cast<size_t>(e)] = 1.0 / static_cast<double>(inc.size());
            rest += w[static_cast<size_t>(e)] * alpha_of(g.edge(e).from);
        }
        w[static_cast<size_t>(designated)] =
            (alpha_of(v) - rest) / alpha_of(g.edge(designated).from);
    }

    // Per-class prefix mass at each predecessor of the sink, under the
    // interior weights just fixed (final hops excluded from the products).
    const auto& final_edges = g.in_edges(g.sink());
    std::map<int, size_t> delay_row;
    for (const auto& [d, _] : target_gamma) delay_row.emplace(d, delay_row.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<long>(delay_row.size()),
                                              static_cast<long>(final_edges.size()));
    for (const auto& path : enumerate_paths(g)) {
        const int d = path_delay(path, sched);
        const int last = path.edges.back();
        auto row = delay_row.find(d);
        if (row == delay_row.end()) {
            throw InfeasibleError("schedule induces delay " + std::to_string(d) +
                                  " which has no gamma target");
        }
        double prefix = 1.0;
        for (size_t i = 0; i + 1 < path.edges.size(); ++i) {
            prefix *= w[static_cast<size_t>(path.edges[i])];
        }
        const auto col = std::find(final_edges.begin(), final_edges.end(), last);
        a(static_cast<long>(row->second), col - final_edges.begin()) += prefix;
    }

    Eigen::VectorXd b(static_cast<long>(delay_row.size()));
    for (const auto& [d, row] : delay_row) b(static_cast<long>(row)) = target_gamma.at(d);

    const Eigen::VectorXd x = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);
    const double residual = (a * x - b).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!(residual <= 1e-10 * scale)) {
        throw InfeasibleError(
            "gamma targets are not reachable from the final hops under the assigned "
            "alpha targets (residual " +
            std::to_string(residual) + ")");
    }
    for (size_t i = 0; i < final_edges.size(); ++i) {
        w[static_cast<size_t>(final_edges[i])] = x(static_cast<long>(i));
    }
    return w;
}

}  // namespace mcn
