#ifndef MCN_NETWORK_HPP
#define MCN_NETWORK_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "poly.hpp"

namespace mcn {

enum class GraphKind { Controllability, Observability };

struct Edge {
    int from = -1;
    int to = -1;
};

/// Weighted acyclic radio connectivity graph with a designated source (the
/// node injecting data) and sink (the node consuming it). Every node must lie
/// on at least one source->sink path; violations are rejected at construction.
class RadioGraph {
  public:
    RadioGraph(std::vector<std::string> node_names,
               std::vector<std::pair<std::string, std::string>> edges,
               const std::string& source, const std::string& sink,
               GraphKind kind = GraphKind::Controllability);

    int node_count() const { return static_cast<int>(names_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::string>& node_names() const { return names_; }
    const std::string& node_name(int v) const { return names_[static_cast<size_t>(v)]; }
    int node_index(const std::string& name) const;
    const std::vector<Edge>& edges() const { return edges_; }
    const Edge& edge(int e) const { return edges_[static_cast<size_t>(e)]; }
    std::string edge_name(int e) const;
    int edge_index(int from, int to) const;  // -1 when absent
    int source() const { return source_; }
    int sink() const { return sink_; }
    GraphKind kind() const { return kind_; }

    /// Edge indices entering / leaving a node, ordered by the peer node name.
    const std::vector<int>& in_edges(int v) const { return in_[static_cast<size_t>(v)]; }
    const std::vector<int>& out_edges(int v) const { return out_[static_cast<size_t>(v)]; }

    /// Nodes in a topological order (source first).
    const std::vector<int>& topo_order() const { return topo_; }

    bool has_weights() const { return !weights_.empty(); }
    const std::vector<double>& weights() const;
    void set_weights(std::vector<double> w);

  private:
    std::vector<std::string> names_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> in_, out_;
    std::vector<int> topo_;
    std::vector<double> weights_;
    int source_ = -1, sink_ = -1;
    GraphKind kind_;
};

/// Named weight presets.
enum class WeightPreset {
    IndegreeSplit,   // W(u,v) = 1/|inc(v)|; unit in-sums, minimal node rates
    UnitAlphaLinks,  // W(source,v) = 1, else W(u,v) = 1/|inc(u)|; unit link alphas
};

std::vector<double> preset_weights(const RadioGraph& g, WeightPreset preset);

/// Periodic TDMA schedule: each edge transmits in exactly one slot of the
/// frame, every frame. slot_of_edge is 1-based; -1 marks an unscheduled edge.
struct Scheduling {
    int period = 1;                // slots per frame
    std::vector<int> slot_of_edge; // parallel to RadioGraph::edges()
    double slot_duration = 0.0;    // seconds

    double frame_duration() const { return period * slot_duration; }
    int slot(int e) const { return slot_of_edge[static_cast<size_t>(e)]; }
    bool fully_scheduled() const;
    /// Slot -> edge indices view (1-based keys).
    std::map<int, std::vector<int>> slots() const;
};

/// A source->sink path as a node sequence plus the matching edge indices.
struct Path {
    std::vector<int> nodes;
    std::vector<int> edges;
};

/// All source->sink paths, deterministically ordered (lexicographic by the
/// names of the nodes along the path).
std::vector<Path> enumerate_paths(const RadioGraph& g);

/// Frame delay of one path under a schedule: data needs a new frame every
/// time the next hop's slot does not come strictly later within the frame,
/// so d = 1 + #(consecutive edge pairs with slot(e2) <= slot(e1)).
int path_delay(const Path& path, const Scheduling& sched);

/// Paths grouped by delay plus the per-delay path weights gamma(d).
struct DelayProfile {
    std::vector<int> delays;  // sorted ascending
    int min_delay = 0;
    int max_delay = 0;
    std::map<int, std::vector<Path>> paths_by_delay;
    std::map<int, double> gamma;

    double gamma_at(int d) const;
    std::vector<double> gamma_vector() const;  // aligned with `delays`
};

DelayProfile delay_profile(const RadioGraph& g, const Scheduling& sched);

/// G(z) = sum_d gamma(d) z^{dbar-d} / z^{dbar}; sample time is the frame
/// duration when the schedule is provided.
RationalTF network_tf(const DelayProfile& profile,
                      std::optional<double> frame_duration = std::nullopt);

/// Cumulative path-prefix weights per link (computational model 1).
/// `total[e]` is the weight of all source paths ending with edge e.
/// `by_class[e]` splits that mass by the delay class of the full paths the
/// prefix continues into (exact partition for edges into the sink; prefixes
/// reaching several classes are counted once per class elsewhere).
/// `classes[e]` lists the delay classes of all full paths through e.
struct LinkAlphas {
    std::vector<double> total;
    std::vector<std::map<int, double>> by_class;
    std::vector<std::set<int>> classes;
};

LinkAlphas alpha_links(const RadioGraph& g, const Scheduling& sched);

/// Cumulative path-prefix weights per node (computational model 2). The sink
/// never transmits and has no alpha; the source always has alpha 1. For
/// predecessors of the sink, `by_class` classifies the prefix mass by the
/// delay of the path completed through the final hop, which is what the
/// gamma reconstruction uses.
struct NodeAlphas {
    std::vector<double> total;  // sink entry unused (0)
    std::vector<std::map<int, double>> by_class;
    std::vector<std::set<int>> classes;
};

NodeAlphas alpha_nodes(const RadioGraph& g, const Scheduling& sched);

/// Quantizer description for one side of the loop.
struct QuantizationSpec {
    double delta = 0.0;      // quantization width
    double max_value = 0.0;  // symmetric range bound

    void validate() const;
    double levels() const { return 2.0 * max_value / delta; }
};

/// Data-rate report: bits per slot and Hz per element (edge or node name).
struct RateReport {
    int model = 1;
    std::map<std::string, double> alphas;
    std::map<std::string, int> bits;
    std::map<std::string, double> rates_hz;

    double max_rate_hz() const;
};

/// R = ceil(log2(levels * |alpha| / min |alpha|)) / slot_duration, with the
/// ceiling evaluated exactly. Any zero alpha is a degenerate routing error.
RateReport rates(const std::map<std::string, double>& alphas, const QuantizationSpec& q,
                 double slot_duration, int model);

/// Per-element rate bound rewritten as the cone coefficient
/// kappa = delta * 2^(bound*slot) / (2*max_value).
struct RateBound {
    double bound_hz = 0.0;
    double kappa = 0.0;

    static RateBound from_bound(double bound_hz, const QuantizationSpec& q, double slot_duration);
};

/// Unique weight vector realizing target link alphas (model 1). Targets are
/// indexed per edge. Fails when a node's incoming target mass vanishes but an
/// outgoing target does not.
std::vector<double> weights_from_alpha_links(const RadioGraph& g,
                                             const std::vector<double>& target_alpha);

/// Result of the delay-separation test: true when links on paths of different
/// delays never merge in an interior node (two distinct incoming edges of the
/// witness node otherwise carry the conflicting classes).
struct DelaySeparation {
    bool separated = true;
    int witness_node = -1;
    int witness_edge1 = -1;
    int witness_edge2 = -1;
};

DelaySeparation check_delay_separation(const RadioGraph& g, const Scheduling& sched);

/// Sorted set of frame delays the schedule induces on the graph's paths.
std::vector<int> induced_delays(const RadioGraph& g, const Scheduling& sched);

/// Delay classes of the full paths through each node (weights not needed).
std::vector<std::set<int>> node_path_classes(const RadioGraph& g, const Scheduling& sched);

/// Final edges (into the sink) grouped by their single delay class.
/// Requires every final edge to carry one class (true under delay
/// separation); this is the subset-sum decomposition gamma(d) = sum alpha_e.
std::map<int, std::vector<int>> final_edges_by_class(const RadioGraph& g,
                                                     const Scheduling& sched);

/// Constructive weight design for model 2: realizes target node alphas
/// (indexed per node, source fixed at 1, sink absent) and target gamma
/// exactly. Interior in-weights take a uniform default except one designated
/// predecessor per node which absorbs the alpha correction; the free final
/// hops then solve the gamma system. Reports failure when that system is
/// inconsistent.
std::vector<double> weights_from_gamma_model2(const RadioGraph& g, const Scheduling& sched,
                                              const std::map<int, double>& target_gamma,
                                              const std::vector<double>& target_alpha_nodes);

}  // namespace mcn

#endif
