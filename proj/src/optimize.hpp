#ifndef MCN_OPTIMIZE_HPP
#define MCN_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "network.hpp"
#include "qp.hpp"
#include "synthesis.hpp"

namespace mcn {

/// How node alpha targets are chosen when realizing pinned gamma values with
/// computational model 2. Uniform targets give every node the minimum rate;
/// GammaMass routes each node's data at the full mass of its fastest delay
/// class, which is the naive design the rate figures of the worked fixtures
/// correspond to.
enum class AlphaPreset { Uniform, GammaMass };

/// One network side of a co-design problem.
struct CodesignNetwork {
    std::shared_ptr<const RadioGraph> graph;
    Scheduling sched;
    QuantizationSpec quant;
    double uniform_rate_bound_hz = 0.0;               // <= 0: unbounded
    std::map<std::string, double> rate_bounds_hz;     // per-element overrides

    std::optional<double> bound_for(const std::string& element) const;
};

struct CodesignProblem {
    PlantSplit plant;
    CodesignNetwork ctrl;
    std::optional<CodesignNetwork> obs;  // absent: unity sensing path
    int model = 2;
    double overshoot_y_bound = std::numeric_limits<double>::infinity();
    double overshoot_u_bound = std::numeric_limits<double>::infinity();
    int s = 0;
    double amplitude = 1.0;
    std::optional<std::vector<double>> gamma_r_pinned;  // aligned with induced delays
    std::optional<std::vector<double>> gamma_o_pinned;
    AlphaPreset alpha_preset = AlphaPreset::Uniform;

    std::vector<int> delays_r() const;
    std::vector<int> delays_o() const;  // {0} when no observability network
    int ddr() const { return delays_r().back(); }
    int ddo() const { return delays_o().back(); }
    int m() const;  // controller core degree from the balance rule
    int response_time() const { return m() + plant.r + 1 - ddo(); }
    int nu() const { return delays_r().front() + 1; }
};

struct ConvexifiabilityReport {
    int model = 0;
    int s = 0;
    size_t delays_r = 0, delays_o = 0;
    bool naive = false;
    bool s_is_scalar = false;
    DelaySeparation separation_r, separation_o;
    bool stage2_guaranteed = false;  // |D_O| >= r + 1
    bool convexifiable = false;
    std::string verdict;  // naive | model1 | model2 | pinned | not-convex
    std::string detail;
};

ConvexifiabilityReport check_convexifiable(const CodesignProblem& p);

/// Stage-1 convex program over the scaled variables theta. For model 2 theta
/// carries one entry per controllability delay (the d0*gamma products); for
/// model 1 one entry per controllability edge (the d0*alpha products, one
/// sign branch at a time). L2^2(theta) = qp value + objective_constant.
struct ConvexStage {
    std::vector<std::string> var_names;
    QPProblem qp;
    double objective_constant = 0.0;
    int branch_sign = +1;
    Eigen::MatrixXd q_of_theta;  // ascending q coefficients = q_of_theta * theta
    int l = 0, nu = 0;
    double amplitude = 1.0;

    double value(const Eigen::VectorXd& theta) const;
    double max_violation(const Eigen::VectorXd& theta) const;
};

ConvexStage build_stage1(const CodesignProblem& p, int branch_sign = +1);

struct Stage2Result {
    bool ok = false;
    std::vector<double> c;
    std::vector<double> d;                       // present when d was solved too
    std::optional<std::vector<double>> gamma_o;  // aligned with delays_o()
    double residual = 0.0;
    std::string note;
};

/// Deadbeat recovery of (c, gamma_O) with the stage-1 products frozen.
Stage2Result solve_stage2(const CodesignProblem& p, const std::vector<double>& theta);

/// Joint (c, d) deadbeat solve with both network dynamics pinned. Square when
/// s = r; least squares otherwise.
Stage2Result solve_pinned(const CodesignProblem& p);

struct StageDiagnostics {
    std::string path;  // pinned | naive | model1 | model2
    int branch = 0;
    int qp_iterations = 0;
    double kkt_residual = 0.0;
    double stage1_value_l2sq = 0.0;
    double stage2_residual = 0.0;
    std::string notes;
};

struct CodesignSolution {
    ControllerStructure controller;
    NetworkDynamics gr, go;
    std::vector<double> weights_r;  // aligned with ctrl graph edges
    std::vector<double> weights_o;  // empty when no observability network
    std::map<std::string, double> alphas_r, alphas_o;
    RateReport rates_r;
    std::optional<RateReport> rates_o;
    ClosedLoop loop;
    StepMetrics metrics;
    StageDiagnostics diag;
};

/// End-to-end co-design: convexifiability gate, stage 1, stage 2, network
/// parameter recovery, and an end-to-end recomputation of every reported
/// metric from the recovered weights.
CodesignSolution codesign(const CodesignProblem& p);

/// Desk-scale exhaustive search.
struct GridSpec {
    double lo = -500.0;
    double hi = 500.0;
    int points_per_axis = 400;
};

struct OracleResult {
    bool any_feasible = false;
    double best_value_l2 = std::numeric_limits<double>::infinity();
    std::vector<double> best_point;
    /// Largest objective change between the best cell and its neighbors; the
    /// discretization error bound used when comparing against the QP.
    double cell_variation = 0.0;
    long evaluated = 0;
};

/// Grid the stage-1 feasible set (equality eliminated analytically) and
/// return the best L2. Validates the QP path.
OracleResult oracle_stage1(const CodesignProblem& p, const GridSpec& grid);

/// Grid the pinned network parameters, solving the deadbeat controller at
/// every point: a brute-force treatment of the full co-design on tiny
/// fixtures (at most 4 grid axes).
OracleResult brute_force_codesign(const CodesignProblem& p, const GridSpec& grid);

/// Closed-form step-tracking error norm from a q-coefficient vector.
double l2_sq_from_q(const std::vector<double>& q, int l, int nu, double amplitude);

}  // namespace mcn

#endif
