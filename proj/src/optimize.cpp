#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mcn {

namespace {

constexpr double kAlphaFloor = 1e-9;      // keeps the rate logarithm defined
constexpr double kStage2Residual = 1e-8;  // acceptance threshold for the linear stage

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Convolution matrix: (p * x)_i as rows over the coefficients of x.
Eigen::MatrixXd conv_matrix(const Polynomial& p, int x_len) {
    const int out_len = p.degree() + x_len;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(out_len, x_len);
    for (int j = 0; j < x_len; ++j) {
        for (int i = 0; i <= p.degree(); ++i) m(i + j, j) = p.coeff(i);
    }
    return m;
}

// Partial-sum row: S_k = sum of coefficients entering by sample k, i.e. the
// top slice coeff[l-k ..] of an ascending length-`len` coefficient vector.
Eigen::RowVectorXd partial_sum_row(int len, int l, int k) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(len);
    for (int idx = std::max(0, l - k); idx < len; ++idx) row(idx) = 1.0;
    return row;
}

struct ThetaMap {
    std::vector<std::string> names;
    Eigen::MatrixXd to_poly;  // theta -> ascending coefficients of N_C' * N_GR
    int poly_len = 0;
};

// Model 2: theta entries are the free coefficients of N_C' * N_GR.
ThetaMap theta_map_model2(const CodesignProblem& p) {
    const auto delays = p.delays_r();
    const int dbar = delays.back();
    const int min_d = delays.front();
    ThetaMap map;
    map.poly_len = p.s + dbar - min_d + 1;
    if (p.s == 0) {
        map.to_poly = Eigen::MatrixXd::Zero(map.poly_len, static_cast<long>(delays.size()));
        for (size_t i = 0; i < delays.size(); ++i) {
            map.to_poly(dbar - delays[i], static_cast<long>(i)) = 1.0;
            map.names.push_back("theta(" + std::to_string(delays[i]) + ")");
        }
    } else {
        // With a controller numerator of positive degree the products no
        // longer span a coordinate subspace; optimizing over the full
        // coefficient vector is a relaxation.
        map.to_poly = Eigen::MatrixXd::Identity(map.poly_len, map.poly_len);
        for (int i = 0; i < map.poly_len; ++i) map.names.push_back("theta[" + std::to_string(i) + "]");
    }
    return map;
}

// Model 1: theta entries are per-edge products d0 * alpha_e; gamma values are
// the class sums over the final edges.
ThetaMap theta_map_model1(const CodesignProblem& p) {
    const auto& g = *p.ctrl.graph;
    const auto delays = p.delays_r();
    const int dbar = delays.back();
    const int min_d = delays.front();
    const auto by_class = final_edges_by_class(g, p.ctrl.sched);
    ThetaMap map;
    map.poly_len = dbar - min_d + 1;
    map.to_poly = Eigen::MatrixXd::Zero(map.poly_len, g.edge_count());
    for (const auto& [d, edges] : by_class) {
        for (int e : edges) map.to_poly(dbar - d, e) = 1.0;
    }
    for (int e = 0; e < g.edge_count(); ++e) map.names.push_back(g.edge_name(e));
    return map;
}

}  // namespace

std::optional<double> CodesignNetwork::bound_for(const std::string& element) const {
    auto it = rate_bounds_hz.find(element);
    if (it != rate_bounds_hz.end()) return it->second;
    if (uniform_rate_bound_hz > 0.0) return uniform_rate_bound_hz;
    return std::nullopt;
}

std::vector<int> CodesignProblem::delays_r() const {
    return induced_delays(*ctrl.graph, ctrl.sched);
}

std::vector<int> CodesignProblem::delays_o() const {
    if (!obs) return {0};
    return induced_delays(*obs->graph, obs->sched);
}

int CodesignProblem::m() const {
    return controller_core_degree(s, plant.stable.degree(), ddr(), ddo());
}

ConvexifiabilityReport check_convexifiable(const CodesignProblem& p) {
    ConvexifiabilityReport rep;
    rep.model = p.model;
    rep.s = p.s;
    rep.delays_r = p.delays_r().size();
    rep.delays_o = p.delays_o().size();
    rep.naive = rep.delays_r == 1 && rep.delays_o == 1;
    rep.s_is_scalar = p.s == 0;
    rep.separation_r = check_delay_separation(*p.ctrl.graph, p.ctrl.sched);
    if (p.obs) rep.separation_o = check_delay_separation(*p.obs->graph, p.obs->sched);
    rep.stage2_guaranteed = static_cast<int>(rep.delays_o) >= p.plant.r + 1;

    std::ostringstream detail;
    if (p.gamma_r_pinned) {
        rep.convexifiable = true;
        rep.verdict = "pinned";
        detail << "network numerators pinned; deadbeat synthesis is a linear solve";
    } else if (rep.naive) {
        rep.convexifiable = true;
        rep.verdict = "naive";
        detail << "single delay on both networks; rates decouple and the joint "
                  "(c, d) program is convex";
    } else if (p.model == 2) {
        rep.convexifiable = rep.s_is_scalar;
        rep.verdict = rep.convexifiable ? "model2" : "not-convex";
        detail << (rep.s_is_scalar ? "scalar controller numerator"
                                   : "controller numerator degree must be zero");
        if (!rep.stage2_guaranteed) {
            detail << "; observability delays fewer than r+1, the linear stage may fail";
        }
    } else {
        const bool sep = rep.separation_r.separated && (!p.obs || rep.separation_o.separated);
        rep.convexifiable = rep.s_is_scalar && sep;
        rep.verdict = rep.convexifiable ? "model1" : "not-convex";
        if (!rep.s_is_scalar) detail << "controller numerator degree must be zero; ";
        if (!rep.separation_r.separated) {
            detail << "controllability delays merge at node '"
                   << p.ctrl.graph->node_name(rep.separation_r.witness_node) << "'; ";
        }
        if (p.obs && !rep.separation_o.separated) {
            detail << "observability delays merge at node '"
                   << p.obs->graph->node_name(rep.separation_o.witness_node) << "'; ";
        }
        if (rep.convexifiable) detail << "positive-weight branch applies";
    }
    rep.detail = detail.str();
    return rep;
}

double ConvexStage::value(const Eigen::VectorXd& theta) const {
    return 0.5 * theta.dot(qp.H * theta) + qp.g.dot(theta) + objective_constant;
}

double ConvexStage::max_violation(const Eigen::VectorXd& theta) const {
    double v = 0.0;
    if (qp.a_eq.rows() > 0) v = (qp.a_eq * theta - qp.b_eq).cwiseAbs().maxCoeff();
    if (qp.a_in.rows() > 0) v = std::max(v, (qp.a_in * theta - qp.b_in).maxCoeff());
    return v;
}

ConvexStage build_stage1(const CodesignProblem& p, int branch_sign) {
    if (p.model == 1 && p.s != 0) {
        throw StructureError("model-1 stage 1 requires a scalar controller numerator");
    }
    const ThetaMap map = p.model == 1 ? theta_map_model1(p) : theta_map_model2(p);
    const int n = static_cast<int>(map.to_poly.cols());
    const int l = p.response_time();
    const int nu = p.nu();
    const double a = p.amplitude;

    ConvexStage st;
    st.var_names = map.names;
    st.branch_sign = branch_sign;
    st.l = l;
    st.nu = nu;
    st.amplitude = a;

    const Eigen::MatrixXd q_map = conv_matrix(p.plant.numerator, map.poly_len) * map.to_poly;
    st.q_of_theta = q_map;
    const int q_len = static_cast<int>(q_map.rows());

    // Objective: the error samples between the first response and settling.
    const int rows_y = l - nu;
    Eigen::MatrixXd m_y(rows_y, n);
    for (int k = nu; k < l; ++k) m_y.row(k - nu) = partial_sum_row(q_len, l, k) * q_map;
    st.qp.H = 2.0 * a * a * m_y.transpose() * m_y;
    st.qp.g = -2.0 * a * a * m_y.transpose() * Eigen::VectorXd::Ones(rows_y);
    st.objective_constant = a * a * (l + 1);

    // Unit DC gain (finite settling leaves no residual error).
    st.qp.a_eq = partial_sum_row(q_len, l, l) * q_map;
    st.qp.b_eq = Eigen::VectorXd::Constant(1, 1.0);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    auto push = [&](const Eigen::RowVectorXd& r, double b) {
        rows.push_back(r);
        rhs.push_back(b);
    };

    if (std::isfinite(p.overshoot_y_bound)) {
        if (std::abs(a) > p.overshoot_y_bound) {
            throw InfeasibleError("output magnitude bound " + fmt(p.overshoot_y_bound) +
                                  " is below the reference amplitude " + fmt(std::abs(a)));
        }
        for (int k = nu; k < l; ++k) {
            const Eigen::RowVectorXd r = a * (partial_sum_row(q_len, l, k) * q_map);
            push(r, p.overshoot_y_bound);
            push(-r, p.overshoot_y_bound);
        }
    }
    if (std::isfinite(p.overshoot_u_bound)) {
        const Eigen::MatrixXd u_map =
            conv_matrix(p.plant.stable * p.plant.unstable_den, map.poly_len) * map.to_poly;
        const int u_len = static_cast<int>(u_map.rows());
        for (int k = l - (u_len - 1); k <= l; ++k) {
            const Eigen::RowVectorXd r = a * (partial_sum_row(u_len, l, k) * u_map);
            push(r, p.overshoot_u_bound);
            push(-r, p.overshoot_u_bound);
        }
    }

    if (p.model == 1) {
        const auto& g = *p.ctrl.graph;
        const double sgn = branch_sign >= 0 ? 1.0 : -1.0;
        for (int e = 0; e < g.edge_count(); ++e) {
            Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
            r(e) = -sgn;
            push(r, -kAlphaFloor);  // sgn * beta_e >= eps
        }
        for (int e = 0; e < g.edge_count(); ++e) {
            const auto bound = p.ctrl.bound_for(g.edge_name(e));
            if (!bound) continue;
            const RateBound rb =
                RateBound::from_bound(*bound, p.ctrl.quant, p.ctrl.sched.slot_duration);
            if (rb.kappa < 1.0) {
                throw InfeasibleError("rate bound " + fmt(*bound) + " Hz on " + g.edge_name(e) +
                                      " is below the minimum rate the quantizer needs");
            }
            if (!std::isfinite(rb.kappa)) continue;
            for (int other = 0; other < g.edge_count(); ++other) {
                if (other == e) continue;
                Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
                r(e) = sgn;
                r(other) = -sgn * rb.kappa;
                push(r, 0.0);  // |beta_e| <= kappa_e |beta_other|
            }
        }
    }

    st.qp.a_in = Eigen::MatrixXd::Zero(static_cast<long>(rows.size()), n);
    st.qp.b_in = Eigen::VectorXd::Zero(static_cast<long>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        st.qp.a_in.row(static_cast<long>(i)) = rows[i];
        st.qp.b_in(static_cast<long>(i)) = rhs[i];
    }
    return st;
}

namespace {

struct LinearSystem {
    Eigen::MatrixXd a;
    Eigen::VectorXd b;
    std::vector<std::string> unknowns;
};

// Coefficient-wise linear system for the settling identity
//   fixed + sum_j x_j * column_j = z^{m+r+1}.
LinearSystem deadbeat_system(const Polynomial& fixed, const std::vector<Polynomial>& columns,
                             int top_degree) {
    LinearSystem sys;
    const int rows = top_degree + 1;
    sys.a = Eigen::MatrixXd::Zero(rows, static_cast<long>(columns.size()));
    for (size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].degree() > top_degree) throw StructureError("deadbeat column too long");
        for (int i = 0; i <= columns[j].degree(); ++i) {
            sys.a(i, static_cast<long>(j)) = columns[j].coeff(i);
        }
    }
    sys.b = Eigen::VectorXd::Zero(rows);
    sys.b(top_degree) = 1.0;
    if (fixed.degree() > top_degree) throw StructureError("deadbeat fixed part too long");
    for (int i = 0; i <= fixed.degree(); ++i) sys.b(i) -= fixed.coeff(i);
    return sys;
}

Stage2Result solve_linear(const LinearSystem& sys) {
    Stage2Result out;
    auto svd = sys.a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd x = svd.solve(sys.b);
    const double scale = std::max(1.0, sys.b.cwiseAbs().maxCoeff());
    out.residual = (sys.a * x - sys.b).cwiseAbs().maxCoeff() / scale;
    out.ok = out.residual <= kStage2Residual;
    out.c.assign(x.data(), x.data() + x.size());
    return out;
}

Polynomial theta_poly(const CodesignProblem& p, const std::vector<double>& theta) {
    const ThetaMap map = p.model == 1 ? theta_map_model1(p) : theta_map_model2(p);
    if (static_cast<int>(theta.size()) != map.to_poly.cols()) {
        throw StructureError("theta dimension mismatch");
    }
    Eigen::VectorXd t(static_cast<long>(theta.size()));
    for (size_t i = 0; i < theta.size(); ++i) t(static_cast<long>(i)) = theta[i];
    const Eigen::VectorXd coeffs = map.to_poly * t;
    return Polynomial(std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
}

}  // namespace

Stage2Result solve_stage2(const CodesignProblem& p, const std::vector<double>& theta) {
    const int m = p.m();
    const int top = m + p.plant.r + 1;
    const Polynomial q_prod = p.plant.numerator * theta_poly(p, theta);
    const Polynomial zm1{-1.0, 1.0};

    std::vector<Polynomial> columns;
    std::vector<std::string> names;
    for (int j = 0; j < m; ++j) {
        columns.push_back(zm1 * Polynomial::monomial(j) * p.plant.unstable_den);
        names.push_back("c" + std::to_string(j));
    }
    Polynomial fixed = zm1 * Polynomial::monomial(m) * p.plant.unstable_den;

    const auto delays_o = p.delays_o();
    const bool free_gamma_o = p.obs.has_value() && !p.gamma_o_pinned;
    if (free_gamma_o) {
        const int dbar_o = delays_o.back();
        for (int d : delays_o) {
            columns.push_back(q_prod * Polynomial::monomial(dbar_o - d));
            names.push_back("gamma_o(" + std::to_string(d) + ")");
        }
    } else if (p.obs) {
        fixed = fixed + q_prod * NetworkDynamics::from_gamma(delays_o, *p.gamma_o_pinned)
                                     .numerator();
    } else {
        fixed = fixed + q_prod;
    }

    LinearSystem sys = deadbeat_system(fixed, columns, top);
    Stage2Result out = solve_linear(sys);
    std::vector<double> x = out.c;
    out.c.assign(x.begin(), x.begin() + m);
    if (free_gamma_o) {
        out.gamma_o = std::vector<double>(x.begin() + m, x.end());
    } else if (p.gamma_o_pinned) {
        out.gamma_o = p.gamma_o_pinned;
    }
    if (!out.ok) {
        out.note = "the linear stage cannot complete the frozen stage-1 products (residual " +
                   fmt(out.residual) + "); the stage-1 value remains a lower bound and the "
                   "unrelaxed problem might still be feasible";
    }
    return out;
}

Stage2Result solve_pinned(const CodesignProblem& p) {
    if (!p.gamma_r_pinned) throw StructureError("solve_pinned requires pinned gamma targets");
    if (p.obs && !p.gamma_o_pinned) {
        throw StructureError("pinned synthesis with an observability network needs pinned "
                             "observability gamma targets too");
    }
    const int m = p.m();
    const int top = m + p.plant.r + 1;
    const Polynomial n_gr =
        NetworkDynamics::from_gamma(p.delays_r(), *p.gamma_r_pinned).numerator();
    const Polynomial n_go = p.obs ? NetworkDynamics::from_gamma(p.delays_o(), *p.gamma_o_pinned)
                                        .numerator()
                                  : Polynomial::one();
    const Polynomial zm1{-1.0, 1.0};

    std::vector<Polynomial> columns;
    for (int j = 0; j < m; ++j) {
        columns.push_back(zm1 * Polynomial::monomial(j) * p.plant.unstable_den);
    }
    const Polynomial d_base = n_gr * p.plant.numerator * n_go;
    for (int j = 0; j <= p.s; ++j) columns.push_back(Polynomial::monomial(j) * d_base);
    const Polynomial fixed = zm1 * Polynomial::monomial(m) * p.plant.unstable_den;

    Stage2Result out = solve_linear(deadbeat_system(fixed, columns, top));
    std::vector<double> x = out.c;
    out.c.assign(x.begin(), x.begin() + m);
    out.d.assign(x.begin() + m, x.end());
    if (p.gamma_o_pinned) out.gamma_o = p.gamma_o_pinned;
    if (!out.ok) {
        out.note = "deadbeat identity has no solution at the pinned network numerators "
                   "(residual " + fmt(out.residual) + ")";
    }
    return out;
}

double l2_sq_from_q(const std::vector<double>& q, int l, int nu, double amplitude) {
    double acc = amplitude * amplitude * (1.0 + nu);
    double partial = 0.0;
    for (int k = nu; k < l; ++k) {
        const int idx = l - k;
        if (idx < static_cast<int>(q.size())) partial += q[static_cast<size_t>(idx)];
        const double err = amplitude * partial - amplitude;
        acc += err * err;
    }
    return acc;
}

namespace {

std::map<int, double> gamma_map(const std::vector<int>& delays, const std::vector<double>& g) {
    if (delays.size() != g.size()) throw StructureError("gamma vector length mismatch");
    std::map<int, double> out;
    for (size_t i = 0; i < delays.size(); ++i) out[delays[i]] = g[i];
    return out;
}

// Node alpha targets for realizing pinned/recovered gammas under model 2.
std::vector<double> node_alpha_targets(const RadioGraph& g, const Scheduling& sched,
                                       const std::map<int, double>& gamma, AlphaPreset preset) {
    std::vector<double> targets(static_cast<size_t>(g.node_count()), 1.0);
    if (preset == AlphaPreset::GammaMass) {
        const auto classes = node_path_classes(g, sched);
        for (int v = 0; v < g.node_count(); ++v) {
            if (v == g.source() || v == g.sink()) continue;
            const int fastest = *classes[static_cast<size_t>(v)].begin();
            targets[static_cast<size_t>(v)] = gamma.at(fastest);
        }
    }
    targets[static_cast<size_t>(g.source())] = 1.0;
    targets[static_cast<size_t>(g.sink())] = 0.0;  // unused
    return targets;
}

// Spread observability gamma over per-edge alphas for model 1: the class mass
// splits evenly over its final edges, interior edges sit at the geometric
// mean magnitude so the rate spread stays small.
std::vector<double> edge_alpha_targets_from_gamma(const RadioGraph& g, const Scheduling& sched,
                                                  const std::map<int, double>& gamma) {
    const auto by_class = final_edges_by_class(g, sched);
    std::vector<double> alpha(static_cast<size_t>(g.edge_count()), 0.0);
    double max_mag = 0.0;
    double min_mag = std::numeric_limits<double>::infinity();
    for (const auto& [d, edges] : by_class) {
        const double share = gamma.at(d) / static_cast<double>(edges.size());
        for (int e : edges) alpha[static_cast<size_t>(e)] = share;
        const double mag = std::abs(share);
        if (mag > 0.0) {
            max_mag = std::max(max_mag, mag);
            min_mag = std::min(min_mag, mag);
        }
    }
    if (max_mag == 0.0) throw InfeasibleError("all observability gamma targets vanish");
    const double interior = std::sqrt(max_mag * min_mag);
    for (int e = 0; e < g.edge_count(); ++e) {
        if (g.edge(e).to != g.sink()) alpha[static_cast<size_t>(e)] = interior;
    }
    return alpha;
}

std::map<std::string, double> named_node_alphas(const RadioGraph& g, const NodeAlphas& a) {
    std::map<std::string, double> out;
    for (int v = 0; v < g.node_count(); ++v) {
        if (v == g.sink()) continue;
        out[g.node_name(v)] = a.total[static_cast<size_t>(v)];
    }
    return out;
}

std::map<std::string, double> named_link_alphas(const RadioGraph& g, const LinkAlphas& a) {
    std::map<std::string, double> out;
    for (int e = 0; e < g.edge_count(); ++e) out[g.edge_name(e)] = a.total[static_cast<size_t>(e)];
    return out;
}

void check_rate_bounds(const CodesignNetwork& net, const RateReport& report,
                       const std::string& side) {
    for (const auto& [name, rate] : report.rates_hz) {
        const auto bound = net.bound_for(name);
        if (bound && rate > *bound + 1e-9) {
            throw InfeasibleError("recovered " + side + " rate on " + name + " is " + fmt(rate) +
                                  " Hz, above the bound " + fmt(*bound) + " Hz");
        }
    }
}

struct RealizedNetwork {
    std::vector<double> weights;
    NetworkDynamics dynamics;
    std::map<std::string, double> alphas;
    RateReport rates;
};

// Design weights hitting the target gamma, then recompute profile, alphas and
// rates from them.
RealizedNetwork realize_network(const CodesignNetwork& net, int model,
                                const std::map<int, double>& target_gamma,
                                AlphaPreset preset,
                                const std::vector<double>* edge_alpha_targets) {
    const auto& g = *net.graph;
    RealizedNetwork out;
    if (model == 1) {
        std::vector<double> targets =
            edge_alpha_targets ? *edge_alpha_targets
                               : edge_alpha_targets_from_gamma(g, net.sched, target_gamma);
        out.weights = weights_from_alpha_links(g, targets);
    } else {
        out.weights = weights_from_gamma_model2(
            g, net.sched, target_gamma,
            node_alpha_targets(g, net.sched, target_gamma, preset));
    }

    RadioGraph weighted = g;
    weighted.set_weights(out.weights);
    const auto profile = delay_profile(weighted, net.sched);
    out.dynamics = NetworkDynamics::from_profile(profile);

    double scale = 0.0;
    for (const auto& [_, v] : target_gamma) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1.0);
    for (const auto& [d, v] : target_gamma) {
        if (std::abs(out.dynamics.gamma_at(d) - v) > 1e-9 * scale) {
            throw NumericalError("recovered weights do not reproduce the gamma targets");
        }
    }

    if (model == 1) {
        out.alphas = named_link_alphas(g, alpha_links(weighted, net.sched));
    } else {
        out.alphas = named_node_alphas(g, alpha_nodes(weighted, net.sched));
    }
    out.rates = rates(out.alphas, net.quant, net.sched.slot_duration, model);
    return out;
}

CodesignSolution finish_solution(const CodesignProblem& p, const std::vector<double>& c,
                                 const std::vector<double>& d,
                                 const std::map<int, double>& gamma_r,
                                 const std::optional<std::map<int, double>>& gamma_o,
                                 const std::vector<double>* edge_alpha_r,
                                 StageDiagnostics diag) {
    CodesignSolution sol;
    sol.diag = std::move(diag);

    RealizedNetwork ctrl =
        realize_network(p.ctrl, p.model, gamma_r, p.alpha_preset, edge_alpha_r);
    sol.weights_r = ctrl.weights;
    sol.alphas_r = ctrl.alphas;
    sol.rates_r = ctrl.rates;
    sol.gr = ctrl.dynamics;
    check_rate_bounds(p.ctrl, sol.rates_r, "controllability");

    if (p.obs) {
        if (!gamma_o) throw StructureError("observability gamma targets missing");
        RealizedNetwork obs = realize_network(*p.obs, p.model, *gamma_o, p.alpha_preset, nullptr);
        sol.weights_o = obs.weights;
        sol.alphas_o = obs.alphas;
        sol.rates_o = obs.rates;
        sol.go = obs.dynamics;
        check_rate_bounds(*p.obs, *sol.rates_o, "observability");
    } else {
        sol.go = NetworkDynamics::identity();
    }

    sol.controller.M = p.plant.stable;
    sol.controller.ddr = p.ddr();
    sol.controller.ddo = p.ddo();
    sol.controller.m = p.m();
    sol.controller.s = static_cast<int>(d.size()) - 1;
    sol.controller.c = c;
    sol.controller.d = d;

    sol.loop = assemble_closed_loop(p.plant, sol.gr, sol.go, sol.controller);
    sol.metrics = step_metrics(sol.loop, p.amplitude);

    if (std::isfinite(p.overshoot_y_bound) &&
        sol.metrics.overshoot_y > p.overshoot_y_bound * (1.0 + 1e-6) + 1e-9) {
        throw InfeasibleError("recomputed output peak " + fmt(sol.metrics.overshoot_y) +
                              " violates the bound " + fmt(p.overshoot_y_bound));
    }
    if (std::isfinite(p.overshoot_u_bound) &&
        sol.metrics.overshoot_u > p.overshoot_u_bound * (1.0 + 1e-6) + 1e-9) {
        throw InfeasibleError("recomputed input peak " + fmt(sol.metrics.overshoot_u) +
                              " violates the bound " + fmt(p.overshoot_u_bound));
    }
    return sol;
}

CodesignSolution codesign_pinned(const CodesignProblem& p) {
    Stage2Result st = solve_pinned(p);
    if (!st.ok) throw InfeasibleError(st.note);
    StageDiagnostics diag;
    diag.path = "pinned";
    diag.stage2_residual = st.residual;

    const auto gamma_r = gamma_map(p.delays_r(), *p.gamma_r_pinned);
    std::optional<std::map<int, double>> gamma_o;
    if (p.obs) gamma_o = gamma_map(p.delays_o(), *p.gamma_o_pinned);
    return finish_solution(p, st.c, st.d, gamma_r, gamma_o, nullptr, std::move(diag));
}

CodesignSolution codesign_naive(const CodesignProblem& p) {
    // Single delay class on both networks: pin unit gamma, solve the joint
    // quadratic program over (c, d) with the settling identity as equality
    // constraints, and assign rates afterwards.
    if (p.s < p.plant.r) {
        throw InfeasibleError(
            "single-delay synthesis needs a controller numerator of degree at least r = " +
            std::to_string(p.plant.r));
    }
    const int m = p.m();
    const int n_c = m;
    const int n_d = p.s + 1;
    const int n = n_c + n_d;
    const int l = p.response_time();
    const int nu = p.nu();
    const double a = p.amplitude;

    // q = conv(N_P, d) * gamma, with gamma = 1.
    Eigen::MatrixXd q_map = Eigen::MatrixXd::Zero(p.plant.numerator.degree() + n_d, n);
    q_map.rightCols(n_d) = conv_matrix(p.plant.numerator, n_d);
    const int q_len = static_cast<int>(q_map.rows());

    QPProblem qp;
    const int rows_y = l - nu;
    Eigen::MatrixXd m_y(rows_y, n);
    for (int k = nu; k < l; ++k) m_y.row(k - nu) = partial_sum_row(q_len, l, k) * q_map;
    qp.H = 2.0 * a * a * m_y.transpose() * m_y;
    qp.g = -2.0 * a * a * m_y.transpose() * Eigen::VectorXd::Ones(rows_y);

    // Settling identity rows over (c, d).
    const Polynomial zm1{-1.0, 1.0};
    std::vector<Polynomial> columns;
    for (int j = 0; j < m; ++j) {
        columns.push_back(zm1 * Polynomial::monomial(j) * p.plant.unstable_den);
    }
    const Polynomial d_base = p.plant.numerator;  // unit gammas on both sides
    for (int j = 0; j <= p.s; ++j) columns.push_back(Polynomial::monomial(j) * d_base);
    const LinearSystem sys = deadbeat_system(
        zm1 * Polynomial::monomial(m) * p.plant.unstable_den, columns, m + p.plant.r + 1);
    qp.a_eq = sys.a;
    qp.b_eq = sys.b;

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    if (std::isfinite(p.overshoot_y_bound)) {
        for (int k = nu; k < l; ++k) {
            const Eigen::RowVectorXd r = a * (partial_sum_row(q_len, l, k) * q_map);
            rows.push_back(r);
            rhs.push_back(p.overshoot_y_bound);
            rows.push_back(-r);
            rhs.push_back(p.overshoot_y_bound);
        }
    }
    if (std::isfinite(p.overshoot_u_bound)) {
        Eigen::MatrixXd u_map = Eigen::MatrixXd::Zero(
            p.plant.stable.degree() + p.plant.r + n_d, n);
        u_map.rightCols(n_d) = conv_matrix(p.plant.stable * p.plant.unstable_den, n_d);
        const int u_len = static_cast<int>(u_map.rows());
        for (int k = l - (u_len - 1); k <= l; ++k) {
            const Eigen::RowVectorXd r = a * (partial_sum_row(u_len, l, k) * u_map);
            rows.push_back(r);
            rhs.push_back(p.overshoot_u_bound);
            rows.push_back(-r);
            rhs.push_back(p.overshoot_u_bound);
        }
    }
    qp.a_in = Eigen::MatrixXd::Zero(static_cast<long>(rows.size()), n);
    qp.b_in = Eigen::VectorXd::Zero(static_cast<long>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
        qp.a_in.row(static_cast<long>(i)) = rows[i];
        qp.b_in(static_cast<long>(i)) = rhs[i];
    }

    const QPResult res = solve_qp(qp);
    if (!res.feasible) {
        throw InfeasibleError("single-delay synthesis infeasible: " + res.certificate);
    }

    std::vector<double> c(res.x.data(), res.x.data() + n_c);
    std::vector<double> d(res.x.data() + n_c, res.x.data() + n);
    StageDiagnostics diag;
    diag.path = "naive";
    diag.qp_iterations = res.iterations;
    diag.kkt_residual = res.kkt_residual;
    Eigen::VectorXd qv = q_map * res.x;
    diag.stage1_value_l2sq =
        l2_sq_from_q(std::vector<double>(qv.data(), qv.data() + qv.size()), l, nu, a);

    const auto gamma_r = gamma_map(p.delays_r(), {1.0});
    std::optional<std::map<int, double>> gamma_o;
    if (p.obs) gamma_o = gamma_map(p.delays_o(), {1.0});

    std::optional<std::vector<double>> edge_targets;
    if (p.model == 1) {
        // unit alphas: minimum rates on every link
        edge_targets = std::vector<double>(static_cast<size_t>(p.ctrl.graph->edge_count()), 1.0);
    }
    return finish_solution(p, c, d, gamma_r, gamma_o,
                           edge_targets ? &*edge_targets : nullptr, std::move(diag));
}

}  // namespace

CodesignSolution codesign(const CodesignProblem& p) {
    if (p.gamma_r_pinned) return codesign_pinned(p);

    const ConvexifiabilityReport rep = check_convexifiable(p);
    if (rep.naive) return codesign_naive(p);
    if (!rep.convexifiable) {
        throw InfeasibleError("co-design is not convexifiable: " + rep.detail);
    }

    struct Branch {
        int sign;
        QPResult res;
        ConvexStage stage;
    };
    std::vector<Branch> ok;
    std::string failures;
    const std::vector<int> signs = p.model == 1 ? std::vector<int>{+1, -1} : std::vector<int>{+1};
    for (int sign : signs) {
        try {
            ConvexStage stage = build_stage1(p, sign);
            QPResult res = solve_qp(stage.qp);
            if (res.feasible) {
                ok.push_back(Branch{sign, std::move(res), std::move(stage)});
            } else {
                failures += "branch " + std::to_string(sign) + ": " + res.certificate + "; ";
            }
        } catch (const InfeasibleError& e) {
            failures += "branch " + std::to_string(sign) + ": " + e.what() + "; ";
        }
    }
    if (ok.empty()) throw InfeasibleError("stage 1 infeasible: " + failures);

    const Branch* best = &ok.front();
    for (const auto& b : ok) {
        if (b.stage.value(b.res.x) < best->stage.value(best->res.x) - 1e-12) best = &b;
    }

    std::vector<double> theta(best->res.x.data(), best->res.x.data() + best->res.x.size());
    Stage2Result st2 = solve_stage2(p, theta);
    if (!st2.ok) {
        throw InfeasibleError("stage 2 infeasible: " + st2.note +
                              " (stage-1 lower bound on the error norm: " +
                              fmt(std::sqrt(best->stage.value(best->res.x))) + ")");
    }

    StageDiagnostics diag;
    diag.path = p.model == 1 ? "model1" : "model2";
    diag.branch = best->sign;
    diag.qp_iterations = best->res.iterations;
    diag.kkt_residual = best->res.kkt_residual;
    diag.stage1_value_l2sq = best->stage.value(best->res.x);
    diag.stage2_residual = st2.residual;

    std::map<int, double> gamma_r;
    std::vector<double> d_vec;
    std::optional<std::vector<double>> edge_alphas;
    const double d0 = best->sign >= 0 ? 1.0 : -1.0;
    d_vec = {d0};
    if (p.model == 1) {
        // theta entries are d0 * alpha per edge
        edge_alphas = std::vector<double>(theta.size());
        for (size_t i = 0; i < theta.size(); ++i) (*edge_alphas)[i] = theta[i] / d0;
        const auto by_class = final_edges_by_class(*p.ctrl.graph, p.ctrl.sched);
        for (const auto& [d, edges] : by_class) {
            double sum = 0.0;
            for (int e : edges) sum += (*edge_alphas)[static_cast<size_t>(e)];
            gamma_r[d] = sum;
        }
    } else {
        const auto delays = p.delays_r();
        for (size_t i = 0; i < delays.size(); ++i) gamma_r[delays[i]] = theta[i] / d0;
    }
    std::optional<std::map<int, double>> gamma_o;
    if (p.obs) gamma_o = gamma_map(p.delays_o(), *st2.gamma_o);

    CodesignSolution sol =
        finish_solution(p, st2.c, d_vec, gamma_r, gamma_o,
                        edge_alphas ? &*edge_alphas : nullptr, std::move(diag));

    // The reported metrics are recomputed end to end; they must agree with
    // the stage values.
    if (std::abs(sol.metrics.l2_sq - sol.diag.stage1_value_l2sq) >
        1e-6 * std::max(1.0, std::abs(sol.diag.stage1_value_l2sq))) {
        throw NumericalError("recomputed error norm disagrees with the optimization stage");
    }
    return sol;
}

OracleResult oracle_stage1(const CodesignProblem& p, const GridSpec& grid) {
    OracleResult out;
    double best_sq = std::numeric_limits<double>::infinity();
    const std::vector<int> signs = p.model == 1 ? std::vector<int>{+1, -1} : std::vector<int>{+1};
    for (int sign : signs) {
        ConvexStage stage;
        try {
            stage = build_stage1(p, sign);
        } catch (const InfeasibleError&) {
            continue;
        }
        const int n = static_cast<int>(stage.qp.H.rows());
        if (n > 4) throw StructureError("stage-1 oracle supports at most 4 variables");

        // Eliminate the DC equality through its largest-magnitude pivot.
        const Eigen::RowVectorXd eq = stage.qp.a_eq.row(0);
        int pivot = 0;
        eq.cwiseAbs().maxCoeff(&pivot);
        if (std::abs(eq(pivot)) < 1e-12) throw NumericalError("degenerate DC equality");

        std::vector<int> free_idx;
        for (int i = 0; i < n; ++i) {
            if (i != pivot) free_idx.push_back(i);
        }
        const int free_dims = n - 1;
        const long npts = grid.points_per_axis;
        const double step =
            free_dims == 0 || npts < 2 ? 0.0
                                       : (grid.hi - grid.lo) / static_cast<double>(npts - 1);

        Eigen::VectorXd theta(n);
        auto eval_at = [&](const std::vector<long>& idx) -> std::optional<double> {
            for (int i = 0; i < free_dims; ++i) {
                theta(free_idx[static_cast<size_t>(i)]) =
                    grid.lo + step * static_cast<double>(idx[static_cast<size_t>(i)]);
            }
            double acc = 1.0;  // rhs of the DC equality
            for (int i = 0; i < free_dims; ++i) {
                acc -= eq(free_idx[static_cast<size_t>(i)]) * theta(free_idx[static_cast<size_t>(i)]);
            }
            theta(pivot) = acc / eq(pivot);
            if (stage.qp.a_in.rows() > 0 &&
                (stage.qp.a_in * theta - stage.qp.b_in).maxCoeff() > 1e-9) {
                return std::nullopt;
            }
            return stage.value(theta);
        };

        long total = 1;
        for (int i = 0; i < free_dims; ++i) total *= npts;

        std::vector<long> idx(static_cast<size_t>(free_dims), 0);
        std::vector<long> best_idx;
        bool branch_has_best = false;
        for (long count = 0; count < total; ++count) {
            ++out.evaluated;
            const auto value = eval_at(idx);
            if (value) {
                out.any_feasible = true;
                if (*value < best_sq) {
                    best_sq = *value;
                    best_idx = idx;
                    branch_has_best = true;
                    out.best_point.assign(theta.data(), theta.data() + n);
                }
            }
            for (int i = free_dims - 1; i >= 0; --i) {
                if (++idx[static_cast<size_t>(i)] < npts) break;
                idx[static_cast<size_t>(i)] = 0;
            }
        }

        if (branch_has_best && free_dims > 0) {
            double variation = 0.0;
            for (int i = 0; i < free_dims; ++i) {
                for (int delta : {-1, +1}) {
                    std::vector<long> nb = best_idx;
                    nb[static_cast<size_t>(i)] += delta;
                    if (nb[static_cast<size_t>(i)] < 0 || nb[static_cast<size_t>(i)] >= npts)
                        continue;
                    const auto value = eval_at(nb);
                    if (value) {
                        variation = std::max(
                            variation, std::abs(std::sqrt(*value) - std::sqrt(best_sq)));
                    }
                }
            }
            out.cell_variation = variation;
        }
    }
    if (out.any_feasible) out.best_value_l2 = std::sqrt(best_sq);
    return out;
}

OracleResult brute_force_codesign(const CodesignProblem& p, const GridSpec& grid) {
    const auto delays = p.delays_r();
    const int dims = static_cast<int>(delays.size());
    if (dims > 4) throw StructureError("brute-force oracle supports at most 4 grid axes");

    const int m = p.m();
    const int l = p.response_time();
    const int nu = p.nu();
    const double a = p.amplitude;
    const int top = m + p.plant.r + 1;
    const Polynomial zm1{-1.0, 1.0};
    if (p.obs && !p.gamma_o_pinned) {
        throw StructureError("brute-force oracle needs pinned observability gammas");
    }
    const Polynomial n_go =
        p.obs ? NetworkDynamics::from_gamma(p.delays_o(), *p.gamma_o_pinned).numerator()
              : Polynomial::one();

    // c columns of the settling identity do not move with gamma; precompute.
    std::vector<Polynomial> c_columns;
    for (int j = 0; j < m; ++j) {
        c_columns.push_back(zm1 * Polynomial::monomial(j) * p.plant.unstable_den);
    }
    const Polynomial fixed = zm1 * Polynomial::monomial(m) * p.plant.unstable_den;

    // Rate machinery (only when bounds are configured).
    const bool check_rates = p.ctrl.uniform_rate_bound_hz > 0.0 || !p.ctrl.rate_bounds_hz.empty();
    std::vector<int> fastest_class;
    if (check_rates && p.model == 2) {
        const auto classes = node_path_classes(*p.ctrl.graph, p.ctrl.sched);
        fastest_class.resize(classes.size(), 0);
        for (size_t v = 0; v < classes.size(); ++v) {
            fastest_class[v] = classes[v].empty() ? 0 : *classes[v].begin();
        }
    }
    std::map<int, std::vector<int>> by_class;
    if (check_rates && p.model == 1) by_class = final_edges_by_class(*p.ctrl.graph, p.ctrl.sched);

    auto rates_feasible = [&](const std::map<int, double>& gamma) {
        std::map<std::string, double> alphas;
        const auto& g = *p.ctrl.graph;
        try {
            if (p.model == 2) {
                const auto targets = [&] {
                    std::vector<double> t(static_cast<size_t>(g.node_count()), 1.0);
                    if (p.alpha_preset == AlphaPreset::GammaMass) {
                        for (int v = 0; v < g.node_count(); ++v) {
                            if (v == g.source() || v == g.sink()) continue;
                            t[static_cast<size_t>(v)] =
                                gamma.at(fastest_class[static_cast<size_t>(v)]);
                        }
                    }
                    return t;
                }();
                for (int v = 0; v < g.node_count(); ++v) {
                    if (v == g.sink()) continue;
                    alphas[g.node_name(v)] =
                        v == g.source() ? 1.0 : targets[static_cast<size_t>(v)];
                }
            } else {
                const auto targets = edge_alpha_targets_from_gamma(g, p.ctrl.sched, gamma);
                for (int e = 0; e < g.edge_count(); ++e) {
                    alphas[g.edge_name(e)] = targets[static_cast<size_t>(e)];
                }
            }
            const RateReport rep =
                rates(alphas, p.ctrl.quant, p.ctrl.sched.slot_duration, p.model);
            for (const auto& [name, rate] : rep.rates_hz) {
                const auto bound = p.ctrl.bound_for(name);
                if (bound && rate > *bound + 1e-9) return false;
            }
        } catch (const Error&) {
            return false;  // zero alphas and similar degeneracies
        }
        return true;
    };

    const long npts = grid.points_per_axis;
    const double step = npts < 2 ? 0.0 : (grid.hi - grid.lo) / static_cast<double>(npts - 1);
    long total = 1;
    for (int i = 0; i < dims; ++i) total *= npts;

    auto eval_at = [&](const std::vector<long>& idx) -> std::optional<double> {
        std::map<int, double> gamma;
        std::vector<double> gamma_vec(static_cast<size_t>(dims));
        for (int i = 0; i < dims; ++i) {
            const double v = grid.lo + step * static_cast<double>(idx[static_cast<size_t>(i)]);
            gamma[delays[static_cast<size_t>(i)]] = v;
            gamma_vec[static_cast<size_t>(i)] = v;
        }
        const Polynomial n_gr = NetworkDynamics::from_gamma(delays, gamma_vec).numerator();

        std::vector<Polynomial> columns = c_columns;
        const Polynomial d_base = n_gr * p.plant.numerator * n_go;
        for (int j = 0; j <= p.s; ++j) columns.push_back(Polynomial::monomial(j) * d_base);
        const Stage2Result st = solve_linear(deadbeat_system(fixed, columns, top));
        if (!st.ok) return std::nullopt;
        const std::vector<double> d(st.c.begin() + m, st.c.end());

        const Polynomial q_poly = Polynomial(d) * n_gr * p.plant.numerator;
        const auto& q = q_poly.coeffs();
        const double l2sq = l2_sq_from_q(q, l, nu, a);

        // transient peaks straight off the partial sums
        if (std::isfinite(p.overshoot_y_bound)) {
            double partial = 0.0;
            for (int k = nu; k <= l; ++k) {
                const int i = l - k;
                if (i < static_cast<int>(q.size())) partial += q[static_cast<size_t>(i)];
                if (std::abs(a * partial) > p.overshoot_y_bound) return std::nullopt;
            }
        }
        if (std::isfinite(p.overshoot_u_bound)) {
            const Polynomial u_poly =
                p.plant.stable * Polynomial(d) * n_gr * p.plant.unstable_den;
            const auto& un = u_poly.coeffs();
            double partial = 0.0;
            for (int k = l - (static_cast<int>(un.size()) - 1); k <= l; ++k) {
                const int i = l - k;
                if (i >= 0 && i < static_cast<int>(un.size())) partial += un[static_cast<size_t>(i)];
                if (std::abs(a * partial) > p.overshoot_u_bound) return std::nullopt;
            }
        }
        if (check_rates && !rates_feasible(gamma)) return std::nullopt;
        return l2sq;
    };

    OracleResult out;
    double best_sq = std::numeric_limits<double>::infinity();
    std::vector<long> idx(static_cast<size_t>(dims), 0);
    std::vector<long> best_idx;
    for (long count = 0; count < total; ++count) {
        ++out.evaluated;
        const auto value = eval_at(idx);
        if (value) {
            out.any_feasible = true;
            if (*value < best_sq) {
                best_sq = *value;
                best_idx = idx;
                out.best_point.resize(static_cast<size_t>(dims));
                for (int i = 0; i < dims; ++i) {
                    out.best_point[static_cast<size_t>(i)] =
                        grid.lo + step * static_cast<double>(idx[static_cast<size_t>(i)]);
                }
            }
        }
        for (int i = dims - 1; i >= 0; --i) {
            if (++idx[static_cast<size_t>(i)] < npts) break;
            idx[static_cast<size_t>(i)] = 0;
        }
    }

    if (out.any_feasible) {
        out.best_value_l2 = std::sqrt(best_sq);
        double variation = 0.0;
        for (int i = 0; i < dims; ++i) {
            for (int delta : {-1, +1}) {
                std::vector<long> nb = best_idx;
                nb[static_cast<size_t>(i)] += delta;
                if (nb[static_cast<size_t>(i)] < 0 || nb[static_cast<size_t>(i)] >= npts) continue;
                const auto value = eval_at(nb);
                if (value) {
                    variation =
                        std::max(variation, std::abs(std::sqrt(*value) - out.best_value_l2));
                }
            }
        }
        out.cell_variation = variation;
    }
    return out;
}

}  // namespace mcn
