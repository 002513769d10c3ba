#include "synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace mcn {

PlantSplit make_plant_split(const RationalTF& discrete_plant, double boundary_tol) {
    const auto split = split_stable(discrete_plant, boundary_tol);
    PlantSplit out;
    out.stable = split.stable_part;
    out.unstable_den = split.unstable_part_den;
    out.r = split.r;
    // Fold the denominator's leading coefficient into the numerator so both
    // denominator factors stay monic.
    out.numerator = discrete_plant.num * (1.0 / discrete_plant.den.leading());
    return out;
}

NetworkDynamics NetworkDynamics::from_profile(const DelayProfile& p) {
    NetworkDynamics out;
    out.delays = p.delays;
    out.gamma.clear();
    for (int d : p.delays) out.gamma[d] = p.gamma_at(d);
    return out;
}

NetworkDynamics NetworkDynamics::from_gamma(const std::vector<int>& delays,
                                            const std::vector<double>& gamma) {
    if (delays.empty() || delays.size() != gamma.size()) {
        throw StructureError("delay and gamma vectors must align and be nonempty");
    }
    NetworkDynamics out;
    out.delays = delays;
    std::sort(out.delays.begin(), out.delays.end());
    if (std::adjacent_find(out.delays.begin(), out.delays.end()) != out.delays.end()) {
        throw StructureError("duplicate delay value");
    }
    out.gamma.clear();
    for (size_t i = 0; i < delays.size(); ++i) out.gamma[delays[i]] = gamma[i];
    return out;
}

double NetworkDynamics::gamma_at(int d) const {
    auto it = gamma.find(d);
    return it == gamma.end() ? 0.0 : it->second;
}

std::vector<double> NetworkDynamics::gamma_vector() const {
    std::vector<double> out;
    out.reserve(delays.size());
    for (int d : delays) out.push_back(gamma_at(d));
    return out;
}

Polynomial NetworkDynamics::numerator() const {
    std::vector<double> coeffs(static_cast<size_t>(max_delay() - min_delay()) + 1, 0.0);
    for (int d : delays) coeffs[static_cast<size_t>(max_delay() - d)] = gamma_at(d);
    return Polynomial(std::move(coeffs));
}

void ControllerStructure::validate() const {
    if (static_cast<int>(c.size()) != m) throw StructureError("controller c has wrong length");
    if (static_cast<int>(d.size()) != s + 1) throw StructureError("controller d has wrong length");
    if (m + 1 != s + M.degree() + ddr + ddo) {
        throw StructureError("controller degrees violate m + 1 = s + deg(M) + ddr + ddo");
    }
}

Polynomial ControllerStructure::den_core() const {
    std::vector<double> coeffs = c;
    coeffs.push_back(1.0);
    return Polynomial(std::move(coeffs));
}

Polynomial ControllerStructure::den_cprime() const {
    return Polynomial{-1.0, 1.0} * den_core();
}

RationalTF ControllerStructure::controller_tf() const {
    return RationalTF(M * Polynomial::monomial(ddr + ddo) * num_cprime(), den_cprime());
}

int controller_core_degree(int s, int deg_m, int ddr, int ddo) {
    const int m = s + deg_m + ddr + ddo - 1;
    if (m < 0) throw StructureError("controller core degree would be negative");
    return m;
}

ClosedLoop assemble_closed_loop(const PlantSplit& plant, const NetworkDynamics& gr,
                                const NetworkDynamics& go, const ControllerStructure& ctrl) {
    ctrl.validate();
    if (!ctrl.M.near_equal(plant.stable, 1e-9)) {
        throw StructureError("controller does not cancel the plant's stable factor");
    }
    if (ctrl.ddr != gr.max_delay() || ctrl.ddo != go.max_delay()) {
        throw StructureError("controller delay powers do not match the network delays");
    }

    ClosedLoop cl;
    cl.q = Polynomial(ctrl.d) * gr.numerator() * plant.numerator;
    cl.u_num = plant.stable * Polynomial(ctrl.d) * gr.numerator() * plant.unstable_den;
    cl.charpoly = ctrl.den_cprime() * plant.unstable_den + cl.q * go.numerator();
    const int settle_deg = ctrl.m + plant.r + 1;
    cl.residual = cl.charpoly - Polynomial::monomial(settle_deg);
    cl.l = settle_deg - ctrl.ddo;
    cl.nu = gr.min_delay() + 1;

    const Polynomial shift = Polynomial::monomial(ctrl.ddo);
    cl.y_tf = RationalTF(shift * cl.q, cl.charpoly);
    cl.u_tf = RationalTF(shift * cl.u_num, cl.charpoly);
    return cl;
}

bool ClosedLoop::deadbeat(double tol) const {
    double scale = 0.0;
    for (double v : charpoly.coeffs()) scale = std::max(scale, std::abs(v));
    for (double v : residual.coeffs()) {
        if (std::abs(v) > tol * std::max(1.0, scale)) return false;
    }
    return true;
}

Polynomial deadbeat_constraint(const ControllerStructure& ctrl, const PlantSplit& plant,
                               const NetworkDynamics& gr, const NetworkDynamics& go) {
    ctrl.validate();
    const Polynomial lhs = ctrl.den_cprime() * plant.unstable_den +
                           Polynomial(ctrl.d) * gr.numerator() * plant.numerator * go.numerator();
    return lhs - Polynomial::monomial(ctrl.m + plant.r + 1);
}

std::vector<double> q_coefficients(const std::vector<double>& d, const NetworkDynamics& gr,
                                   const Polynomial& plant_num) {
    if (d.empty()) throw StructureError("controller numerator is empty");
    return (Polynomial(d) * gr.numerator() * plant_num).coeffs();
}

StepTraces step_response(const ClosedLoop& cl, double amplitude, int horizon) {
    if (horizon < cl.l + 2) throw StructureError("horizon must reach past the response time");
    const auto r = step_input(amplitude, horizon);
    StepTraces out;
    out.y = simulate(RationalTF(cl.y_tf.num, cl.y_tf.den, 1.0), r);
    out.u = simulate(RationalTF(cl.u_tf.num, cl.u_tf.den, 1.0), r);
    return out;
}

namespace {

// Simulate until the error tail has provably died out (stable loops only).
std::vector<double> settled_output(const ClosedLoop& cl, double amplitude) {
    double radius = 0.0;
    for (const auto& p : cl.charpoly.roots()) radius = std::max(radius, std::abs(p));
    if (radius >= 1.0 - 1e-9 && !cl.deadbeat()) {
        throw NumericalError("closed loop does not converge; step error norm diverges");
    }
    int horizon = std::max(cl.l + 2, 16);
    const double tol = 1e-13 * std::max(1.0, std::abs(amplitude));
    for (int attempt = 0; attempt < 24; ++attempt) {
        const auto traces = step_response(cl, amplitude, horizon);
        // settled when the last quarter of the window is flat at the final value
        bool settled = true;
        for (size_t k = traces.y.size() - traces.y.size() / 4; k < traces.y.size(); ++k) {
            if (std::abs(traces.y[k] - amplitude) > tol) settled = false;
        }
        if (settled) return traces.y;
        horizon *= 2;
        if (horizon > (1 << 22)) break;
    }
    throw NumericalError("step response did not settle within the simulation budget");
}

}  // namespace

double l2_error_sq(const ClosedLoop& cl, double amplitude) {
    const double a2 = amplitude * amplitude;
    if (cl.deadbeat()) {
        // Closed form over the q coefficients: nu zero samples, then the
        // partial sums of A q walk up to the reference.
        const auto& q = cl.q.coeffs();
        double acc = a2 * (1.0 + cl.nu);
        double partial = 0.0;
        for (int k = cl.nu; k < cl.l; ++k) {
            const int idx = cl.l - k;  // q coefficient entering at sample k
            if (idx <= cl.q.degree()) partial += q[static_cast<size_t>(idx)];
            const double err = amplitude * partial - amplitude;
            acc += err * err;
        }
        return acc;
    }
    const auto y = settled_output(cl, amplitude);
    double acc = a2;
    for (double v : y) {
        const double err = v - amplitude;
        acc += err * err;
    }
    return acc;
}

double l2_error(const ClosedLoop& cl, double amplitude) {
    return std::sqrt(l2_error_sq(cl, amplitude));
}

Overshoot overshoot(const ClosedLoop& cl, double amplitude) {
    Overshoot out;
    if (cl.deadbeat()) {
        const auto traces = step_response(cl, amplitude, cl.l + 2);
        for (int k = 0; k <= cl.l; ++k) {
            out.y = std::max(out.y, std::abs(traces.y[static_cast<size_t>(k)]));
            out.u = std::max(out.u, std::abs(traces.u[static_cast<size_t>(k)]));
        }
        return out;
    }
    const auto y = settled_output(cl, amplitude);
    const auto traces = step_response(cl, amplitude, static_cast<int>(y.size()));
    for (size_t k = 0; k < traces.y.size(); ++k) {
        out.y = std::max(out.y, std::abs(traces.y[k]));
        out.u = std::max(out.u, std::abs(traces.u[k]));
    }
    return out;
}

StepMetrics step_metrics(const ClosedLoop& cl, double amplitude) {
    StepMetrics m;
    m.amplitude = amplitude;
    m.l2_sq = l2_error_sq(cl, amplitude);
    m.l2 = std::sqrt(m.l2_sq);
    const auto os = overshoot(cl, amplitude);
    m.overshoot_y = os.y;
    m.overshoot_u = os.u;

    const int horizon = cl.l + 2;
    const auto traces = step_response(cl, amplitude, horizon);
    const double tol = 1e-9 * std::max(1.0, std::abs(amplitude));
    int settled = horizon;
    for (int k = horizon; k-- > 0;) {
        if (std::abs(traces.y[static_cast<size_t>(k)] - amplitude) > tol) {
            settled = k + 1;
            break;
        }
        settled = k;
    }
    m.settled_at = settled;
    return m;
}

}  // namespace mcn
