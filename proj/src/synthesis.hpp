#ifndef MCN_SYNTHESIS_HPP
#define MCN_SYNTHESIS_HPP

#include <map>
#include <vector>

#include "network.hpp"
#include "poly.hpp"

namespace mcn {

/// Discrete plant factored for controller synthesis:
///   P(z) = numerator / (stable * unstable_den), both denominator parts monic.
struct PlantSplit {
    Polynomial stable;        // M(z): poles the controller may cancel
    Polynomial unstable_den;  // z^r + a_{r-1} z^{r-1} + ... + a_0
    Polynomial numerator;     // b coefficients
    int r = 0;

    RationalTF tf(std::optional<double> ts = std::nullopt) const {
        return RationalTF(numerator, stable * unstable_den, ts);
    }
};

PlantSplit make_plant_split(const RationalTF& discrete_plant, double boundary_tol = 1e-9);

/// FIR dynamics a network contributes to the loop: delays measured in frames
/// and the per-delay path masses. The trivial value (no network) is delay 0
/// with unit mass.
struct NetworkDynamics {
    std::vector<int> delays{0};
    std::map<int, double> gamma{{0, 1.0}};

    static NetworkDynamics identity() { return NetworkDynamics{}; }
    static NetworkDynamics from_profile(const DelayProfile& p);
    static NetworkDynamics from_gamma(const std::vector<int>& delays,
                                      const std::vector<double>& gamma);

    bool trivial() const { return delays.size() == 1 && delays[0] == 0; }
    int max_delay() const { return delays.back(); }
    int min_delay() const { return delays.front(); }
    double gamma_at(int d) const;
    std::vector<double> gamma_vector() const;
    /// sum_d gamma(d) z^{max_delay - d}
    Polynomial numerator() const;
    RationalTF tf(std::optional<double> ts = std::nullopt) const {
        return RationalTF(numerator(), Polynomial::monomial(max_delay()), ts);
    }
};

/// Tracking controller shape: C(z) = M(z) z^{ddr} z^{ddo} C'(z) with
/// C'(z) = (d_s z^s + ... + d_0) / ((z-1)(z^m + c_{m-1} z^{m-1} + ... + c_0)).
/// Numerator and denominator degrees match, so m + 1 = s + deg M + ddr + ddo.
struct ControllerStructure {
    Polynomial M;
    int ddr = 0;
    int ddo = 0;
    int m = 0;
    int s = 0;
    std::vector<double> c;  // ascending, size m
    std::vector<double> d;  // ascending, size s + 1

    void validate() const;
    Polynomial num_cprime() const { return Polynomial(d); }
    Polynomial den_core() const;    // z^m + c_{m-1} z^{m-1} + ... + c_0
    Polynomial den_cprime() const;  // (z - 1) * den_core
    RationalTF controller_tf() const;
};

/// m implied by the equal-degree rule.
int controller_core_degree(int s, int deg_m, int ddr, int ddo);

/// Closed loop assembled around the tracking controller. `charpoly` is the
/// actual characteristic polynomial; under the deadbeat identity it equals
/// z^{m+r+1} and the loop settles after l = m + r + 1 - ddo samples.
struct ClosedLoop {
    RationalTF y_tf;      // reference -> plant output
    RationalTF u_tf;      // reference -> plant input
    Polynomial q;         // numerator product N_C' N_GR N_P, ascending
    Polynomial u_num;     // M N_C' N_GR D_P'
    Polynomial charpoly;
    Polynomial residual;  // charpoly - z^{m+r+1}
    int l = 0;            // response time
    int nu = 0;           // min controllability delay + 1

    bool deadbeat(double tol = 1e-8) const;
};

ClosedLoop assemble_closed_loop(const PlantSplit& plant, const NetworkDynamics& gr,
                                const NetworkDynamics& go, const ControllerStructure& ctrl);

/// Residual of the finite-settling identity
///   D_C' D_P' + N_C' N_GR N_P N_GO - z^{m+r+1};
/// the loop tracks a step with zero error in finite time iff this vanishes.
Polynomial deadbeat_constraint(const ControllerStructure& ctrl, const PlantSplit& plant,
                               const NetworkDynamics& gr, const NetworkDynamics& go);

/// Coefficients of N_P * N_C' * N_GR by convolution (ascending powers):
/// q_h collects every b_i d_j gamma(k) with i + j + (ddr - k) = h.
std::vector<double> q_coefficients(const std::vector<double>& d, const NetworkDynamics& gr,
                                   const Polynomial& plant_num);

/// Plant output and input under a step of the given amplitude.
struct StepTraces {
    std::vector<double> y;
    std::vector<double> u;
};

StepTraces step_response(const ClosedLoop& cl, double amplitude, int horizon);

/// Squared L2 norm of the tracking error under a step. The accounting charges
/// one reference-amplitude sample for the frame in which the step is applied
/// (no measurement can respond within it), then the simulated error from
/// sample 0 on:  l2_sq = A^2 + sum_k (y(k) - A)^2.
/// Deadbeat loops use the closed form over the q coefficients; otherwise the
/// sum is truncated once the tail provably decayed, and diverging loops are
/// rejected.
double l2_error_sq(const ClosedLoop& cl, double amplitude);
double l2_error(const ClosedLoop& cl, double amplitude);

/// Peak magnitudes of the output and input over the transient window
/// (samples 0..l for a deadbeat loop, until settling otherwise).
struct Overshoot {
    double y = 0.0;
    double u = 0.0;
};

Overshoot overshoot(const ClosedLoop& cl, double amplitude);

/// Bundle of the step-tracking figures of merit.
struct StepMetrics {
    double amplitude = 1.0;
    double l2 = 0.0;
    double l2_sq = 0.0;
    double overshoot_y = 0.0;
    double overshoot_u = 0.0;
    int settled_at = 0;
};

StepMetrics step_metrics(const ClosedLoop& cl, double amplitude);

}  // namespace mcn

#endif
