#ifndef MCN_QP_HPP
#define MCN_QP_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mcn {

/// Convex quadratic program
///   min 0.5 x'Hx + g'x   s.t.  a_eq x = b_eq,  a_in x <= b_in
/// with H symmetric positive semidefinite.
struct QPProblem {
    Eigen::MatrixXd H;
    Eigen::VectorXd g;
    Eigen::MatrixXd a_eq;  // may have zero rows
    Eigen::VectorXd b_eq;
    Eigen::MatrixXd a_in;  // may have zero rows
    Eigen::VectorXd b_in;

    int dim() const { return static_cast<int>(H.rows()); }
};

struct QPResult {
    bool feasible = false;
    bool unbounded = false;
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd eq_multipliers;
    Eigen::VectorXd in_multipliers;   // >= 0, nonzero only on active rows
    std::vector<int> active_set;      // active inequality row indices
    int iterations = 0;
    double kkt_residual = 0.0;
    std::string certificate;          // populated when infeasible
};

/// Dense dual active-set solve (constraints are activated one at a time from
/// the unconstrained minimum). A singular Hessian is handled by a tiny
/// Tikhonov shift during the active-set search; the returned point is then
/// re-solved on the final active set against the original data, so the
/// reported KKT residual refers to the problem as posed.
QPResult solve_qp(const QPProblem& qp);

}  // namespace mcn

#endif
