#include "qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace mcn {

namespace {

constexpr double kZeroStep = 1e-12;

double inf_norm(const Eigen::MatrixXd& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

QPResult solve_qp(const QPProblem& qp) {
    const int n = qp.dim();
    if (qp.g.size() != n) throw NumericalError("qp: gradient size mismatch");

    const double h_scale = std::max(1.0, inf_norm(qp.H));
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(qp.H);
        if (es.eigenvalues().minCoeff() < -1e-10 * h_scale) {
            throw NumericalError("qp: objective is not positive semidefinite");
        }
    }

    // Regularized Hessian keeps the dual active-set iteration well posed even
    // when H is singular along feasible directions.
    const double lambda = 1e-11 * h_scale;
    Eigen::MatrixXd hreg = qp.H + lambda * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> hfac(hreg);
    if (hfac.info() != Eigen::Success) throw NumericalError("qp: Hessian factorization failed");

    const int n_eq = static_cast<int>(qp.a_eq.rows());
    const int n_in = static_cast<int>(qp.a_in.rows());
    const double data_scale =
        std::max({1.0, inf_norm(qp.a_eq), inf_norm(qp.a_in), inf_norm(qp.b_eq.transpose()),
                  inf_norm(qp.b_in.transpose()), inf_norm(qp.g.transpose())});
    const double feas_tol = 1e-10 * data_scale;

    QPResult res;
    res.x = hfac.solve(-qp.g);

    struct Active {
        Eigen::VectorXd n;
        double b;
        bool equality;
        int user_index;
        double sign;  // +1 when the stored normal equals the user row, -1 when flipped
        double mult;
    };
    std::vector<Active> active;

    auto violated_equality = [&](int& idx, double& viol) {
        viol = 0.0;
        idx = -1;
        for (int i = 0; i < n_eq; ++i) {
            bool already = false;
            for (const auto& a : active) {
                if (a.equality && a.user_index == i) already = true;
            }
            if (already) continue;
            idx = i;
            viol = std::abs(qp.a_eq.row(i) * res.x - qp.b_eq(i));
            return true;  // equalities are added unconditionally, in order
        }
        return false;
    };

    auto most_violated_inequality = [&](int& idx, double& viol) {
        idx = -1;
        viol = feas_tol;
        for (int i = 0; i < n_in; ++i) {
            bool already = false;
            for (const auto& a : active) {
                if (!a.equality && a.user_index == i) already = true;
            }
            if (already) continue;
            const double v = qp.a_in.row(i) * res.x - qp.b_in(i);
            if (v > viol) {
                viol = v;
                idx = i;
            }
        }
        return idx >= 0;
    };

    const int max_iter = 100 * (n + n_eq + n_in + 1);
    int iter = 0;

    auto add_constraint = [&](const Eigen::VectorXd& user_row, double user_b, bool is_eq,
                              int user_index) -> bool {
        // Internal ">=": n'x >= b violated (n'x < b). For an inequality
        // a'x <= b the form is (-a)'x >= -b. For an equality pick the side
        // that is currently violated.
        Eigen::VectorXd normal = -user_row;
        double bound = -user_b;
        double sign = 1.0;
        if (is_eq && user_row.dot(res.x) < user_b) {
            normal = user_row;
            bound = user_b;
            sign = -1.0;
        }
        double u_plus = 0.0;
        while (true) {
            if (++iter > max_iter) throw NumericalError("qp: iteration limit exceeded");
            // Step directions against the current active set.
            const int k = static_cast<int>(active.size());
            Eigen::MatrixXd nmat(n, k);
            for (int j = 0; j < k; ++j) nmat.col(j) = active[static_cast<size_t>(j)].n;
            const Eigen::VectorXd hinv_n = hfac.solve(normal);
            Eigen::VectorXd r;
            Eigen::VectorXd z;
            if (k > 0) {
                const Eigen::MatrixXd hinv_nmat = hfac.solve(nmat);
                const Eigen::MatrixXd gram = nmat.transpose() * hinv_nmat;
                r = gram.ldlt().solve(nmat.transpose() * hinv_n);
                z = hinv_n - hinv_nmat * r;
            } else {
                r = Eigen::VectorXd::Zero(0);
                z = hinv_n;
            }

            const double slack = bound - normal.dot(res.x);  // > 0 while violated
            const double dir = normal.dot(z);

            // Dual blocking step from active inequalities.
            double t1 = std::numeric_limits<double>::infinity();
            int blocker = -1;
            for (int j = 0; j < k; ++j) {
                const auto& a = active[static_cast<size_t>(j)];
                if (a.equality) continue;
                if (r(j) > kZeroStep) {
                    const double t = a.mult / r(j);
                    if (t < t1) {
                        t1 = t;
                        blocker = j;
                    }
                }
            }
            const bool have_primal = dir > kZeroStep * std::max(1.0, normal.norm() * z.norm());
            const double t2 =
                have_primal ? slack / dir : std::numeric_limits<double>::infinity();

            if (!have_primal && !std::isfinite(t1)) return false;  // no way to satisfy

            const double t = std::min(t1, t2);
            if (std::isfinite(t) && t > 0.0) {
                res.x += t * z;
                for (int j = 0; j < k; ++j) {
                    active[static_cast<size_t>(j)].mult -= t * r(j);
                }
                u_plus += t;
            }
            if (t == t1 && t1 < t2) {
                active.erase(active.begin() + blocker);
                continue;  // same target constraint, smaller active set
            }
            // Full step reached the constraint surface.
            active.push_back(Active{normal, bound, is_eq, user_index, sign, u_plus});
            return true;
        }
    };

    // Equalities first; they stay active forever.
    {
        int idx;
        double viol;
        while (violated_equality(idx, viol)) {
            if (!add_constraint(qp.a_eq.row(idx).transpose(), qp.b_eq(idx), true, idx)) {
                res.feasible = false;
                res.certificate = "inconsistent equality constraint row " + std::to_string(idx);
                return res;
            }
        }
    }
    {
        int idx;
        double viol;
        while (most_violated_inequality(idx, viol)) {
            if (!add_constraint(qp.a_in.row(idx).transpose(), qp.b_in(idx), false, idx)) {
                res.feasible = false;
                res.certificate = "infeasible: inequality row " + std::to_string(idx) +
                                  " cannot be satisfied together with the active set";
                return res;
            }
            // Drop active inequalities whose multipliers hit zero exactly is
            // handled inside add_constraint; nothing to do here.
        }
    }
    res.iterations = iter;

    // Re-solve on the final active set against the unregularized data; for a
    // merely semidefinite H this also picks the minimum-norm optimizer on the
    // optimal face, which keeps reported solutions deterministic.
    {
        std::vector<const Active*> act;
        act.reserve(active.size());
        for (const auto& a : active) act.push_back(&a);
        const int k = static_cast<int>(act.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = qp.H;
        Eigen::VectorXd rhs(n + k);
        rhs.head(n) = -qp.g;
        // KKT sign convention: Hx + g - N u = 0 with u >= 0 on inequalities.
        for (int j = 0; j < k; ++j) {
            kkt.block(0, n + j, n, 1) = -act[static_cast<size_t>(j)]->n;
            kkt.block(n + j, 0, 1, n) = act[static_cast<size_t>(j)]->n.transpose();
            rhs(n + j) = act[static_cast<size_t>(j)]->b;
        }
        Eigen::VectorXd sol =
            kkt.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
        const Eigen::VectorXd x_ref = sol.head(n);
        const Eigen::VectorXd u_ref = sol.tail(k);
        bool ok = true;
        for (int j = 0; j < k; ++j) {
            if (!act[static_cast<size_t>(j)]->equality && u_ref(j) < -1e-9 * data_scale) ok = false;
        }
        if (qp.a_eq.rows() > 0 && ok) {
            ok = inf_norm(qp.a_eq * x_ref - qp.b_eq) <= 1e2 * feas_tol;
        }
        if (qp.a_in.rows() > 0 && ok) {
            ok = (qp.a_in * x_ref - qp.b_in).maxCoeff() <= 1e2 * feas_tol;
        }
        if (ok) {
            res.x = x_ref;
            for (int j = 0; j < k; ++j) active[static_cast<size_t>(j)].mult = u_ref(j);
        }
    }

    // Report in the user's sign convention: Hx + g + A_eq' l + A_in' m = 0.
    res.eq_multipliers = Eigen::VectorXd::Zero(n_eq);
    res.in_multipliers = Eigen::VectorXd::Zero(n_in);
    Eigen::VectorXd stat = qp.H * res.x + qp.g;
    for (const auto& a : active) {
        stat -= a.n * a.mult;
        if (a.equality) res.eq_multipliers(a.user_index) = a.sign * a.mult;
        else {
            res.in_multipliers(a.user_index) = a.mult;
            res.active_set.push_back(a.user_index);
        }
    }
    std::sort(res.active_set.begin(), res.active_set.end());
    res.kkt_residual = stat.cwiseAbs().maxCoeff() / std::max(1.0, data_scale);
    res.feasible = true;
    res.value = 0.5 * res.x.dot(qp.H * res.x) + qp.g.dot(res.x);
    res.unbounded = res.x.cwiseAbs().maxCoeff() > 1e12 * std::max(1.0, data_scale);
    return res;
}

}  // namespace mcn
