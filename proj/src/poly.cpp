#include "poly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mcn {

namespace {

constexpr double kTrailingZeroRel = 1e-12;

// Scaling-and-squaring matrix exponential with a Pade(6) approximant.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
    const int n = static_cast<int>(m.rows());
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    int squarings = 0;
    if (norm > 0.5) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
    }
    const Eigen::MatrixXd a = m / std::pow(2.0, squarings);

    // Pade(6,6): N(a)/D(a) with D(a) = N(-a).
    static const double c[7] = {1.0,         1.0 / 2.0,    5.0 / 44.0,  1.0 / 66.0,
                                1.0 / 792.0, 1.0 / 15840.0, 1.0 / 665280.0};
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd power = eye;
    Eigen::MatrixXd num = eye * c[0];
    Eigen::MatrixXd den = eye * c[0];
    double sign = 1.0;
    for (int k = 1; k <= 6; ++k) {
        power = power * a;
        sign = -sign;
        num += c[k] * power;
        den += sign * c[k] * power;
    }
    Eigen::MatrixXd result = den.partialPivLu().solve(num);
    for (int i = 0; i < squarings; ++i) result = result * result;
    return result;
}

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_ = {0.0};
    normalize();
}

Polynomial::Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) {
    if (coeffs_.empty()) coeffs_ = {0.0};
    normalize();
}

Polynomial Polynomial::monomial(int power, double c) {
    std::vector<double> v(static_cast<size_t>(power) + 1, 0.0);
    v.back() = c;
    return Polynomial(std::move(v));
}

void Polynomial::normalize() {
    double maxmag = 0.0;
    for (double v : coeffs_) maxmag = std::max(maxmag, std::abs(v));
    const double cut = kTrailingZeroRel * maxmag;
    while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= cut) coeffs_.pop_back();
    if (coeffs_.size() == 1 && std::abs(coeffs_[0]) == 0.0) coeffs_[0] = 0.0;  // canonical -0
}

bool Polynomial::is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

double Polynomial::coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(coeffs_.size())) return 0.0;
    return coeffs_[static_cast<size_t>(k)];
}

double Polynomial::operator()(double z) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

std::complex<double> Polynomial::operator()(std::complex<double> z) const {
    std::complex<double> acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Polynomial Polynomial::operator+(const Polynomial& rhs) const {
    std::vector<double> out(std::max(coeffs_.size(), rhs.coeffs_.size()), 0.0);
    for (size_t i = 0; i < out.size(); ++i) {
        out[i] = (i < coeffs_.size() ? coeffs_[i] : 0.0) +
                 (i < rhs.coeffs_.size() ? rhs.coeffs_[i] : 0.0);
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::operator-(const Polynomial& rhs) const { return *this + rhs * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& rhs) const {
    if (is_zero() || rhs.is_zero()) return Polynomial();
    std::vector<double> out(coeffs_.size() + rhs.coeffs_.size() - 1, 0.0);
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        for (size_t j = 0; j < rhs.coeffs_.size(); ++j) {
            out[i + j] += coeffs_[i] * rhs.coeffs_[j];
        }
    }
    return Polynomial(std::move(out));
}

Polynomial Polynomial::operator*(double s) const {
    std::vector<double> out = coeffs_;
    for (double& v : out) v *= s;
    return Polynomial(std::move(out));
}

bool Polynomial::near_equal(const Polynomial& rhs, double rel_tol) const {
    double scale = 0.0;
    for (double v : coeffs_) scale = std::max(scale, std::abs(v));
    for (double v : rhs.coeffs_) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return true;
    const size_t n = std::max(coeffs_.size(), rhs.coeffs_.size());
    for (size_t i = 0; i < n; ++i) {
        const double a = i < coeffs_.size() ? coeffs_[i] : 0.0;
        const double b = i < rhs.coeffs_.size() ? rhs.coeffs_[i] : 0.0;
        if (std::abs(a - b) > rel_tol * scale) return false;
    }
    return true;
}

std::vector<std::complex<double>> Polynomial::roots() const {
    const int n = degree();
    if (n <= 0) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    const double lead = coeffs_.back();
    for (int i = 0; i < n; ++i) companion(i, n - 1) = -coeffs_[static_cast<size_t>(i)] / lead;
    for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("companion-matrix eigenvalue solve did not converge");
    }
    std::vector<std::complex<double>> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = solver.eigenvalues()(i);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

Polynomial Polynomial::from_roots(const std::vector<std::complex<double>>& roots) {
    Polynomial acc = Polynomial::one();
    std::vector<bool> used(roots.size(), false);
    for (size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        const auto& r = roots[i];
        if (std::abs(r.imag()) < 1e-10 * (1.0 + std::abs(r.real()))) {
            acc = acc * Polynomial{-r.real(), 1.0};
            used[i] = true;
            continue;
        }
        // find the conjugate partner and emit a real quadratic
        size_t partner = roots.size();
        double best = std::numeric_limits<double>::max();
        for (size_t j = i + 1; j < roots.size(); ++j) {
            if (used[j]) continue;
            const double mismatch =
                std::abs(roots[j].real() - r.real()) + std::abs(roots[j].imag() + r.imag());
            if (mismatch < best) {
                best = mismatch;
                partner = j;
            }
        }
        if (partner == roots.size() || best > 1e-6 * (1.0 + std::abs(r))) {
            throw NumericalError("complex root without a conjugate partner");
        }
        used[i] = used[partner] = true;
        acc = acc * Polynomial{r.real() * r.real() + r.imag() * r.imag(), -2.0 * r.real(), 1.0};
    }
    return acc;
}

std::string Polynomial::str(const std::string& var) const {
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        const double c = coeff(k);
        if (c == 0.0 && !(first && k == 0)) continue;
        if (!first) os << (c < 0 ? " - " : " + ");
        else if (c < 0) os << "-";
        const double mag = std::abs(c);
        if (k == 0 || mag != 1.0) os << mag;
        if (k > 0) {
            os << var;
            if (k > 1) os << "^" << k;
        }
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

Polynomial poly_mul(const Polynomial& a, const Polynomial& b) { return a * b; }

RationalTF::RationalTF(Polynomial n, Polynomial d, std::optional<double> ts)
    : num(std::move(n)), den(std::move(d)), sample_time(ts) {
    if (den.is_zero()) throw StructureError("transfer function denominator is zero");
}

RationalTF zoh_discretize(const RationalTF& plant, double T) {
    if (plant.discrete()) throw StructureError("zoh_discretize expects a continuous-time plant");
    if (!(T > 0.0)) throw StructureError("sampling period must be positive");
    if (plant.den.is_zero() || plant.den.degree() < 0) {
        throw StructureError("degenerate continuous denominator");
    }
    const int n = plant.den.degree();
    if (plant.num.degree() > n) {
        throw StructureError("improper plant: numerator degree exceeds denominator degree");
    }
    if (n == 0) {
        // static gain
        return RationalTF(plant.num * (1.0 / plant.den.coeff(0)), Polynomial::one(), T);
    }

    // Proper plants carry a direct term: N/D = D_direct + R/D with deg R < n.
    const double lead_den = plant.den.leading();
    double direct = 0.0;
    Polynomial rem = plant.num;
    if (plant.num.degree() == n) {
        direct = plant.num.leading() / lead_den;
        rem = plant.num - plant.den * direct;
    }

    // Controllable canonical form of rem/den.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n - 1; ++i) a(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) a(n - 1, j) = -plant.den.coeff(j) / lead_den;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b(n - 1) = 1.0;
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(n);
    for (int j = 0; j < n && j <= rem.degree(); ++j) c(j) = rem.coeff(j) / lead_den;

    // Augmented exponential gives both A_d and B_d in one shot.
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = a * T;
    aug.topRightCorner(n, 1) = b * T;
    const Eigen::MatrixXd e = expm(aug);
    const Eigen::MatrixXd ad = e.topLeftCorner(n, n);
    const Eigen::VectorXd bd = e.topRightCorner(n, 1);

    // Characteristic polynomial and C adj(zI - A_d) B_d via Faddeev-LeVerrier.
    std::vector<double> charpoly(static_cast<size_t>(n) + 1, 0.0);
    charpoly[static_cast<size_t>(n)] = 1.0;
    Eigen::MatrixXd bk = Eigen::MatrixXd::Identity(n, n);  // coefficient of z^{n-1} in adj
    std::vector<double> numpoly(static_cast<size_t>(n), 0.0);
    for (int k = n - 1; k >= 0; --k) {
        numpoly[static_cast<size_t>(k)] = (c * bk * bd)(0);
        const Eigen::MatrixXd abk = ad * bk;
        const double ck = -abk.trace() / static_cast<double>(n - k);
        charpoly[static_cast<size_t>(k)] = ck;
        if (k > 0) bk = abk + ck * Eigen::MatrixXd::Identity(n, n);
    }

    Polynomial dnum(std::move(numpoly));
    Polynomial dden(std::move(charpoly));
    if (direct != 0.0) dnum = dnum + dden * direct;
    return RationalTF(std::move(dnum), std::move(dden), T);
}

StableUnstableSplit split_stable(const RationalTF& plant, double boundary_tol) {
    if (!plant.discrete()) throw StructureError("split_stable expects a discrete-time plant");
    const auto rts = plant.den.roots();
    std::vector<std::complex<double>> stable, unstable;
    for (const auto& r : rts) {
        if (std::abs(r) >= 1.0 - boundary_tol) unstable.push_back(r);
        else stable.push_back(r);
    }
    StableUnstableSplit out;
    out.stable_part = Polynomial::from_roots(stable);
    out.unstable_part_den = Polynomial::from_roots(unstable);
    out.r = static_cast<int>(unstable.size());

    const Polynomial rebuilt =
        out.stable_part * out.unstable_part_den * plant.den.leading();
    if (!rebuilt.near_equal(plant.den, 1e-9)) {
        throw NumericalError("denominator factorization residual exceeds 1e-9: got " +
                             rebuilt.str() + " expected " + plant.den.str());
    }
    return out;
}

std::vector<double> simulate(const RationalTF& tf, const std::vector<double>& input) {
    if (!tf.discrete()) throw StructureError("simulate expects a discrete-time system");
    if (tf.num.degree() > tf.den.degree()) {
        throw StructureError("simulate expects a proper transfer function");
    }
    const int n = tf.den.degree();
    const double a_n = tf.den.leading();
    std::vector<double> y(input.size(), 0.0);
    for (size_t k = 0; k < input.size(); ++k) {
        double acc = 0.0;
        for (int i = 0; i <= tf.num.degree(); ++i) {
            const int lag = n - i;
            if (static_cast<int>(k) - lag < 0) continue;
            acc += tf.num.coeff(i) * input[k - static_cast<size_t>(lag)];
        }
        for (int i = 0; i < n; ++i) {
            const int lag = n - i;
            if (static_cast<int>(k) - lag < 0) continue;
            acc -= tf.den.coeff(i) * y[k - static_cast<size_t>(lag)];
        }
        y[k] = acc / a_n;
    }
    return y;
}

std::vector<double> step_input(double amplitude, int n) {
    return std::vector<double>(static_cast<size_t>(std::max(0, n)), amplitude);
}

}  // namespace mcn
