#ifndef MCN_POLY_HPP
#define MCN_POLY_HPP

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace mcn {

/// Real polynomial with coefficients stored by ascending power.
/// The zero polynomial is the single coefficient {0}; any other value keeps a
/// nonzero leading coefficient (trailing zeros are stripped relative to the
/// largest coefficient magnitude).
class Polynomial {
  public:
    Polynomial() : coeffs_{0.0} {}
    explicit Polynomial(std::vector<double> coeffs);
    Polynomial(std::initializer_list<double> coeffs);

    /// c * z^power
    static Polynomial monomial(int power, double c = 1.0);
    static Polynomial one() { return Polynomial{1.0}; }

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const;
    double leading() const { return coeffs_.back(); }
    double coeff(int k) const;  // 0 outside the stored range

    double operator()(double z) const;  // Horner evaluation
    std::complex<double> operator()(std::complex<double> z) const;

    Polynomial operator+(const Polynomial& rhs) const;
    Polynomial operator-(const Polynomial& rhs) const;
    Polynomial operator*(const Polynomial& rhs) const;
    Polynomial operator*(double s) const;
    Polynomial operator-() const { return *this * -1.0; }

    bool near_equal(const Polynomial& rhs, double rel_tol = 1e-9) const;

    /// All complex roots, via companion-matrix eigenvalues.
    std::vector<std::complex<double>> roots() const;

    /// Monic polynomial with the given roots; conjugate pairs are recombined
    /// into real quadratics so the result stays real.
    static Polynomial from_roots(const std::vector<std::complex<double>>& roots);

    std::string str(const std::string& var = "z") const;

  private:
    void normalize();
    std::vector<double> coeffs_;
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

/// poly_mul of the coefficient sequences (plain convolution).
Polynomial poly_mul(const Polynomial& a, const Polynomial& b);

/// Rational transfer function. `sample_time` is empty for continuous-time
/// systems and holds the sampling period (seconds) for discrete-time ones.
struct RationalTF {
    Polynomial num;
    Polynomial den;
    std::optional<double> sample_time;

    RationalTF() = default;
    RationalTF(Polynomial n, Polynomial d, std::optional<double> ts = std::nullopt);

    bool discrete() const { return sample_time.has_value(); }
    double dc_gain() const { return num(1.0) / den(1.0); }  // discrete-time DC
    std::vector<std::complex<double>> poles() const { return den.roots(); }
};

/// Denominator factorization of a discrete plant: den = stable_part * unstable_part_den
/// (both monic), with every stable root strictly inside the unit circle and
/// every unstable root of modulus >= 1 - boundary_tol. Roots on the tolerance
/// band are classified unstable so they are never cancelled.
struct StableUnstableSplit {
    Polynomial stable_part;        // M(z), monic
    Polynomial unstable_part_den;  // z^r + a_{r-1} z^{r-1} + ... + a_0, monic
    int r = 0;                     // degree of the unstable part
};

/// ZOH discretization of a proper continuous-time transfer function with
/// period T: controllable-canonical state space, then the exponential of the
/// augmented [A B; 0 0] matrix. Poles map as z = exp(sT).
RationalTF zoh_discretize(const RationalTF& plant, double T);

/// Partition the denominator roots of a discrete plant by modulus against
/// 1 - boundary_tol. Fails if the recombined factors do not reproduce the
/// denominator to 1e-9 relative.
StableUnstableSplit split_stable(const RationalTF& plant, double boundary_tol = 1e-9);

/// Simulate a discrete rational TF by its direct-form difference equation.
/// Returns y(0..n-1) for input u(0..n-1); zero initial conditions.
std::vector<double> simulate(const RationalTF& tf, const std::vector<double>& input);

/// Step input of amplitude A applied from k = 0.
std::vector<double> step_input(double amplitude, int n);

}  // namespace mcn

#endif
