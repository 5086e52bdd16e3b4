#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace stoclaw {

/// Dense univariate polynomial with real coefficients, ascending order:
/// p(x) = c[0] + c[1] x + ... + c[n] x^n.
///
/// Carries exactly the operations the symbol analysis needs: arithmetic,
/// calculus, and guaranteed real-root isolation on an interval via Sturm
/// sequences (bisection-refined, so multiple roots are handled through the
/// distinct-root count rather than sign changes of p itself).
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }
    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial x() { return Polynomial({0.0, 1.0}); }

    const std::vector<double>& coeffs() const noexcept { return c_; }
    int degree() const noexcept { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const noexcept { return c_.empty(); }

    double operator()(double x) const noexcept {
        double r = 0.0;
        for (std::size_t i = c_.size(); i-- > 0;) r = r * x + c_[i];
        return r;
    }

    Polynomial derivative() const;
    /// Antiderivative with P(0) = 0.
    Polynomial antiderivative() const;

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(double s) const;
    Polynomial operator+(double s) const { return *this + constant(s); }
    Polynomial operator-(double s) const { return *this + constant(-s); }

    /// p(x)^k by repeated multiplication.
    Polynomial pow(unsigned k) const;

    /// All distinct real roots in (lo, hi), ascending, refined by bisection
    /// on the Sturm root count to within `tol` of the true root.
    std::vector<double> roots_in(double lo, double hi, double tol = 1e-13) const;

    /// Number of distinct real roots in (lo, hi].
    int count_roots(double lo, double hi) const;

private:
    void trim();
    std::vector<double> c_;
};

/// Lebesgue measure of { x in (lo, hi) : |p(x)| <= delta }, computed from the
/// isolated roots of p -+ delta and a midpoint membership test per segment.
double sublevel_measure(const Polynomial& p, double delta, double lo, double hi);

/// max over [lo, hi] of |p| (checks endpoints and interior critical points).
double max_abs_on(const Polynomial& p, double lo, double hi);

/// Values of p at its interior critical points together with p(lo), p(hi).
std::vector<double> critical_values_on(const Polynomial& p, double lo, double hi);

}  // namespace stoclaw
