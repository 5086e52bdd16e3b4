#include "stoclaw/poly.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace stoclaw {

namespace {

// Coefficients below this fraction of the largest one are treated as zero
// when trimming remainders in the Euclidean division chain.
constexpr double kRelTrim = 1e-14;

double max_abs_coeff(const std::vector<double>& c) {
    double m = 0.0;
    for (double v : c) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

void Polynomial::trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::antiderivative() const {
    if (c_.empty()) return Polynomial();
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] += o.c_[i];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    std::vector<double> r(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) r[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) r[i] -= o.c_[i];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (c_.empty() || o.c_.empty()) return Polynomial();
    std::vector<double> r(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::operator*(double s) const {
    std::vector<double> r(c_);
    for (double& v : r) v *= s;
    return Polynomial(std::move(r));
}

Polynomial Polynomial::pow(unsigned k) const {
    Polynomial r = constant(1.0);
    for (unsigned i = 0; i < k; ++i) r = r * (*this);
    return r;
}

namespace {

// Remainder of a by b, negated (Sturm convention), with relative trimming so
// near-cancellations do not masquerade as spurious low-order terms.
std::vector<double> neg_remainder(std::vector<double> a, const std::vector<double>& b) {
    const double scale = std::max(max_abs_coeff(a), 1.0);
    while (a.size() >= b.size() && !a.empty()) {
        const double q = a.back() / b.back();
        const std::size_t off = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[off + i] -= q * b[i];
        a.pop_back();
        while (!a.empty() && std::abs(a.back()) <= kRelTrim * scale) a.pop_back();
    }
    for (double& v : a) v = -v;
    return a;
}

std::vector<std::vector<double>> sturm_sequence(const Polynomial& p) {
    std::vector<std::vector<double>> seq;
    seq.push_back(p.coeffs());
    seq.push_back(p.derivative().coeffs());
    while (seq.back().size() > 1) {
        auto r = neg_remainder(seq[seq.size() - 2], seq.back());
        if (r.empty()) break;
        seq.push_back(std::move(r));
    }
    return seq;
}

int sign_variations(const std::vector<std::vector<double>>& seq, double x) {
    int vars = 0;
    int prev = 0;
    for (const auto& c : seq) {
        double v = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
        const int s = (v > 0.0) - (v < 0.0);
        if (s != 0) {
            if (prev != 0 && s != prev) ++vars;
            prev = s;
        }
    }
    return vars;
}

}  // namespace

int Polynomial::count_roots(double lo, double hi) const {
    if (c_.size() <= 1) return 0;
    const auto seq = sturm_sequence(*this);
    return sign_variations(seq, lo) - sign_variations(seq, hi);
}

std::vector<double> Polynomial::roots_in(double lo, double hi, double tol) const {
    std::vector<double> out;
    if (c_.size() <= 1) return out;
    const auto seq = sturm_sequence(*this);
    const int total = sign_variations(seq, lo) - sign_variations(seq, hi);
    if (total <= 0) return out;

    struct Interval {
        double a, b;
        int n;
    };
    std::vector<Interval> stack{{lo, hi, total}};
    while (!stack.empty()) {
        auto [a, b, n] = stack.back();
        stack.pop_back();
        if (n == 1 && b - a <= tol) {
            out.push_back(0.5 * (a + b));
            continue;
        }
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b) {  // interval at floating-point resolution
            out.push_back(m);
            continue;
        }
        const int left = sign_variations(seq, a) - sign_variations(seq, m);
        const int right = n - left;
        if (left > 0) stack.push_back({a, m, left});
        if (right > 0) stack.push_back({m, b, right});
    }
    std::sort(out.begin(), out.end());
    return out;
}

double sublevel_measure(const Polynomial& p, double delta, double lo, double hi) {
    if (p.is_zero() || p.degree() == 0) {
        const double v = p.is_zero() ? 0.0 : p.coeffs()[0];
        return std::abs(v) <= delta ? hi - lo : 0.0;
    }
    std::vector<double> cuts{lo, hi};
    for (double shift : {delta, -delta}) {
        const auto r = (p - shift).roots_in(lo, hi);
        cuts.insert(cuts.end(), r.begin(), r.end());
    }
    std::sort(cuts.begin(), cuts.end());
    double measure = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a) continue;
        if (std::abs(p(0.5 * (a + b))) <= delta) measure += b - a;
    }
    return measure;
}

std::vector<double> critical_values_on(const Polynomial& p, double lo, double hi) {
    std::vector<double> vals{p(lo), p(hi)};
    for (double r : p.derivative().roots_in(lo, hi)) vals.push_back(p(r));
    return vals;
}

double max_abs_on(const Polynomial& p, double lo, double hi) {
    double m = 0.0;
    for (double v : critical_values_on(p, lo, hi)) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace stoclaw
