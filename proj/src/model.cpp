#include "stoclaw/model.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "stoclaw/util.hpp"

namespace stoclaw {

namespace {
constexpr double kHuge = 1e300;
constexpr double kPi = std::numbers::pi;
}  // namespace

// ---------------------------------------------------------------------------
// FluxModel

FluxModel FluxModel::example_family(std::vector<int> exponents, double a_lo, double b_hi,
                                    double L0) {
    FluxModel f;
    f.kind_ = Kind::ExampleFamily;
    f.a_lo_ = a_lo;
    f.b_hi_ = b_hi;
    f.L0_ = L0;
    f.exponents_ = std::move(exponents);
    if (f.exponents_.empty()) throw std::invalid_argument("flux: at least one exponent required");
    const Polynomial left({-a_lo, 1.0});   // (u - a_lo)
    const Polynomial right({-b_hi, 1.0});  // (u - b_hi)
    for (int l : f.exponents_) {
        if (l < 1) throw std::invalid_argument("flux: exponents must be positive integers");
        const unsigned p = static_cast<unsigned>(l) + 1;
        Polynomial Ai = (left.pow(p) * right.pow(p)) * (1.0 / static_cast<double>(p));
        f.a_.push_back(Ai.derivative());
        f.A_.push_back(std::move(Ai));
    }
    return f;
}

FluxModel FluxModel::polynomial(std::vector<Polynomial> components, double a_lo, double b_hi,
                                double L0) {
    FluxModel f;
    f.kind_ = Kind::Polynomial;
    f.a_lo_ = a_lo;
    f.b_hi_ = b_hi;
    f.L0_ = L0;
    for (auto& Ai : components) {
        f.a_.push_back(Ai.derivative());
        f.A_.push_back(std::move(Ai));
    }
    if (f.A_.empty()) throw std::invalid_argument("flux: no components");
    return f;
}

FluxModel FluxModel::tabulated(std::function<double(double)> A, std::function<double(double)> a,
                               double a_lo, double b_hi, double L0) {
    FluxModel f;
    f.kind_ = Kind::Tabulated;
    f.a_lo_ = a_lo;
    f.b_hi_ = b_hi;
    f.L0_ = L0;
    f.A_fn_ = std::move(A);
    f.a_fn_ = std::move(a);
    return f;
}

std::vector<double> FluxModel::eval(double u, bool want_derivative) const {
    if (!std::isfinite(u)) throw std::domain_error("flux_eval: non-finite state");
    std::vector<double> out;
    if (kind_ == Kind::Tabulated) {
        out.push_back(want_derivative ? a_fn_(u) : A_fn_(u));
        return out;
    }
    const auto& comps = want_derivative ? a_ : A_;
    out.reserve(comps.size());
    for (const auto& p : comps) out.push_back(p(u));
    return out;
}

double FluxModel::A(double u) const {
    if (!std::isfinite(u)) throw std::domain_error("flux_eval: non-finite state");
    return kind_ == Kind::Tabulated ? A_fn_(u) : A_[0](u);
}

double FluxModel::a(double u) const {
    if (!std::isfinite(u)) throw std::domain_error("flux_eval: non-finite state");
    return kind_ == Kind::Tabulated ? a_fn_(u) : a_[0](u);
}

double FluxModel::A_trunc(double u) const {
    if (u >= a_lo_ && u <= b_hi_) return A(u);
    if (u <= a_lo_ - 1.0 || u >= b_hi_ + 1.0) return 0.0;
    const double y = u > b_hi_ ? b_hi_ + 1.0 - u : u - (a_lo_ - 1.0);  // in (0, 1)
    const double cut = y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
    return A(u) * cut;
}

double FluxModel::max_wave_speed(double lo, double hi) const {
    if (kind_ == Kind::Tabulated) {
        double m = 0.0;
        const int n = 4096;
        for (int i = 0; i <= n; ++i)
            m = std::max(m, std::abs(a_fn_(lo + (hi - lo) * i / n)));
        return m;
    }
    return max_abs_on(a_[0], lo, hi);
}

// ---------------------------------------------------------------------------
// EntropyPair

EntropyPair EntropyPair::quadratic() {
    EntropyPair e;
    e.pieces_.push_back({-kHuge, kHuge, Polynomial({0.0, 1.0})});
    return e;
}

EntropyPair EntropyPair::kruzhkov(double c, double delta) {
    if (delta <= 0.0) throw std::invalid_argument("kruzhkov: smoothing width must be positive");
    EntropyPair e;
    // eta' = -1 below the cap, (u - c)/delta on it, +1 above.
    e.pieces_.push_back({-kHuge, c - delta, Polynomial({-1.0})});
    e.pieces_.push_back({c - delta, c + delta, Polynomial({-c / delta, 1.0 / delta})});
    e.pieces_.push_back({c + delta, kHuge, Polynomial({1.0})});
    return e;
}

EntropyPair EntropyPair::from_polynomial(Polynomial eta) {
    EntropyPair e;
    e.pieces_.push_back({-kHuge, kHuge, eta.derivative()});
    e.eta_fn_ = [p = std::move(eta)](double u) { return p(u); };
    return e;
}

EntropyPair EntropyPair::custom(std::function<double(double)> eta,
                                std::function<double(double)> deta,
                                std::function<double(double)> d2eta) {
    EntropyPair e;
    e.eta_fn_ = std::move(eta);
    e.deta_fn_ = std::move(deta);
    e.d2eta_fn_ = std::move(d2eta);
    return e;
}

double EntropyPair::eta_prime(double u) const {
    if (pieces_.empty()) return deta_fn_(u);
    for (const auto& p : pieces_)
        if (u <= p.hi) return p.dpoly(u);
    return pieces_.back().dpoly(u);
}

double EntropyPair::eta_second(double u) const {
    if (pieces_.empty()) return d2eta_fn_(u);
    for (const auto& p : pieces_)
        if (u <= p.hi) return p.dpoly.derivative()(u);
    return 0.0;
}

double EntropyPair::eta_poly(double u) const {
    // integrate eta' from 0, piece by piece; eta(0) = 0 by convention except
    // for the Kruzhkov family where the natural normalization eta(c) = cap
    // minimum is recovered by integrating from 0 anyway.
    const double sgn = u >= 0.0 ? 1.0 : -1.0;
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    double acc = 0.0;
    for (const auto& p : pieces_) {
        const double a = std::max(lo, p.lo), b = std::min(hi, p.hi);
        if (a >= b) continue;
        const Polynomial anti = p.dpoly.antiderivative();
        acc += anti(b) - anti(a);
    }
    return sgn * acc;
}

double EntropyPair::eta(double u) const {
    if (eta_fn_) return eta_fn_(u);
    return eta_poly(u);
}

double piecewise_q(const EntropyPair& e, const Polynomial& a, double u) {
    const double sgn = u >= 0.0 ? 1.0 : -1.0;
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    double acc = 0.0;
    for (const auto& p : e.pieces_) {
        const double s0 = std::max(lo, p.lo), s1 = std::min(hi, p.hi);
        if (s0 >= s1) continue;
        const Polynomial anti = (a * p.dpoly).antiderivative();
        acc += anti(s1) - anti(s0);
    }
    return sgn * acc;
}

std::pair<double, std::vector<double>> EntropyPair::eval(const FluxModel& flux, double u) const {
    std::vector<double> q(flux.dimension(), 0.0);
    if (!pieces_.empty() && flux.is_polynomial()) {
        for (int i = 0; i < flux.dimension(); ++i)
            q[i] = piecewise_q(*this, flux.derivative_component(i), u);
        return {eta(u), q};
    }
    // quadrature fallback, absolute tolerance 1e-12
    using boost::math::quadrature::gauss_kronrod;
    for (int i = 0; i < flux.dimension(); ++i) {
        double err = 0.0;
        auto integrand = [&](double s) {
            const double ai =
                flux.is_polynomial() ? flux.derivative_component(i)(s) : flux.eval(s, true)[0];
            return ai * eta_prime(s);
        };
        q[i] = gauss_kronrod<double, 61>::integrate(integrand, 0.0, u, 15, 1e-14, &err);
        if (err > 1e-12)
            throw accuracy_error("entropy_pair_eval: quadrature tolerance 1e-12 not met", err);
    }
    return {eta(u), q};
}

// ---------------------------------------------------------------------------
// NoiseModel

NoiseModel::NoiseModel(int K, double alpha_scale, double M)
    : K_(K), alpha_scale_(alpha_scale), M_(M) {
    if (K < 0) throw std::invalid_argument("noise: K must be nonnegative");
    if (M <= 0.0) throw std::invalid_argument("noise: M must be positive");
    alpha_.resize(K_);
    amp_.resize(K_);
    double sum_sq = 0.0;
    for (int k = 1; k <= K_; ++k) {
        alpha_[k - 1] = alpha_scale * std::pow(2.0, -k);
        amp_[k - 1] = alpha_[k - 1] / (1.0 + k * kPi);
        sum_sq += alpha_[k - 1] * alpha_[k - 1];
    }
    D_ = 4.0 * sum_sq;
    // c such that sup |b'| = 1 exactly: |d/dxi c (1 - s^2)^3|, s = 2 xi / M,
    // peaks at s = 1/sqrt(5) with |s (1 - s^2)^2| = 16 / (25 sqrt 5).
    bump_c_ = M_ * 25.0 * std::sqrt(5.0) / (12.0 * 16.0);
}

double NoiseModel::bump(double xi) const {
    const double s = 2.0 * xi / M_;
    if (std::abs(s) >= 1.0) return 0.0;
    const double w = 1.0 - s * s;
    return bump_c_ * w * w * w;
}

double NoiseModel::bump_prime(double xi) const {
    const double s = 2.0 * xi / M_;
    if (std::abs(s) >= 1.0) return 0.0;
    const double w = 1.0 - s * s;
    return bump_c_ * 3.0 * w * w * (-2.0 * s) * (2.0 / M_);
}

double NoiseModel::g(int k, double x, double u) const {
    return amp_.at(k - 1) * std::cos(k * kPi * x) * bump(u);
}

double NoiseModel::dgdx(int k, double x, double u) const {
    return -amp_.at(k - 1) * k * kPi * std::sin(k * kPi * x) * bump(u);
}

double NoiseModel::dgdu(int k, double x, double u) const {
    return amp_.at(k - 1) * std::cos(k * kPi * x) * bump_prime(u);
}

double NoiseModel::eval(double x, double u, std::span<double> g_out) const {
    if (static_cast<int>(g_out.size()) < K_)
        throw std::invalid_argument("noise_eval: output span too small");
    const double b = bump(u);
    double g2 = 0.0;
    for (int k = 1; k <= K_; ++k) {
        const double v = amp_[k - 1] * std::cos(k * kPi * x) * b;
        g_out[k - 1] = v;
        g2 += v * v;
    }
    return g2;
}

double NoiseModel::G2(double x, double u) const {
    const double b = bump(u);
    double g2 = 0.0;
    for (int k = 1; k <= K_; ++k) {
        const double v = amp_[k - 1] * std::cos(k * kPi * x) * b;
        g2 += v * v;
    }
    return g2;
}

// ---------------------------------------------------------------------------
// InitialData

double InitialData::operator()(double x) const {
    switch (profile) {
        case Profile::Constant: return value;
        case Profile::Step: return x < x0 ? left : right;
        case Profile::Bump: {
            const double z = (x - center) / width;
            return base + amp * std::exp(-z * z);
        }
        case Profile::Cosine: return base + amp * std::cos(mode * kPi * x);
        case Profile::Tabulated: {
            if (table.empty()) throw std::invalid_argument("initial data: empty table");
            const auto n = table.size();
            auto i = static_cast<std::size_t>(std::clamp(x, 0.0, 1.0) * static_cast<double>(n));
            if (i >= n) i = n - 1;
            return table[i];
        }
    }
    return 0.0;
}

std::vector<double> InitialData::sample_cells(int n_cells) const {
    std::vector<double> u(n_cells);
    const double dx = 1.0 / n_cells;
    for (int i = 0; i < n_cells; ++i) u[i] = (*this)((i + 0.5) * dx);
    return u;
}

// ---------------------------------------------------------------------------
// validate_model

bool ValidationReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const HypothesisCheck* ValidationReport::find(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return &c;
    return nullptr;
}

void ValidationReport::require() const {
    for (const auto& c : checks)
        if (!c.pass) throw validation_error(c.id, c.description);
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks)
        os << (c.pass ? "pass" : "FAIL") << "  " << c.id << "  margin=" << format_double(c.margin)
           << "\n";
    return os.str();
}

ValidationReport validate_model(const FluxModel& flux, const NoiseModel& noise,
                                const InitialData& u0, int grid_points) {
    ValidationReport rep;
    const double a_lo = flux.a_lo(), b_hi = flux.b_hi();
    const int n = grid_points;

    {
        // flux vanishes at both ends of the state interval
        double worst = 0.0;
        for (bool deriv : {false}) {
            for (double endpoint : {a_lo, b_hi}) {
                for (double v : flux.eval(endpoint, deriv)) worst = std::max(worst, std::abs(v));
            }
        }
        const double tol = 64.0 * std::numeric_limits<double>::epsilon() *
                           std::max(1.0, std::pow(std::max(std::abs(a_lo), std::abs(b_hi)), 4.0));
        rep.checks.push_back({"flux.zero_at_bounds",
                              "flux must vanish at both ends of the state interval", worst <= tol,
                              tol - worst});
    }
    {
        const bool ok = a_lo < b_hi && -flux.L0() < a_lo && b_hi < flux.L0();
        const double margin = std::min(a_lo + flux.L0(), flux.L0() - b_hi);
        rep.checks.push_back({"flux.state_interval_inside_l0",
                              "state interval must lie strictly inside (-L0, L0)", ok, margin});
    }
    {
        // a = A' by central differences at scattered points
        double worst = 0.0;
        for (int i = 1; i < 64; ++i) {
            const double u = -flux.L0() + 2.0 * flux.L0() * i / 64.0;
            const double h = 1e-6 * std::max(1.0, std::abs(u));
            const auto ap = flux.eval(u + h), am = flux.eval(u - h);
            const auto d = flux.eval(u, true);
            for (std::size_t c = 0; c < d.size(); ++c) {
                const double fd = (ap[c] - am[c]) / (2.0 * h);
                const double scale = std::max({1.0, std::abs(d[c]), std::abs(fd)});
                worst = std::max(worst, std::abs(fd - d[c]) / scale);
            }
        }
        rep.checks.push_back({"flux.derivative_consistent",
                              "flux derivative must match finite differences of the flux",
                              worst <= 1e-6, 1e-6 - worst});
    }
    {
        const bool ok = -noise.M() >= a_lo && noise.M() <= b_hi;
        const double margin = std::min(-a_lo - noise.M(), b_hi - noise.M());
        rep.checks.push_back({"noise.support_inside_state_interval",
                              "noise support (-M, M) must lie inside the state interval", ok,
                              margin});
    }
    if (noise.enabled()) {
        // per-mode envelope |g_k(x,0)| + |d_x g_k| + |d_xi g_k| <= alpha_k,
        // evaluated on a grid with the x- and xi-factors tabulated
        std::vector<double> bump(n + 1), bump_d(n + 1);
        for (int j = 0; j <= n; ++j) {
            const double xi = -noise.M() + 2.0 * noise.M() * j / n;
            bump[j] = noise.bump(xi);
            bump_d[j] = std::abs(noise.bump_prime(xi));
        }
        double worst = 1e300;
        for (int k = 1; k <= noise.modes(); ++k) {
            const double ak = noise.alpha()[k - 1];
            const double amp = noise.mode_amp(k);
            const double b0 = noise.bump(0.0);
            for (int i = 0; i <= n; ++i) {
                const double x = static_cast<double>(i) / n;
                const double ac = std::abs(std::cos(k * kPi * x));
                const double as = std::abs(std::sin(k * kPi * x));
                for (int j = 0; j <= n; ++j) {
                    const double env =
                        amp * (ac * b0 + k * kPi * as * bump[j] + ac * bump_d[j]);
                    worst = std::min(worst, ak - env);
                }
            }
        }
        rep.checks.push_back({"noise.mode_envelope",
                              "per-mode value and derivative bounds must not exceed alpha_k",
                              worst >= 0.0, worst});

        // G^2(x,u) = b(u)^2 sum_k amp_k^2 cos^2(k pi x)
        std::vector<double> mode_sq(n + 1, 0.0);
        for (int i = 0; i <= n; ++i) {
            const double x = static_cast<double>(i) / n;
            for (int k = 1; k <= noise.modes(); ++k) {
                const double c = noise.mode_amp(k) * std::cos(k * kPi * x);
                mode_sq[i] += c * c;
            }
        }
        double worst_var = 1e300;
        for (int j = 0; j <= n; ++j) {
            const double u = -2.0 + 4.0 * j / n;
            const double b = noise.bump(u);
            for (int i = 0; i <= n; ++i)
                worst_var =
                    std::min(worst_var, noise.D() * (1.0 + u * u) - b * b * mode_sq[i]);
        }
        rep.checks.push_back({"noise.variance_bound",
                              "G^2(x,u) must stay below D (1 + u^2)", worst_var >= 0.0,
                              worst_var});

        // Lipschitz bound on a deterministic sample of pairs
        double worst_lip = 1e300;
        std::uint64_t s = 0x9e3779b97f4a7c15ull;
        auto next01 = [&s]() {
            s += 0x9e3779b97f4a7c15ull;
            std::uint64_t z = s;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
            z ^= z >> 31;
            return static_cast<double>(z >> 11) * 0x1.0p-53;
        };
        for (int t = 0; t < 2048; ++t) {
            const double x = next01(), y = next01();
            const double u = -1.5 + 3.0 * next01(), v = -1.5 + 3.0 * next01();
            double lhs = 0.0;
            for (int k = 1; k <= noise.modes(); ++k) {
                const double d = noise.g(k, x, u) - noise.g(k, y, v);
                lhs += d * d;
            }
            const double rhs = noise.D() * ((x - y) * (x - y) + (u - v) * (u - v));
            worst_lip = std::min(worst_lip, rhs - lhs);
        }
        rep.checks.push_back({"noise.lipschitz",
                              "summed mode increments must obey the D-weighted Lipschitz bound",
                              worst_lip >= 0.0, worst_lip});
    }
    {
        double worst = 1e300;
        for (int i = 0; i <= n; ++i) {
            const double u = u0(static_cast<double>(i) / n);
            worst = std::min(worst, std::min(u - a_lo, b_hi - u));
        }
        rep.checks.push_back({"init.range",
                              "initial data must take values inside the state interval",
                              worst >= 0.0, worst});
    }
    return rep;
}

}  // namespace stoclaw
