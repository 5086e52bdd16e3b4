#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stoclaw/poly.hpp"

namespace stoclaw {

/// Flux A : R -> R^d with a = A', zero at both ends of the invariant state
/// interval [a_lo, b_hi]. The builtin family is
///   A_i(u) = (u - a_lo)^{l_i + 1} (u - b_hi)^{l_i + 1} / (l_i + 1),
/// which has a double zero of order l_i + 1 at each end. Arbitrary
/// polynomial components are accepted as long as they vanish at the ends.
class FluxModel {
public:
    enum class Kind { ExampleFamily, Polynomial, Tabulated };

    static FluxModel example_family(std::vector<int> exponents, double a_lo, double b_hi,
                                    double L0);
    static FluxModel polynomial(std::vector<Polynomial> components, double a_lo, double b_hi,
                                double L0);
    /// Wraps callables; evaluations fall back to sampling-based methods.
    static FluxModel tabulated(std::function<double(double)> A, std::function<double(double)> a,
                               double a_lo, double b_hi, double L0);

    Kind kind() const noexcept { return kind_; }
    int dimension() const noexcept { return static_cast<int>(A_.size()); }
    double a_lo() const noexcept { return a_lo_; }
    double b_hi() const noexcept { return b_hi_; }
    double L0() const noexcept { return L0_; }
    const std::vector<int>& exponents() const noexcept { return exponents_; }

    bool is_polynomial() const noexcept { return kind_ != Kind::Tabulated; }
    const Polynomial& component(int i) const { return A_.at(i); }
    const Polynomial& derivative_component(int i) const { return a_.at(i); }

    /// A_i(u) or, with `want_derivative`, a_i(u) for every component.
    /// Throws std::domain_error on non-finite input.
    std::vector<double> eval(double u, bool want_derivative = false) const;

    /// Scalar shortcuts for the 1-D solver (component 0).
    double A(double u) const;
    double a(double u) const;

    /// Compactly supported modification of A (component 0): equals A on
    /// [a_lo, b_hi], C^2 ramps down to 0 across one unit on each side. The
    /// mild-solution map needs it: transient Picard iterates overshoot the
    /// state interval and the raw polynomial flux grows fast out there.
    double A_trunc(double u) const;

    /// sup over [lo, hi] of |a_0|.
    double max_wave_speed(double lo, double hi) const;

private:
    Kind kind_ = Kind::ExampleFamily;
    double a_lo_ = -1.0, b_hi_ = 1.0, L0_ = 1.25;
    std::vector<int> exponents_;
    std::vector<Polynomial> A_, a_;
    std::function<double(double)> A_fn_, a_fn_;
};

/// Convex entropy eta together with its flux companion
/// q_i(u) = \int_0^u a_i(s) eta'(s) ds.
class EntropyPair {
public:
    /// eta(u) = u^2 / 2.
    static EntropyPair quadratic();
    /// Smoothed |u - c|: quadratic cap of half-width `delta` around c,
    /// so eta is C^2 with eta'' = 1/delta on the cap and 0 outside.
    static EntropyPair kruzhkov(double c, double delta = 1e-3);
    /// Polynomial eta (must be convex on the state interval).
    static EntropyPair from_polynomial(Polynomial eta);
    /// Arbitrary C^2 entropy; q falls back to adaptive quadrature.
    static EntropyPair custom(std::function<double(double)> eta, std::function<double(double)> deta,
                              std::function<double(double)> d2eta);

    double eta(double u) const;
    double eta_prime(double u) const;
    double eta_second(double u) const;

    /// (eta(u), q(u)) with q per flux component. Polynomial eta' yields a
    /// closed form; otherwise adaptive quadrature to abs tolerance 1e-12
    /// (accuracy_error on failure, carrying the achieved tolerance).
    std::pair<double, std::vector<double>> eval(const FluxModel& flux, double u) const;

    bool has_polynomial_derivative() const noexcept { return !pieces_.empty(); }

private:
    struct Piece {
        double lo, hi;      // eta' = poly on [lo, hi] (+-inf encoded as huge)
        Polynomial dpoly;   // eta' restricted to the piece
    };
    std::vector<Piece> pieces_;  // empty => use callables
    std::function<double(double)> eta_fn_, deta_fn_, d2eta_fn_;
    // closed forms when piecewise-polynomial
    double eta_poly(double u) const;
    friend double piecewise_q(const EntropyPair&, const Polynomial& a, double u);
};

/// Truncated mode family
///   g_k(x, xi) = (alpha_k / (1 + k pi)) cos(k pi x) b(xi),  k = 1..K,
/// with b a C^2 polynomial bump supported in (-M/2, M/2) (hence inside
/// (-M, M)) scaled so that sup |b'| <= 1. The modal damping keeps
/// |d_x g_k| <= alpha_k and the bump keeps |d_xi g_k| <= alpha_k.
class NoiseModel {
public:
    NoiseModel() = default;
    NoiseModel(int K, double alpha_scale, double M);
    static NoiseModel silent() { return NoiseModel(0, 0.0, 0.5); }

    int modes() const noexcept { return K_; }
    double M() const noexcept { return M_; }
    const std::vector<double>& alpha() const noexcept { return alpha_; }
    /// D = 4 sum alpha_k^2, computed exactly as written.
    double D() const noexcept { return D_; }
    bool enabled() const noexcept { return K_ > 0; }

    double bump(double xi) const;
    double bump_prime(double xi) const;
    double bump_peak() const noexcept { return bump_c_; }
    /// Per-mode amplitude alpha_k / (1 + k pi).
    double mode_amp(int k) const { return amp_.at(k - 1); }

    double g(int k, double x, double u) const;  // k = 1..K
    double dgdx(int k, double x, double u) const;
    double dgdu(int k, double x, double u) const;

    /// Fills g_1..g_K at (x, u); returns G^2 = sum g_k^2.
    double eval(double x, double u, std::span<double> g_out) const;
    double G2(double x, double u) const;

private:
    int K_ = 0;
    double alpha_scale_ = 0.0, M_ = 0.5, D_ = 0.0, bump_c_ = 0.0;
    std::vector<double> alpha_, amp_;
};

/// Initial profiles on [0, 1].
struct InitialData {
    enum class Profile { Constant, Step, Bump, Cosine, Tabulated };
    Profile profile = Profile::Cosine;
    double value = 0.0;                    // Constant
    double left = 0.8, right = -0.6, x0 = 0.5;  // Step
    double base = 0.0, amp = 0.8;          // Bump / Cosine
    double center = 0.5, width = 0.12;     // Bump
    int mode = 2;                          // Cosine: base + amp cos(mode pi x)
    std::vector<double> table;             // Tabulated (cell values)

    double operator()(double x) const;
    std::vector<double> sample_cells(int n_cells) const;
};

struct HypothesisCheck {
    std::string id;           // e.g. "flux.zero_at_bounds"
    std::string description;  // human-readable statement of the hypothesis
    bool pass = false;
    double margin = 0.0;      // worst-case slack (negative <=> violated)
};

struct ValidationReport {
    std::vector<HypothesisCheck> checks;
    bool all_pass() const;
    const HypothesisCheck* find(const std::string& id) const;
    /// Throws validation_error naming the first failed hypothesis.
    void require() const;
    std::string summary() const;
};

/// Verifies every structural hypothesis on a validation grid and reports
/// each with its worst-case margin. Run before any simulation.
ValidationReport validate_model(const FluxModel& flux, const NoiseModel& noise,
                                const InitialData& u0, int grid_points = 512);

}  // namespace stoclaw
