#pragma once

#include <span>
#include <vector>

namespace stoclaw {

/// Cosine-basis representation of a function on (0, 1):
///   h(x) = sum_n h_n phi_n(x),  phi_0 = 1,  phi_n(x) = sqrt(2) cos(n pi x),
/// the eigenbasis of the Neumann Laplacian with eigenvalues (n pi)^2.
struct SpectralField {
    std::vector<double> c;

    SpectralField() = default;
    explicit SpectralField(std::size_t n_modes) : c(n_modes, 0.0) {}
    explicit SpectralField(std::vector<double> coeffs) : c(std::move(coeffs)) {}
    std::size_t modes() const noexcept { return c.size(); }
    double l2_norm_sq() const;
    /// sum lambda_n c_n^2 = ||h'||^2 in L^2.
    double grad_norm_sq() const;
};

double neumann_eigenvalue(int n);
double neumann_mode(int n, double x);  // phi_n(x)

/// Orthonormal grid <-> mode maps for N cell midpoints. Modes 0..N-1 form an
/// orthonormal basis of grid functions under the dx-weighted inner product,
/// so forward/inverse are exact inverses and Parseval holds to rounding.
class CosineTransform {
public:
    explicit CosineTransform(int n_cells);
    int cells() const noexcept { return n_; }
    SpectralField forward(std::span<const double> values) const;
    std::vector<double> inverse(const SpectralField& h) const;

    /// Coefficients of the sine expansion sum_m s_m sqrt(2) sin(m pi x),
    /// m = 1..N-1, of grid values; differentiating it in x gives the cosine
    /// coefficients m pi s_m, which is how divergence terms move to modes.
    std::vector<double> sine_forward(std::span<const double> values) const;

private:
    int n_;
    std::vector<double> cosine_;  // [n][i] = phi_n(x_i)
    std::vector<double> sine_;    // [m-1][i] = sqrt(2) sin(m pi x_i)
};

/// Heat semigroup: h_n -> exp(-eps lambda_n t) h_n. Contraction on every
/// H_A^alpha; throws std::domain_error for t < 0.
SpectralField semigroup_apply(const SpectralField& h, double t, double eps);

/// (sum (1 + lambda_n)^{2 alpha} h_n^2)^{1/2}; alpha = 1/2 is the H^1 norm
/// scale, alpha = -1/2 the H^{-1} scale.
double ha_norm(const SpectralField& h, double alpha);

/// Time-grid path of spectral fields (piecewise constant between nodes for
/// forcing paths; node samples for solution paths).
struct SpectralPath {
    std::vector<double> times;          // strictly increasing
    std::vector<SpectralField> values;  // one per time node

    void validate() const;
    std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

/// Per-step, per-Wiener-mode coefficients of a Hilbert-Schmidt map Psi;
/// values[j][k] are the cosine coefficients of Psi(t_j) e_k.
struct OperatorPath {
    std::vector<double> times;
    std::vector<std::vector<SpectralField>> values;
};

/// Deterministic Duhamel convolution int_0^t S(t-s) h(s) ds with
/// piecewise-constant h per step, integrated exactly per mode.
SpectralPath duhamel(const SpectralPath& hpath, double eps);

/// Stochastic convolution int_0^t S(t-s) Psi(s) dW(s) with left-endpoint
/// (predictable) evaluation: increment j enters with weight
/// exp(-eps lambda_n (t - t_j)).
/// `increments` is row-major [k][j] over K Wiener modes and steps() steps.
SpectralPath stochastic_convolution(const OperatorPath& psi, std::span<const double> increments,
                                    int n_wiener_modes, double eps);

/// Corrector driven by the boundary values of the normal flux: solves
///   w_n' = -eps lambda_n w_n + phi_n(0) s0(t) + phi_n(1) s1(t),  w(0) = 0,
/// where s0, s1 are the per-endpoint time series of A(v) . nu (nu(0) = -1,
/// nu(1) = +1), piecewise constant per step.
SpectralPath boundary_corrector(std::span<const double> times, std::span<const double> flux_nu_0,
                                std::span<const double> flux_nu_1, int n_modes, double eps);

}  // namespace stoclaw
