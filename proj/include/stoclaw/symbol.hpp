#pragma once

#include <span>
#include <string>
#include <vector>

#include "stoclaw/model.hpp"

namespace stoclaw {

/// Query against the kinetic symbol i(tau + a(xi) . kappa). With
/// epsilon > 0 the parabolic variant i(tau + a(xi) . n) + epsilon |n|^2 is
/// meant and `kappa` carries the (integer) wave vector n.
struct SymbolQuery {
    double tau = 0.0;
    std::vector<double> kappa;
    double delta = 1e-2;
    double epsilon = 0.0;

    /// Enforces |kappa| = 1 within 1e-12 (hyperbolic sup-scan queries).
    void require_unit() const;
};

struct MeasureResult {
    double measure = 0.0;
    double error_bar = 0.0;  // 0 for the exact root-isolation path
    bool exact = true;
};

/// 1-D Lebesgue measure of { xi in (-L0, L0) : |symbol| <= delta }.
/// Polynomial fluxes are handled by root isolation (abs error well below
/// 1e-10 L0); non-polynomial fluxes fall back to dense sampling and the
/// detailed form carries the sampling error bar.
double omega_set_measure(const FluxModel& flux, const SymbolQuery& q);
double omega_set_measure(const FluxModel& flux, double tau, std::span<const double> kappa,
                         double delta, double epsilon = 0.0);
MeasureResult omega_set_measure_detailed(const FluxModel& flux, double tau,
                                         std::span<const double> kappa, double delta,
                                         double epsilon = 0.0);

struct SupMeasure {
    double measure = 0.0;
    double argmax_tau = 0.0;
    std::vector<double> argmax_kappa;
    bool refinement_boundary_warning = false;
};

/// sup over tau in R and |kappa| = 1 of the sublevel-set measure. The tau
/// scan is restricted to shifted critical values of a(xi) . kappa; for
/// d >= 2 directions are scanned on a grid (uniform angles for d = 2,
/// Fibonacci lattice for d = 3) with one local refinement pass and the
/// coordinate axes always included.
SupMeasure sup_sphere_measure(const FluxModel& flux, double delta, int directions = 1000);

struct ExponentFit {
    double alpha_hat = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // RMS of log-space fit residuals
    std::vector<double> deltas, measures;
    std::vector<double> excluded;  // deltas dropped for nonpositive measure
    std::vector<SupMeasure> details;
};

/// Least-squares slope of log sup-measure against log delta.
/// Requires >= 8 grid points spanning >= 2 decades.
ExponentFit exponent_fit(const FluxModel& flux, std::span<const double> delta_grid,
                         int directions = 1000);

struct GhReport {
    struct Row {
        double J, delta, omega, ratio;  // ratio = omega / (delta / J)^alpha
    };
    std::vector<Row> rows;
    double alpha = 0.0;             // exponent used in the ratio
    double band_sup_ratio = 0.0;    // sup over band of |a'(xi) . n| / J
    bool omega_bounded = false;     // ratios show no growth trend in J
    bool band_bounded = false;
    bool zero_set_null = false;     // root isolation found measure-zero sets
    int zero_set_samples = 0;
};

/// Verifies the dyadic-band nondegeneracy conditions with beta = 1 and the
/// weak null-set condition, sampling integer wave vectors with |n| in
/// [J/2, 2J]. `alpha` = 0 picks the flux's decay exponent automatically
/// (1 / max(2, l_max) for the builtin family: interior extrema cap the
/// decay at 1/2 even when every exponent is 1).
GhReport gh_conditions(const FluxModel& flux, std::span<const double> J_list,
                       std::span<const double> delta_list, double alpha = 0.0,
                       int zero_set_samples = 100, std::uint64_t seed = 20240701);

/// Aggregated scan artifact for the CLI and the manifest.
struct SymbolReport {
    std::vector<double> deltas;
    std::vector<SupMeasure> sup_rows;
    ExponentFit fit;
};

SymbolReport symbol_scan(const FluxModel& flux, double delta_min, double delta_max, int points,
                         int directions = 1000);

}  // namespace stoclaw
