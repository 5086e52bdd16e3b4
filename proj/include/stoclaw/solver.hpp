#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stoclaw/model.hpp"
#include "stoclaw/rng.hpp"
#include "stoclaw/spectral.hpp"

namespace stoclaw {

struct Grid1D {
    int N = 200;
    explicit Grid1D(int n_cells = 200) : N(n_cells) {
        if (N < 8) throw std::invalid_argument("grid: at least 8 cells required");
    }
    double dx() const noexcept { return 1.0 / N; }
    double center(int i) const noexcept { return (i + 0.5) / N; }
    double face(int f) const noexcept { return static_cast<double>(f) / N; }
};

enum class Backend { FiniteVolume, Mild };
enum class FluxScheme { EngquistOsher, LaxFriedrichs };

struct SolverConfig {
    double eps = 1e-2;
    double dt = 0.0;        // > 0 only when auto_cfl is off
    bool auto_cfl = true;
    double T = 0.5;
    double cfl_safety = 0.45;
    Backend backend = Backend::FiniteVolume;
    FluxScheme scheme = FluxScheme::EngquistOsher;
    bool clip_to_bounds = false;
    int n_cells = 200;

    // mild backend controls
    double picard_tol = 1e-9;
    int picard_max_iter = 40;
};

/// Time step and step count actually used by a run. auto_cfl picks the
/// largest dt with T/dt integral under
///   dt <= cfl_safety * min(dx / max|a|, dx^2 / (2 eps));
/// with cfl_safety <= 1/2 the combined advective + diffusive explicit update
/// is monotone.
struct ResolvedStep {
    double dt = 0.0;
    std::size_t steps = 0;
};
ResolvedStep resolve_time_step(const SolverConfig& cfg, const FluxModel& flux);

class cfl_error : public std::runtime_error {
public:
    cfl_error(const std::string& what, double suggested)
        : std::runtime_error(what), suggested_dt_(suggested) {}
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

class divergence_error : public std::runtime_error {
public:
    divergence_error(const std::string& what, std::size_t step)
        : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Monotone two-point fluxes for the scalar law. Engquist-Osher splits the
/// wave speed at its sign changes (closed form for polynomial fluxes);
/// Lax-Friedrichs adds a global speed penalty.
class NumericalFlux {
public:
    NumericalFlux(const FluxModel& flux, FluxScheme scheme);
    double operator()(double u_left, double u_right) const;
    double positive_part_integral(double u) const;  // int_0^u max(a, 0)
    double negative_part_integral(double u) const;  // int_0^u min(a, 0)
    double max_speed() const noexcept { return max_speed_; }

private:
    double signed_part(double u, bool positive) const;
    const FluxModel& flux_;
    FluxScheme scheme_;
    std::vector<double> breakpoints_;  // sign changes of a on the working range
    std::vector<bool> segment_positive_;
    double work_lo_, work_hi_, max_speed_, A0_;
};

/// One replica's full history: state at every time node plus the per-node
/// scalar series the diagnostics consume.
struct TrajectoryRecord {
    Grid1D grid{200};
    double eps = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0, replica = 0;

    std::vector<double> times;   // steps + 1 nodes
    std::vector<double> states;  // flat, (steps + 1) x N

    // per-node series
    std::vector<double> mass, l2, min_u, max_u, grad_energy;  // grad_energy = eps ||grad u||^2

    std::size_t domain_warnings = 0;  // flux evaluated beyond [a_lo - 1, b_hi + 1]
    double overshoot = 0.0;           // max excursion beyond [a_lo, b_hi]

    std::size_t nodes() const noexcept { return times.size(); }
    std::span<const double> state(std::size_t j) const {
        return {states.data() + j * static_cast<std::size_t>(grid.N),
                static_cast<std::size_t>(grid.N)};
    }
    std::span<double> state_mut(std::size_t j) {
        return {states.data() + j * static_cast<std::size_t>(grid.N),
                static_cast<std::size_t>(grid.N)};
    }
    /// sum over steps of eps ||grad u(t_j)||^2 dt (left endpoints): the exact
    /// generating sum of the kinetic histogram mass.
    double accumulated_dissipation() const;
};

PathRecord sample_increments(const NoiseModel& noise, const ResolvedStep& step, std::uint64_t seed,
                             std::uint64_t replica);

/// One explicit Euler-Maruyama finite-volume step. Interior faces carry
/// F = F_scheme(u_i, u_{i+1}) - eps (u_{i+1} - u_i)/dx; both boundary faces
/// carry exactly zero total flux.
std::vector<double> fv_step(std::span<const double> u, const SolverConfig& cfg,
                            const FluxModel& flux, const NoiseModel& noise,
                            const NumericalFlux& numflux, double dt,
                            std::span<const double> increments_at_step);

TrajectoryRecord simulate(const InitialData& u0, const SolverConfig& cfg, const FluxModel& flux,
                          const NoiseModel& noise, const PathRecord& path);
TrajectoryRecord simulate(std::span<const double> u0_cells, const SolverConfig& cfg,
                          const FluxModel& flux, const NoiseModel& noise, const PathRecord& path);

/// One application of the mild-solution map: heat semigroup on the problem's
/// initial data u0 (fixed, independent of v), Duhamel convolution of
/// -div A(v), the stochastic convolution of the noise evaluated along v, and
/// the boundary corrector driven by A(v) . nu. Omitting u0 starts from the
/// input's own initial state.
TrajectoryRecord mild_iterate(const TrajectoryRecord& v, const SolverConfig& cfg,
                              const FluxModel& flux, const NoiseModel& noise,
                              const PathRecord& path, const CosineTransform& transform,
                              std::span<const double> u0_cells = {});

/// Trajectory of the pure heat semigroup S(t) u0 on the step grid.
TrajectoryRecord heat_flow_trajectory(std::span<const double> u0_cells, const SolverConfig& cfg,
                                      const ResolvedStep& step, std::uint64_t seed = 0,
                                      std::uint64_t replica = 0);

struct PicardLog {
    std::vector<double> distances;  // successive star-norm distances
    bool converged = false;
    int iterations = 0;
};

/// Picard iteration v_{m+1} = K(v_m) started from the pure heat flow of the
/// initial data.
std::pair<TrajectoryRecord, PicardLog> fixed_point_solve(std::span<const double> u0_cells,
                                                         const SolverConfig& cfg,
                                                         const FluxModel& flux,
                                                         const NoiseModel& noise,
                                                         const PathRecord& path, double tol,
                                                         int max_iter, double c_star = 0.0,
                                                         double alpha_w = 0.5);

/// Exponentially weighted sup-plus-dissipation norm of the pairwise
/// difference of two replica-matched ensembles:
///   sqrt( sup_t e^{-C* t / alpha} mean_r [ sup_{s<=t} ||d(s)||^2
///                                          + eps int_0^t ||grad d||^2 ] ).
double star_norm(std::span<const TrajectoryRecord> ens1, std::span<const TrajectoryRecord> ens2,
                 double c_star, double alpha_w);

struct EnergyReport {
    double lhs = 0.0;      // E sup_t ||u||^2 + 2 eps E int ||grad u||^2
    double rhs = 0.0;      // ||u_0||^2 + 1
    double constant = 0.0; // lhs / rhs
};
EnergyReport energy_report(std::span<const TrajectoryRecord> ens);

/// ||u - v||_{L^1((0,T) x O)} on a shared grid.
double l1_space_time_distance(const TrajectoryRecord& u, const TrajectoryRecord& v);

}  // namespace stoclaw
