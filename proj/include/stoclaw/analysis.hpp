#pragma once

#include <span>
#include <vector>

#include "stoclaw/model.hpp"
#include "stoclaw/poly.hpp"
#include "stoclaw/rng.hpp"
#include "stoclaw/solver.hpp"

namespace stoclaw {

// ---------------------------------------------------------------------------
// test-function library: tensor products of smoothed plateaus in t and x and
// polynomials in xi, with analytic derivatives

/// C^2 plateau supported on [x0, x1]: quintic-smoothstep rise over width w,
/// flat 1 in between, mirrored fall.
struct SpaceBump {
    double x0 = 0.2, x1 = 0.8, w = 0.1;
    double operator()(double x) const;
    double d1(double x) const;
    double d2(double x) const;
    bool interior(double margin) const { return x0 >= margin && x1 <= 1.0 - margin; }
};

/// C^2 window in time: optional rise over [t0, t0 + w] (omitted when t0 < 0,
/// so the window is open at t = 0 and the initial term is active), flat 1,
/// smooth fall ending at t1. Always vanishes for t >= t1.
struct TimeWindow {
    double t0 = -1.0, t1 = 0.4, w = 0.05;
    double operator()(double t) const;
    double d1(double t) const;
};

struct SeparableTest {
    TimeWindow time;
    SpaceBump space;
    Polynomial xi = Polynomial::constant(1.0);  // P(xi)
};

// ---------------------------------------------------------------------------
// kinetic function profiles

/// chi(u; xi) = 1_{(-inf, u)}(xi) - 1_{(-inf, 0)}(xi) sampled at bin centers.
std::vector<double> chi_reconstruct(double u, std::span<const double> xi_centers);
/// f(u; xi) = 1_{u > xi} sampled at bin centers.
std::vector<double> f_indicator(double u, std::span<const double> xi_centers);

// ---------------------------------------------------------------------------
// kinetic measure histogram

/// Binned kinetic defect measure: the cell (t_j, x_i) with one-sided face
/// gradient g = (u_{i+1} - u_i)/dx deposits eps g^2 dx dt into the xi-bin of
/// u_i. Total mass therefore reproduces the solver's accumulated
/// dissipation sum exactly (same terms, reordered).
struct KineticHistogram {
    std::vector<double> t_edges, x_edges, xi_edges;
    std::vector<double> mass;  // flat [it][ix][ixi]
    double total = 0.0;
    double xi_support_min = 0.0, xi_support_max = 0.0;

    std::size_t index(std::size_t it, std::size_t ix, std::size_t ixi) const {
        return (it * (x_edges.size() - 1) + ix) * (xi_edges.size() - 1) + ixi;
    }
    double bin_sum() const;
};

KineticHistogram kinetic_measure(const TrajectoryRecord& traj, const FluxModel& flux,
                                 int t_bins = 32, int x_bins = 32, int xi_bins = 256,
                                 double xi_margin = 0.05);

/// Merge b into a (bin grids must agree); associative with fixed order.
void merge_histogram(KineticHistogram& a, const KineticHistogram& b);

// ---------------------------------------------------------------------------
// weak-form residuals

enum class WeakForm { Kinetic, Entropy, Conservation };

struct WeakFormResult {
    double raw = 0.0;            // assembled LHS - RHS (signed)
    double normalization = 1.0;  // max(1, sum of term magnitudes)
    double residual = 0.0;       // |raw| / normalization (signed raw for entropy)
};

/// Assembles every term of the cited identity from the discrete trajectory.
/// Derivative pairings in t and x are discretized by exact differences of
/// the test function over step and cell boundaries, so that constants
/// telescope and the xi-independent kinetic form reduces to the conservation
/// form structurally. The xi-pairings of the kinetic form are closed-form
/// moments of chi(u; .) against P.
///
/// Kinetic and entropy forms require the space bump to vanish on a margin of
/// at least 2 dx at both ends (domain error otherwise); the conservation
/// form accepts boundary-supported tests. For form = Entropy, `residual`
/// carries the signed defect (entropy dissipation; >= -tol for a correct
/// scheme) and `eta` must be given.
WeakFormResult weak_form_residual(const TrajectoryRecord& traj, const PathRecord& path,
                                  const FluxModel& flux, const NoiseModel& noise, WeakForm form,
                                  const SeparableTest& test,
                                  const EntropyPair* eta = nullptr);

// ---------------------------------------------------------------------------
// mass / comparison series

std::vector<double> mass_series(const TrajectoryRecord& traj);

struct DriftStats {
    double mean = 0.0;
    double std_error = 0.0;
    int replicas = 0;
};
/// Ensemble statistics of mass(T) - mass(0).
DriftStats mass_drift_stats(std::span<const TrajectoryRecord> ens);

/// Exact per-step noise mass increment sum_k (sum_i g_k(x_i,u_ij) dx) db_kj;
/// the flux terms telescope, so mass(t_{j+1}) - mass(t_j) equals this.
double noise_mass_increment(const TrajectoryRecord& traj, const NoiseModel& noise,
                            const PathRecord& path, std::size_t j);

struct PositivePartSeries {
    std::vector<double> values;  // per node, int (u1 - u2)_+ dx
    double max_increase = 0.0;   // largest per-step increase
    int violations = 0;          // steps increasing by more than 1e-8
};
PositivePartSeries positive_part_series(const TrajectoryRecord& t1, const TrajectoryRecord& t2);

// ---------------------------------------------------------------------------
// boundary traces

struct TraceSeries {
    std::vector<double> depths;  // strictly decreasing
    std::vector<double> times;
    // layer_left[d][j] = u(t_j, depth_d), layer_right[d][j] = u(t_j, 1 - depth_d)
    std::vector<std::vector<double>> layer_left, layer_right;
    // L1-in-time distance between consecutive depths
    std::vector<double> dist_left, dist_right;
    // Richardson (order 1) extrapolation from the two shallowest layers
    std::vector<double> trace_left, trace_right;
    bool cauchy_left = false, cauchy_right = false;
};

TraceSeries strong_trace(const TrajectoryRecord& traj, std::span<const double> depths);

/// L1-in-time distance between two trace estimates living on possibly
/// different time grids (linear resampling onto the first grid).
double trace_l1_distance(std::span<const double> times_a, std::span<const double> vals_a,
                         std::span<const double> times_b, std::span<const double> vals_b);

// ---------------------------------------------------------------------------
// chi-function criterion

struct ChiDistance {
    double distance = 0.0;             // mean over rows of the L1(xi) defect
    std::vector<double> states;        // reconstructed v per row
    bool is_chi_function = false;      // distance <= tol
};

/// g is a profile over rows x xi-bins (row-major); v = int g dxi per row and
/// the distance is the L1 gap between g and chi(v; .).
ChiDistance chi_function_distance(std::span<const double> g, std::size_t rows,
                                  std::span<const double> xi_centers, double dxi,
                                  double tol = 1e-8);

// ---------------------------------------------------------------------------
// regularity diagnostics

struct GagliardoEntry {
    double norm = 0.0;       // (time-avg of ||w||_r^r + [w]_{s,r}^r)^{1/r}
    double seminorm = 0.0;   // time-avg seminorm part, ^{1/r}
    double lr_part = 0.0;
};

/// Discrete Gagliardo W^{s,r} norm of cutoff * u, time-averaged over a
/// subsampled node grid. The cutoff must vanish on a margin of 2 dx.
GagliardoEntry gagliardo_norm(const TrajectoryRecord& traj, double s, double r,
                              const SpaceBump& cutoff, int max_time_samples = 64);

/// max over snapshot pairs of ||u(t) - u(t')||_{H^-1} / |t - t'|^lambda with
/// the H^-1 norm evaluated spectrally (alpha = -1/2 scale).
double holder_time_seminorm(const TrajectoryRecord& traj, double lambda, int max_snapshots = 33);

}  // namespace stoclaw
