#include "stoclaw/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stoclaw/util.hpp"

namespace stoclaw {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// time step resolution

ResolvedStep resolve_time_step(const SolverConfig& cfg, const FluxModel& flux) {
    const Grid1D grid(cfg.n_cells);
    const double dx = grid.dx();
    const double amax = flux.max_wave_speed(flux.a_lo(), flux.b_hi());
    double bound = cfg.cfl_safety * dx * dx / (2.0 * cfg.eps);
    if (amax > 0.0) bound = std::min(bound, cfg.cfl_safety * dx / amax);

    ResolvedStep r;
    if (cfg.auto_cfl || cfg.dt <= 0.0) {
        r.steps = static_cast<std::size_t>(std::ceil(cfg.T / bound - 1e-12));
        r.steps = std::max<std::size_t>(r.steps, 1);
        r.dt = cfg.T / static_cast<double>(r.steps);
    } else {
        if (cfg.dt > bound)
            throw cfl_error("time step violates the CFL bound", bound);
        r.steps = static_cast<std::size_t>(std::llround(cfg.T / cfg.dt));
        if (std::abs(r.steps * cfg.dt - cfg.T) > 1e-9 * cfg.T)
            throw std::invalid_argument("time step must divide the horizon");
        r.dt = cfg.dt;
    }
    return r;
}

// ---------------------------------------------------------------------------
// numerical flux

NumericalFlux::NumericalFlux(const FluxModel& flux, FluxScheme scheme)
    : flux_(flux), scheme_(scheme) {
    work_lo_ = flux.a_lo() - 1.0;
    work_hi_ = flux.b_hi() + 1.0;
    // wave speed over the invariant interval; the solution never leaves it
    max_speed_ = flux.max_wave_speed(flux.a_lo(), flux.b_hi());
    A0_ = flux.A(0.0);
    if (flux.is_polynomial()) {
        const auto roots = flux.derivative_component(0).roots_in(work_lo_, work_hi_);
        breakpoints_.push_back(work_lo_);
        for (double r : roots) breakpoints_.push_back(r);
        breakpoints_.push_back(work_hi_);
        for (std::size_t s = 0; s + 1 < breakpoints_.size(); ++s)
            segment_positive_.push_back(flux.a(0.5 * (breakpoints_[s] + breakpoints_[s + 1])) > 0.0);
    }
}

double NumericalFlux::signed_part(double u, bool positive) const {
    // int_0^u of the positive (or negative) part of a, via A differences on
    // the sign segments of a.
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < breakpoints_.size(); ++s) {
        if (segment_positive_[s] != positive) continue;
        const double a = std::max(lo, breakpoints_[s]);
        const double b = std::min(hi, breakpoints_[s + 1]);
        if (a >= b) continue;
        acc += flux_.A(b) - flux_.A(a);
    }
    return u >= 0.0 ? acc : -acc;
}

double NumericalFlux::positive_part_integral(double u) const { return signed_part(u, true); }
double NumericalFlux::negative_part_integral(double u) const { return signed_part(u, false); }

double NumericalFlux::operator()(double ul, double ur) const {
    if (scheme_ == FluxScheme::LaxFriedrichs || !flux_.is_polynomial()) {
        return 0.5 * (flux_.A(ul) + flux_.A(ur)) - 0.5 * max_speed_ * (ur - ul);
    }
    return A0_ + positive_part_integral(ul) + negative_part_integral(ur);
}

// ---------------------------------------------------------------------------
// finite-volume stepping

namespace {

// mode-k cosine factors tabulated once per run: [k-1][i] = cos(k pi x_i)
std::vector<double> cosine_table(const NoiseModel& noise, int N) {
    std::vector<double> t(static_cast<std::size_t>(noise.modes()) * N);
    const double dx = 1.0 / N;
    for (int k = 1; k <= noise.modes(); ++k)
        for (int i = 0; i < N; ++i)
            t[static_cast<std::size_t>(k - 1) * N + i] = std::cos(k * kPi * (i + 0.5) * dx);
    return t;
}

struct StepScratch {
    std::vector<double> faces, noise_sum, cosw;
};

// compensated sequential sum: deterministic for a fixed input order
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

void step_into(std::span<const double> u, std::span<double> out, const SolverConfig& cfg,
               const FluxModel& flux, const NoiseModel& noise, const NumericalFlux& numflux,
               double dt, std::span<const double> db, StepScratch& scratch,
               std::size_t* domain_warnings) {
    const int N = static_cast<int>(u.size());
    const double dx = 1.0 / N;
    auto& F = scratch.faces;
    F.assign(static_cast<std::size_t>(N) + 1, 0.0);

    const double wlo = flux.a_lo() - 1.0, whi = flux.b_hi() + 1.0;
    for (int i = 0; i < N; ++i) {
        if (u[i] < wlo || u[i] > whi) ++(*domain_warnings);
    }
    for (int f = 1; f < N; ++f) {
        const double ul = u[f - 1], ur = u[f];
        F[f] = numflux(ul, ur) - cfg.eps * (ur - ul) / dx;
    }
    // F[0] = F[N] = 0: zero total (advective + diffusive) boundary flux

    // sum_k g_k(x_i, .) db_k = bump(u_i) * sum_k amp_k cos(k pi x_i) db_k
    auto& ns = scratch.noise_sum;
    const bool noisy = noise.enabled() && !db.empty();
    if (noisy) {
        ns.assign(N, 0.0);
        if (scratch.cosw.empty()) scratch.cosw = cosine_table(noise, N);
        for (int k = 1; k <= noise.modes(); ++k) {
            const double w = noise.mode_amp(k) * db[k - 1];
            if (w == 0.0) continue;
            const double* row = &scratch.cosw[static_cast<std::size_t>(k - 1) * N];
            for (int i = 0; i < N; ++i) ns[i] += w * row[i];
        }
    }

    for (int i = 0; i < N; ++i) {
        double v = u[i] - dt / dx * (F[i + 1] - F[i]);
        if (noisy) v += noise.bump(u[i]) * ns[i];
        if (cfg.clip_to_bounds) v = std::clamp(v, flux.a_lo(), flux.b_hi());
        out[i] = v;
    }
}

void record_node(TrajectoryRecord& traj, std::span<const double> u) {
    const int N = traj.grid.N;
    const double dx = traj.grid.dx();
    KahanSum mass, sq, grad;
    double mn = u[0], mx = u[0];
    for (int i = 0; i < N; ++i) {
        mass.add(u[i] * dx);
        sq.add(u[i] * u[i] * dx);
        mn = std::min(mn, u[i]);
        mx = std::max(mx, u[i]);
    }
    for (int i = 0; i + 1 < N; ++i) {
        const double g = (u[i + 1] - u[i]) / dx;
        grad.add(g * g * dx);
    }
    traj.mass.push_back(mass.s);
    traj.l2.push_back(std::sqrt(std::max(0.0, sq.s)));
    traj.min_u.push_back(mn);
    traj.max_u.push_back(mx);
    traj.grad_energy.push_back(traj.eps * grad.s);
}

}  // namespace

double TrajectoryRecord::accumulated_dissipation() const {
    if (grad_energy.size() < 2) return 0.0;
    std::vector<double> terms(grad_energy.begin(), grad_energy.end() - 1);
    for (double& t : terms) t *= dt;
    return pairwise_sum(terms);
}

PathRecord sample_increments(const NoiseModel& noise, const ResolvedStep& step, std::uint64_t seed,
                             std::uint64_t replica) {
    return PathRecord(seed, replica, noise.modes(), step.steps, step.dt);
}

std::vector<double> fv_step(std::span<const double> u, const SolverConfig& cfg,
                            const FluxModel& flux, const NoiseModel& noise,
                            const NumericalFlux& numflux, double dt,
                            std::span<const double> increments_at_step) {
    const int N = static_cast<int>(u.size());
    const double dx = 1.0 / N;
    double bound = cfg.cfl_safety * dx * dx / (2.0 * cfg.eps);
    if (numflux.max_speed() > 0.0) bound = std::min(bound, cfg.cfl_safety * dx / numflux.max_speed());
    if (dt > bound * (1.0 + 1e-12)) throw cfl_error("time step violates the CFL bound", bound);

    std::vector<double> out(u.size());
    StepScratch scratch;
    std::size_t warnings = 0;
    step_into(u, out, cfg, flux, noise, numflux, dt, increments_at_step, scratch, &warnings);
    for (int i = 0; i < N; ++i)
        if (!std::isfinite(out[i])) throw divergence_error("non-finite state after step", 0);
    return out;
}

TrajectoryRecord simulate(const InitialData& u0, const SolverConfig& cfg, const FluxModel& flux,
                          const NoiseModel& noise, const PathRecord& path) {
    return simulate(std::span<const double>(u0.sample_cells(cfg.n_cells)), cfg, flux, noise, path);
}

TrajectoryRecord simulate(std::span<const double> u0_cells, const SolverConfig& cfg,
                          const FluxModel& flux, const NoiseModel& noise, const PathRecord& path) {
    if (cfg.backend == Backend::Mild) {
        auto [traj, log] = fixed_point_solve(u0_cells, cfg, flux, noise, path, cfg.picard_tol,
                                             cfg.picard_max_iter);
        return traj;
    }
    const ResolvedStep step{path.dt(), path.steps()};
    const Grid1D grid(cfg.n_cells);
    if (static_cast<int>(u0_cells.size()) != grid.N)
        throw std::invalid_argument("simulate: initial data size mismatch");

    NumericalFlux numflux(flux, cfg.scheme);
    {
        const double dx = grid.dx();
        double bound = cfg.cfl_safety * dx * dx / (2.0 * cfg.eps);
        if (numflux.max_speed() > 0.0)
            bound = std::min(bound, cfg.cfl_safety * dx / numflux.max_speed());
        if (step.dt > bound * (1.0 + 1e-12))
            throw cfl_error("time step violates the CFL bound", bound);
    }

    TrajectoryRecord traj;
    traj.grid = grid;
    traj.eps = cfg.eps;
    traj.dt = step.dt;
    traj.seed = path.seed();
    traj.replica = path.replica();
    traj.times.resize(step.steps + 1);
    traj.states.resize((step.steps + 1) * static_cast<std::size_t>(grid.N));
    for (std::size_t j = 0; j <= step.steps; ++j) traj.times[j] = step.dt * static_cast<double>(j);

    std::copy(u0_cells.begin(), u0_cells.end(), traj.state_mut(0).begin());
    record_node(traj, traj.state(0));

    StepScratch scratch;
    std::vector<double> db(noise.modes());
    for (std::size_t j = 0; j < step.steps; ++j) {
        for (int k = 0; k < noise.modes(); ++k) db[k] = path.db(k, j);
        step_into(traj.state(j), traj.state_mut(j + 1), cfg, flux, noise, numflux, step.dt, db,
                  scratch, &traj.domain_warnings);
        const auto next = traj.state(j + 1);
        for (double v : next)
            if (!std::isfinite(v)) throw divergence_error("non-finite state after step", j);
        record_node(traj, next);
    }
    for (std::size_t j = 0; j < traj.min_u.size(); ++j) {
        traj.overshoot = std::max(traj.overshoot, flux.a_lo() - traj.min_u[j]);
        traj.overshoot = std::max(traj.overshoot, traj.max_u[j] - flux.b_hi());
    }
    traj.overshoot = std::max(traj.overshoot, 0.0);
    return traj;
}

// ---------------------------------------------------------------------------
// mild backend

TrajectoryRecord mild_iterate(const TrajectoryRecord& v, const SolverConfig& cfg,
                              const FluxModel& flux, const NoiseModel& noise,
                              const PathRecord& path, const CosineTransform& transform,
                              std::span<const double> u0_cells) {
    const int N = v.grid.N;
    if (transform.cells() != N)
        throw std::invalid_argument("mild_iterate: transform/grid size mismatch");
    if (v.nodes() != path.steps() + 1)
        throw std::invalid_argument("mild_iterate: path/trajectory step mismatch");
    if (!u0_cells.empty() && static_cast<int>(u0_cells.size()) != N)
        throw std::invalid_argument("mild_iterate: initial data size mismatch");
    const std::size_t steps = path.steps();
    const double dt = v.dt;

    TrajectoryRecord out;
    out.grid = v.grid;
    out.eps = cfg.eps;
    out.dt = dt;
    out.seed = v.seed;
    out.replica = v.replica;
    out.times = v.times;
    out.states.resize(v.states.size());

    const auto u0 = u0_cells.empty() ? v.state(0) : u0_cells;
    std::copy(u0.begin(), u0.end(), out.state_mut(0).begin());
    record_node(out, out.state(0));

    std::vector<double> decay(N), gain(N);
    for (int n = 0; n < N; ++n) {
        const double lam = cfg.eps * neumann_eigenvalue(n);
        decay[n] = std::exp(-lam * dt);
        gain[n] = lam == 0.0 ? dt : (1.0 - decay[n]) / lam;
    }

    SpectralField uhat = transform.forward(u0);
    std::vector<double> A_vals(N), noise_field(N), forcing(N);
    const std::vector<double> cosw =
        noise.enabled() ? cosine_table(noise, N) : std::vector<double>();
    for (std::size_t j = 0; j < steps; ++j) {
        const auto vj = v.state(j);
        for (int i = 0; i < N; ++i) A_vals[i] = flux.A_trunc(vj[i]);

        // Combined forcing of the convolution of -div A(v) and the boundary
        // corrector: the interior-divergence modes m pi s_m + [A phi_m] at
        // the endpoints cancel against the corrector's endpoint forcing,
        // leaving exactly <A(v), grad phi_m> = -m pi s_m per mode.
        const auto sm = transform.sine_forward(A_vals);
        forcing.assign(N, 0.0);
        for (int m = 1; m < N; ++m) forcing[m] = -(m * kPi) * sm[m - 1];

        // noise field sum_k g_k(., v_j) db_k, transformed once
        SpectralField noise_hat;
        if (noise.enabled()) {
            for (int i = 0; i < N; ++i) noise_field[i] = 0.0;
            for (int k = 1; k <= noise.modes(); ++k) {
                const double w = noise.mode_amp(k) * path.db(k - 1, j);
                if (w == 0.0) continue;
                const double* row = &cosw[static_cast<std::size_t>(k - 1) * N];
                for (int i = 0; i < N; ++i) noise_field[i] += w * row[i];
            }
            for (int i = 0; i < N; ++i) noise_field[i] *= noise.bump(vj[i]);
            noise_hat = transform.forward(noise_field);
        } else {
            noise_hat = SpectralField(static_cast<std::size_t>(N));
        }

        for (int n = 0; n < N; ++n)
            uhat.c[n] = decay[n] * (uhat.c[n] + noise_hat.c[n]) + gain[n] * forcing[n];

        const auto grid_vals = transform.inverse(uhat);
        std::copy(grid_vals.begin(), grid_vals.end(), out.state_mut(j + 1).begin());
        record_node(out, out.state(j + 1));
    }
    for (std::size_t j = 0; j < out.min_u.size(); ++j) {
        out.overshoot = std::max(out.overshoot, flux.a_lo() - out.min_u[j]);
        out.overshoot = std::max(out.overshoot, out.max_u[j] - flux.b_hi());
    }
    out.overshoot = std::max(out.overshoot, 0.0);
    return out;
}

TrajectoryRecord heat_flow_trajectory(std::span<const double> u0_cells, const SolverConfig& cfg,
                                      const ResolvedStep& step, std::uint64_t seed,
                                      std::uint64_t replica) {
    const Grid1D grid(cfg.n_cells);
    if (static_cast<int>(u0_cells.size()) != grid.N)
        throw std::invalid_argument("heat flow: initial data size mismatch");
    CosineTransform transform(grid.N);
    TrajectoryRecord v;
    v.grid = grid;
    v.eps = cfg.eps;
    v.dt = step.dt;
    v.seed = seed;
    v.replica = replica;
    v.times.resize(step.steps + 1);
    v.states.resize((step.steps + 1) * static_cast<std::size_t>(grid.N));
    for (std::size_t j = 0; j <= step.steps; ++j) v.times[j] = step.dt * static_cast<double>(j);
    const SpectralField uhat = transform.forward(u0_cells);
    for (std::size_t j = 0; j <= step.steps; ++j) {
        const auto vals = transform.inverse(semigroup_apply(uhat, v.times[j], cfg.eps));
        std::copy(vals.begin(), vals.end(), v.state_mut(j).begin());
        record_node(v, v.state(j));
    }
    return v;
}

std::pair<TrajectoryRecord, PicardLog> fixed_point_solve(std::span<const double> u0_cells,
                                                         const SolverConfig& cfg,
                                                         const FluxModel& flux,
                                                         const NoiseModel& noise,
                                                         const PathRecord& path, double tol,
                                                         int max_iter, double c_star,
                                                         double alpha_w) {
    if (tol <= 0.0) throw std::invalid_argument("fixed_point_solve: tolerance must be positive");
    const Grid1D grid(cfg.n_cells);
    CosineTransform transform(grid.N);
    TrajectoryRecord v = heat_flow_trajectory(u0_cells, cfg, ResolvedStep{path.dt(), path.steps()},
                                              path.seed(), path.replica());

    PicardLog log;
    for (int m = 0; m < max_iter; ++m) {
        TrajectoryRecord next = mild_iterate(v, cfg, flux, noise, path, transform, u0_cells);
        const double d =
            star_norm(std::span<const TrajectoryRecord>(&next, 1),
                      std::span<const TrajectoryRecord>(&v, 1), c_star, alpha_w);
        log.distances.push_back(d);
        log.iterations = m + 1;
        v = std::move(next);
        if (d < tol) {
            log.converged = true;
            break;
        }
    }
    return {std::move(v), std::move(log)};
}

// ---------------------------------------------------------------------------
// ensemble functionals

double star_norm(std::span<const TrajectoryRecord> ens1, std::span<const TrajectoryRecord> ens2,
                 double c_star, double alpha_w) {
    if (ens1.size() != ens2.size() || ens1.empty())
        throw std::invalid_argument("star_norm: ensembles must be nonempty and replica-paired");
    const std::size_t R = ens1.size();
    const std::size_t nodes = ens1[0].nodes();
    const int N = ens1[0].grid.N;
    const double dx = ens1[0].grid.dx();
    const double eps = ens1[0].eps;
    for (std::size_t r = 0; r < R; ++r) {
        if (ens2[r].nodes() != nodes || ens2[r].grid.N != N)
            throw std::invalid_argument("star_norm: trajectory grids disagree");
    }

    // per-replica running sup of ||d||^2 and running dissipation integral
    std::vector<double> running_sup(R, 0.0), running_int(R, 0.0), prev_grad(R, 0.0);
    std::vector<double> node_means(R);
    double best = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
        for (std::size_t r = 0; r < R; ++r) {
            const auto a = ens1[r].state(j);
            const auto b = ens2[r].state(j);
            double nrm = 0.0, grd = 0.0;
            for (int i = 0; i < N; ++i) {
                const double d = a[i] - b[i];
                nrm += d * d * dx;
            }
            for (int i = 0; i + 1 < N; ++i) {
                const double gd = ((a[i + 1] - b[i + 1]) - (a[i] - b[i])) / dx;
                grd += gd * gd * dx;
            }
            running_sup[r] = std::max(running_sup[r], nrm);
            if (j > 0) {
                const double dtj = ens1[r].times[j] - ens1[r].times[j - 1];
                running_int[r] += 0.5 * (prev_grad[r] + grd) * dtj;  // trapezoid
            }
            prev_grad[r] = grd;
            node_means[r] = running_sup[r] + eps * running_int[r];
        }
        const double mean = pairwise_sum(node_means) / static_cast<double>(R);
        const double weighted = std::exp(-c_star * ens1[0].times[j] / alpha_w) * mean;
        best = std::max(best, weighted);
    }
    return std::sqrt(best);
}

EnergyReport energy_report(std::span<const TrajectoryRecord> ens) {
    if (ens.empty()) throw std::invalid_argument("energy_report: empty ensemble");
    const std::size_t R = ens.size();
    std::vector<double> sups(R), ints(R);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& t = ens[r];
        double sup = 0.0;
        for (double l2 : t.l2) sup = std::max(sup, l2 * l2);
        double integral = 0.0;
        for (std::size_t j = 1; j < t.grad_energy.size(); ++j)
            integral += 0.5 * (t.grad_energy[j - 1] + t.grad_energy[j]) / t.eps *
                        (t.times[j] - t.times[j - 1]);
        sups[r] = sup;
        ints[r] = integral;
    }
    EnergyReport rep;
    const auto& t0 = ens[0];
    rep.lhs = pairwise_sum(sups) / static_cast<double>(R) +
              2.0 * t0.eps * pairwise_sum(ints) / static_cast<double>(R);
    rep.rhs = t0.l2[0] * t0.l2[0] + 1.0;
    rep.constant = rep.lhs / rep.rhs;
    return rep;
}

double l1_space_time_distance(const TrajectoryRecord& u, const TrajectoryRecord& v) {
    if (u.nodes() != v.nodes() || u.grid.N != v.grid.N)
        throw std::invalid_argument("l1 distance: grids disagree");
    const int N = u.grid.N;
    const double dx = u.grid.dx();
    std::vector<double> per_node(u.nodes());
    for (std::size_t j = 0; j < u.nodes(); ++j) {
        const auto a = u.state(j), b = v.state(j);
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += std::abs(a[i] - b[i]) * dx;
        per_node[j] = s;
    }
    double total = 0.0;
    for (std::size_t j = 1; j < u.nodes(); ++j)
        total += 0.5 * (per_node[j - 1] + per_node[j]) * (u.times[j] - u.times[j - 1]);
    return total;
}

}  // namespace stoclaw
