#include "stoclaw/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "stoclaw/analysis.hpp"
#include "stoclaw/symbol.hpp"
#include "stoclaw/util.hpp"

namespace stoclaw {

namespace fs = std::filesystem;

std::string version_tag() { return "stoclaw 0.1.0"; }

// ---------------------------------------------------------------------------
// manifest

void RunManifest::section(const std::string& name) { entries.emplace_back("[" + name + "]", ""); }

void RunManifest::add(const std::string& key, const std::string& value) {
    entries.emplace_back(key, value);
}
void RunManifest::add(const std::string& key, double value) {
    entries.emplace_back(key, format_double(value));
}
void RunManifest::add(const std::string& key, bool value) {
    entries.emplace_back(key, value ? "true" : "false");
}

void RunManifest::check(const std::string& name, double measured, double tolerance, bool ok) {
    add(name + ".measured", measured);
    add(name + ".tolerance", tolerance);
    add(name + ".pass", ok);
    pass = pass && ok;
}

std::string RunManifest::text() const {
    std::ostringstream os;
    for (const auto& [k, v] : entries) {
        if (v.empty() && !k.empty() && k.front() == '[') {
            os << "\n" << k << "\n";
        } else {
            os << k << " = " << v << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// worker pool

void parallel_replicas(int replicas, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, replicas));
    if (threads == 1) {
        for (int r = 0; r < replicas; ++r) fn(r);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= replicas) return;
            try {
                fn(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::pair<double, double> mean_and_se(std::span<const double> values) {
    if (values.empty()) return {0.0, 0.0};
    const double mean = pairwise_sum(values) / static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
    const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
    return {mean, std::sqrt(var / static_cast<double>(values.size()))};
}

TrajectoryRecord run_replica(const Config& cfg, const FluxModel& flux, const NoiseModel& noise,
                             const InitialData& init, const SolverConfig& solver, int replica) {
    const ResolvedStep step = resolve_time_step(solver, flux);
    const PathRecord path = sample_increments(noise, step, cfg.seed, replica);
    return simulate(init, solver, flux, noise, path);
}

// ---------------------------------------------------------------------------
// small file helpers

namespace {

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path.string());
        out_ << header << "\n";
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

void echo_config(RunManifest& man, const Config& cfg) {
    man.section("config");
    std::istringstream in(emit_config(cfg));
    std::string line;
    std::string section;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '[') {
            section = line.substr(1, line.size() - 2);
            continue;
        }
        const auto eq = line.find(" = ");
        man.add(section + "." + line.substr(0, eq), line.substr(eq + 3));
    }
}

InitialData constant_init(double v) {
    InitialData d;
    d.profile = InitialData::Profile::Constant;
    d.value = v;
    return d;
}

// node-wise running sup-plus-dissipation profile of a trajectory difference,
// the per-replica ingredient of the star norm
std::vector<double> star_profile(const TrajectoryRecord& a, const TrajectoryRecord& b) {
    const int N = a.grid.N;
    const double dx = a.grid.dx();
    std::vector<double> profile(a.nodes());
    double run_sup = 0.0, run_int = 0.0, prev_grad = 0.0;
    for (std::size_t j = 0; j < a.nodes(); ++j) {
        const auto ua = a.state(j), ub = b.state(j);
        double nrm = 0.0, grd = 0.0;
        for (int i = 0; i < N; ++i) {
            const double d = ua[i] - ub[i];
            nrm += d * d * dx;
        }
        for (int i = 0; i + 1 < N; ++i) {
            const double gd = ((ua[i + 1] - ub[i + 1]) - (ua[i] - ub[i])) / dx;
            grd += gd * gd * dx;
        }
        run_sup = std::max(run_sup, nrm);
        if (j > 0) run_int += 0.5 * (prev_grad + grd) * (a.times[j] - a.times[j - 1]);
        prev_grad = grd;
        profile[j] = run_sup + a.eps * run_int;
    }
    return profile;
}

double star_norm_from_profiles(const std::vector<std::vector<double>>& profiles,
                               std::span<const double> times, double c_star, double alpha_w) {
    const std::size_t R = profiles.size();
    std::vector<double> slot(R);
    double best = 0.0;
    for (std::size_t j = 0; j < times.size(); ++j) {
        for (std::size_t r = 0; r < R; ++r) slot[r] = profiles[r][j];
        const double mean = pairwise_sum(slot) / static_cast<double>(R);
        best = std::max(best, std::exp(-c_star * times[j] / alpha_w) * mean);
    }
    return std::sqrt(best);
}

}  // namespace

// ---------------------------------------------------------------------------
// experiments

namespace {

void exp_max_principle(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();

    std::vector<double> mins(cfg.replicas), maxs(cfg.replicas), overs(cfg.replicas);
    parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
        const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, cfg.solver, r);
        mins[r] = *std::min_element(traj.min_u.begin(), traj.min_u.end());
        maxs[r] = *std::max_element(traj.max_u.begin(), traj.max_u.end());
        overs[r] = traj.overshoot;
    });
    CsvFile csv(dir / "summary.csv", "replica,min,max,overshoot");
    for (int r = 0; r < cfg.replicas; ++r)
        csv.row({num(r), num(mins[r]), num(maxs[r]), num(overs[r])});

    const double gmin = *std::min_element(mins.begin(), mins.end());
    const double gmax = *std::max_element(maxs.begin(), maxs.end());
    man.section("max_principle");
    man.add("global_min", gmin);
    man.add("global_max", gmax);
    man.check("min_above_lower_bound", gmin - flux.a_lo(), -1e-8, gmin >= flux.a_lo() - 1e-8);
    man.check("max_below_upper_bound", flux.b_hi() - gmax, -1e-8, gmax <= flux.b_hi() + 1e-8);
}

void exp_mass_martingale(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();

    // noise off: conservation must be exact to rounding
    {
        const NoiseModel off = NoiseModel::silent();
        const TrajectoryRecord traj = run_replica(cfg, flux, off, cfg.init, cfg.solver, 0);
        double drift = 0.0;
        for (double m : traj.mass) drift = std::max(drift, std::abs(m - traj.mass.front()));
        man.section("mass_martingale");
        man.check("noise_off_drift", drift, 1e-13, drift <= 1e-13);
    }

    std::vector<double> drifts(cfg.replicas);
    parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
        const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, cfg.solver, r);
        drifts[r] = traj.mass.back() - traj.mass.front();
    });
    CsvFile csv(dir / "mass.csv", "replica,drift");
    for (int r = 0; r < cfg.replicas; ++r) csv.row({num(r), num(drifts[r])});

    const auto [mean, se] = mean_and_se(drifts);
    man.add("ensemble_mean_drift", mean);
    man.add("ensemble_se", se);
    man.check("drift_within_3se", std::abs(mean), 3.0 * se, std::abs(mean) <= 3.0 * se);
}

void exp_comparison(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    const InitialData init2 = constant_init(0.2);  // crosses the default profile

    const ResolvedStep step = resolve_time_step(cfg.solver, flux);

    // pathwise monotonicity, noise off
    {
        const NoiseModel off = NoiseModel::silent();
        const PathRecord path = sample_increments(off, step, cfg.seed, 0);
        const auto t1 = simulate(cfg.init, cfg.solver, flux, off, path);
        const auto t2 = simulate(init2, cfg.solver, flux, off, path);
        const auto pp = positive_part_series(t1, t2);
        int violations = 0;
        for (std::size_t j = 1; j < pp.values.size(); ++j)
            if (pp.values[j] - pp.values[j - 1] > 1e-12) ++violations;
        man.section("comparison");
        man.add("noise_off_max_increase", pp.max_increase);
        man.check("noise_off_violations", violations, 0, violations == 0);
    }

    std::vector<double> finals(cfg.replicas);
    double initial_pp = 0.0;
    parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
        const PathRecord path = sample_increments(noise, step, cfg.seed, r);
        const auto t1 = simulate(cfg.init, cfg.solver, flux, noise, path);
        const auto t2 = simulate(init2, cfg.solver, flux, noise, path);
        const auto pp = positive_part_series(t1, t2);
        finals[r] = pp.values.back();
        if (r == 0) initial_pp = pp.values.front();
    });
    CsvFile csv(dir / "comparison.csv", "replica,initial_pp,final_pp");
    for (int r = 0; r < cfg.replicas; ++r) csv.row({num(r), num(initial_pp), num(finals[r])});

    const auto [mean, se] = mean_and_se(finals);
    man.add("initial_positive_part", initial_pp);
    man.add("final_positive_part_mean", mean);
    man.add("final_positive_part_se", se);
    man.check("expectation_comparison", mean - initial_pp, 2.0 * se,
              mean <= initial_pp + 2.0 * se);
}

std::vector<double> default_eps_sweep(const Config& cfg) {
    if (!cfg.eps_list.empty()) return cfg.eps_list;
    return {1e-3, 3e-3, 1e-2};
}

// viscous shock layers are O(eps) wide; keep them resolved when sweeping eps
// downward so the dissipation integral measures the continuum object
int eps_matched_cells(const SolverConfig& solver, double eps) {
    return std::max(solver.n_cells, static_cast<int>(std::ceil(1.2 / eps)));
}

void exp_energy(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    const auto sweep = default_eps_sweep(cfg);

    CsvFile csv(dir / "energy.csv", "eps,lhs,rhs,constant");
    std::vector<double> constants;
    man.section("energy");
    for (double eps : sweep) {
        SolverConfig solver = cfg.solver;
        solver.eps = eps;
        solver.n_cells = eps_matched_cells(cfg.solver, eps);
        man.add("n_cells_eps_" + format_double(eps), static_cast<double>(solver.n_cells));
        std::vector<double> sups(cfg.replicas), ints(cfg.replicas);
        double rhs = 0.0;
        parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
            const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, solver, r);
            double sup = 0.0;
            for (double l2 : traj.l2) sup = std::max(sup, l2 * l2);
            double integral = 0.0;
            for (std::size_t j = 1; j < traj.grad_energy.size(); ++j)
                integral += 0.5 * (traj.grad_energy[j - 1] + traj.grad_energy[j]) / traj.eps *
                            (traj.times[j] - traj.times[j - 1]);
            sups[r] = sup;
            ints[r] = integral;
            if (r == 0) rhs = traj.l2.front() * traj.l2.front() + 1.0;
        });
        const double lhs = pairwise_sum(sups) / cfg.replicas +
                           2.0 * eps * pairwise_sum(ints) / cfg.replicas;
        const double c = lhs / rhs;
        constants.push_back(c);
        csv.row({num(eps), num(lhs), num(rhs), num(c)});
        man.add("constant_eps_" + format_double(eps), c);
    }
    const double cmin = *std::min_element(constants.begin(), constants.end());
    const double cmax = *std::max_element(constants.begin(), constants.end());
    const double cmean = pairwise_sum(constants) / static_cast<double>(constants.size());
    const double spread = (cmax - cmin) / cmean;
    man.check("constant_spread", spread, 0.2, std::isfinite(spread) && spread <= 0.2);
}

void exp_contraction(const Config& cfg, RunManifest& man, const fs::path& dir) {
    Config local = cfg;
    if (cfg.solver.n_cells > 64) local.solver.n_cells = 64;  // spectral budget
    // keep the boundary layer sqrt(eps T) resolved on the mild grid; the
    // under-resolved layer at small eps drags the Picard transient out
    if (cfg.eps_list.size() == 1) local.solver.eps = cfg.eps_list[0];
    else local.solver.eps = std::max(cfg.solver.eps, 0.03);
    const FluxModel flux = local.make_flux();
    const NoiseModel noise = local.make_noise();
    validate_model(flux, noise, local.init).require();
    const ResolvedStep step = resolve_time_step(local.solver, flux);
    const Grid1D grid(local.solver.n_cells);
    CosineTransform transform(grid.N);

    InitialData bump;
    bump.profile = InitialData::Profile::Bump;
    bump.base = -0.2;
    bump.amp = 0.9;
    bump.center = 0.5;
    bump.width = 0.15;
    InitialData stepinit;
    stepinit.profile = InitialData::Profile::Step;
    stepinit.left = 0.6;
    stepinit.right = -0.4;
    stepinit.x0 = 0.5;

    // inputs v^1, v^2 range over processes in E; the map K always starts
    // from the problem's initial data, so K(v^1) - K(v^2) vanishes at t = 0
    const std::vector<double> u0_cells = local.init.sample_cells(grid.N);
    struct Pair {
        std::string name;
        InitialData a, b;
        bool stochastic_inputs;
    };
    const std::vector<Pair> pairs{
        {"heat_default_vs_constant", local.init, constant_init(0.3), false},
        {"heat_step_vs_bump", stepinit, bump, false},
        {"fv_default_vs_heat", local.init, local.init, true},
    };

    const double alpha_w = 0.5;
    double c_star = 0.0;
    man.section("contraction");
    man.add("eps", local.solver.eps);
    man.add("n_cells", static_cast<double>(local.solver.n_cells));

    CsvFile csv(dir / "contraction.csv", "pair,star_in,star_out,ratio");
    std::vector<double> ratios;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& pr = pairs[p];
        std::vector<std::vector<double>> prof_in(local.replicas), prof_out(local.replicas);
        std::vector<double> numer(local.replicas), denom(local.replicas);
        std::vector<double> times;
        parallel_replicas(local.replicas, local.threads, [&](int r) {
            const PathRecord path = sample_increments(noise, step, local.seed, r);
            TrajectoryRecord v1, v2;
            if (pr.stochastic_inputs) {
                v1 = simulate(pr.a.sample_cells(grid.N), local.solver, flux, noise, path);
                v2 = heat_flow_trajectory(pr.b.sample_cells(grid.N), local.solver, step,
                                          local.seed, r);
            } else {
                v1 = heat_flow_trajectory(pr.a.sample_cells(grid.N), local.solver, step,
                                          local.seed, r);
                v2 = heat_flow_trajectory(pr.b.sample_cells(grid.N), local.solver, step,
                                          local.seed, r);
            }
            const TrajectoryRecord k1 =
                mild_iterate(v1, local.solver, flux, noise, path, transform, u0_cells);
            const TrajectoryRecord k2 =
                mild_iterate(v2, local.solver, flux, noise, path, transform, u0_cells);
            prof_in[r] = star_profile(v1, v2);
            prof_out[r] = star_profile(k1, k2);
            if (r == 0) times = v1.times;
            // calibration ingredients: plain (unweighted) quantities
            numer[r] = prof_out[r].back();
            double l2int = 0.0, prev = 0.0;
            for (std::size_t j = 0; j < v1.nodes(); ++j) {
                double nrm = 0.0;
                const auto a = v1.state(j), b = v2.state(j);
                for (int i = 0; i < grid.N; ++i) {
                    const double d = a[i] - b[i];
                    nrm += d * d * grid.dx();
                }
                if (j > 0) l2int += 0.5 * (prev + nrm) * (v1.times[j] - v1.times[j - 1]);
                prev = nrm;
            }
            denom[r] = l2int;
        });
        if (p == 0) {
            // measured constant of the sup-plus-dissipation inequality on the
            // default pair; fixes the exponential weight for every ratio below
            const double en = pairwise_sum(numer) / local.replicas;
            const double ed = pairwise_sum(denom) / local.replicas;
            c_star = en / ed;
            man.add("c_star", c_star);
            man.add("alpha_w", alpha_w);
        }
        const double sin_ = star_norm_from_profiles(prof_in, times, c_star, alpha_w);
        const double sout = star_norm_from_profiles(prof_out, times, c_star, alpha_w);
        const double ratio = sout / sin_;
        ratios.push_back(ratio);
        csv.row({pr.name, num(sin_), num(sout), num(ratio)});
        man.check("ratio_" + pr.name, ratio, 1.0, ratio < 1.0);
    }

    // Picard decay on replica 0
    const PathRecord path = sample_increments(noise, step, local.seed, 0);
    auto [traj, log] = fixed_point_solve(local.init.sample_cells(grid.N), local.solver, flux,
                                         noise, path, 1e-11, 24, c_star, alpha_w);
    CsvFile pic(dir / "picard.csv", "iteration,distance,ratio");
    double worst_ratio = 0.0;
    for (std::size_t m = 0; m < log.distances.size(); ++m) {
        const double ratio = m > 0 ? log.distances[m] / log.distances[m - 1] : 0.0;
        pic.row({num(m + 1), num(log.distances[m]), num(ratio)});
        if (m >= 2 && log.distances[m - 1] > 1e-13) worst_ratio = std::max(worst_ratio, ratio);
    }
    man.add("picard_iterations", static_cast<double>(log.iterations));
    man.check("picard_geometric_decay", worst_ratio, 0.9,
              worst_ratio < 0.9 && log.distances.size() >= 3);
}

void exp_viscosity_sweep(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    std::vector<double> sweep = cfg.eps_list.empty()
                                    ? std::vector<double>{1e-2, 5e-3, 2.5e-3}
                                    : cfg.eps_list;
    std::sort(sweep.rbegin(), sweep.rend());

    // matched grid and dt: resolve at the largest eps (tightest bound)
    SolverConfig base = cfg.solver;
    base.eps = sweep.front();
    const ResolvedStep step = resolve_time_step(base, flux);

    std::vector<double> all_eps = sweep;
    for (double e : sweep) all_eps.push_back(e / 2.0);
    std::sort(all_eps.rbegin(), all_eps.rend());
    all_eps.erase(std::unique(all_eps.begin(), all_eps.end()), all_eps.end());

    const std::size_t P = sweep.size();
    std::vector<std::vector<double>> dists(P, std::vector<double>(cfg.replicas));
    parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
        const PathRecord path = sample_increments(noise, step, cfg.seed, r);
        std::vector<TrajectoryRecord> trajs;
        for (double e : all_eps) {
            SolverConfig s = cfg.solver;
            s.eps = e;
            s.auto_cfl = false;
            s.dt = step.dt;
            trajs.push_back(simulate(cfg.init, s, flux, noise, path));
        }
        auto find = [&](double e) -> const TrajectoryRecord& {
            for (std::size_t i = 0; i < all_eps.size(); ++i)
                if (all_eps[i] == e) return trajs[i];
            throw std::logic_error("eps lookup");
        };
        for (std::size_t p = 0; p < P; ++p)
            dists[p][r] = l1_space_time_distance(find(sweep[p]), find(sweep[p] / 2.0));
    });

    CsvFile csv(dir / "viscosity.csv", "replica,eps,distance");
    for (int r = 0; r < cfg.replicas; ++r)
        for (std::size_t p = 0; p < P; ++p) csv.row({num(r), num(sweep[p]), num(dists[p][r])});

    man.section("viscosity_sweep");
    bool per_replica_ok = true;
    for (int r = 0; r < cfg.replicas; ++r)
        for (std::size_t p = 1; p < P; ++p)
            if (!(dists[p][r] < dists[p - 1][r])) per_replica_ok = false;
    bool mean_ok = true;
    double prev_mean = 0.0;
    for (std::size_t p = 0; p < P; ++p) {
        const auto [mean, se] = mean_and_se(dists[p]);
        man.add("mean_distance_eps_" + format_double(sweep[p]), mean);
        if (p > 0 && !(mean < prev_mean)) mean_ok = false;
        prev_mean = mean;
    }
    man.check("per_replica_decreasing", per_replica_ok ? 1.0 : 0.0, 1.0, per_replica_ok);
    man.check("mean_decreasing", mean_ok ? 1.0 : 0.0, 1.0, mean_ok);
}

void exp_symbol_scan(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const SymbolReport rep = symbol_scan(flux, cfg.delta_min, cfg.delta_max, cfg.delta_points);

    CsvFile csv(dir / "symbol.csv", "delta,sup_measure,argmax_tau,argmax_kappa");
    for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
        std::string kappa;
        for (std::size_t c = 0; c < rep.sup_rows[i].argmax_kappa.size(); ++c)
            kappa += (c ? ";" : "") + format_double(rep.sup_rows[i].argmax_kappa[c]);
        csv.row({num(rep.deltas[i]), num(rep.sup_rows[i].measure), num(rep.sup_rows[i].argmax_tau),
                 kappa});
    }

    man.section("symbol");
    man.add("alpha_hat", rep.fit.alpha_hat);
    man.add("fit_residual", rep.fit.residual);
    if (!flux.exponents().empty() && flux.dimension() == 1) {
        // 1-D family: endpoint zeros of order l_max against interior
        // quadratic extrema give 1/max(2, l_max)
        const double claim =
            1.0 / std::max(2, *std::max_element(flux.exponents().begin(),
                                                flux.exponents().end()));
        man.add("claimed_alpha", claim);
        man.check("alpha_at_least_claimed", rep.fit.alpha_hat, claim - 0.05,
                  rep.fit.alpha_hat >= claim - 0.05);
    } else if (!flux.exponents().empty()) {
        // d >= 2: direction mixing resonates into interior zeros of order
        // three, so the decay can be as slow as delta^(1/3); report the
        // single-axis value for reference without gating on it
        man.add("axis_alpha",
                1.0 / std::max(2, *std::max_element(flux.exponents().begin(),
                                                    flux.exponents().end())));
    }
    man.check("fit_residual_small", rep.fit.residual, 0.05, rep.fit.residual <= 0.05);
    bool warn = false;
    for (const auto& row : rep.sup_rows) warn = warn || row.refinement_boundary_warning;
    man.add("refinement_boundary_warning", warn);

    const std::vector<double> J_list{8.0, 16.0, 32.0};
    const std::vector<double> delta_list{1e-2, 1e-3};
    const GhReport gh = gh_conditions(flux, J_list, delta_list);
    man.add("gh_alpha", gh.alpha);
    for (const auto& row : gh.rows)
        man.add("omega_J" + format_double(row.J) + "_delta" + format_double(row.delta), row.omega);
    man.add("band_sup_ratio", gh.band_sup_ratio);
    man.check("dyadic_omega_bounded", gh.omega_bounded ? 1.0 : 0.0, 1.0, gh.omega_bounded);
    man.check("band_derivative_bounded", gh.band_bounded ? 1.0 : 0.0, 1.0, gh.band_bounded);
    man.check("weak_zero_set_null", gh.zero_set_null ? 1.0 : 0.0, 1.0, gh.zero_set_null);
}

void exp_trace_scan(const Config& in_cfg, RunManifest& man, const fs::path& dir) {
    Config cfg = in_cfg;
    {
        // default profile for trace extraction: both walls take a fast
        // incoming pile, so the boundary layers settle inside the horizon
        // (the default cosine parks the slow degenerate pile at the wall)
        const InitialData d;
        const bool untouched = cfg.init.profile == d.profile && cfg.init.base == d.base &&
                               cfg.init.amp == d.amp && cfg.init.mode == d.mode;
        if (untouched) {
            cfg.init.profile = InitialData::Profile::Step;
            cfg.init.left = 0.2;
            cfg.init.right = -0.6;
            cfg.init.x0 = 0.5;
        }
    }
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    man.section("trace");
    man.add("init_profile", cfg.init.profile == InitialData::Profile::Step
                                ? std::string("step")
                                : std::string("configured"));

    auto depths_for = [](const Grid1D& g) {
        return std::vector<double>{8.0 * g.dx(), 4.0 * g.dx(), 2.0 * g.dx()};
    };

    // deterministic run, base and refined grid
    const NoiseModel off = NoiseModel::silent();
    TraceSeries base_ts, fine_ts;
    {
        const ResolvedStep step = resolve_time_step(cfg.solver, flux);
        const PathRecord path = sample_increments(off, step, cfg.seed, 0);
        const auto traj = simulate(cfg.init, cfg.solver, flux, off, path);
        base_ts = strong_trace(traj, depths_for(traj.grid));

        SolverConfig fine = cfg.solver;
        fine.n_cells = 2 * cfg.solver.n_cells;
        const ResolvedStep fstep = resolve_time_step(fine, flux);
        const PathRecord fpath = sample_increments(off, fstep, cfg.seed, 0);
        const auto ftraj = simulate(cfg.init, fine, flux, off, fpath);
        fine_ts = strong_trace(ftraj, depths_for(ftraj.grid));
    }
    CsvFile csv(dir / "traces.csv", "t,depth,left,right");
    for (std::size_t d = 0; d < base_ts.depths.size(); ++d)
        for (std::size_t j = 0; j < base_ts.times.size(); ++j)
            csv.row({num(base_ts.times[j]), num(base_ts.depths[d]), num(base_ts.layer_left[d][j]),
                     num(base_ts.layer_right[d][j])});

    const bool det_decreasing = base_ts.cauchy_left && base_ts.cauchy_right &&
                                fine_ts.cauchy_left && fine_ts.cauchy_right;
    man.check("deterministic_distances_decreasing", det_decreasing ? 1.0 : 0.0, 1.0,
              det_decreasing);

    const double stab_left = trace_l1_distance(base_ts.times, base_ts.trace_left, fine_ts.times,
                                               fine_ts.trace_left);
    const double stab_right = trace_l1_distance(base_ts.times, base_ts.trace_right, fine_ts.times,
                                                fine_ts.trace_right);
    const double finest = std::max({base_ts.dist_left.back(), base_ts.dist_right.back(),
                                    fine_ts.dist_left.back(), fine_ts.dist_right.back()});
    man.add("trace_shift_left", stab_left);
    man.add("trace_shift_right", stab_right);
    man.add("finest_pair_distance", finest);
    man.check("trace_stable_under_refinement", std::max(stab_left, stab_right), 2.0 * finest,
              std::max(stab_left, stab_right) <= 2.0 * finest);

    // stochastic ensemble: distances decreasing in the mean
    const int R = std::min(cfg.replicas, 16);
    const ResolvedStep step = resolve_time_step(cfg.solver, flux);
    std::vector<double> d_outer(R), d_inner(R);
    parallel_replicas(R, cfg.threads, [&](int r) {
        const PathRecord path = sample_increments(noise, step, cfg.seed, r);
        const auto traj = simulate(cfg.init, cfg.solver, flux, noise, path);
        const auto ts = strong_trace(traj, depths_for(traj.grid));
        d_outer[r] = 0.5 * (ts.dist_left[0] + ts.dist_right[0]);
        d_inner[r] = 0.5 * (ts.dist_left[1] + ts.dist_right[1]);
    });
    const auto [mo, so] = mean_and_se(d_outer);
    const auto [mi, si] = mean_and_se(d_inner);
    man.add("stochastic_outer_distance_mean", mo);
    man.add("stochastic_inner_distance_mean", mi);
    man.check("stochastic_distances_decreasing", mi - mo, 0.0, mi < mo);
}

void exp_kinetic_budget(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    const auto sweep = default_eps_sweep(cfg);

    man.section("kinetic_budget");
    CsvFile budget(dir / "budget.csv", "eps,replica,total,identity_error");
    double worst_identity = 0.0;
    std::vector<double> means;
    for (double eps : sweep) {
        SolverConfig solver = cfg.solver;
        solver.eps = eps;
        solver.n_cells = eps_matched_cells(cfg.solver, eps);
        std::vector<double> totals(cfg.replicas), iderr(cfg.replicas);
        parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
            const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, solver, r);
            const KineticHistogram h = kinetic_measure(traj, flux);
            const double acc = traj.accumulated_dissipation();
            totals[r] = h.total;
            iderr[r] = std::abs(h.total - acc) / std::max(acc, 1e-300);
        });
        for (int r = 0; r < cfg.replicas; ++r) {
            budget.row({num(eps), num(r), num(totals[r]), num(iderr[r])});
            worst_identity = std::max(worst_identity, iderr[r]);
        }
        const auto [mean, se] = mean_and_se(totals);
        means.push_back(mean);
        man.add("mean_total_mass_eps_" + format_double(eps), mean);
    }
    man.check("mass_identity", worst_identity, 1e-12, worst_identity <= 1e-12);
    const double lo = *std::min_element(means.begin(), means.end());
    const double hi = *std::max_element(means.begin(), means.end());
    man.add("mean_mass_min", lo);
    man.add("mean_mass_max", hi);
    man.check("mass_bounded_in_eps", hi / std::max(lo, 1e-300), 2.5,
              hi <= 2.5 * lo && std::isfinite(hi));

    // artifact: replica 0 histogram at the largest eps, nonzero bins only
    {
        SolverConfig solver = cfg.solver;
        solver.eps = *std::max_element(sweep.begin(), sweep.end());
        const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, solver, 0);
        const KineticHistogram h = kinetic_measure(traj, flux);
        CsvFile csv(dir / "kinetic.csv", "t_bin,x_bin,xi_bin,mass");
        const std::size_t nx = h.x_edges.size() - 1, nxi = h.xi_edges.size() - 1;
        for (std::size_t it = 0; it + 1 < h.t_edges.size(); ++it)
            for (std::size_t ix = 0; ix < nx; ++ix)
                for (std::size_t ib = 0; ib < nxi; ++ib) {
                    const double m = h.mass[h.index(it, ix, ib)];
                    if (m > 0.0) csv.row({num(it), num(ix), num(ib), num(m)});
                }
    }
}

void exp_regularity_sweep(const Config& cfg, RunManifest& man, const fs::path& dir) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    const auto sweep = default_eps_sweep(cfg);
    const SpaceBump cutoff{0.2, 0.8, 0.1};
    const double s = 0.02, r_exp = 1.5, lambda = 0.25;

    man.section("regularity");
    CsvFile csv(dir / "regularity.csv", "eps,replica,w_s_r,holder");
    std::vector<double> mean_w, mean_h, logs;
    for (double eps : sweep) {
        SolverConfig solver = cfg.solver;
        solver.eps = eps;
        std::vector<double> ws(cfg.replicas), hs(cfg.replicas);
        parallel_replicas(cfg.replicas, cfg.threads, [&](int rr) {
            const TrajectoryRecord traj = run_replica(cfg, flux, noise, cfg.init, solver, rr);
            ws[rr] = gagliardo_norm(traj, s, r_exp, cutoff).norm;
            hs[rr] = holder_time_seminorm(traj, lambda);
        });
        for (int rr = 0; rr < cfg.replicas; ++rr)
            csv.row({num(eps), num(rr), num(ws[rr]), num(hs[rr])});
        mean_w.push_back(mean_and_se(ws).first);
        mean_h.push_back(mean_and_se(hs).first);
        logs.push_back(std::log(eps));
        man.add("mean_w_eps_" + format_double(eps), mean_w.back());
        man.add("mean_holder_eps_" + format_double(eps), mean_h.back());
    }
    auto slope = [&](const std::vector<double>& y) {
        const std::size_t n = y.size();
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sx += logs[i];
            sy += y[i];
            sxx += logs[i] * logs[i];
            sxy += logs[i] * y[i];
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    const double slope_w = slope(mean_w), slope_h = slope(mean_h);
    man.check("w_norm_slope_flat", slope_w, 0.1, std::abs(slope_w) <= 0.1);
    man.check("holder_slope_flat", slope_h, 0.1, std::abs(slope_h) <= 0.1);
}

}  // namespace

ExperimentResult run_simulate(const Config& cfg, int snapshot_count) {
    const FluxModel flux = cfg.make_flux();
    const NoiseModel noise = cfg.make_noise();
    validate_model(flux, noise, cfg.init).require();
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    RunManifest man;
    man.section("run");
    man.add("command", std::string("simulate"));
    man.add("version", version_tag());
    echo_config(man, cfg);

    const ResolvedStep step = resolve_time_step(cfg.solver, flux);
    man.section("resolved");
    man.add("dt", step.dt);
    man.add("steps", static_cast<double>(step.steps));

    std::vector<double> overshoots(cfg.replicas);
    std::vector<std::string> series_text(cfg.replicas), sidecar_text(cfg.replicas);
    std::vector<std::vector<double>> snapshot_data(cfg.replicas);
    parallel_replicas(cfg.replicas, cfg.threads, [&](int r) {
        const PathRecord path = sample_increments(noise, step, cfg.seed, r);
        const TrajectoryRecord traj = simulate(cfg.init, cfg.solver, flux, noise, path);
        overshoots[r] = traj.overshoot;
        std::ostringstream os;
        os << "step,t,mass,l2,min,max,grad_energy\n";
        for (std::size_t j = 0; j < traj.nodes(); ++j) {
            os << j << "," << format_double(traj.times[j]) << "," << format_double(traj.mass[j])
               << "," << format_double(traj.l2[j]) << "," << format_double(traj.min_u[j]) << ","
               << format_double(traj.max_u[j]) << "," << format_double(traj.grad_energy[j])
               << "\n";
        }
        series_text[r] = os.str();

        const std::size_t count = std::min<std::size_t>(snapshot_count, traj.nodes());
        std::ostringstream sc;
        sc << "n_cells = " << traj.grid.N << "\n";
        sc << "snapshots = " << count << "\n";
        sc << "dtype = float64\n";
        sc << "endianness = little\n";
        std::vector<double>& flat = snapshot_data[r];
        sc << "times =";
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t j = count == 1 ? 0 : k * (traj.nodes() - 1) / (count - 1);
            sc << " " << format_double(traj.times[j]);
            const auto st = traj.state(j);
            flat.insert(flat.end(), st.begin(), st.end());
        }
        sc << "\n";
        sidecar_text[r] = sc.str();
    });
    for (int r = 0; r < cfg.replicas; ++r) {
        char tag[16];
        std::snprintf(tag, sizeof(tag), "r%03d", r);
        std::ofstream series(dir / ("series_" + std::string(tag) + ".csv"));
        series << series_text[r];
        std::ofstream sidecar(dir / ("snapshots_" + std::string(tag) + ".txt"));
        sidecar << sidecar_text[r];
        std::ofstream bin(dir / ("snapshots_" + std::string(tag) + ".bin"), std::ios::binary);
        bin.write(reinterpret_cast<const char*>(snapshot_data[r].data()),
                  static_cast<std::streamsize>(snapshot_data[r].size() * sizeof(double)));
    }
    man.section("result");
    double worst = 0.0;
    for (double o : overshoots) worst = std::max(worst, o);
    man.add("max_overshoot", worst);
    man.add("pass", man.pass);
    std::ofstream mf(dir / "manifest.txt");
    mf << man.text();
    return {man, man.pass};
}

ExperimentResult run_experiment(const Config& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.out_dir);
    const fs::path dir(cfg.out_dir);

    RunManifest man;
    man.section("run");
    man.add("experiment", experiment_name(cfg.experiment));
    man.add("version", version_tag());
    man.add("threads", static_cast<double>(cfg.threads));
    echo_config(man, cfg);

    switch (cfg.experiment) {
        case Experiment::MaxPrinciple: exp_max_principle(cfg, man, dir); break;
        case Experiment::MassMartingale: exp_mass_martingale(cfg, man, dir); break;
        case Experiment::Comparison: exp_comparison(cfg, man, dir); break;
        case Experiment::Energy: exp_energy(cfg, man, dir); break;
        case Experiment::Contraction: exp_contraction(cfg, man, dir); break;
        case Experiment::ViscositySweep: exp_viscosity_sweep(cfg, man, dir); break;
        case Experiment::SymbolScan: exp_symbol_scan(cfg, man, dir); break;
        case Experiment::TraceScan: exp_trace_scan(cfg, man, dir); break;
        case Experiment::KineticBudget: exp_kinetic_budget(cfg, man, dir); break;
        case Experiment::RegularitySweep: exp_regularity_sweep(cfg, man, dir); break;
    }

    const auto t1 = std::chrono::steady_clock::now();
    man.section("result");
    man.add("wall_clock_s",
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0);
    man.add("pass", man.pass);
    std::ofstream mf(dir / "manifest.txt");
    mf << man.text();
    return {man, man.pass};
}

}  // namespace stoclaw
