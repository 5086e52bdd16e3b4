// Acceptance suite: runs every headline property of the laboratory at its
// stated tolerance and prints one pass/fail line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "stoclaw/analysis.hpp"
#include "stoclaw/config.hpp"
#include "stoclaw/harness.hpp"
#include "stoclaw/rng.hpp"
#include "stoclaw/spectral.hpp"
#include "stoclaw/symbol.hpp"
#include "stoclaw/util.hpp"

using namespace stoclaw;
namespace fs = std::filesystem;

namespace {

int g_threads = 1;
fs::path g_outdir;
int g_failures = 0;

double now_s() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
               .count() /
           1000.0;
}

void report(int id, const std::string& name, bool pass, const std::string& details,
            double seconds) {
    std::printf("%s  criterion %2d: %-24s  %s  [%.1fs]\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), details.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string manifest_value(const RunManifest& man, const std::string& key) {
    for (const auto& [k, v] : man.entries)
        if (k == key) return v;
    return "?";
}

Config base_config(const std::string& name) {
    Config cfg;
    cfg.threads = g_threads;
    cfg.out_dir = (g_outdir / name).string();
    return cfg;
}

// ---------------------------------------------------------------------------

void criterion_1_max_principle() {
    const double t0 = now_s();
    Config cfg = base_config("max_principle");
    cfg.experiment = Experiment::MaxPrinciple;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    const double elapsed = now_s() - t0;
    const bool pass = res.pass && elapsed <= 60.0;
    report(1, "maximum principle", pass,
           "min=" + manifest_value(res.manifest, "global_min") +
               " max=" + manifest_value(res.manifest, "global_max") + " tol=1e-8",
           elapsed);
}

void criterion_2_mass_martingale() {
    const double t0 = now_s();
    Config cfg = base_config("mass_martingale");
    cfg.experiment = Experiment::MassMartingale;
    cfg.replicas = 256;
    const auto res = run_experiment(cfg);
    report(2, "mass martingale", res.pass,
           "det_drift=" + manifest_value(res.manifest, "noise_off_drift.measured") +
               " mean=" + manifest_value(res.manifest, "ensemble_mean_drift") +
               " se=" + manifest_value(res.manifest, "ensemble_se"),
           now_s() - t0);
}

void criterion_3_comparison() {
    const double t0 = now_s();
    Config cfg = base_config("comparison");
    cfg.experiment = Experiment::Comparison;
    cfg.replicas = 512;
    const auto res = run_experiment(cfg);
    report(3, "comparison principle", res.pass,
           "initial=" + manifest_value(res.manifest, "initial_positive_part") +
               " final_mean=" + manifest_value(res.manifest, "final_positive_part_mean") +
               " violations=" + manifest_value(res.manifest, "noise_off_violations.measured"),
           now_s() - t0);
}

void criterion_4_energy() {
    const double t0 = now_s();
    Config cfg = base_config("energy");
    cfg.experiment = Experiment::Energy;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    report(4, "energy estimate", res.pass,
           "spread=" + manifest_value(res.manifest, "constant_spread.measured") + " (tol 0.2)",
           now_s() - t0);
}

void criterion_5_contraction() {
    const double t0 = now_s();
    Config cfg = base_config("contraction");
    cfg.experiment = Experiment::Contraction;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    report(5, "mild-map contraction", res.pass,
           "C*=" + manifest_value(res.manifest, "c_star") + " worst_picard_ratio=" +
               manifest_value(res.manifest, "picard_geometric_decay.measured"),
           now_s() - t0);
}

void criterion_6_semigroup_smoothing() {
    const double t0 = now_s();
    bool pass = true;
    std::string detail;

    // (a) spectral smoothing inequality for 100 random fields, slack 1e-10
    {
        const double T = 0.5;
        double worst = -1e300;
        for (int trial = 0; trial < 100; ++trial) {
            const double eps = 1e-3 + 1e-2 * (trial % 10 + 1) / 10.0;
            SpectralField h(128);
            for (std::size_t n = 0; n < h.modes(); ++n)
                h.c[n] = counter_rng::gaussian(600, trial, n, 0) /
                         std::pow(1.0 + static_cast<double>(n), 0.4);
            double lhs = 0.0;
            for (std::size_t n = 1; n < h.modes(); ++n) {
                const double lam = neumann_eigenvalue(static_cast<int>(n));
                lhs += h.c[n] * h.c[n] * (1.0 - std::exp(-2.0 * eps * lam * T)) / (2.0 * eps);
            }
            worst = std::max(worst, lhs - h.l2_norm_sq() / (2.0 * eps));
        }
        pass = pass && worst <= 1e-10;
        detail += "smoothing_slack=" + format_double(worst);
    }
    // (b) duhamel order-gain ratio across mode caps, variation <= 5%
    {
        const double eps = 0.01, T = 0.5;
        const std::size_t steps = 128;
        std::vector<double> ratios;
        for (std::size_t cap : {64u, 128u, 256u}) {
            SpectralPath hpath;
            for (std::size_t j = 0; j <= steps; ++j) {
                hpath.times.push_back(T * static_cast<double>(j) / steps);
                SpectralField f(cap);
                for (std::size_t n = 0; n < cap; ++n)
                    f.c[n] = counter_rng::gaussian(601, 0, n, j) /
                             (1.0 + static_cast<double>(n * n));
                hpath.values.push_back(f);
            }
            const auto out = duhamel(hpath, eps);
            double num = 0.0, den = 0.0;
            for (std::size_t j = 0; j < steps; ++j) {
                const double a = ha_norm(out.values[j + 1], 1.0);
                const double b = ha_norm(hpath.values[j], 0.0);
                num += a * a;
                den += b * b;
            }
            ratios.push_back(std::sqrt(num / den));
        }
        const double lo = *std::min_element(ratios.begin(), ratios.end());
        const double hi = *std::max_element(ratios.begin(), ratios.end());
        pass = pass && (hi - lo) / lo <= 0.05;
        detail += " gain_var=" + format_double((hi - lo) / lo);
    }
    // (c) Ito isometry of the stochastic convolution over 1e4 paths
    {
        const double eps = 0.01, T = 0.5;
        const std::size_t steps = 200;
        const double dt = T / steps;
        const double lam = eps * neumann_eigenvalue(1);
        OperatorPath psi;
        for (std::size_t j = 0; j <= steps; ++j)
            psi.times.push_back(dt * static_cast<double>(j));
        SpectralField f(4);
        f.c[1] = 1.0;
        psi.values.assign(steps, std::vector<SpectralField>(1, f));
        const int paths = 10000;
        double sum = 0.0, sumsq = 0.0;
        for (int p = 0; p < paths; ++p) {
            std::vector<double> incr(steps);
            for (std::size_t j = 0; j < steps; ++j)
                incr[j] = std::sqrt(dt) * counter_rng::gaussian(602, p, 0, j);
            const auto out = stochastic_convolution(psi, incr, 1, eps);
            const double v = out.values[steps].c[1];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / paths;
        const double var = sumsq / paths - mean * mean;
        const double expect = (1.0 - std::exp(-2.0 * lam * T)) / (2.0 * lam);
        const double se = expect * std::sqrt(2.0 / (paths - 1));
        pass = pass && std::abs(var - expect) <= 3.0 * se + expect * lam * dt;
        detail += " ito_var=" + format_double(var) + " expect=" + format_double(expect);
    }
    report(6, "semigroup smoothing", pass, detail, now_s() - t0);
}

void criterion_7_kinetic_budget() {
    const double t0 = now_s();
    Config cfg = base_config("kinetic_budget");
    cfg.experiment = Experiment::KineticBudget;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    report(7, "kinetic mass budget", res.pass,
           "identity_err=" + manifest_value(res.manifest, "mass_identity.measured") +
               " mass_ratio=" + manifest_value(res.manifest, "mass_bounded_in_eps.measured"),
           now_s() - t0);
}

void criterion_8_residuals() {
    const double t0 = now_s();
    const auto flux = FluxModel::example_family({1}, -1.0, 1.0, 1.25);
    const auto noise = NoiseModel(8, 0.2, 0.5);
    const auto off = NoiseModel::silent();
    bool pass = true;
    std::string detail;

    // (a) xi-independent kinetic == conservation to 1e-12
    {
        InitialData init;
        SolverConfig scfg;
        scfg.n_cells = 200;
        scfg.T = 0.25;
        const ResolvedStep step = resolve_time_step(scfg, flux);
        const PathRecord path = sample_increments(noise, step, 801, 0);
        const auto traj = simulate(init, scfg, flux, noise, path);
        SeparableTest test;
        test.time = TimeWindow{-1.0, 0.2, 0.04};
        test.space = SpaceBump{0.2, 0.8, 0.1};
        const auto kin = weak_form_residual(traj, path, flux, noise, WeakForm::Kinetic, test);
        const auto con =
            weak_form_residual(traj, path, flux, noise, WeakForm::Conservation, test);
        const double gap = std::abs(kin.residual - con.residual);
        pass = pass && gap <= 1e-12;
        detail += "collapse_gap=" + format_double(gap);
    }
    // (b) deterministic refinement slope >= 0.8 over N in {100, 200, 400}
    {
        InitialData init;
        init.profile = InitialData::Profile::Bump;
        init.base = -0.2;
        init.amp = 0.9;
        init.center = 0.45;
        init.width = 0.12;
        std::vector<double> lx, ly;
        for (int n : {100, 200, 400}) {
            SolverConfig scfg;
            scfg.n_cells = n;
            scfg.T = 0.08;
            const ResolvedStep step = resolve_time_step(scfg, flux);
            const PathRecord path = sample_increments(off, step, 802, 0);
            const auto traj = simulate(init, scfg, flux, off, path);
            SeparableTest test;
            test.time = TimeWindow{-1.0, 0.06, 0.02};
            test.space = SpaceBump{0.15, 0.85, 0.12};
            const auto r = weak_form_residual(traj, path, flux, off, WeakForm::Kinetic, test);
            lx.push_back(std::log(1.0 / n));
            ly.push_back(std::log(r.residual));
        }
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(lx.size());
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        pass = pass && slope >= 0.8;
        detail += " refine_slope=" + format_double(slope);
    }
    // (c) entropy defect sign on a shocked deterministic run
    {
        InitialData init;
        init.profile = InitialData::Profile::Step;
        init.left = 0.8;
        init.right = -0.6;
        init.x0 = 0.4;
        SolverConfig scfg;
        scfg.n_cells = 200;
        scfg.T = 0.3;
        const ResolvedStep step = resolve_time_step(scfg, flux);
        const PathRecord path = sample_increments(off, step, 803, 0);
        const auto traj = simulate(init, scfg, flux, off, path);
        SeparableTest test;
        test.time = TimeWindow{-1.0, 0.25, 0.05};
        test.space = SpaceBump{0.15, 0.85, 0.1};
        const auto kruzhkov = EntropyPair::kruzhkov(0.1);
        const auto res =
            weak_form_residual(traj, path, flux, off, WeakForm::Entropy, test, &kruzhkov);
        pass = pass && res.raw >= -1e-8;
        detail += " entropy_defect=" + format_double(res.raw);
    }
    report(8, "kinetic/entropy residuals", pass, detail, now_s() - t0);
}

void criterion_9_strong_trace() {
    const double t0 = now_s();
    Config cfg = base_config("trace_scan");
    cfg.experiment = Experiment::TraceScan;
    cfg.replicas = 16;
    const auto res = run_experiment(cfg);
    report(9, "strong boundary traces", res.pass,
           "trace_shift=" + manifest_value(res.manifest, "trace_shift_left") + "/" +
               manifest_value(res.manifest, "trace_shift_right") +
               " finest=" + manifest_value(res.manifest, "finest_pair_distance"),
           now_s() - t0);
}

void criterion_10_symbol_exponent() {
    const double t0 = now_s();
    bool pass = true;
    std::string detail;
    {
        const auto flux = FluxModel::example_family({1, 2}, -1.0, 1.0, 1.25);
        std::vector<double> deltas;
        for (int i = 0; i < 9; ++i) deltas.push_back(1e-4 * std::pow(100.0, i / 8.0));
        const auto fit = exponent_fit(flux, deltas);
        // the direction scan finds the off-axis resonance (an interior triple
        // zero near kappa = (1,1)/sqrt 2), so the measured decay sits near
        // 1/3 and the claimed exponent 1/2 is not met; reported honestly
        const bool alpha_ok = fit.alpha_hat >= 0.45;
        const bool resid_ok = fit.residual <= 0.05;
        pass = pass && alpha_ok && resid_ok;
        detail += "alpha_hat=" + format_double(fit.alpha_hat) +
                  " residual=" + format_double(fit.residual);
        if (!alpha_ok) detail += " (below 0.45: off-axis resonance decays like 1/3)";
    }
    {
        const auto linear =
            FluxModel::polynomial({Polynomial({0.0, 0.0, 0.5})}, -0.5, 0.5, 1.0);
        std::vector<double> deltas;
        for (int i = 0; i < 9; ++i) deltas.push_back(1e-4 * std::pow(100.0, i / 8.0));
        const auto fit = exponent_fit(linear, deltas);
        pass = pass && std::abs(fit.alpha_hat - 1.0) <= 0.01;
        detail += " linear_alpha=" + format_double(fit.alpha_hat);
    }
    const double elapsed = now_s() - t0;
    pass = pass && elapsed <= 30.0;
    report(10, "symbol nondegeneracy", pass, detail, elapsed);
}

void criterion_11_regularity() {
    const double t0 = now_s();
    Config cfg = base_config("regularity");
    cfg.experiment = Experiment::RegularitySweep;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    report(11, "averaging regularity", res.pass,
           "w_slope=" + manifest_value(res.manifest, "w_norm_slope_flat.measured") +
               " holder_slope=" + manifest_value(res.manifest, "holder_slope_flat.measured"),
           now_s() - t0);
}

void criterion_12_viscosity_sweep() {
    const double t0 = now_s();
    Config cfg = base_config("viscosity_sweep");
    cfg.experiment = Experiment::ViscositySweep;
    cfg.replicas = 64;
    const auto res = run_experiment(cfg);
    report(12, "vanishing viscosity", res.pass,
           "d(1e-2)=" + manifest_value(res.manifest, "mean_distance_eps_0.01") +
               " d(2.5e-3)=" + manifest_value(res.manifest, "mean_distance_eps_0.0025"),
           now_s() - t0);
}

}  // namespace

int main(int argc, char** argv) {
    g_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (g_threads < 1) g_threads = 1;
    g_threads = std::min(g_threads, 8);
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--threads") g_threads = std::max(1, std::atoi(argv[i + 1]));
        if (std::string(argv[i]) == "--out-dir") g_outdir = argv[i + 1];
    }
    if (g_outdir.empty()) g_outdir = fs::temp_directory_path() / "stoclaw_acceptance";
    fs::create_directories(g_outdir);
    std::printf("acceptance suite (threads=%d, artifacts in %s)\n", g_threads,
                g_outdir.string().c_str());

    criterion_1_max_principle();
    criterion_2_mass_martingale();
    criterion_3_comparison();
    criterion_4_energy();
    criterion_5_contraction();
    criterion_6_semigroup_smoothing();
    criterion_7_kinetic_budget();
    criterion_8_residuals();
    criterion_9_strong_trace();
    criterion_10_symbol_exponent();
    criterion_11_regularity();
    criterion_12_viscosity_sweep();

    std::printf("%d of 12 criteria passed\n", 12 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
