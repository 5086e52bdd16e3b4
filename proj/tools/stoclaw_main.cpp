#include <CLI11.hpp>

#include <cstdint>
#include <deque>
#include <iostream>
#include <string>

#include "stoclaw/config.hpp"
#include "stoclaw/harness.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    int replicas = 0;
    int threads = 0;
    std::string out_dir;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration file");
        cmd->add_option("--seed", seed, "base RNG seed");
        cmd->add_option("--replicas", replicas, "Monte Carlo replicas");
        cmd->add_option("--threads", threads, "worker threads");
        cmd->add_option("--out-dir", out_dir, "output directory");
    }

    stoclaw::Config resolve(stoclaw::Experiment exp) const {
        stoclaw::Config cfg;
        if (!config_path.empty()) cfg = stoclaw::load_config_file(config_path);
        cfg.experiment = exp;
        if (seed != 0) cfg.seed = seed;
        if (replicas > 0) cfg.replicas = replicas;
        if (threads > 0) cfg.threads = threads;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for stochastic conservation laws with zero-flux boundary"};
    app.require_subcommand(1);

    struct Entry {
        stoclaw::Experiment exp;
        CommonFlags flags;
        CLI::App* cmd = nullptr;
        bool is_simulate = false;
    };
    // deque: CLI11 keeps pointers to the flag members, so entries must stay
    // put as more subcommands are registered
    std::deque<Entry> entries;

    auto add_cmd = [&](const std::string& name, stoclaw::Experiment exp, const std::string& help,
                       bool is_simulate = false) {
        entries.push_back({exp, {}, nullptr, is_simulate});
        Entry& e = entries.back();
        e.cmd = app.add_subcommand(name, help);
        e.flags.attach(e.cmd);
        return e.cmd;
    };

    using E = stoclaw::Experiment;
    add_cmd("max_principle", E::MaxPrinciple, "state stays inside the invariant interval");
    add_cmd("mass_martingale", E::MassMartingale, "mass drift is a mean-zero martingale");
    add_cmd("comparison", E::Comparison, "ordered data stay ordered in expectation");
    add_cmd("energy", E::Energy, "energy estimate constant across viscosities");
    add_cmd("contraction", E::Contraction, "mild-solution map contracts in the weighted norm");
    add_cmd("viscosity_sweep", E::ViscositySweep, "vanishing-viscosity Cauchy trend");
    add_cmd("trace_scan", E::TraceScan, "boundary-layer strong traces");
    add_cmd("kinetic_budget", E::KineticBudget, "kinetic defect-measure mass budget");
    add_cmd("regularity_sweep", E::RegularitySweep, "averaging regularity and time Hoelder bounds");
    add_cmd("kinetic", E::KineticBudget, "alias for kinetic_budget");
    add_cmd("trace", E::TraceScan, "alias for trace_scan");
    add_cmd("simulate", E::MaxPrinciple, "run replicas and dump series + snapshots", true);

    // symbol scan carries its own sweep flags
    entries.push_back({E::SymbolScan, {}, nullptr, false});
    Entry& sym = entries.back();
    sym.cmd = app.add_subcommand("symbol", "kinetic symbol nondegeneracy scan");
    sym.flags.attach(sym.cmd);
    double delta_min = 0.0, delta_max = 0.0;
    int points = 0;
    std::string sym_out;
    sym.cmd->add_option("--delta-min", delta_min, "smallest delta");
    sym.cmd->add_option("--delta-max", delta_max, "largest delta");
    sym.cmd->add_option("--points", points, "number of delta points");
    sym.cmd->add_option("--out", sym_out, "output directory (alias of --out-dir)");
    entries.push_back({E::SymbolScan, {}, nullptr, false});
    Entry& sym_alias = entries.back();
    sym_alias.cmd = app.add_subcommand("symbol_scan", "alias for symbol");
    sym_alias.flags.attach(sym_alias.cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        for (Entry& e : entries) {
            if (!e.cmd->parsed()) continue;
            stoclaw::Config cfg = e.flags.resolve(e.exp);
            if (e.cmd->get_name() == "symbol") {
                if (delta_min > 0.0) cfg.delta_min = delta_min;
                if (delta_max > 0.0) cfg.delta_max = delta_max;
                if (points > 0) cfg.delta_points = points;
                if (!sym_out.empty()) cfg.out_dir = sym_out;
            }
            const stoclaw::ExperimentResult res =
                e.is_simulate ? stoclaw::run_simulate(cfg) : stoclaw::run_experiment(cfg);
            std::cout << res.manifest.text();
            return res.pass ? 0 : 1;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 2;
}
