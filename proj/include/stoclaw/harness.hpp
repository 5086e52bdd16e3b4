#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stoclaw/config.hpp"
#include "stoclaw/solver.hpp"

namespace stoclaw {

/// Ordered key-value manifest, grouped by section headers. Every acceptance
/// quantity of a run appears here with its measured value and tolerance.
struct RunManifest {
    std::vector<std::pair<std::string, std::string>> entries;
    bool pass = true;

    void section(const std::string& name);
    void add(const std::string& key, const std::string& value);
    void add(const std::string& key, double value);
    void add(const std::string& key, bool value);
    /// Records measured/tolerance/pass triplets and folds into the verdict.
    void check(const std::string& name, double measured, double tolerance, bool ok);
    std::string text() const;
};

/// Runs `fn(replica)` for replica = 0..replicas-1 on a bounded worker pool.
/// Work items are claimed atomically; callers keep results in per-replica
/// slots and reduce in fixed order afterwards, so outputs do not depend on
/// the thread count.
void parallel_replicas(int replicas, int threads, const std::function<void(int)>& fn);

/// Mean and standard error with a fixed pairwise reduction.
std::pair<double, double> mean_and_se(std::span<const double> values);

/// Runs one replica of the configured model; paired = reuse of the same
/// PathRecord across coupled runs is arranged by the callers.
TrajectoryRecord run_replica(const Config& cfg, const FluxModel& flux, const NoiseModel& noise,
                             const InitialData& init, const SolverConfig& solver, int replica);

struct ExperimentResult {
    RunManifest manifest;
    bool pass = true;
};

/// Executes the configured experiment, writes its CSV artifacts and
/// manifest.txt under cfg.out_dir, and returns the manifest.
ExperimentResult run_experiment(const Config& cfg);

/// `simulate` CLI entry: per-replica series.csv and binary snapshots with a
/// text sidecar.
ExperimentResult run_simulate(const Config& cfg, int snapshot_count = 9);

std::string version_tag();

}  // namespace stoclaw
