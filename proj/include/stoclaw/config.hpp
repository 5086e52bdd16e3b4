#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stoclaw/model.hpp"
#include "stoclaw/solver.hpp"

namespace stoclaw {

class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Experiments the harness can run.
enum class Experiment {
    MaxPrinciple,
    MassMartingale,
    Comparison,
    Energy,
    Contraction,
    ViscositySweep,
    SymbolScan,
    TraceScan,
    KineticBudget,
    RegularitySweep,
};

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

/// Fully resolved run configuration. Sections: [flux], [noise], [init],
/// [solver], [experiment]. Unknown keys are rejected with the line number.
struct Config {
    // [flux]
    std::string flux_kind = "example-family";  // or "polynomial"
    std::vector<int> exponents{1};
    std::vector<std::vector<double>> poly_coeffs;  // for kind = polynomial
    double a_lo = -1.0, b_hi = 1.0, L0 = 1.25;

    // [noise]
    int K = 8;
    double alpha_scale = 0.2;
    double M = 0.5;
    std::string noise_profile = "cosine";
    bool noise_enabled = true;

    // [init]
    InitialData init;

    // [solver]
    SolverConfig solver;

    // [experiment]
    Experiment experiment = Experiment::MaxPrinciple;
    int replicas = 64;
    std::uint64_t seed = 1;
    int threads = 1;
    std::vector<double> eps_list;
    std::string out_dir = "out";
    // symbol scan controls
    double delta_min = 1e-4, delta_max = 1e-2;
    int delta_points = 9;

    FluxModel make_flux() const;
    NoiseModel make_noise() const;
};

Config parse_config(const std::string& text);
std::string emit_config(const Config& cfg);
Config load_config_file(const std::string& path);

}  // namespace stoclaw
