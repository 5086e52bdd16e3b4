#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace stoclaw {

/// Counter-based Gaussian draws: the value is a pure function of the key
/// (seed, replica, mode, step, lane), so any evaluation order - and any
/// thread assignment - reproduces the same stream bit-exactly.
namespace counter_rng {

std::uint64_t mix(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j,
                  std::uint64_t lane);
/// Uniform in (0, 1], never 0.
double uniform(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j,
               std::uint64_t lane);
/// Standard normal via Box-Muller on two keyed uniforms.
double gaussian(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j);

}  // namespace counter_rng

/// Realized Brownian increments for one replica: db[k][j] gaussian with
/// variance dt, keyed by (seed, replica, k, j).
class PathRecord {
public:
    PathRecord() = default;
    PathRecord(std::uint64_t seed, std::uint64_t replica, int n_modes, std::size_t n_steps,
               double dt);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t replica() const noexcept { return replica_; }
    int modes() const noexcept { return modes_; }
    std::size_t steps() const noexcept { return steps_; }
    double dt() const noexcept { return dt_; }

    double db(int k, std::size_t j) const { return incr_[static_cast<std::size_t>(k) * steps_ + j]; }
    /// All increments of mode k (k = 0-based), one per step.
    std::span<const double> mode_row(int k) const {
        return {incr_.data() + static_cast<std::size_t>(k) * steps_, steps_};
    }
    std::span<const double> flat() const { return incr_; }

private:
    std::uint64_t seed_ = 0, replica_ = 0;
    int modes_ = 0;
    std::size_t steps_ = 0;
    double dt_ = 0.0;
    std::vector<double> incr_;
};

}  // namespace stoclaw
