#include "stoclaw/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stoclaw {
namespace counter_rng {

namespace {
inline std::uint64_t splitmix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t mix(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j,
                  std::uint64_t lane) {
    std::uint64_t h = splitmix(seed ^ 0x243f6a8885a308d3ull);
    h = splitmix(h ^ replica);
    h = splitmix(h ^ (k * 0x100000001b3ull));
    h = splitmix(h ^ (j * 0xc6a4a7935bd1e995ull));
    h = splitmix(h ^ (lane * 0x9e3779b97f4a7c15ull));
    return h;
}

double uniform(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j,
               std::uint64_t lane) {
    const std::uint64_t bits = mix(seed, replica, k, j, lane);
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

double gaussian(std::uint64_t seed, std::uint64_t replica, std::uint64_t k, std::uint64_t j) {
    const double u1 = uniform(seed, replica, k, j, 0);
    const double u2 = uniform(seed, replica, k, j, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace counter_rng

PathRecord::PathRecord(std::uint64_t seed, std::uint64_t replica, int n_modes, std::size_t n_steps,
                       double dt)
    : seed_(seed), replica_(replica), modes_(n_modes), steps_(n_steps), dt_(dt) {
    if (n_modes < 0) throw std::invalid_argument("path record: negative mode count");
    if (n_steps > (1ull << 40) || static_cast<std::size_t>(n_modes) > (1ull << 20))
        throw std::length_error("path record: step/mode index space exhausted");
    incr_.resize(static_cast<std::size_t>(modes_) * steps_);
    const double sd = std::sqrt(dt);
    for (int k = 0; k < modes_; ++k)
        for (std::size_t j = 0; j < steps_; ++j)
            incr_[static_cast<std::size_t>(k) * steps_ + j] =
                sd * counter_rng::gaussian(seed_, replica_, static_cast<std::uint64_t>(k), j);
}

}  // namespace stoclaw
