#pragma once

#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stoclaw {

/// Raised when a structural hypothesis of the model is violated.
/// `check_id` identifies the failed hypothesis (e.g. "flux.zero_at_bounds").
class validation_error : public std::runtime_error {
public:
    validation_error(std::string check_id, const std::string& what)
        : std::runtime_error(check_id + ": " + what), check_id_(std::move(check_id)) {}
    const std::string& check_id() const noexcept { return check_id_; }

private:
    std::string check_id_;
};

/// Raised when a tolerance cannot be met (quadrature, fits).
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Pairwise (fixed-topology tree) sum. Deterministic for a fixed input
/// order regardless of thread count, and far more accurate than a naive
/// left-to-right accumulation on long series.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t h = v.size() / 2;
    return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

inline double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(std::span<const double>(v));
}

/// Shortest decimal form that round-trips a double (used by every CSV and
/// manifest writer so that identical runs emit byte-identical files).
inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    double back = 0.0;
    std::sscanf(buf, "%lg", &back);
    for (int prec = 1; prec < 17; ++prec) {
        char probe[32];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, x);
        std::sscanf(probe, "%lg", &back);
        if (back == x) return probe;
    }
    return buf;
}

}  // namespace stoclaw
