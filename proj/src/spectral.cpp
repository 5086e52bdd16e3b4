#include "stoclaw/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stoclaw {

namespace {
constexpr double kPi = std::numbers::pi;

// exact one-step update of y' = -lam y + f with constant f
inline void exp_step(double lam_eps, double dt, double y_decay_fwd, double& y, double f) {
    if (lam_eps == 0.0) {
        y += dt * f;
    } else {
        y = y_decay_fwd * y + (1.0 - y_decay_fwd) / lam_eps * f;
    }
}
}  // namespace

double neumann_eigenvalue(int n) { return (n * kPi) * (n * kPi); }

double neumann_mode(int n, double x) {
    return n == 0 ? 1.0 : std::sqrt(2.0) * std::cos(n * kPi * x);
}

double SpectralField::l2_norm_sq() const {
    double s = 0.0;
    for (double v : c) s += v * v;
    return s;
}

double SpectralField::grad_norm_sq() const {
    double s = 0.0;
    for (std::size_t n = 1; n < c.size(); ++n) s += neumann_eigenvalue(static_cast<int>(n)) * c[n] * c[n];
    return s;
}

CosineTransform::CosineTransform(int n_cells) : n_(n_cells) {
    if (n_cells < 1) throw std::invalid_argument("cosine transform: need at least one cell");
    cosine_.resize(static_cast<std::size_t>(n_) * n_);
    sine_.resize(static_cast<std::size_t>(n_ - 1) * n_);
    for (int i = 0; i < n_; ++i) {
        const double x = (i + 0.5) / n_;
        for (int n = 0; n < n_; ++n) cosine_[static_cast<std::size_t>(n) * n_ + i] = neumann_mode(n, x);
        for (int m = 1; m < n_; ++m)
            sine_[static_cast<std::size_t>(m - 1) * n_ + i] = std::sqrt(2.0) * std::sin(m * kPi * x);
    }
}

SpectralField CosineTransform::forward(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != n_)
        throw std::invalid_argument("cosine transform: grid size mismatch");
    SpectralField h(static_cast<std::size_t>(n_));
    const double dx = 1.0 / n_;
    for (int n = 0; n < n_; ++n) {
        const double* row = &cosine_[static_cast<std::size_t>(n) * n_];
        double s = 0.0;
        for (int i = 0; i < n_; ++i) s += row[i] * values[i];
        h.c[n] = s * dx;
    }
    return h;
}

std::vector<double> CosineTransform::inverse(const SpectralField& h) const {
    std::vector<double> values(n_, 0.0);
    const int modes = std::min<int>(n_, static_cast<int>(h.modes()));
    for (int n = 0; n < modes; ++n) {
        const double* row = &cosine_[static_cast<std::size_t>(n) * n_];
        const double cn = h.c[n];
        for (int i = 0; i < n_; ++i) values[i] += cn * row[i];
    }
    return values;
}

std::vector<double> CosineTransform::sine_forward(std::span<const double> values) const {
    if (static_cast<int>(values.size()) != n_)
        throw std::invalid_argument("sine transform: grid size mismatch");
    std::vector<double> s(n_ - 1, 0.0);
    const double dx = 1.0 / n_;
    for (int m = 1; m < n_; ++m) {
        const double* row = &sine_[static_cast<std::size_t>(m - 1) * n_];
        double acc = 0.0;
        for (int i = 0; i < n_; ++i) acc += row[i] * values[i];
        s[m - 1] = acc * dx;  // sine rows are dx-orthonormal on midpoints, like the cosines
    }
    return s;
}

SpectralField semigroup_apply(const SpectralField& h, double t, double eps) {
    if (t < 0.0) throw std::domain_error("semigroup_apply: negative time");
    SpectralField out = h;
    for (std::size_t n = 0; n < out.c.size(); ++n)
        out.c[n] *= std::exp(-eps * neumann_eigenvalue(static_cast<int>(n)) * t);
    return out;
}

double ha_norm(const SpectralField& h, double alpha) {
    double s = 0.0;
    for (std::size_t n = 0; n < h.c.size(); ++n)
        s += std::pow(1.0 + neumann_eigenvalue(static_cast<int>(n)), 2.0 * alpha) * h.c[n] * h.c[n];
    return std::sqrt(s);
}

void SpectralPath::validate() const {
    if (times.empty()) throw std::domain_error("spectral path: empty time grid");
    if (times.size() != values.size())
        throw std::invalid_argument("spectral path: time/value size mismatch");
    for (std::size_t j = 1; j < times.size(); ++j)
        if (times[j] <= times[j - 1])
            throw std::invalid_argument("spectral path: time grid must increase strictly");
}

SpectralPath duhamel(const SpectralPath& hpath, double eps) {
    hpath.validate();
    const std::size_t modes = hpath.values.front().modes();
    SpectralPath out;
    out.times = hpath.times;
    out.values.assign(hpath.times.size(), SpectralField(modes));
    SpectralField y(modes);
    for (std::size_t j = 0; j + 1 < hpath.times.size(); ++j) {
        const double dt = hpath.times[j + 1] - hpath.times[j];
        for (std::size_t n = 0; n < modes; ++n) {
            const double lam = eps * neumann_eigenvalue(static_cast<int>(n));
            exp_step(lam, dt, std::exp(-lam * dt), y.c[n], hpath.values[j].c[n]);
        }
        out.values[j + 1] = y;
    }
    return out;
}

SpectralPath stochastic_convolution(const OperatorPath& psi, std::span<const double> increments,
                                    int n_wiener_modes, double eps) {
    if (psi.times.size() < 2) throw std::domain_error("stochastic convolution: empty path");
    if (psi.values.size() + 1 != psi.times.size() && psi.values.size() != psi.times.size())
        throw std::invalid_argument("stochastic convolution: per-step values expected");
    const std::size_t steps = psi.times.size() - 1;
    if (increments.size() != static_cast<std::size_t>(n_wiener_modes) * steps)
        throw std::invalid_argument("stochastic convolution: increment/step shape mismatch");
    const std::size_t modes = psi.values.front().front().modes();

    SpectralPath out;
    out.times = psi.times;
    out.values.assign(psi.times.size(), SpectralField(modes));
    SpectralField z(modes);
    for (std::size_t j = 0; j < steps; ++j) {
        const double dt = psi.times[j + 1] - psi.times[j];
        for (int k = 0; k < n_wiener_modes; ++k) {
            const double db = increments[static_cast<std::size_t>(k) * steps + j];
            const auto& pk = psi.values[j][k];
            for (std::size_t n = 0; n < modes; ++n) z.c[n] += pk.c[n] * db;
        }
        for (std::size_t n = 0; n < modes; ++n)
            z.c[n] *= std::exp(-eps * neumann_eigenvalue(static_cast<int>(n)) * dt);
        out.values[j + 1] = z;
    }
    return out;
}

SpectralPath boundary_corrector(std::span<const double> times, std::span<const double> flux_nu_0,
                                std::span<const double> flux_nu_1, int n_modes, double eps) {
    if (times.size() < 2) throw std::domain_error("boundary corrector: empty time grid");
    const std::size_t steps = times.size() - 1;
    if (flux_nu_0.size() < steps || flux_nu_1.size() < steps)
        throw std::invalid_argument("boundary corrector: per-step boundary data expected");

    SpectralPath out;
    out.times.assign(times.begin(), times.end());
    out.values.assign(times.size(), SpectralField(static_cast<std::size_t>(n_modes)));
    SpectralField w(static_cast<std::size_t>(n_modes));
    for (std::size_t j = 0; j < steps; ++j) {
        const double dt = times[j + 1] - times[j];
        for (int n = 0; n < n_modes; ++n) {
            const double lam = eps * neumann_eigenvalue(n);
            const double force = neumann_mode(n, 0.0) * flux_nu_0[j] + neumann_mode(n, 1.0) * flux_nu_1[j];
            exp_step(lam, dt, std::exp(-lam * dt), w.c[n], force);
        }
        out.values[j + 1] = w;
    }
    return out;
}

}  // namespace stoclaw
