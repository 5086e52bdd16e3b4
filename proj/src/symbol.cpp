#include "stoclaw/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stoclaw/util.hpp"

namespace stoclaw {

namespace {

constexpr double kPi = std::numbers::pi;

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// tau + a(xi) . kappa as a polynomial in xi
Polynomial direction_polynomial(const FluxModel& flux, double tau, std::span<const double> kappa) {
    Polynomial p = Polynomial::constant(tau);
    const int d = std::min<int>(flux.dimension(), static_cast<int>(kappa.size()));
    for (int i = 0; i < d; ++i) {
        if (kappa[i] != 0.0) p = p + flux.derivative_component(i) * kappa[i];
    }
    return p;
}

double sampled_measure(const FluxModel& flux, double tau, std::span<const double> kappa,
                       double delta, double L0, long samples) {
    long hits = 0;
    for (long i = 0; i < samples; ++i) {
        const double xi = -L0 + 2.0 * L0 * (i + 0.5) / samples;
        double v = tau;
        const auto a = flux.eval(xi, true);
        for (std::size_t c = 0; c < a.size() && c < kappa.size(); ++c) v += a[c] * kappa[c];
        if (std::abs(v) <= delta) ++hits;
    }
    return 2.0 * L0 * hits / samples;
}

// candidate tau values: shifted critical values of a(xi) . kappa
std::vector<double> tau_candidates(const Polynomial& akappa, double L0, double delta) {
    std::vector<double> taus;
    for (double v : critical_values_on(akappa, -L0, L0)) {
        taus.push_back(-v - delta);
        taus.push_back(-v);
        taus.push_back(-v + delta);
    }
    return taus;
}

double sup_over_tau(const FluxModel& flux, std::span<const double> kappa, double delta,
                    double* best_tau) {
    const double L0 = flux.L0();
    const Polynomial akappa = direction_polynomial(flux, 0.0, kappa);
    double best = 0.0;
    double arg = 0.0;
    for (double tau : tau_candidates(akappa, L0, delta)) {
        const double m = sublevel_measure(akappa + tau, delta, -L0, L0);
        if (m > best) {
            best = m;
            arg = tau;
        }
    }
    if (best_tau) *best_tau = arg;
    return best;
}

std::vector<std::vector<double>> direction_grid(int d, int count) {
    std::vector<std::vector<double>> dirs;
    if (d == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (d == 2) {
        for (int i = 0; i < count; ++i) {
            const double th = kPi * i / count;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else if (d == 3) {
        // Fibonacci lattice on the sphere
        const double ga = kPi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < count; ++i) {
            const double z = 1.0 - 2.0 * (i + 0.5) / count;
            const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            dirs.push_back({r * std::cos(ga * i), r * std::sin(ga * i), z});
        }
    } else {
        throw std::invalid_argument("sup_sphere_measure: direction scan supports d <= 3");
    }
    // coordinate axes are where the example family attains its sup
    for (int i = 0; i < d; ++i) {
        std::vector<double> e(d, 0.0);
        e[i] = 1.0;
        dirs.push_back(e);
        e[i] = -1.0;
        dirs.push_back(e);
    }
    return dirs;
}

}  // namespace

void SymbolQuery::require_unit() const {
    if (std::abs(norm2(kappa) - 1.0) > 1e-12)
        throw std::invalid_argument("symbol query: direction must be a unit vector");
    if (delta <= 0.0) throw std::invalid_argument("symbol query: delta must be positive");
}

MeasureResult omega_set_measure_detailed(const FluxModel& flux, double tau,
                                         std::span<const double> kappa, double delta,
                                         double epsilon) {
    if (delta <= 0.0) throw std::invalid_argument("omega_set_measure: delta must be positive");
    const double L0 = flux.L0();
    MeasureResult out;
    double level = delta;
    if (epsilon > 0.0) {
        // |L_eps|^2 = (tau + a.n)^2 + (eps |n|^2)^2
        const double nn = norm2(kappa);
        const double shift = epsilon * nn * nn;
        if (shift >= delta) return out;
        level = std::sqrt(delta * delta - shift * shift);
    }
    if (!flux.is_polynomial()) {
        const long samples = 2'000'000;
        out.measure = sampled_measure(flux, tau, kappa, level, L0, samples);
        out.error_bar = 2.0 * (2.0 * L0) / static_cast<double>(samples);
        out.exact = false;
        return out;
    }
    out.measure = sublevel_measure(direction_polynomial(flux, tau, kappa), level, -L0, L0);
    return out;
}

double omega_set_measure(const FluxModel& flux, double tau, std::span<const double> kappa,
                         double delta, double epsilon) {
    return omega_set_measure_detailed(flux, tau, kappa, delta, epsilon).measure;
}

double omega_set_measure(const FluxModel& flux, const SymbolQuery& q) {
    return omega_set_measure(flux, q.tau, q.kappa, q.delta, q.epsilon);
}

SupMeasure sup_sphere_measure(const FluxModel& flux, double delta, int directions) {
    const int d = flux.dimension();
    SupMeasure out;
    out.argmax_kappa.assign(d, 0.0);

    auto dirs = direction_grid(d, directions);
    int best_idx = -1;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        double tau = 0.0;
        const double m = sup_over_tau(flux, dirs[i], delta, &tau);
        if (m > out.measure) {
            out.measure = m;
            out.argmax_tau = tau;
            out.argmax_kappa = dirs[i];
            best_idx = static_cast<int>(i);
        }
    }
    if (d == 2 && best_idx >= 0 && best_idx < directions) {
        // one refinement pass around the best angle
        const double th0 = kPi * best_idx / directions;
        const double h = kPi / directions;
        int best_ref = -1;
        const int refine = 20;
        for (int i = -refine; i <= refine; ++i) {
            const double th = th0 + h * i / refine;
            const std::vector<double> kap{std::cos(th), std::sin(th)};
            double tau = 0.0;
            const double m = sup_over_tau(flux, kap, delta, &tau);
            if (m > out.measure) {
                out.measure = m;
                out.argmax_tau = tau;
                out.argmax_kappa = kap;
                best_ref = i;
            }
        }
        out.refinement_boundary_warning = (best_ref == -refine || best_ref == refine);
    } else if (d == 3 && best_idx >= 0 && best_idx < directions) {
        // refine in a small cap around the best lattice direction
        const auto& c = out.argmax_kappa;
        std::vector<double> u{-c[1], c[0], 0.0};
        if (norm2(u) < 1e-8) u = {1.0, 0.0, 0.0};
        const double nu = norm2(u);
        for (double& x : u) x /= nu;
        std::vector<double> v{c[1] * u[2] - c[2] * u[1], c[2] * u[0] - c[0] * u[2],
                              c[0] * u[1] - c[1] * u[0]};
        const double cap = 2.0 / std::sqrt(static_cast<double>(directions));
        bool boundary_best = false;
        const auto base = out.argmax_kappa;
        for (int i = 0; i < 100; ++i) {
            const double r = cap * std::sqrt((i % 10 + 0.5) / 10.0);
            const double ph = 2.0 * kPi * (i / 10 + 0.5) / 10.0;
            std::vector<double> kap(3);
            for (int cdx = 0; cdx < 3; ++cdx)
                kap[cdx] = base[cdx] + r * (std::cos(ph) * u[cdx] + std::sin(ph) * v[cdx]);
            const double nk = norm2(kap);
            for (double& x : kap) x /= nk;
            double tau = 0.0;
            const double m = sup_over_tau(flux, kap, delta, &tau);
            if (m > out.measure) {
                out.measure = m;
                out.argmax_tau = tau;
                out.argmax_kappa = kap;
                boundary_best = (i % 10 == 9);
            }
        }
        out.refinement_boundary_warning = boundary_best;
    }
    return out;
}

ExponentFit exponent_fit(const FluxModel& flux, std::span<const double> delta_grid,
                         int directions) {
    if (delta_grid.size() < 8)
        throw std::invalid_argument("exponent_fit: at least 8 delta points required");
    const auto [mn, mx] = std::minmax_element(delta_grid.begin(), delta_grid.end());
    if (*mx / *mn < 99.0)
        throw std::invalid_argument("exponent_fit: delta grid must span at least two decades");

    ExponentFit fit;
    std::vector<double> xs, ys;
    for (double delta : delta_grid) {
        const SupMeasure m = sup_sphere_measure(flux, delta, directions);
        fit.details.push_back(m);
        if (m.measure <= 0.0) {
            fit.excluded.push_back(delta);
            continue;
        }
        fit.deltas.push_back(delta);
        fit.measures.push_back(m.measure);
        xs.push_back(std::log(delta));
        ys.push_back(std::log(m.measure));
    }
    const std::size_t n = xs.size();
    if (n < 2) throw accuracy_error("exponent_fit: too few positive measures", 0.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    fit.alpha_hat = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.alpha_hat * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - (fit.alpha_hat * xs[i] + fit.intercept);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

GhReport gh_conditions(const FluxModel& flux, std::span<const double> J_list,
                       std::span<const double> delta_list, double alpha, int zero_set_samples,
                       std::uint64_t seed) {
    GhReport rep;
    const int d = flux.dimension();
    const double L0 = flux.L0();

    if (alpha > 0.0) {
        rep.alpha = alpha;
    } else if (!flux.exponents().empty()) {
        // endpoint zeros of order l_max decay like delta^{1/l_max}; interior
        // extrema contribute delta^{1/2}, so the effective exponent is capped
        rep.alpha =
            1.0 / std::max(2, *std::max_element(flux.exponents().begin(), flux.exponents().end()));
    } else {
        rep.alpha = 1.0;
    }

    auto band_vectors = [&](double J) {
        std::vector<std::vector<double>> ns;
        const int lo = std::max(1, static_cast<int>(std::ceil(J / 2.0)));
        const int hi = static_cast<int>(std::floor(2.0 * J));
        if (d == 1) {
            for (int n = lo; n <= hi; ++n) ns.push_back({static_cast<double>(n)});
        } else {
            // deterministic subsample of lattice points in the annulus
            std::uint64_t s = seed ^ static_cast<std::uint64_t>(J * 977.0);
            auto nexti = [&s](int range) {
                s += 0x9e3779b97f4a7c15ull;
                std::uint64_t z = s;
                z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
                z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
                z ^= z >> 31;
                return static_cast<int>(z % (2 * range + 1)) - range;
            };
            for (int i = 0; i < d; ++i) {
                std::vector<double> axis(d, 0.0);
                axis[i] = lo;
                ns.push_back(axis);
                axis[i] = hi;
                ns.push_back(axis);
            }
            int tries = 0;
            while (static_cast<int>(ns.size()) < 48 && tries < 4000) {
                ++tries;
                std::vector<double> n(d, 0.0);
                double nn = 0.0;
                for (int i = 0; i < d; ++i) {
                    n[i] = nexti(hi);
                    nn += n[i] * n[i];
                }
                nn = std::sqrt(nn);
                if (nn >= lo && nn <= hi) ns.push_back(std::move(n));
            }
        }
        return ns;
    };

    double band_sup = 0.0;
    for (double J : J_list) {
        const auto ns = band_vectors(J);
        for (double delta : delta_list) {
            double omega = 0.0;
            for (const auto& n : ns) omega = std::max(omega, sup_over_tau(flux, n, delta, nullptr));
            const double ratio = omega / std::pow(delta / J, rep.alpha);
            rep.rows.push_back({J, delta, omega, ratio});
        }
        for (const auto& n : ns) {
            double sup_n = 0.0;
            for (int i = 0; i < d; ++i) {
                if (n[i] == 0.0) continue;
                sup_n +=
                    std::abs(n[i]) * max_abs_on(flux.derivative_component(i).derivative(), -L0, L0);
            }
            band_sup = std::max(band_sup, sup_n / J);
        }
    }
    rep.band_sup_ratio = band_sup;

    double sup_dadx = 0.0;
    for (int i = 0; i < d; ++i)
        sup_dadx = std::max(sup_dadx,
                            max_abs_on(flux.derivative_component(i).derivative(), -L0, L0));
    rep.band_bounded = band_sup <= 2.0 * d * sup_dadx + 1e-12;

    // no growth trend in J per delta level
    rep.omega_bounded = true;
    for (double delta : delta_list) {
        double first = -1.0, last = -1.0;
        for (const auto& r : rep.rows) {
            if (r.delta != delta) continue;
            if (first < 0.0) first = r.ratio;
            last = r.ratio;
        }
        if (first > 0.0 && last > 4.0 * first) rep.omega_bounded = false;
    }

    // weak condition: the zero set {tau + a(xi).kappa = 0} is null
    std::uint64_t s = seed;
    auto next01 = [&s]() {
        s += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        z ^= z >> 31;
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    };
    rep.zero_set_null = true;
    rep.zero_set_samples = zero_set_samples;
    for (int t = 0; t < zero_set_samples; ++t) {
        std::vector<double> kappa(d);
        double nn = 0.0;
        for (int i = 0; i < d; ++i) {
            kappa[i] = 2.0 * next01() - 1.0;
            nn += kappa[i] * kappa[i];
        }
        nn = std::sqrt(nn);
        if (nn == 0.0) {
            kappa[0] = 1.0;
            nn = 1.0;
        }
        for (double& x : kappa) x /= nn;
        const double tau = 4.0 * next01() - 2.0;
        const Polynomial p = direction_polynomial(flux, tau, kappa);
        if (p.is_zero()) {
            rep.zero_set_null = false;  // symbol degenerates on a whole line
            continue;
        }
        // a nonzero polynomial has finitely many roots: the zero set is null
    }
    return rep;
}

SymbolReport symbol_scan(const FluxModel& flux, double delta_min, double delta_max, int points,
                         int directions) {
    if (points < 2) throw std::invalid_argument("symbol_scan: need at least 2 points");
    if (delta_min <= 0.0 || delta_max <= delta_min)
        throw std::invalid_argument("symbol_scan: need 0 < delta_min < delta_max");
    SymbolReport rep;
    for (int i = 0; i < points; ++i) {
        const double t = static_cast<double>(i) / (points - 1);
        rep.deltas.push_back(delta_min * std::pow(delta_max / delta_min, t));
    }
    rep.fit = exponent_fit(flux, rep.deltas, directions);
    rep.sup_rows = rep.fit.details;
    return rep;
}

}  // namespace stoclaw
