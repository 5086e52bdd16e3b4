#include "stoclaw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stoclaw/spectral.hpp"
#include "stoclaw/util.hpp"

namespace stoclaw {

namespace {

// quintic smoothstep: C^2 with flat ends
double smoothstep(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}
double smoothstep_d1(double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    const double z = y * (1.0 - y);
    return 30.0 * z * z;
}
double smoothstep_d2(double y) {
    if (y <= 0.0 || y >= 1.0) return 0.0;
    return 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
}

}  // namespace

double SpaceBump::operator()(double x) const {
    if (x <= x0 || x >= x1) return 0.0;
    if (x < x0 + w) return smoothstep((x - x0) / w);
    if (x > x1 - w) return smoothstep((x1 - x) / w);
    return 1.0;
}
double SpaceBump::d1(double x) const {
    if (x <= x0 || x >= x1) return 0.0;
    if (x < x0 + w) return smoothstep_d1((x - x0) / w) / w;
    if (x > x1 - w) return -smoothstep_d1((x1 - x) / w) / w;
    return 0.0;
}
double SpaceBump::d2(double x) const {
    if (x <= x0 || x >= x1) return 0.0;
    if (x < x0 + w) return smoothstep_d2((x - x0) / w) / (w * w);
    if (x > x1 - w) return smoothstep_d2((x1 - x) / w) / (w * w);
    return 0.0;
}

double TimeWindow::operator()(double t) const {
    if (t >= t1) return 0.0;
    double v = 1.0;
    if (t0 >= 0.0) {
        if (t <= t0) return 0.0;
        if (t < t0 + w) v = smoothstep((t - t0) / w);
    }
    if (t > t1 - w) v *= smoothstep((t1 - t) / w);
    return v;
}
double TimeWindow::d1(double t) const {
    if (t >= t1) return 0.0;
    if (t0 >= 0.0 && t <= t0) return 0.0;
    // the rise and fall never overlap for the windows used here
    if (t0 >= 0.0 && t < t0 + w) return smoothstep_d1((t - t0) / w) / w;
    if (t > t1 - w) return -smoothstep_d1((t1 - t) / w) / w;
    return 0.0;
}

// ---------------------------------------------------------------------------
// kinetic profiles

std::vector<double> chi_reconstruct(double u, std::span<const double> xi_centers) {
    std::vector<double> out(xi_centers.size(), 0.0);
    for (std::size_t b = 0; b < xi_centers.size(); ++b) {
        const double xi = xi_centers[b];
        const double f = xi < u ? 1.0 : 0.0;
        const double f0 = xi < 0.0 ? 1.0 : 0.0;
        out[b] = f - f0;
    }
    return out;
}

std::vector<double> f_indicator(double u, std::span<const double> xi_centers) {
    std::vector<double> out(xi_centers.size(), 0.0);
    for (std::size_t b = 0; b < xi_centers.size(); ++b) out[b] = u > xi_centers[b] ? 1.0 : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// kinetic histogram

double KineticHistogram::bin_sum() const { return pairwise_sum(mass); }

KineticHistogram kinetic_measure(const TrajectoryRecord& traj, const FluxModel& flux, int t_bins,
                                 int x_bins, int xi_bins, double xi_margin) {
    const double xi_lo = flux.a_lo() - xi_margin, xi_hi = flux.b_hi() + xi_margin;
    if (xi_lo > flux.a_lo() || xi_hi < flux.b_hi())
        throw std::domain_error("kinetic_measure: xi bins must cover the state interval");
    KineticHistogram h;
    const double T = traj.times.back();
    for (int b = 0; b <= t_bins; ++b) h.t_edges.push_back(T * b / t_bins);
    for (int b = 0; b <= x_bins; ++b) h.x_edges.push_back(static_cast<double>(b) / x_bins);
    for (int b = 0; b <= xi_bins; ++b)
        h.xi_edges.push_back(xi_lo + (xi_hi - xi_lo) * b / xi_bins);
    h.mass.assign(static_cast<std::size_t>(t_bins) * x_bins * xi_bins, 0.0);

    const int N = traj.grid.N;
    const double dx = traj.grid.dx();
    const double dt = traj.dt;
    bool first = true;
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < traj.nodes(); ++j) {
        const auto u = traj.state(j);
        const double t = traj.times[j];
        auto it = std::min<std::size_t>(static_cast<std::size_t>(t / T * t_bins), t_bins - 1);
        for (int i = 0; i + 1 < N; ++i) {
            const double g = (u[i + 1] - u[i]) / dx;
            const double m = traj.eps * g * g * dx * dt;
            const double x = traj.grid.center(i);
            auto ix = std::min<std::size_t>(static_cast<std::size_t>(x * x_bins), x_bins - 1);
            const double xi = u[i];
            double frac = (xi - xi_lo) / (xi_hi - xi_lo);
            frac = std::clamp(frac, 0.0, 1.0);
            auto ib = std::min<std::size_t>(static_cast<std::size_t>(frac * xi_bins), xi_bins - 1);
            h.mass[h.index(it, ix, ib)] += m;
            total += m;
            if (m > 0.0) {
                if (first) {
                    h.xi_support_min = h.xi_support_max = xi;
                    first = false;
                } else {
                    h.xi_support_min = std::min(h.xi_support_min, xi);
                    h.xi_support_max = std::max(h.xi_support_max, xi);
                }
            }
        }
    }
    h.total = total;
    return h;
}

void merge_histogram(KineticHistogram& a, const KineticHistogram& b) {
    if (a.mass.size() != b.mass.size())
        throw std::invalid_argument("merge_histogram: bin grids disagree");
    for (std::size_t i = 0; i < a.mass.size(); ++i) a.mass[i] += b.mass[i];
    a.total += b.total;
    a.xi_support_min = std::min(a.xi_support_min, b.xi_support_min);
    a.xi_support_max = std::max(a.xi_support_max, b.xi_support_max);
}

// ---------------------------------------------------------------------------
// weak-form assembly

WeakFormResult weak_form_residual(const TrajectoryRecord& traj, const PathRecord& path,
                                  const FluxModel& flux, const NoiseModel& noise, WeakForm form,
                                  const SeparableTest& test, const EntropyPair* eta) {
    const int N = traj.grid.N;
    const double dx = traj.grid.dx();
    const double dt = traj.dt;
    const std::size_t steps = traj.nodes() - 1;
    const auto& X = test.space;
    const auto& W = test.time;

    if (form == WeakForm::Entropy && eta == nullptr)
        throw std::invalid_argument("weak_form_residual: entropy form needs an entropy pair");
    if (noise.enabled() && path.steps() != steps)
        throw std::invalid_argument("weak_form_residual: path/trajectory step mismatch");
    if (form != WeakForm::Conservation && !X.interior(2.0 * dx))
        throw std::domain_error(
            "weak_form_residual: test function must vanish on a 2 dx margin for this form");
    if (W.t1 > traj.times.back() + 1e-12)
        throw std::domain_error("weak_form_residual: time window must close before the horizon");

    // closed-form chi-moments against P: Phi_P(u) = int_0^u P, C_aP(u) = int_0^u a P
    const Polynomial antiP = test.xi.antiderivative();
    const Polynomial P_prime = test.xi.derivative();
    const Polynomial anti_aP = (flux.derivative_component(0) * test.xi).antiderivative();

    std::vector<double> Xc(N), dXface(N), d2Xc(N), Tn(traj.nodes());
    for (int i = 0; i < N; ++i) {
        Xc[i] = X(traj.grid.center(i));
        dXface[i] = X(traj.grid.face(i + 1)) - X(traj.grid.face(i));
    }
    for (int i = 0; i < N; ++i) {
        const double xm = traj.grid.center(i) - dx, xp = traj.grid.center(i) + dx;
        d2Xc[i] = X(xp) - 2.0 * Xc[i] + X(xm);
    }
    for (std::size_t j = 0; j < traj.nodes(); ++j) Tn[j] = W(traj.times[j]);

    double term_time = 0.0, term_init = 0.0, term_transport = 0.0, term_visc = 0.0;
    double term_ito = 0.0, term_g2 = 0.0, term_measure = 0.0;
    double mag_time = 0.0, mag_init = 0.0, mag_transport = 0.0, mag_visc = 0.0;
    double mag_ito = 0.0, mag_g2 = 0.0, mag_measure = 0.0;

    auto coeff_time = [&](double u) {
        switch (form) {
            case WeakForm::Kinetic: return antiP(u);
            case WeakForm::Entropy: return eta->eta(u);
            case WeakForm::Conservation: return u;
        }
        return 0.0;
    };
    auto coeff_flux = [&](double u) {
        switch (form) {
            case WeakForm::Kinetic: return anti_aP(u);
            case WeakForm::Entropy: return piecewise_q(*eta, flux.derivative_component(0), u);
            case WeakForm::Conservation: return flux.A(u);
        }
        return 0.0;
    };
    auto coeff_visc = [&](double u) {
        // pairs as face differences against face differences of X
        switch (form) {
            case WeakForm::Kinetic: return antiP(u);
            case WeakForm::Entropy: return eta->eta(u);
            case WeakForm::Conservation: return u;
        }
        return 0.0;
    };

    for (std::size_t j = 0; j < steps; ++j) {
        const auto u = traj.state(j);
        const double Tj = Tn[j];
        const double dTj = Tn[j + 1] - Tn[j];
        if (Tj == 0.0 && dTj == 0.0) continue;

        for (int i = 0; i < N; ++i) {
            if (Xc[i] == 0.0 && dXface[i] == 0.0) continue;
            const double ct = coeff_time(u[i]);
            if (dTj != 0.0) {
                const double v = ct * dTj * Xc[i] * dx;
                term_time += v;
                mag_time += std::abs(v);
            }
            if (Tj != 0.0) {
                const double tr = coeff_flux(u[i]) * Tj * dXface[i] * dt;
                term_transport += tr;
                mag_transport += std::abs(tr);
            }
        }
        if (Tj != 0.0) {
            // viscous pairing over interior faces
            for (int i = 0; i + 1 < N; ++i) {
                const double dXc = Xc[i + 1] - Xc[i];
                if (dXc == 0.0) continue;
                const double dv = coeff_visc(u[i + 1]) - coeff_visc(u[i]);
                const double v = traj.eps * (dv / dx) * (dXc / dx) * Tj * dx * dt;
                term_visc += v;
                mag_visc += std::abs(v);
            }
            if (noise.enabled()) {
                for (int k = 1; k <= noise.modes(); ++k) {
                    double inner = 0.0;
                    for (int i = 0; i < N; ++i) {
                        if (Xc[i] == 0.0) continue;
                        double factor = 1.0;
                        if (form == WeakForm::Kinetic) factor = test.xi(u[i]);
                        else if (form == WeakForm::Entropy) factor = eta->eta_prime(u[i]);
                        inner += noise.g(k, traj.grid.center(i), u[i]) * factor * Xc[i] * dx;
                    }
                    const double v = inner * Tj * path.db(k - 1, j);
                    term_ito += v;
                    mag_ito += std::abs(v);
                }
            }
            if (noise.enabled() && form != WeakForm::Conservation) {
                for (int i = 0; i < N; ++i) {
                    if (Xc[i] == 0.0) continue;
                    const double fac =
                        form == WeakForm::Kinetic ? P_prime(u[i]) : eta->eta_second(u[i]);
                    if (fac == 0.0) continue;
                    const double v =
                        0.5 * noise.G2(traj.grid.center(i), u[i]) * fac * Xc[i] * Tj * dx * dt;
                    term_g2 += v;
                    mag_g2 += std::abs(v);
                }
            }
            if (form == WeakForm::Kinetic) {
                for (int i = 0; i + 1 < N; ++i) {
                    if (Xc[i] == 0.0) continue;
                    const double fac = P_prime(u[i]);
                    if (fac == 0.0) continue;
                    const double g = (u[i + 1] - u[i]) / dx;
                    const double v = fac * Xc[i] * Tj * traj.eps * g * g * dx * dt;
                    term_measure += v;
                    mag_measure += std::abs(v);
                }
            }
        }
    }
    {
        const auto u0 = traj.state(0);
        const double T0 = Tn[0];
        if (T0 != 0.0) {
            for (int i = 0; i < N; ++i) {
                if (Xc[i] == 0.0) continue;
                const double v = coeff_time(u0[i]) * T0 * Xc[i] * dx;
                term_init += v;
                mag_init += std::abs(v);
            }
        }
    }

    WeakFormResult res;
    res.normalization = std::max(1.0, mag_time + mag_init + mag_transport + mag_visc + mag_ito +
                                          mag_g2 + mag_measure);
    switch (form) {
        case WeakForm::Kinetic:
            // time + init + transport - eps<grad(moment), grad psi> + Ito
            // + G2/2 - m(dP) telescopes to zero on an exact solution
            res.raw = term_time + term_init + term_transport - term_visc + term_ito + term_g2 -
                      term_measure;
            res.residual = std::abs(res.raw) / res.normalization;
            break;
        case WeakForm::Conservation:
            res.raw = term_time + term_init + term_transport - term_visc + term_ito;
            res.residual = std::abs(res.raw) / res.normalization;
            break;
        case WeakForm::Entropy:
            // signed defect: equals the entropy dissipation for the scheme
            res.raw = term_time + term_init + term_transport - term_visc + term_ito + term_g2;
            res.residual = res.raw / res.normalization;
            break;
    }
    return res;
}

// ---------------------------------------------------------------------------
// mass and comparison series

std::vector<double> mass_series(const TrajectoryRecord& traj) { return traj.mass; }

DriftStats mass_drift_stats(std::span<const TrajectoryRecord> ens) {
    DriftStats st;
    st.replicas = static_cast<int>(ens.size());
    if (ens.empty()) return st;
    std::vector<double> drifts(ens.size());
    for (std::size_t r = 0; r < ens.size(); ++r)
        drifts[r] = ens[r].mass.back() - ens[r].mass.front();
    st.mean = pairwise_sum(drifts) / static_cast<double>(drifts.size());
    if (drifts.size() > 1) {
        std::vector<double> sq(drifts.size());
        for (std::size_t r = 0; r < drifts.size(); ++r)
            sq[r] = (drifts[r] - st.mean) * (drifts[r] - st.mean);
        const double var = pairwise_sum(sq) / static_cast<double>(drifts.size() - 1);
        st.std_error = std::sqrt(var / static_cast<double>(drifts.size()));
    }
    return st;
}

double noise_mass_increment(const TrajectoryRecord& traj, const NoiseModel& noise,
                            const PathRecord& path, std::size_t j) {
    const int N = traj.grid.N;
    const double dx = traj.grid.dx();
    const auto u = traj.state(j);
    double total = 0.0;
    for (int k = 1; k <= noise.modes(); ++k) {
        double inner = 0.0;
        for (int i = 0; i < N; ++i) inner += noise.g(k, traj.grid.center(i), u[i]) * dx;
        total += inner * path.db(k - 1, j);
    }
    return total;
}

PositivePartSeries positive_part_series(const TrajectoryRecord& t1, const TrajectoryRecord& t2) {
    if (t1.nodes() != t2.nodes() || t1.grid.N != t2.grid.N)
        throw std::invalid_argument("positive_part_series: grids disagree");
    PositivePartSeries out;
    const int N = t1.grid.N;
    const double dx = t1.grid.dx();
    out.values.reserve(t1.nodes());
    for (std::size_t j = 0; j < t1.nodes(); ++j) {
        const auto a = t1.state(j), b = t2.state(j);
        double s = 0.0;
        for (int i = 0; i < N; ++i) s += std::max(0.0, a[i] - b[i]) * dx;
        out.values.push_back(s);
    }
    for (std::size_t j = 1; j < out.values.size(); ++j) {
        const double inc = out.values[j] - out.values[j - 1];
        out.max_increase = std::max(out.max_increase, inc);
        if (inc > 1e-8) ++out.violations;
    }
    return out;
}

// ---------------------------------------------------------------------------
// boundary traces

namespace {
double interp_at(std::span<const double> u, const Grid1D& grid, double x) {
    const int N = grid.N;
    const double pos = x / grid.dx() - 0.5;
    if (pos <= 0.0) return u[0];
    if (pos >= N - 1) return u[N - 1];
    const int i = static_cast<int>(pos);
    const double w = pos - i;
    return (1.0 - w) * u[i] + w * u[i + 1];
}

double l1_in_time(std::span<const double> times, std::span<const double> a,
                  std::span<const double> b) {
    double total = 0.0;
    for (std::size_t j = 1; j < times.size(); ++j)
        total += 0.5 * (std::abs(a[j - 1] - b[j - 1]) + std::abs(a[j] - b[j])) *
                 (times[j] - times[j - 1]);
    return total;
}
}  // namespace

TraceSeries strong_trace(const TrajectoryRecord& traj, std::span<const double> depths) {
    TraceSeries ts;
    ts.depths.assign(depths.begin(), depths.end());
    for (std::size_t d = 1; d < ts.depths.size(); ++d)
        if (ts.depths[d] >= ts.depths[d - 1])
            throw std::invalid_argument("strong_trace: depths must decrease strictly");
    if (ts.depths.empty()) throw std::invalid_argument("strong_trace: no depths");
    if (ts.depths.back() < traj.grid.dx() - 1e-12)
        throw std::domain_error("strong_trace: depth below grid resolution");

    ts.times = traj.times;
    const std::size_t n = traj.nodes();
    for (double s : ts.depths) {
        std::vector<double> left(n), right(n);
        for (std::size_t j = 0; j < n; ++j) {
            const auto u = traj.state(j);
            left[j] = interp_at(u, traj.grid, s);
            right[j] = interp_at(u, traj.grid, 1.0 - s);
        }
        ts.layer_left.push_back(std::move(left));
        ts.layer_right.push_back(std::move(right));
    }
    for (std::size_t d = 1; d < ts.depths.size(); ++d) {
        ts.dist_left.push_back(l1_in_time(ts.times, ts.layer_left[d - 1], ts.layer_left[d]));
        ts.dist_right.push_back(l1_in_time(ts.times, ts.layer_right[d - 1], ts.layer_right[d]));
    }
    // Richardson (first order in depth) from the two shallowest layers
    const std::size_t nd = ts.depths.size();
    ts.trace_left.resize(n);
    ts.trace_right.resize(n);
    if (nd >= 2) {
        const double s1 = ts.depths[nd - 1], s2 = ts.depths[nd - 2];
        const double w = s1 / (s2 - s1);
        for (std::size_t j = 0; j < n; ++j) {
            ts.trace_left[j] = ts.layer_left[nd - 1][j] +
                               (ts.layer_left[nd - 1][j] - ts.layer_left[nd - 2][j]) * w;
            ts.trace_right[j] = ts.layer_right[nd - 1][j] +
                                (ts.layer_right[nd - 1][j] - ts.layer_right[nd - 2][j]) * w;
        }
    } else {
        ts.trace_left.assign(ts.layer_left[0].begin(), ts.layer_left[0].end());
        ts.trace_right.assign(ts.layer_right[0].begin(), ts.layer_right[0].end());
    }
    ts.cauchy_left = std::is_sorted(ts.dist_left.rbegin(), ts.dist_left.rend());
    ts.cauchy_right = std::is_sorted(ts.dist_right.rbegin(), ts.dist_right.rend());
    return ts;
}

double trace_l1_distance(std::span<const double> times_a, std::span<const double> vals_a,
                         std::span<const double> times_b, std::span<const double> vals_b) {
    // resample b onto a's grid, then trapezoid
    std::vector<double> rb(times_a.size());
    std::size_t k = 0;
    for (std::size_t j = 0; j < times_a.size(); ++j) {
        const double t = times_a[j];
        while (k + 1 < times_b.size() && times_b[k + 1] < t) ++k;
        if (k + 1 >= times_b.size()) {
            rb[j] = vals_b.back();
        } else {
            const double t0 = times_b[k], t1 = times_b[k + 1];
            const double w = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
            rb[j] = (1.0 - std::clamp(w, 0.0, 1.0)) * vals_b[k] +
                    std::clamp(w, 0.0, 1.0) * vals_b[k + 1];
        }
    }
    return l1_in_time(times_a, vals_a, rb);
}

// ---------------------------------------------------------------------------
// chi-function criterion

ChiDistance chi_function_distance(std::span<const double> g, std::size_t rows,
                                  std::span<const double> xi_centers, double dxi, double tol) {
    const std::size_t bins = xi_centers.size();
    if (rows * bins != g.size())
        throw std::invalid_argument("chi_function_distance: profile shape mismatch");
    ChiDistance out;
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        double v = 0.0;
        for (std::size_t b = 0; b < bins; ++b) v += g[r * bins + b] * dxi;
        out.states.push_back(v);
        const auto chi = chi_reconstruct(v, xi_centers);
        double row_l1 = 0.0;
        for (std::size_t b = 0; b < bins; ++b) row_l1 += std::abs(g[r * bins + b] - chi[b]) * dxi;
        acc += row_l1;
    }
    out.distance = rows > 0 ? acc / static_cast<double>(rows) : 0.0;
    out.is_chi_function = out.distance <= tol;
    return out;
}

// ---------------------------------------------------------------------------
// regularity

GagliardoEntry gagliardo_norm(const TrajectoryRecord& traj, double s, double r,
                              const SpaceBump& cutoff, int max_time_samples) {
    if (s <= 0.0 || s >= 1.0) throw std::invalid_argument("gagliardo_norm: s must be in (0,1)");
    if (r < 1.0 || r >= 2.0) throw std::invalid_argument("gagliardo_norm: r must be in [1,2)");
    const double dx = traj.grid.dx();
    if (!cutoff.interior(2.0 * dx))
        throw std::domain_error("gagliardo_norm: cutoff must vanish near the boundary");
    const int N = traj.grid.N;

    // the interior subdomain is the cutoff's plateau, where psi u = u; a
    // constant field then has zero seminorm as it should
    std::vector<double> Xc(N);
    int lo = N, hi = -1;
    for (int i = 0; i < N; ++i) {
        Xc[i] = cutoff(traj.grid.center(i));
        if (Xc[i] == 1.0) {
            lo = std::min(lo, i);
            hi = std::max(hi, i);
        }
    }
    if (hi < lo) throw std::invalid_argument("gagliardo_norm: cutoff has no plateau");

    const std::size_t nodes = traj.nodes();
    const std::size_t stride =
        std::max<std::size_t>(1, (nodes + max_time_samples - 1) / max_time_samples);
    double acc = 0.0, acc_semi = 0.0, acc_lr = 0.0;
    std::size_t samples = 0;
    std::vector<double> w(hi - lo + 1);
    for (std::size_t j = 0; j < nodes; j += stride) {
        const auto u = traj.state(j);
        for (int i = lo; i <= hi; ++i) w[i - lo] = Xc[i] * u[i];
        double semi = 0.0;
        for (int i = 0; i < static_cast<int>(w.size()); ++i) {
            for (int k = i + 1; k < static_cast<int>(w.size()); ++k) {
                const double diff = std::abs(w[i] - w[k]);
                const double dist = (k - i) * dx;
                semi += 2.0 * std::pow(diff, r) / std::pow(dist, 1.0 + s * r) * dx * dx;
            }
        }
        double lr = 0.0;
        for (double v : w) lr += std::pow(std::abs(v), r) * dx;
        acc += semi + lr;
        acc_semi += semi;
        acc_lr += lr;
        ++samples;
    }
    GagliardoEntry e;
    const double inv = 1.0 / static_cast<double>(samples);
    e.norm = std::pow(acc * inv, 1.0 / r);
    e.seminorm = std::pow(acc_semi * inv, 1.0 / r);
    e.lr_part = std::pow(acc_lr * inv, 1.0 / r);
    return e;
}

double holder_time_seminorm(const TrajectoryRecord& traj, double lambda, int max_snapshots) {
    if (lambda <= 0.0 || lambda >= 0.5)
        throw std::invalid_argument("holder_time_seminorm: lambda must be in (0, 1/2)");
    if (traj.nodes() < 2) throw std::invalid_argument("holder_time_seminorm: need >= 2 snapshots");
    const std::size_t nodes = traj.nodes();
    const std::size_t stride = std::max<std::size_t>(1, (nodes - 1) / (max_snapshots - 1));
    CosineTransform transform(traj.grid.N);
    std::vector<SpectralField> hats;
    std::vector<double> ts;
    for (std::size_t j = 0; j < nodes; j += stride) {
        hats.push_back(transform.forward(traj.state(j)));
        ts.push_back(traj.times[j]);
    }
    if (ts.back() != traj.times.back()) {
        hats.push_back(transform.forward(traj.state(nodes - 1)));
        ts.push_back(traj.times.back());
    }
    double best = 0.0;
    for (std::size_t a = 0; a < hats.size(); ++a) {
        for (std::size_t b = a + 1; b < hats.size(); ++b) {
            SpectralField diff = hats[a];
            for (std::size_t n = 0; n < diff.c.size(); ++n) diff.c[n] -= hats[b].c[n];
            const double nrm = ha_norm(diff, -0.5);
            best = std::max(best, nrm / std::pow(ts[b] - ts[a], lambda));
        }
    }
    return best;
}

}  // namespace stoclaw
