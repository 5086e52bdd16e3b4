#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stoclaw/analysis.hpp"
#include "stoclaw/config.hpp"
#include "stoclaw/harness.hpp"
#include "stoclaw/model.hpp"
#include "stoclaw/solver.hpp"
#include "stoclaw/spectral.hpp"
#include "stoclaw/symbol.hpp"

namespace py = pybind11;
using namespace stoclaw;

namespace {

py::array_t<double> states_array(const TrajectoryRecord& t) {
    const auto nodes = static_cast<py::ssize_t>(t.nodes());
    const auto n = static_cast<py::ssize_t>(t.grid.N);
    py::array_t<double> arr({nodes, n});
    std::copy(t.states.begin(), t.states.end(), arr.mutable_data());
    return arr;
}

py::dict trajectory_dict(const TrajectoryRecord& t) {
    py::dict d;
    d["times"] = py::array_t<double>(static_cast<py::ssize_t>(t.times.size()), t.times.data());
    d["states"] = states_array(t);
    d["mass"] = py::array_t<double>(static_cast<py::ssize_t>(t.mass.size()), t.mass.data());
    d["l2"] = py::array_t<double>(static_cast<py::ssize_t>(t.l2.size()), t.l2.data());
    d["min"] = py::array_t<double>(static_cast<py::ssize_t>(t.min_u.size()), t.min_u.data());
    d["max"] = py::array_t<double>(static_cast<py::ssize_t>(t.max_u.size()), t.max_u.data());
    d["grad_energy"] = py::array_t<double>(static_cast<py::ssize_t>(t.grad_energy.size()),
                                           t.grad_energy.data());
    d["overshoot"] = t.overshoot;
    d["dissipation"] = t.accumulated_dissipation();
    return d;
}

}  // namespace

PYBIND11_MODULE(_stoclaw, m) {
    m.doc() = "viscous stochastic scalar conservation laws on (0,1) with zero-flux boundary";

    py::class_<FluxModel>(m, "FluxModel")
        .def_static("example_family", &FluxModel::example_family, py::arg("exponents"),
                    py::arg("a_lo") = -1.0, py::arg("b_hi") = 1.0, py::arg("L0") = 1.25)
        .def_static(
            "polynomial",
            [](const std::vector<std::vector<double>>& comps, double a_lo, double b_hi,
               double L0) {
                std::vector<Polynomial> ps;
                for (const auto& c : comps) ps.emplace_back(c);
                return FluxModel::polynomial(std::move(ps), a_lo, b_hi, L0);
            },
            py::arg("components"), py::arg("a_lo"), py::arg("b_hi"), py::arg("L0"))
        .def_property_readonly("dimension", &FluxModel::dimension)
        .def_property_readonly("a_lo", &FluxModel::a_lo)
        .def_property_readonly("b_hi", &FluxModel::b_hi)
        .def_property_readonly("L0", &FluxModel::L0)
        .def("eval", &FluxModel::eval, py::arg("u"), py::arg("want_derivative") = false);

    py::class_<NoiseModel>(m, "NoiseModel")
        .def(py::init<int, double, double>(), py::arg("K"), py::arg("alpha_scale"), py::arg("M"))
        .def_static("silent", &NoiseModel::silent)
        .def_property_readonly("D", &NoiseModel::D)
        .def_property_readonly("modes", &NoiseModel::modes)
        .def("eval", [](const NoiseModel& n, double x, double u) {
            std::vector<double> g(n.modes());
            const double g2 = n.eval(x, u, g);
            return py::make_tuple(g, g2);
        });

    m.def("validate_model",
          [](const FluxModel& flux, const NoiseModel& noise) {
              InitialData init;
              const auto rep = validate_model(flux, noise, init);
              py::list checks;
              for (const auto& c : rep.checks) {
                  py::dict d;
                  d["id"] = c.id;
                  d["pass"] = c.pass;
                  d["margin"] = c.margin;
                  checks.append(d);
              }
              return checks;
          });

    m.def(
        "omega_set_measure",
        [](const FluxModel& flux, double tau, const std::vector<double>& kappa, double delta,
           double epsilon) { return omega_set_measure(flux, tau, kappa, delta, epsilon); },
        py::arg("flux"), py::arg("tau"), py::arg("kappa"), py::arg("delta"),
        py::arg("epsilon") = 0.0);
    m.def(
        "sup_sphere_measure",
        [](const FluxModel& flux, double delta, int directions) {
            const auto r = sup_sphere_measure(flux, delta, directions);
            py::dict d;
            d["measure"] = r.measure;
            d["argmax_tau"] = r.argmax_tau;
            d["argmax_kappa"] = r.argmax_kappa;
            return d;
        },
        py::arg("flux"), py::arg("delta"), py::arg("directions") = 1000);
    m.def(
        "exponent_fit",
        [](const FluxModel& flux, const std::vector<double>& deltas, int directions) {
            const auto f = exponent_fit(flux, deltas, directions);
            py::dict d;
            d["alpha_hat"] = f.alpha_hat;
            d["residual"] = f.residual;
            d["deltas"] = f.deltas;
            d["measures"] = f.measures;
            return d;
        },
        py::arg("flux"), py::arg("deltas"), py::arg("directions") = 1000);

    m.def("semigroup_apply",
          [](const std::vector<double>& coeffs, double t, double eps) {
              return semigroup_apply(SpectralField(coeffs), t, eps).c;
          });
    m.def("ha_norm", [](const std::vector<double>& coeffs, double alpha) {
        return ha_norm(SpectralField(coeffs), alpha);
    });

    m.def(
        "simulate",
        [](const std::string& config_text, std::uint64_t seed, int replica) {
            Config cfg = parse_config(config_text);
            if (seed != 0) cfg.seed = seed;
            const FluxModel flux = cfg.make_flux();
            const NoiseModel noise = cfg.make_noise();
            validate_model(flux, noise, cfg.init).require();
            const ResolvedStep step = resolve_time_step(cfg.solver, flux);
            const PathRecord path = sample_increments(noise, step, cfg.seed, replica);
            return trajectory_dict(simulate(cfg.init, cfg.solver, flux, noise, path));
        },
        py::arg("config_text"), py::arg("seed") = 0, py::arg("replica") = 0);

    m.def("chi_reconstruct", [](double u, const std::vector<double>& centers) {
        return chi_reconstruct(u, centers);
    });
    m.def(
        "chi_function_distance",
        [](const std::vector<double>& g, std::size_t rows, const std::vector<double>& centers,
           double dxi) {
            const auto r = chi_function_distance(g, rows, centers, dxi);
            py::dict d;
            d["distance"] = r.distance;
            d["states"] = r.states;
            d["is_chi_function"] = r.is_chi_function;
            return d;
        },
        py::arg("g"), py::arg("rows"), py::arg("xi_centers"), py::arg("dxi"));

    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            const Config cfg = parse_config(config_text);
            const auto res = run_experiment(cfg);
            return py::make_tuple(res.pass, res.manifest.text());
        },
        py::arg("config_text"));

    m.def("default_config", [] { return emit_config(Config{}); });
    m.attr("__version__") = "0.1.0";
}
