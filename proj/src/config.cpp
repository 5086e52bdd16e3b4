#include "stoclaw/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stoclaw/util.hpp"

namespace stoclaw {

std::string experiment_name(Experiment e) {
    switch (e) {
        case Experiment::MaxPrinciple: return "max_principle";
        case Experiment::MassMartingale: return "mass_martingale";
        case Experiment::Comparison: return "comparison";
        case Experiment::Energy: return "energy";
        case Experiment::Contraction: return "contraction";
        case Experiment::ViscositySweep: return "viscosity_sweep";
        case Experiment::SymbolScan: return "symbol_scan";
        case Experiment::TraceScan: return "trace_scan";
        case Experiment::KineticBudget: return "kinetic_budget";
        case Experiment::RegularitySweep: return "regularity_sweep";
    }
    return "unknown";
}

Experiment experiment_from_name(const std::string& name) {
    for (Experiment e :
         {Experiment::MaxPrinciple, Experiment::MassMartingale, Experiment::Comparison,
          Experiment::Energy, Experiment::Contraction, Experiment::ViscositySweep,
          Experiment::SymbolScan, Experiment::TraceScan, Experiment::KineticBudget,
          Experiment::RegularitySweep}) {
        if (experiment_name(e) == name) return e;
    }
    throw std::invalid_argument("unknown experiment: " + name);
}

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double to_double(const std::string& v, int line) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw parse_error(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size()) throw parse_error(line, "trailing characters after number in '" + v + "'");
    return x;
}

long long to_int(const std::string& v, int line) {
    std::size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &pos);
    } catch (const std::exception&) {
        throw parse_error(line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw parse_error(line, "trailing characters after integer in '" + v + "'");
    return x;
}

bool to_bool(const std::string& v, int line) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw parse_error(line, "expected true/false, got '" + v + "'");
}

std::vector<double> to_double_list(const std::string& v, int line) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(to_double(item, line));
    }
    return out;
}

std::vector<int> to_int_list(const std::string& v, int line) {
    std::vector<int> out;
    for (double d : to_double_list(v, line)) {
        if (d != std::floor(d)) throw parse_error(line, "expected integers in list");
        out.push_back(static_cast<int>(d));
    }
    return out;
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    bool saw_dt = false;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (auto h = s.find('#'); h != std::string::npos) s = s.substr(0, h);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw parse_error(line, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section != "flux" && section != "noise" && section != "init" &&
                section != "solver" && section != "experiment")
                throw parse_error(line, "unknown section [" + section + "]");
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw parse_error(line, "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (section.empty()) throw parse_error(line, "key outside of a section");

        if (section == "flux") {
            if (key == "kind") {
                if (val != "example-family" && val != "polynomial")
                    throw parse_error(line, "flux kind must be example-family or polynomial");
                cfg.flux_kind = val;
            } else if (key == "exponents") {
                cfg.exponents = to_int_list(val, line);
                for (int l : cfg.exponents)
                    if (l < 1) throw parse_error(line, "exponents must be positive");
            } else if (key == "a_lo") {
                cfg.a_lo = to_double(val, line);
            } else if (key == "b_hi") {
                cfg.b_hi = to_double(val, line);
            } else if (key == "L0") {
                cfg.L0 = to_double(val, line);
            } else if (key.rfind("component_", 0) == 0) {
                const int idx = static_cast<int>(to_int(key.substr(10), line));
                if (idx < 0 || idx > 15) throw parse_error(line, "component index out of range");
                if (static_cast<int>(cfg.poly_coeffs.size()) <= idx)
                    cfg.poly_coeffs.resize(idx + 1);
                cfg.poly_coeffs[idx] = to_double_list(val, line);
            } else {
                throw parse_error(line, "unknown key '" + key + "' in [flux]");
            }
        } else if (section == "noise") {
            if (key == "K") {
                cfg.K = static_cast<int>(to_int(val, line));
                if (cfg.K < 0) throw parse_error(line, "K must be nonnegative");
            } else if (key == "alpha_scale") {
                cfg.alpha_scale = to_double(val, line);
            } else if (key == "M") {
                cfg.M = to_double(val, line);
                if (cfg.M <= 0) throw parse_error(line, "M must be positive");
            } else if (key == "profile") {
                if (val != "cosine") throw parse_error(line, "unknown noise profile '" + val + "'");
                cfg.noise_profile = val;
            } else if (key == "enabled") {
                cfg.noise_enabled = to_bool(val, line);
            } else {
                throw parse_error(line, "unknown key '" + key + "' in [noise]");
            }
        } else if (section == "init") {
            if (key == "profile") {
                if (val == "constant") cfg.init.profile = InitialData::Profile::Constant;
                else if (val == "step") cfg.init.profile = InitialData::Profile::Step;
                else if (val == "bump") cfg.init.profile = InitialData::Profile::Bump;
                else if (val == "cosine") cfg.init.profile = InitialData::Profile::Cosine;
                else throw parse_error(line, "unknown init profile '" + val + "'");
            } else if (key == "value") cfg.init.value = to_double(val, line);
            else if (key == "left") cfg.init.left = to_double(val, line);
            else if (key == "right") cfg.init.right = to_double(val, line);
            else if (key == "x0") cfg.init.x0 = to_double(val, line);
            else if (key == "base") cfg.init.base = to_double(val, line);
            else if (key == "amp") cfg.init.amp = to_double(val, line);
            else if (key == "center") cfg.init.center = to_double(val, line);
            else if (key == "width") cfg.init.width = to_double(val, line);
            else if (key == "mode") cfg.init.mode = static_cast<int>(to_int(val, line));
            else throw parse_error(line, "unknown key '" + key + "' in [init]");
        } else if (section == "solver") {
            if (key == "eps") {
                cfg.solver.eps = to_double(val, line);
                if (cfg.solver.eps <= 0) throw parse_error(line, "eps must be positive");
            } else if (key == "dt") {
                cfg.solver.dt = to_double(val, line);
                saw_dt = true;
            } else if (key == "auto_cfl") {
                cfg.solver.auto_cfl = to_bool(val, line);
            } else if (key == "T") {
                cfg.solver.T = to_double(val, line);
                if (cfg.solver.T <= 0) throw parse_error(line, "T must be positive");
            } else if (key == "cfl_safety") {
                cfg.solver.cfl_safety = to_double(val, line);
                if (cfg.solver.cfl_safety <= 0 || cfg.solver.cfl_safety > 1)
                    throw parse_error(line, "cfl_safety must be in (0, 1]");
            } else if (key == "backend") {
                if (val == "finite-volume") cfg.solver.backend = Backend::FiniteVolume;
                else if (val == "mild") cfg.solver.backend = Backend::Mild;
                else throw parse_error(line, "backend must be finite-volume or mild");
            } else if (key == "flux_scheme") {
                if (val == "engquist-osher") cfg.solver.scheme = FluxScheme::EngquistOsher;
                else if (val == "lax-friedrichs") cfg.solver.scheme = FluxScheme::LaxFriedrichs;
                else throw parse_error(line, "flux_scheme must be engquist-osher or lax-friedrichs");
            } else if (key == "clip_to_bounds") {
                cfg.solver.clip_to_bounds = to_bool(val, line);
            } else if (key == "n_cells") {
                cfg.solver.n_cells = static_cast<int>(to_int(val, line));
                if (cfg.solver.n_cells < 8) throw parse_error(line, "n_cells must be >= 8");
            } else {
                throw parse_error(line, "unknown key '" + key + "' in [solver]");
            }
        } else if (section == "experiment") {
            if (key == "name") cfg.experiment = experiment_from_name(val);
            else if (key == "replicas") {
                cfg.replicas = static_cast<int>(to_int(val, line));
                if (cfg.replicas < 1) throw parse_error(line, "replicas must be >= 1");
            } else if (key == "seed") {
                cfg.seed = static_cast<std::uint64_t>(to_int(val, line));
            } else if (key == "threads") {
                cfg.threads = static_cast<int>(to_int(val, line));
                if (cfg.threads < 1) throw parse_error(line, "threads must be >= 1");
            } else if (key == "eps_list") {
                cfg.eps_list = to_double_list(val, line);
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else if (key == "delta_min") {
                cfg.delta_min = to_double(val, line);
            } else if (key == "delta_max") {
                cfg.delta_max = to_double(val, line);
            } else if (key == "delta_points") {
                cfg.delta_points = static_cast<int>(to_int(val, line));
            } else {
                throw parse_error(line, "unknown key '" + key + "' in [experiment]");
            }
        }
    }
    if (saw_dt && cfg.solver.dt > 0.0) cfg.solver.auto_cfl = false;
    return cfg;
}

std::string emit_config(const Config& cfg) {
    std::ostringstream os;
    os << "[flux]\n";
    os << "kind = " << cfg.flux_kind << "\n";
    if (cfg.flux_kind == "example-family") {
        os << "exponents = ";
        for (std::size_t i = 0; i < cfg.exponents.size(); ++i)
            os << (i ? ", " : "") << cfg.exponents[i];
        os << "\n";
    } else {
        for (std::size_t c = 0; c < cfg.poly_coeffs.size(); ++c) {
            os << "component_" << c << " = ";
            for (std::size_t i = 0; i < cfg.poly_coeffs[c].size(); ++i)
                os << (i ? ", " : "") << format_double(cfg.poly_coeffs[c][i]);
            os << "\n";
        }
    }
    os << "a_lo = " << format_double(cfg.a_lo) << "\n";
    os << "b_hi = " << format_double(cfg.b_hi) << "\n";
    os << "L0 = " << format_double(cfg.L0) << "\n";
    os << "\n[noise]\n";
    os << "K = " << cfg.K << "\n";
    os << "alpha_scale = " << format_double(cfg.alpha_scale) << "\n";
    os << "M = " << format_double(cfg.M) << "\n";
    os << "profile = " << cfg.noise_profile << "\n";
    os << "enabled = " << (cfg.noise_enabled ? "true" : "false") << "\n";
    os << "\n[init]\n";
    switch (cfg.init.profile) {
        case InitialData::Profile::Constant:
            os << "profile = constant\n";
            os << "value = " << format_double(cfg.init.value) << "\n";
            break;
        case InitialData::Profile::Step:
            os << "profile = step\n";
            os << "left = " << format_double(cfg.init.left) << "\n";
            os << "right = " << format_double(cfg.init.right) << "\n";
            os << "x0 = " << format_double(cfg.init.x0) << "\n";
            break;
        case InitialData::Profile::Bump:
            os << "profile = bump\n";
            os << "base = " << format_double(cfg.init.base) << "\n";
            os << "amp = " << format_double(cfg.init.amp) << "\n";
            os << "center = " << format_double(cfg.init.center) << "\n";
            os << "width = " << format_double(cfg.init.width) << "\n";
            break;
        case InitialData::Profile::Cosine:
            os << "profile = cosine\n";
            os << "base = " << format_double(cfg.init.base) << "\n";
            os << "amp = " << format_double(cfg.init.amp) << "\n";
            os << "mode = " << cfg.init.mode << "\n";
            break;
        case InitialData::Profile::Tabulated:
            throw std::invalid_argument("emit_config: tabulated profiles are not serializable");
    }
    os << "\n[solver]\n";
    os << "eps = " << format_double(cfg.solver.eps) << "\n";
    if (!cfg.solver.auto_cfl) os << "dt = " << format_double(cfg.solver.dt) << "\n";
    os << "auto_cfl = " << (cfg.solver.auto_cfl ? "true" : "false") << "\n";
    os << "T = " << format_double(cfg.solver.T) << "\n";
    os << "cfl_safety = " << format_double(cfg.solver.cfl_safety) << "\n";
    os << "backend = "
       << (cfg.solver.backend == Backend::FiniteVolume ? "finite-volume" : "mild") << "\n";
    os << "flux_scheme = "
       << (cfg.solver.scheme == FluxScheme::EngquistOsher ? "engquist-osher" : "lax-friedrichs")
       << "\n";
    os << "clip_to_bounds = " << (cfg.solver.clip_to_bounds ? "true" : "false") << "\n";
    os << "n_cells = " << cfg.solver.n_cells << "\n";
    os << "\n[experiment]\n";
    os << "name = " << experiment_name(cfg.experiment) << "\n";
    os << "replicas = " << cfg.replicas << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "threads = " << cfg.threads << "\n";
    if (!cfg.eps_list.empty()) {
        os << "eps_list = ";
        for (std::size_t i = 0; i < cfg.eps_list.size(); ++i)
            os << (i ? ", " : "") << format_double(cfg.eps_list[i]);
        os << "\n";
    }
    os << "out_dir = " << cfg.out_dir << "\n";
    if (cfg.experiment == Experiment::SymbolScan) {
        os << "delta_min = " << format_double(cfg.delta_min) << "\n";
        os << "delta_max = " << format_double(cfg.delta_max) << "\n";
        os << "delta_points = " << cfg.delta_points << "\n";
    }
    return os.str();
}

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

FluxModel Config::make_flux() const {
    if (flux_kind == "polynomial") {
        std::vector<Polynomial> comps;
        for (const auto& c : poly_coeffs) comps.emplace_back(c);
        if (comps.empty()) throw std::invalid_argument("polynomial flux without components");
        return FluxModel::polynomial(std::move(comps), a_lo, b_hi, L0);
    }
    return FluxModel::example_family(exponents, a_lo, b_hi, L0);
}

NoiseModel Config::make_noise() const {
    if (!noise_enabled || K == 0) return NoiseModel::silent();
    return NoiseModel(K, alpha_scale, M);
}

}  // namespace stoclaw
