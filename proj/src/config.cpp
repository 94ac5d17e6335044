#include "empc/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "empc/errors.hpp"

namespace empc {

namespace {

[[noreturn]] void config_error(const std::string& name, int line, const std::string& message) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + message);
}

double parse_number(const std::string& name, int line, const std::string& key,
                    const std::string& token) {
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &used);
    } catch (const std::exception&) {
        config_error(name, line, "value '" + token + "' for '" + key + "' is not a number");
    }
    if (used != token.size()) {
        config_error(name, line, "value '" + token + "' for '" + key + "' is not a number");
    }
    return value;
}

}  // namespace

ProjectConfig default_config() { return ProjectConfig{}; }

ProjectConfig parse_config(std::istream& in, const std::string& name) {
    ProjectConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), '=', ' ');
        std::replace(line.begin(), line.end(), ',', ' ');

        std::istringstream tokens(line);
        std::string key;
        if (!(tokens >> key)) continue;

        std::vector<std::string> values;
        std::string token;
        while (tokens >> token) values.push_back(token);

        auto one_number = [&]() {
            if (values.size() != 1) {
                config_error(name, line_no, "'" + key + "' takes exactly one value");
            }
            return parse_number(name, line_no, key, values.front());
        };
        auto number_list = [&]() {
            if (values.empty()) {
                config_error(name, line_no, "'" + key + "' needs at least one value");
            }
            std::vector<double> numbers;
            for (const auto& v : values) numbers.push_back(parse_number(name, line_no, key, v));
            return numbers;
        };
        auto positive_int = [&]() {
            const double value = one_number();
            if (value < 1.0 || value != std::floor(value)) {
                config_error(name, line_no, "'" + key + "' must be a positive integer");
            }
            return static_cast<int>(value);
        };

        if (key == "km") config.motor.km = one_number();
        else if (key == "J") config.motor.J = one_number();
        else if (key == "fm") config.motor.fm = one_number();
        else if (key == "Ra") config.motor.Ra = one_number();
        else if (key == "La") config.motor.La = one_number();
        else if (key == "Ts") {
            config.Ts = one_number();
            if (!(config.Ts > 0.0)) config_error(name, line_no, "Ts must be positive");
        } else if (key == "p") config.p = positive_int();
        else if (key == "Bd") config.Bd = number_list();
        else if (key == "Cd") config.Cd = number_list();
        else if (key == "observer.poles") config.observer_poles = number_list();
        else if (key == "N") config.N = positive_int();
        else if (key == "Q") config.Q = one_number();
        else if (key == "R") config.R = one_number();
        else if (key == "u_min") config.u_min = one_number();
        else if (key == "u_max") config.u_max = one_number();
        else if (key == "pi.kp") config.pi_kp = one_number();
        else if (key == "pi.ki") config.pi_ki = one_number();
        else if (key == "pi.clamp") {
            if (values.size() != 1 ||
                (values[0] != "on" && values[0] != "off" && values[0] != "true" &&
                 values[0] != "false" && values[0] != "1" && values[0] != "0")) {
                config_error(name, line_no, "pi.clamp must be on/off");
            }
            config.pi_clamp = (values[0] == "on" || values[0] == "true" || values[0] == "1");
        } else {
            config_error(name, line_no, "unknown key '" + key + "'");
        }
    }
    return config;
}

ProjectConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    return parse_config(in, path.filename().string());
}

DesignArtifacts build_design(const ProjectConfig& config) {
    DesignArtifacts art;
    art.first_order = derive_first_order(config.motor);
    art.ct = build_ct_model(art.first_order);
    art.plant = discretize_zoh(art.ct, config.Ts);

    const int n = static_cast<int>(art.plant.A.rows());
    const int m = static_cast<int>(art.plant.C.rows());
    if (!config.Bd.empty() || !config.Cd.empty()) {
        art.disturbance.Bd = Eigen::MatrixXd::Zero(n, config.p);
        art.disturbance.Cd = Eigen::MatrixXd::Zero(m, config.p);
        if (!config.Bd.empty()) {
            if (static_cast<int>(config.Bd.size()) != n * config.p) {
                throw ConfigError("Bd needs " + std::to_string(n * config.p) +
                                  " entries (row-major n x p)");
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < config.p; ++j)
                    art.disturbance.Bd(i, j) = config.Bd[static_cast<std::size_t>(i * config.p + j)];
        }
        if (!config.Cd.empty()) {
            if (static_cast<int>(config.Cd.size()) != m * config.p) {
                throw ConfigError("Cd needs " + std::to_string(m * config.p) +
                                  " entries (row-major m x p)");
            }
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < config.p; ++j)
                    art.disturbance.Cd(i, j) = config.Cd[static_cast<std::size_t>(i * config.p + j)];
        }
    } else {
        art.disturbance = output_disturbance_model(n, m, config.p);
    }

    art.aug = augment(art.plant, art.disturbance);

    std::vector<std::complex<double>> poles;
    for (double pole : config.observer_poles) poles.emplace_back(pole, 0.0);
    const ObservabilityReport obs = check_offset_free_observability(art.aug);
    if (obs.observable && static_cast<int>(poles.size()) == art.aug.size()) {
        art.observer.gain = place_observer_poles(art.aug, poles);
        art.observer.observable_rank = obs.rank;
    } else {
        art.observer = place_observable_subspace_poles(art.aug, poles);
    }

    MpcSpec spec;
    spec.N = config.N;
    spec.Q = Eigen::MatrixXd::Constant(m, m, config.Q);
    spec.R = Eigen::MatrixXd::Constant(1, 1, config.R);
    spec.u_min = config.u_min;
    spec.u_max = config.u_max;
    art.qp = condense(art.aug, spec);
    art.law = solve_mpqp(art.qp, &art.diagnostics);
    return art;
}

LoopSetup make_loop_setup(const ProjectConfig& config, const DesignArtifacts& artifacts) {
    LoopSetup setup;
    setup.plant = artifacts.plant;
    setup.aug = artifacts.aug;
    setup.observer = artifacts.observer.gain;
    setup.law = &artifacts.law;
    setup.pi.kp = config.pi_kp;
    setup.pi.ki = config.pi_ki;
    setup.pi.Ts = config.Ts;
    setup.pi.u_min = config.u_min;
    setup.pi.u_max = config.u_max;
    setup.pi.clamp = config.pi_clamp;
    return setup;
}

}  // namespace empc
