#include "empc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "empc/errors.hpp"
#include "empc/pwa.hpp"
#include "empc/server.hpp"
#include "empc/wire.hpp"

namespace empc {

namespace {

double uniform_pm(std::mt19937& rng, double amplitude) {
    const double u01 = static_cast<double>(rng()) * (1.0 / 4294967296.0);
    return amplitude * (2.0 * u01 - 1.0);
}

[[noreturn]] void scenario_error(const std::string& name, int line, const std::string& message) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + message);
}

}  // namespace

double Scenario::reference_at(double t) const {
    double value = 0.0;
    for (const auto& step : reference) {
        if (step.t <= t + 1e-12) value = step.value;
        else break;
    }
    return value;
}

Scenario parse_scenario(std::istream& in, const std::string& name) {
    Scenario scenario;
    scenario.duration = 0.0;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream tokens(line);
        std::string key;
        if (!(tokens >> key)) continue;

        auto want_numbers = [&](std::initializer_list<double*> out) {
            for (double* slot : out) {
                if (!(tokens >> *slot)) {
                    scenario_error(name, line_no, "expected a number after '" + key + "'");
                }
            }
            std::string extra;
            if (tokens >> extra) {
                scenario_error(name, line_no, "unexpected trailing token '" + extra + "'");
            }
        };

        if (key == "duration") {
            want_numbers({&scenario.duration});
            if (!(scenario.duration > 0.0)) {
                scenario_error(name, line_no, "duration must be positive");
            }
        } else if (key == "Ts") {
            want_numbers({&scenario.Ts});
            if (!(scenario.Ts > 0.0)) scenario_error(name, line_no, "Ts must be positive");
        } else if (key == "ref") {
            ReferenceStep step;
            want_numbers({&step.t, &step.value});
            if (step.t < 0.0) scenario_error(name, line_no, "reference time must be >= 0");
            scenario.reference.push_back(step);
        } else if (key == "dist") {
            DisturbanceEvent ev;
            want_numbers({&ev.t0, &ev.t1, &ev.amplitude});
            if (!(ev.t0 >= 0.0 && ev.t1 > ev.t0)) {
                scenario_error(name, line_no, "disturbance window must satisfy 0 <= t0 < t1");
            }
            scenario.disturbances.push_back(ev);
        } else if (key == "noise") {
            NoiseEvent ev;
            double seed = 0.0;
            want_numbers({&ev.t0, &ev.t1, &ev.amplitude, &seed});
            if (!(ev.t0 >= 0.0 && ev.t1 > ev.t0)) {
                scenario_error(name, line_no, "noise window must satisfy 0 <= t0 < t1");
            }
            if (!(ev.amplitude >= 0.0)) {
                scenario_error(name, line_no, "noise amplitude must be >= 0");
            }
            if (seed < 0.0 || seed != std::floor(seed) || seed > 4294967295.0) {
                scenario_error(name, line_no, "noise seed must be an unsigned 32-bit integer");
            }
            ev.seed = static_cast<std::uint32_t>(seed);
            scenario.noise.push_back(ev);
        } else if (key == "protocol") {
            std::string value;
            if (!(tokens >> value) || (value != "on" && value != "off")) {
                scenario_error(name, line_no, "protocol must be 'on' or 'off'");
            }
            scenario.protocol_in_loop = (value == "on");
        } else if (key == "baud") {
            want_numbers({&scenario.baud});
            if (!(scenario.baud > 0.0)) scenario_error(name, line_no, "baud must be positive");
        } else {
            scenario_error(name, line_no, "unknown scenario key '" + key + "'");
        }
    }

    if (!(scenario.duration > 0.0)) {
        throw ConfigError(name + ": scenario needs a positive 'duration'");
    }
    for (const auto& step : scenario.reference) {
        if (step.t > scenario.duration) {
            throw ConfigError(name + ": reference step at t=" + std::to_string(step.t) +
                              " lies beyond the duration");
        }
    }
    for (const auto& ev : scenario.disturbances) {
        if (ev.t1 > scenario.duration + 1e-12) {
            throw ConfigError(name + ": disturbance window ends beyond the duration");
        }
    }
    for (const auto& ev : scenario.noise) {
        if (ev.t1 > scenario.duration + 1e-12) {
            throw ConfigError(name + ": noise window ends beyond the duration");
        }
    }
    std::stable_sort(scenario.reference.begin(), scenario.reference.end(),
                     [](const ReferenceStep& a, const ReferenceStep& b) { return a.t < b.t; });
    return scenario;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file " + path.string());
    }
    return parse_scenario(in, path.filename().string());
}

const Sample& sample_at(const Trace& trace, double t) {
    if (trace.samples.empty()) throw Error("sample_at: empty trace");
    const auto k = static_cast<std::size_t>(
        std::clamp<long long>(std::llround(t / trace.Ts), 0,
                              static_cast<long long>(trace.samples.size()) - 1));
    return trace.samples[k];
}

void write_csv(const Trace& trace, std::ostream& out) {
    const Eigen::Index nx = trace.samples.empty() ? 0 : trace.samples.front().x.size();
    const Eigen::Index ne = trace.samples.empty() ? 0 : trace.samples.front().xe_hat.size();
    out << "t,r,y,u,region,saturated";
    for (Eigen::Index i = 0; i < nx; ++i) out << ",x" << i;
    for (Eigen::Index i = 0; i < ne; ++i) out << ",xe" << i;
    out << "\n";
    char buf[32];
    auto emit = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.10g", v);
        out << buf;
    };
    for (const auto& s : trace.samples) {
        emit(s.t); out << ',';
        emit(s.r); out << ',';
        emit(s.y); out << ',';
        emit(s.u); out << ',';
        out << s.region << ',' << (s.saturated ? 1 : 0);
        for (Eigen::Index i = 0; i < nx; ++i) { out << ','; emit(s.x(i)); }
        for (Eigen::Index i = 0; i < ne; ++i) { out << ','; emit(s.xe_hat(i)); }
        out << "\n";
    }
}

Trace run_closed_loop(const Scenario& scenario, const LoopSetup& setup, ControllerKind kind) {
    const Eigen::Index n = setup.plant.A.rows();
    const Eigen::Index l = setup.plant.B.cols();
    const Eigen::Index m = setup.plant.C.rows();
    if (l != 1 || m != 1) {
        throw InvalidParameter("run_closed_loop: the harness drives a single-input "
                               "single-output plant");
    }
    if (setup.plant.D.cwiseAbs().maxCoeff() != 0.0) {
        throw ConfigError("run_closed_loop: the measurement is taken before the input is "
                          "computed, which requires D == 0");
    }
    if (std::abs(setup.plant.Ts - scenario.Ts) > 1e-12 ||
        std::abs(setup.aug.Ts - scenario.Ts) > 1e-12) {
        throw ConfigError("run_closed_loop: scenario Ts does not match the model Ts");
    }

    const bool use_mpc = (kind == ControllerKind::ExplicitMpc);
    double u_min = setup.pi.u_min;
    double u_max = setup.pi.u_max;
    if (use_mpc) {
        if (!setup.law) {
            throw InvalidParameter("run_closed_loop: an explicit-MPC run needs a law");
        }
        const int expected_dim = setup.aug.size() + static_cast<int>(l) + static_cast<int>(m);
        if (setup.law->dim != expected_dim) {
            throw ConfigError("run_closed_loop: law parameter dimension " +
                              std::to_string(setup.law->dim) + " does not match the model (" +
                              std::to_string(expected_dim) + ")");
        }
        u_min = setup.law->u_min;
        u_max = setup.law->u_max;
    }
    if (scenario.protocol_in_loop) {
        if (!use_mpc) {
            throw ConfigError("run_closed_loop: protocol-in-loop is defined for the "
                              "explicit MPC controller");
        }
        const double turnaround =
            frame_time(scenario.baud, request_bits() + response_bits());
        if (turnaround > 0.8 * scenario.Ts) {
            throw ConfigError("run_closed_loop: request+response take " +
                              std::to_string(turnaround * 1e3) + " ms on the wire, which does "
                              "not fit the " + std::to_string(scenario.Ts * 1e3) +
                              " ms sample period with margin; use Ts >= 5 ms at 115200 baud");
        }
        frame_to_parameter(RequestFrame{}, setup.law->dim);  // reject unsupported layouts early
    }

    const auto steps = static_cast<std::size_t>(std::llround(scenario.duration / scenario.Ts));
    std::vector<std::optional<std::mt19937>> noise_rngs(scenario.noise.size());

    Trace trace;
    trace.Ts = scenario.Ts;
    trace.samples.reserve(steps);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    ObserverState est = make_observer_state(setup.aug);
    PiState pi_state;
    double u_prev = 0.0;

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * scenario.Ts;
        const double r = scenario.reference_at(t);

        double d = 0.0;
        for (const auto& ev : scenario.disturbances) {
            if (t >= ev.t0 - 1e-12 && t < ev.t1 - 1e-12) d += ev.amplitude;
        }
        double noise = 0.0;
        for (std::size_t i = 0; i < scenario.noise.size(); ++i) {
            const auto& ev = scenario.noise[i];
            if (t >= ev.t0 - 1e-12 && t < ev.t1 - 1e-12) {
                if (!noise_rngs[i]) noise_rngs[i].emplace(ev.seed);
                noise += uniform_pm(*noise_rngs[i], ev.amplitude);
            }
        }

        const double y = (setup.plant.C * x)(0) + noise;

        Sample sample;
        sample.t = t;
        sample.r = r;
        sample.y = y;
        sample.x = x;
        sample.xe_hat = est.xe_hat;

        double u = 0.0;
        if (use_mpc) {
            double u_law;
            if (scenario.protocol_in_loop) {
                RequestFrame frame;
                frame.position = est.xe_hat(0);
                if (setup.law->dim == 5) {
                    frame.speed = y;  // informational; the 5-dim law reads the estimate
                    frame.speed_est = est.xe_hat(1);
                    frame.dist_est = est.xe_hat(2);
                } else {
                    frame.speed = est.xe_hat(1);
                    frame.speed_est = est.xe_hat(2);
                    frame.dist_est = est.xe_hat(3);
                }
                frame.u_prev = u_prev;
                frame.ref = r;
                const auto request = encode_request(frame);
                const RequestFrame decoded = decode_request(request);
                const Eigen::VectorXd xq = frame_to_parameter(decoded, setup.law->dim);
                SearchResult hit;
                try {
                    hit = sequential_search(*setup.law, xq);
                } catch (const NoRegionFound& e) {
                    throw NoRegionFound("t=" + std::to_string(t) + ": " + e.what(),
                                        e.nearest_region, e.violation);
                }
                const auto response = encode_response(std::clamp(hit.u(0), u_min, u_max));
                u_law = decode_response(response);
                sample.region = hit.region;
                trace.max_law_excess =
                    std::max(trace.max_law_excess,
                             std::max(hit.u(0) - u_max, u_min - hit.u(0)));
            } else {
                Eigen::VectorXd param(setup.law->dim);
                param << est.xe_hat, u_prev, r;
                SearchResult hit;
                try {
                    hit = sequential_search(*setup.law, param);
                } catch (const NoRegionFound& e) {
                    throw NoRegionFound("t=" + std::to_string(t) + ": " + e.what(),
                                        e.nearest_region, e.violation);
                }
                u_law = hit.u(0);
                sample.region = hit.region;
                trace.max_law_excess =
                    std::max(trace.max_law_excess, std::max(u_law - u_max, u_min - u_law));
            }
            u = std::clamp(u_law, u_min, u_max);
            sample.saturated = (u_max - u <= 1e-9) || (u - u_min <= 1e-9);
        } else {
            const PiOutput out = pi_step(setup.pi, pi_state, r - y);
            pi_state = out.state;
            u = out.u;
            sample.saturated = out.saturated;
        }

        sample.u = u;
        trace.samples.push_back(std::move(sample));

        const PlantStep advanced = plant_step(setup.plant, x, u, d, 0.0);
        Eigen::VectorXd uv(1), yv(1);
        uv << u;
        yv << y;
        est = observer_step(setup.observer, setup.aug, est, uv, yv);
        x = advanced.x_next;
        u_prev = u;
    }
    return trace;
}

Metrics compute_metrics(const Trace& trace) {
    Metrics metrics;
    if (trace.samples.empty()) return metrics;

    for (const auto& s : trace.samples) {
        const double e = s.r - s.y;
        metrics.ise += e * e * trace.Ts;
        metrics.iae += std::abs(e) * trace.Ts;
    }
    metrics.steady_state_error =
        std::abs(trace.samples.back().r - trace.samples.back().y);

    // Reference-change events; each owns the window up to the next event.
    std::vector<std::size_t> events;
    if (std::abs(trace.samples.front().r - trace.samples.front().y) > 1e-9) {
        events.push_back(0);
    }
    for (std::size_t k = 1; k < trace.samples.size(); ++k) {
        if (trace.samples[k].r != trace.samples[k - 1].r) events.push_back(k);
    }

    for (std::size_t e = 0; e < events.size(); ++e) {
        const std::size_t begin = events[e];
        const std::size_t end =
            (e + 1 < events.size()) ? events[e + 1] : trace.samples.size();
        const double r_new = trace.samples[begin].r;
        const double magnitude = std::abs(r_new - trace.samples[begin].y);
        if (magnitude < 1e-9) continue;

        StepMetric step;
        step.t_event = trace.samples[begin].t;
        step.magnitude = magnitude;
        const double band = std::max(0.02 * magnitude, 1e-6);

        // Settling: first sample after which the error stays inside the band.
        std::size_t settle_idx = end;
        for (std::size_t k = end; k-- > begin;) {
            if (std::abs(trace.samples[k].r - trace.samples[k].y) > band) {
                settle_idx = k + 1;
                break;
            }
            settle_idx = k;
        }
        if (settle_idx < end) {
            step.settled = true;
            step.settling = trace.samples[settle_idx].t - step.t_event;
        }

        const bool upward = r_new > trace.samples[begin].y;
        double worst = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
            const double over =
                upward ? trace.samples[k].y - r_new : r_new - trace.samples[k].y;
            worst = std::max(worst, over);
        }
        step.overshoot_pct = 100.0 * worst / magnitude;

        metrics.overshoot_pct = std::max(metrics.overshoot_pct, step.overshoot_pct);
        metrics.settling_max = std::max(metrics.settling_max, step.settling);
        metrics.steps.push_back(step);
    }
    return metrics;
}

Comparison compare_controllers(const Scenario& scenario, const LoopSetup& setup) {
    Comparison cmp;
    cmp.mpc_trace = run_closed_loop(scenario, setup, ControllerKind::ExplicitMpc);
    cmp.pi_trace = run_closed_loop(scenario, setup, ControllerKind::Pi);
    cmp.mpc = compute_metrics(cmp.mpc_trace);
    cmp.pi = compute_metrics(cmp.pi_trace);
    return cmp;
}

}  // namespace empc
