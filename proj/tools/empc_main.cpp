// Command-line front end: offline design, closed-loop simulation, a TCP
// frame server for co-simulation peers, and artifact inspection.

#include <arpa/inet.h>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <CLI11.hpp>

#include "empc/config.hpp"
#include "empc/errors.hpp"
#include "empc/pwa.hpp"
#include "empc/server.hpp"
#include "empc/sim.hpp"
#include "empc/wire.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

void print_footprint(std::ostream& out, const empc::LawTables& tables) {
    for (int width : {4, 8}) {
        const empc::Footprint fp = empc::memory_footprint(tables, width);
        out << "  table bytes @" << width << "-byte scalars: " << fp.total() << "  (header "
            << fp.header_bytes << ", counters " << fp.counter_bytes << ", partition "
            << fp.partition_bytes << ", gains " << fp.gain_bytes << ")\n";
    }
    out << "  worst-case search cost: " << empc::worst_case_ops(tables)
        << " half-space products of dimension " << tables.dim << "\n"
        << "  code allowance (evaluator + framing, not counted above): ~4096 bytes\n";
}

void write_design_report(std::ostream& out, const empc::ProjectConfig& config,
                         const empc::DesignArtifacts& art, const empc::ValidationReport& val,
                         const empc::LawTables& tables) {
    out << "first-order model: K=" << art.first_order.K << " rad/s/V, tau="
        << art.first_order.tau << " s, f=" << art.first_order.f << "\n";
    out << "discrete plant (Ts=" << config.Ts << " s): A(1,1)=" << art.plant.A(1, 1)
        << ", B(1)=" << art.plant.B(1, 0) << "\n";
    out << "observer: rank " << art.observer.observable_rank << " of " << art.aug.size()
        << " assigned";
    if (!art.observer.residual_modes.empty()) {
        out << "; residual modes:";
        for (const auto& mode : art.observer.residual_modes) out << " " << mode.real();
    }
    out << "\n";
    out << "horizon N=" << config.N << ", weights Q=" << config.Q << " R=" << config.R
        << ", input box [" << config.u_min << ", " << config.u_max << "] V\n";
    out << "regions: " << art.law.regions.size() << " (candidates " << art.diagnostics.candidates
        << ", rank-deficient " << art.diagnostics.rank_deficient << ", singular dual "
        << art.diagnostics.singular_dual << ", empty/thin " << art.diagnostics.empty_or_thin
        << ")\n";
    out << "half-spaces per region:";
    for (const auto& region : art.law.regions) out << " " << region.region.rows();
    out << "\n";
    out << "validation: " << val.samples << " samples, coverage " << val.coverage
        << ", max |explicit - online| = " << val.max_deviation << "\n";
    print_footprint(out, tables);
}

void write_metrics(std::ostream& out, const empc::Metrics& metrics) {
    out << "ise " << metrics.ise << "\n"
        << "iae " << metrics.iae << "\n"
        << "steady_state_error " << metrics.steady_state_error << "\n"
        << "overshoot_pct " << metrics.overshoot_pct << "\n"
        << "settling_max " << metrics.settling_max << "\n";
    for (const auto& step : metrics.steps) {
        out << "step t=" << step.t_event << " magnitude=" << step.magnitude << " settling="
            << step.settling << " overshoot_pct=" << step.overshoot_pct << "\n";
    }
}

int run_serve(const std::string& law_path, const std::string& host, int port) {
    const empc::LawTables tables = empc::read_tables(law_path);
    empc::FrameServer server(tables);

    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) {
        std::perror("socket");
        return 1;
    }
    const int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        std::cerr << "invalid host address " << host << "\n";
        ::close(listener);
        return 1;
    }
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
        ::listen(listener, 1) < 0) {
        std::perror("bind/listen");
        ::close(listener);
        return 1;
    }
    // sigaction without SA_RESTART, so a signal interrupts accept()/recv()
    // with EINTR and the loop can observe g_stop; std::signal on Linux would
    // restart the calls and the process could only be killed, never stopped.
    struct sigaction sa {};
    sa.sa_handler = handle_signal;
    ::sigemptyset(&sa.sa_mask);
    sa.sa_flags = 0;
    ::sigaction(SIGINT, &sa, nullptr);
    ::sigaction(SIGTERM, &sa, nullptr);
    std::cout << "serving " << law_path << " on " << host << ":" << port << std::endl;

    while (!g_stop) {
        const int client = ::accept(listener, nullptr, nullptr);
        if (client < 0) {
            if (errno == EINTR) continue;
            std::perror("accept");
            break;
        }
        std::uint8_t buf[512];
        for (;;) {
            const ssize_t got = ::recv(client, buf, sizeof(buf), 0);
            if (got <= 0) break;
            const auto responses =
                server.feed(std::span<const std::uint8_t>(buf, static_cast<std::size_t>(got)));
            std::size_t sent = 0;
            while (sent < responses.size()) {
                const ssize_t wrote =
                    ::send(client, responses.data() + sent, responses.size() - sent, 0);
                if (wrote <= 0) break;
                sent += static_cast<std::size_t>(wrote);
            }
        }
        ::close(client);
        std::cout << "client disconnected: " << server.requests_served() << " frames served, "
                  << server.requests_failed() << " failed, " << server.resyncs() << " resyncs"
                  << std::endl;
    }
    ::close(listener);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"offset-free explicit MPC toolchain for DC-motor speed control"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scenario_path;
    std::string law_path;
    std::string out_dir = ".";
    std::string controller = "empc";
    std::string host = "127.0.0.1";
    int scalar_width = 8;
    int samples = 1000;
    unsigned seed = 1;
    int port = 0;
    bool protocol = false;

    auto* design = app.add_subcommand("design", "synthesize the explicit law and export it");
    design->add_option("--config", config_path, "configuration file (defaults apply if omitted)");
    design->add_option("--out", out_dir, "output directory");
    design->add_option("--scalar-width", scalar_width, "bytes per exported scalar (4 or 8)")
        ->check(CLI::IsMember({4, 8}));
    design->add_option("--samples", samples, "validation sample count");
    design->add_option("--seed", seed, "validation sampling seed");

    auto* simulate = app.add_subcommand("simulate", "run the closed loop over a scenario");
    simulate->add_option("--config", config_path, "configuration file");
    simulate->add_option("--scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--controller", controller, "empc or pi")
        ->check(CLI::IsMember({"empc", "pi"}));
    simulate->add_option("--law", law_path, "law artifact (required for --controller empc)");
    simulate->add_option("--out", out_dir, "output directory for trace.csv and metrics.txt");
    simulate->add_flag("--protocol", protocol, "route every control exchange through the wire frames");

    auto* serve = app.add_subcommand("serve", "answer request frames over TCP");
    serve->add_option("--law", law_path, "law artifact")->required();
    serve->add_option("--port", port, "TCP port")->required();
    serve->add_option("--host", host, "listen address");

    auto* report = app.add_subcommand("report", "inspect a law artifact");
    report->add_option("--law", law_path, "law artifact")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) {
            const empc::ProjectConfig config =
                config_path.empty() ? empc::default_config() : empc::load_config(config_path);
            const empc::DesignArtifacts art = empc::build_design(config);
            const empc::ValidationReport val = empc::validate_law(
                art.law, art.qp, samples,
                empc::default_param_box(art.law.layout, config.u_min, config.u_max), seed);
            const empc::LawTables tables = empc::make_tables(art.law, scalar_width);

            std::filesystem::create_directories(out_dir);
            const auto base = std::filesystem::path(out_dir);
            empc::write_tables(tables, base / "law.bin");
            {
                std::ofstream src(base / "law_tables.h");
                empc::write_static_source(tables, src);
            }
            {
                std::ofstream rep(base / "design_report.txt");
                write_design_report(rep, config, art, val, tables);
            }
            write_design_report(std::cout, config, art, val, tables);

            if (val.uncovered > 0 || val.max_deviation > 1e-6) {
                std::cerr << "design validation FAILED (coverage " << val.coverage
                          << ", max deviation " << val.max_deviation << ")\n";
                return 1;
            }
            return 0;
        }

        if (simulate->parsed()) {
            const empc::ProjectConfig config =
                config_path.empty() ? empc::default_config() : empc::load_config(config_path);
            empc::Scenario scenario = empc::load_scenario(scenario_path);
            if (protocol) scenario.protocol_in_loop = true;

            const empc::DesignArtifacts art = empc::build_design(config);
            empc::LoopSetup setup = empc::make_loop_setup(config, art);

            empc::PwaLaw loaded;
            if (controller == "empc") {
                if (law_path.empty()) {
                    std::cerr << "simulate --controller empc needs --law (run design first)\n";
                    return 1;
                }
                const empc::LawTables tables = empc::read_tables(law_path);
                loaded = empc::law_from_tables(tables, art.law.layout, art.law.horizon,
                                               config.u_min, config.u_max);
                setup.law = &loaded;
            }

            const empc::ControllerKind kind = (controller == "empc")
                                                  ? empc::ControllerKind::ExplicitMpc
                                                  : empc::ControllerKind::Pi;
            const empc::Trace trace = empc::run_closed_loop(scenario, setup, kind);
            const empc::Metrics metrics = empc::compute_metrics(trace);

            std::filesystem::create_directories(out_dir);
            const auto base = std::filesystem::path(out_dir);
            {
                std::ofstream csv(base / "trace.csv");
                empc::write_csv(trace, csv);
            }
            {
                std::ofstream met(base / "metrics.txt");
                write_metrics(met, metrics);
            }
            write_metrics(std::cout, metrics);
            if (trace.max_law_excess > 1e-9) {
                std::cerr << "law left the input box by " << trace.max_law_excess << " V\n";
                return 2;
            }
            return 0;
        }

        if (serve->parsed()) {
            return run_serve(law_path, host, port);
        }

        if (report->parsed()) {
            const empc::LawTables tables = empc::read_tables(law_path);
            std::cout << "regions: " << tables.M << "\n"
                      << "parameter dimension: " << tables.dim << "\n"
                      << "outputs per region: " << tables.l << "\n"
                      << "stored scalar width: " << tables.scalar_width << " bytes\n"
                      << "half-spaces per region:";
            for (std::uint32_t h : tables.halfspace_counts) std::cout << " " << h;
            std::cout << "\n";
            print_footprint(std::cout, tables);
            return 0;
        }
    } catch (const empc::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    }
    return 0;
}
