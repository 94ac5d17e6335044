#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <arpa/inet.h>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <netinet/in.h>
#include <sstream>
#include <string>
#include <sys/socket.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "empc/pwa.hpp"
#include "empc/wire.hpp"

namespace {

const std::string kCli = EMPC_CLI_PATH;
const std::string kConfigDir = EMPC_CONFIG_DIR;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("empc_cli_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

struct RunResult {
    int exit_code = -1;
    std::string output;
};

/// Runs the CLI with stdout+stderr captured; shell-safe inputs only.
RunResult run_cli(const std::string& args, const std::filesystem::path& capture) {
    const std::string cmd = kCli + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

int count_lines(const std::filesystem::path& file) {
    std::ifstream in(file);
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    return lines;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("design, report, simulate round trip") {
        TempDir tmp;
        const auto capture = tmp.path / "out.txt";

        // Offline synthesis from the shipped default configuration.
        const RunResult design = run_cli(
            "design --config " + kConfigDir + "/default.cfg --out " + tmp.path.string(),
            capture);
        INFO(design.output);
        REQUIRE(design.exit_code == 0);
        CHECK(design.output.find("regions: 5") != std::string::npos);
        CHECK(std::filesystem::exists(tmp.path / "law.bin"));
        CHECK(std::filesystem::exists(tmp.path / "law_tables.h"));
        CHECK(std::filesystem::exists(tmp.path / "design_report.txt"));

        // The artifact loads and has the frozen shape.
        const empc::LawTables tables = empc::read_tables(tmp.path / "law.bin");
        CHECK(tables.M == 5);
        CHECK(tables.dim == 5);

        const RunResult report =
            run_cli("report --law " + (tmp.path / "law.bin").string(), capture);
        REQUIRE(report.exit_code == 0);
        CHECK(report.output.find("regions: 5") != std::string::npos);
        CHECK(report.output.find("parameter dimension: 5") != std::string::npos);

        // Closed-loop run producing a trace and a metrics file.
        const RunResult simulate = run_cli(
            "simulate --config " + kConfigDir + "/default.cfg --scenario " + kConfigDir +
                "/tracking.scn --controller empc --law " + (tmp.path / "law.bin").string() +
                " --out " + tmp.path.string(),
            capture);
        INFO(simulate.output);
        REQUIRE(simulate.exit_code == 0);
        CHECK(std::filesystem::exists(tmp.path / "trace.csv"));
        CHECK(std::filesystem::exists(tmp.path / "metrics.txt"));
        CHECK(count_lines(tmp.path / "trace.csv") == 4001);  // header + 4 s at 1 kHz

        std::ifstream metrics(tmp.path / "metrics.txt");
        std::stringstream buf;
        buf << metrics.rdbuf();
        CHECK(buf.str().find("ise") != std::string::npos);

        // The PI baseline needs no law artifact.
        const RunResult pi = run_cli(
            "simulate --config " + kConfigDir + "/default.cfg --scenario " + kConfigDir +
                "/tracking.scn --controller pi --out " + tmp.path.string(),
            capture);
        REQUIRE(pi.exit_code == 0);
    }

    TEST_CASE("failure modes exit nonzero with a diagnostic") {
        TempDir tmp;
        const auto capture = tmp.path / "out.txt";

        const RunResult no_law = run_cli(
            "simulate --config " + kConfigDir + "/default.cfg --scenario " + kConfigDir +
                "/tracking.scn --controller empc --out " + tmp.path.string(),
            capture);
        CHECK(no_law.exit_code != 0);

        const RunResult bad_scn = run_cli(
            "simulate --config " + kConfigDir + "/default.cfg --scenario /no/such.scn" +
                " --controller pi --out " + tmp.path.string(),
            capture);
        CHECK(bad_scn.exit_code != 0);

        const auto junk = tmp.path / "junk.bin";
        std::ofstream(junk) << "this is not a law";
        const RunResult corrupt = run_cli("report --law " + junk.string(), capture);
        CHECK(corrupt.exit_code != 0);
        CHECK(corrupt.output.find("error") != std::string::npos);
    }

    TEST_CASE("serve answers framed requests over TCP") {
        TempDir tmp;
        const auto capture = tmp.path / "out.txt";
        REQUIRE(run_cli("design --config " + kConfigDir + "/default.cfg --out " +
                            tmp.path.string(),
                        capture)
                    .exit_code == 0);

        const int port = 40000 + (::getpid() % 20000);
        const pid_t child = ::fork();
        REQUIRE(child >= 0);
        if (child == 0) {
            // Server process; stdout silenced.
            if (!::freopen("/dev/null", "w", stdout) ||
                !::freopen("/dev/null", "w", stderr)) {
                ::_exit(126);
            }
            ::execl(kCli.c_str(), kCli.c_str(), "serve", "--law",
                    (tmp.path / "law.bin").c_str(), "--port", std::to_string(port).c_str(),
                    (char*)nullptr);
            ::_exit(127);
        }

        // Connect with retries while the server starts up.
        int fd = -1;
        for (int attempt = 0; attempt < 50; ++attempt) {
            fd = ::socket(AF_INET, SOCK_STREAM, 0);
            REQUIRE(fd >= 0);
            sockaddr_in addr{};
            addr.sin_family = AF_INET;
            addr.sin_port = htons(static_cast<uint16_t>(port));
            addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
            if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) break;
            ::close(fd);
            fd = -1;
            std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
        REQUIRE(fd >= 0);

        // Garbage followed by two valid frames.
        empc::RequestFrame frame;
        frame.ref = 20.0;
        const auto request = empc::encode_request(frame);
        std::string payload = "zzz";
        payload.append(reinterpret_cast<const char*>(request.data()), request.size());
        payload.append(reinterpret_cast<const char*>(request.data()), request.size());
        REQUIRE(::send(fd, payload.data(), payload.size(), 0) ==
                static_cast<ssize_t>(payload.size()));

        std::string reply;
        char buf[64];
        while (reply.size() < 2 * empc::kResponseFrameSize) {
            const ssize_t got = ::recv(fd, buf, sizeof(buf), 0);
            REQUIRE(got > 0);
            reply.append(buf, static_cast<std::size_t>(got));
        }
        ::close(fd);

        REQUIRE(reply.size() == 2 * empc::kResponseFrameSize);
        const double u = empc::decode_response(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(reply.data()), empc::kResponseFrameSize));
        CHECK(u > 0.0);
        CHECK(u <= 24.0);
        CHECK(reply.substr(0, 7) == reply.substr(7, 7));  // identical requests

        ::kill(child, SIGTERM);
        int status = 0;
        bool exited = false;
        for (int i = 0; i < 50 && !exited; ++i) {  // 5 s grace, then hard kill
            exited = ::waitpid(child, &status, WNOHANG) == child;
            if (!exited) ::usleep(100 * 1000);
        }
        if (!exited) {
            ::kill(child, SIGKILL);
            ::waitpid(child, &status, 0);
        }
        CHECK(exited);  // the server must shut down on SIGTERM by itself
    }
}
