#include "cui/errors.hpp"
#include "cui/registry.hpp"
#include "cui/server.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <thread>

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void print_providers(const cui::providers::ProviderRegistry& registry) {
    std::printf("%-5s %-20s %-10s %s\n", "role", "provider", "streaming",
                "local");
    for (const auto& entry : registry.list()) {
        std::printf("%-5s %-20s %-10s %s\n",
                    std::string(role_name(entry.role)).c_str(),
                    entry.name.c_str(), entry.meta.streaming ? "yes" : "no",
                    entry.meta.local ? "yes" : "no");
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voice conversation gateway: STT -> LLM -> TTS over one "
                 "TCP connection per conversation"};

    std::string bind = "127.0.0.1:7061";
    std::string log_path;
    int max_connections = 64;
    std::size_t frame_limit = cui::wire::kDefaultPayloadLimit;
    bool allow_remote = false;
    bool list_providers = false;
    bool verbose = false;

    app.add_option("--bind", bind, "Listen address as HOST:PORT")
        ->capture_default_str();
    app.add_option("--log", log_path,
                   "Turn log file (JSONL); falls back to $CUI_GATEWAY_LOG");
    app.add_option("--max-connections", max_connections,
                   "Concurrent connection limit")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--frame-limit", frame_limit,
                   "Maximum frame payload size in bytes")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_flag("--allow-remote", allow_remote,
                 "Permit binding non-loopback addresses");
    app.add_flag("--list-providers", list_providers,
                 "Print registered providers and exit");
    app.add_flag("--verbose", verbose, "Per-connection logging on stderr");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    auto registry = std::make_shared<cui::providers::ProviderRegistry>(
        cui::providers::ProviderRegistry::with_builtins());

    if (list_providers) {
        print_providers(*registry);
        return 0;
    }

    if (log_path.empty()) {
        if (const char* env = std::getenv("CUI_GATEWAY_LOG")) {
            log_path = env;
        }
    }

    cui::server::ServerConfig config;
    config.max_connections = max_connections;
    config.log_path = log_path;
    config.frame_limit = frame_limit;
    config.allow_remote = allow_remote;
    config.verbose = verbose;

    try {
        const auto [host, port] = cui::net::parse_hostport(bind);
        config.bind_host = host;
        config.bind_port = port;
    } catch (const cui::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    if (allow_remote && !cui::net::is_loopback_address(config.bind_host)) {
        std::fprintf(stderr,
                     "warning: listening on a non-loopback address; the "
                     "protocol has no transport security\n");
    }

    cui::server::GatewayServer server(config, registry);
    try {
        server.start();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    std::printf("listening on %s:%u\n", config.bind_host.c_str(),
                server.port());
    std::fflush(stdout);
    if (!log_path.empty()) {
        std::fprintf(stderr, "turn log: %s\n", log_path.c_str());
    }

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
    return 0;
}
