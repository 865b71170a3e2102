#include "cui/bench.hpp"
#include "cui/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Latency harness: replays synthetic provider timing "
                 "profiles through the gateway in streaming and batch mode"};

    std::string scenarios_path;
    std::string out_path;
    int jitter_ms = -1;

    app.add_option("--scenarios", scenarios_path, "Scenario JSON file")
        ->required();
    app.add_option("--out", out_path, "CSV report path")->required();
    app.add_option("--jitter-ms", jitter_ms,
                   "Scheduling jitter allowance noted in the output")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const auto scenarios = cui::bench::load_scenarios(scenarios_path);
        std::vector<cui::bench::ScenarioResult> results;
        for (const auto& scenario : scenarios) {
            std::fprintf(stderr, "running %s (%d reps)...\n",
                         scenario.name.c_str(), scenario.repetitions);
            results.push_back(cui::bench::run_scenario(scenario));
        }
        const std::optional<int> jitter =
            jitter_ms >= 0 ? std::optional<int>(jitter_ms) : std::nullopt;
        std::fputs(cui::bench::format_table(results, jitter).c_str(), stdout);
        cui::bench::write_csv(results, out_path);
        std::fprintf(stderr, "report: %s\n", out_path.c_str());
        return 0;
    } catch (const cui::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
