#pragma once

#include "cui/providers.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cui::bench {

// One benchmark configuration: a synthetic provider timing profile measured
// in both pipelines over several repetitions.
struct Scenario {
    std::string name;
    providers::MockParams params; // delays + sentence count
    int repetitions = 10;
    bool run_streaming = true;
    bool run_batch = true;
};

// Parses {"scenarios": [...]}; throws ConfigError on structural problems,
// repetitions < 3, sentences < 1, or a non-mock provider.
std::vector<Scenario> load_scenarios(const std::string& path);

struct Stats {
    double median_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
};

Stats summarize(std::vector<double> samples);

struct ModeResult {
    std::string mode; // "streaming" | "batch"
    Stats ttfa;
    Stats total;
    // What the pipeline model predicts for time-to-first-audio given the
    // scenario's delays: stt + initial delay + synth for streaming, plus one
    // inter-sentence gap per remaining sentence for batch.
    double analytic_ttfa_ms = 0;
};

struct ScenarioResult {
    std::string name;
    std::vector<ModeResult> modes;
};

double analytic_ttfa_ms(const providers::MockParams& params, bool streaming);

// Spins up an in-process gateway on a loopback port and measures every
// repetition over a fresh connection. Throws on any failed turn.
ScenarioResult run_scenario(const Scenario& scenario);

// CSV: scenario,mode,metric,median_ms,min_ms,max_ms (one row per metric).
// Throws Error when results are empty or the file cannot be written.
void write_csv(const std::vector<ScenarioResult>& results,
               const std::string& path);

// Human-readable table with the analytic prediction alongside.
std::string format_table(const std::vector<ScenarioResult>& results,
                         std::optional<int> jitter_ms = std::nullopt);

} // namespace cui::bench
