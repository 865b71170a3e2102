#include "cui/bench.hpp"

#include "cui/client.hpp"
#include "cui/errors.hpp"
#include "cui/registry.hpp"
#include "cui/server.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace cui::bench {

namespace {

using nlohmann::json;

int read_int(const json& doc, const char* key, int fallback, int minimum,
             const std::string& where) {
    const auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    if (!it->is_number_integer() || it->get<int>() < minimum) {
        throw ConfigError(where + "." + key + " must be an integer >= " +
                          std::to_string(minimum));
    }
    return it->get<int>();
}

Scenario parse_scenario(const json& doc, std::size_t position) {
    const std::string where = "scenarios[" + std::to_string(position) + "]";
    if (!doc.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    Scenario out;
    const auto name = doc.find("name");
    if (name == doc.end() || !name->is_string() ||
        name->get<std::string>().empty()) {
        throw ConfigError(where + ".name must be a non-empty string");
    }
    out.name = name->get<std::string>();
    out.repetitions = read_int(doc, "repetitions", 10, 3, where);
    out.params.llm_sentences = read_int(doc, "sentences", 3, 1, where);

    if (const auto it = doc.find("delays"); it != doc.end()) {
        if (!it->is_object()) {
            throw ConfigError(where + ".delays must be an object");
        }
        const std::string dw = where + ".delays";
        out.params.stt_ms = read_int(*it, "stt_ms", 0, 0, dw);
        out.params.llm_initial_ms = read_int(*it, "llm_initial_ms", 0, 0, dw);
        out.params.llm_inter_sentence_ms =
            read_int(*it, "llm_inter_sentence_ms", 0, 0, dw);
        out.params.tts_per_call_ms =
            read_int(*it, "tts_per_call_ms", 0, 0, dw);
    }

    if (const auto it = doc.find("modes"); it != doc.end()) {
        if (!it->is_array() || it->empty()) {
            throw ConfigError(where + ".modes must be a non-empty array");
        }
        out.run_streaming = false;
        out.run_batch = false;
        for (const auto& mode : *it) {
            if (mode == "streaming") {
                out.run_streaming = true;
            } else if (mode == "batch") {
                out.run_batch = true;
            } else {
                throw ConfigError(where +
                                  ".modes entries must be "
                                  "\"streaming\" or \"batch\"");
            }
        }
    }

    // The harness measures the gateway's own overhead, so the providers are
    // pinned to the deterministic mocks.
    for (const char* role : {"stt", "llm", "tts"}) {
        if (const auto it = doc.find(role); it != doc.end() && *it != "mock") {
            throw ConfigError(where + ": only mock providers can be benchmarked");
        }
    }
    return out;
}

} // namespace

std::vector<Scenario> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open scenario file '" + path + "'");
    }
    const json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
        throw ConfigError("scenario file '" + path + "' is not valid JSON");
    }
    const auto scenarios = doc.find("scenarios");
    if (!doc.is_object() || scenarios == doc.end() ||
        !scenarios->is_array() || scenarios->empty()) {
        throw ConfigError("scenario file needs a non-empty \"scenarios\" array");
    }
    std::vector<Scenario> out;
    for (std::size_t i = 0; i < scenarios->size(); ++i) {
        out.push_back(parse_scenario((*scenarios)[i], i));
    }
    return out;
}

Stats summarize(std::vector<double> samples) {
    if (samples.empty()) {
        throw Error("no samples to summarize");
    }
    std::sort(samples.begin(), samples.end());
    Stats out;
    out.min_ms = samples.front();
    out.max_ms = samples.back();
    const std::size_t n = samples.size();
    out.median_ms = (n % 2 == 1)
                        ? samples[n / 2]
                        : (samples[n / 2 - 1] + samples[n / 2]) / 2.0;
    return out;
}

double analytic_ttfa_ms(const providers::MockParams& params, bool streaming) {
    const double base = params.stt_ms + params.llm_initial_ms +
                        params.tts_per_call_ms;
    if (streaming) return base;
    return base +
           static_cast<double>(params.llm_sentences - 1) *
               params.llm_inter_sentence_ms;
}

ScenarioResult run_scenario(const Scenario& scenario) {
    auto registry = std::make_shared<providers::ProviderRegistry>(
        providers::ProviderRegistry::with_builtins());
    server::ServerConfig server_config;
    server_config.bind_host = "127.0.0.1";
    server_config.bind_port = 0;
    server::GatewayServer server(server_config, registry);
    server.start();

    ScenarioResult result;
    result.name = scenario.name;

    const std::string utterance = "Hi";
    std::vector<std::pair<std::string, bool>> modes;
    if (scenario.run_streaming) modes.emplace_back("streaming", true);
    if (scenario.run_batch) modes.emplace_back("batch", false);

    for (const auto& [mode_name, streaming] : modes) {
        const json config{
            {"session_label", scenario.name + "/" + mode_name},
            {"stt", "mock"},
            {"llm", "mock"},
            {"tts", "mock"},
            {"streaming", streaming},
            {"history", false},
            {"provider_params",
             {{"stt_ms", scenario.params.stt_ms},
              {"llm_initial_ms", scenario.params.llm_initial_ms},
              {"llm_inter_sentence_ms", scenario.params.llm_inter_sentence_ms},
              {"tts_per_call_ms", scenario.params.tts_per_call_ms},
              {"llm_sentences", scenario.params.llm_sentences}}}};

        std::vector<double> ttfa;
        std::vector<double> total;
        for (int rep = 0; rep < scenario.repetitions; ++rep) {
            client::GatewayConnection conn("127.0.0.1", server.port());
            const auto hs = conn.handshake(config);
            if (!hs.ok()) {
                throw Error("scenario '" + scenario.name +
                            "' rejected: " + hs.error->message);
            }
            const auto report = conn.audio_turn(
                {reinterpret_cast<const std::uint8_t*>(utterance.data()),
                 utterance.size()});
            if (!report.completed || report.error || !report.ttfa_ms) {
                throw Error("scenario '" + scenario.name + "' " + mode_name +
                            " turn failed" +
                            (report.error ? ": " + report.error->message : ""));
            }
            ttfa.push_back(*report.ttfa_ms);
            total.push_back(*report.total_ms);
        }
        result.modes.push_back({mode_name, summarize(std::move(ttfa)),
                                summarize(std::move(total)),
                                analytic_ttfa_ms(scenario.params, streaming)});
    }
    server.stop();
    return result;
}

void write_csv(const std::vector<ScenarioResult>& results,
               const std::string& path) {
    if (results.empty()) {
        throw Error("no benchmark results to report");
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw InputError("cannot open report file '" + path + "'");
    }
    out << "scenario,mode,metric,median_ms,min_ms,max_ms\n";
    char line[256];
    for (const auto& result : results) {
        for (const auto& mode : result.modes) {
            const std::pair<const char*, const Stats*> rows[] = {
                {"ttfa", &mode.ttfa}, {"total", &mode.total}};
            for (const auto& [metric, stats] : rows) {
                std::snprintf(line, sizeof(line), "%s,%s,%s,%.3f,%.3f,%.3f\n",
                              result.name.c_str(), mode.mode.c_str(), metric,
                              stats->median_ms, stats->min_ms, stats->max_ms);
                out << line;
            }
        }
    }
    if (!out) {
        throw InputError("failed writing report file '" + path + "'");
    }
}

std::string format_table(const std::vector<ScenarioResult>& results,
                         std::optional<int> jitter_ms) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %-10s %10s %10s %10s %12s\n",
                  "scenario", "mode", "ttfa p50", "ttfa min", "ttfa max",
                  "analytic");
    out += line;
    for (const auto& result : results) {
        for (const auto& mode : result.modes) {
            std::snprintf(line, sizeof(line),
                          "%-20s %-10s %10.1f %10.1f %10.1f %12.1f\n",
                          result.name.c_str(), mode.mode.c_str(),
                          mode.ttfa.median_ms, mode.ttfa.min_ms,
                          mode.ttfa.max_ms, mode.analytic_ttfa_ms);
            out += line;
        }
    }
    if (jitter_ms) {
        std::snprintf(line, sizeof(line),
                      "(scheduling jitter allowance: %d ms)\n", *jitter_ms);
        out += line;
    }
    return out;
}

} // namespace cui::bench
