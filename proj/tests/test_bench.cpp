#include "cui/bench.hpp"
#include "cui/errors.hpp"

#include <doctest.h>

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace cui;

namespace {

// Scratch file in the temp dir, deleted on scope exit.
struct TempFile {
    std::filesystem::path path;

    explicit TempFile(std::string_view stem, std::string_view contents = {}) {
        static std::atomic<int> counter{0};
        path = std::filesystem::temp_directory_path() /
               (std::string(stem) + "-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
        if (!contents.empty()) {
            std::ofstream out(path);
            out << contents;
        }
    }
    ~TempFile() { std::filesystem::remove(path); }

    std::string str() const { return path.string(); }

    std::string slurp() const {
        std::ifstream in(path);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }
};

providers::MockParams canonical_delays() {
    providers::MockParams params;
    params.llm_initial_ms = 100;
    params.llm_inter_sentence_ms = 200;
    params.tts_per_call_ms = 50;
    params.llm_sentences = 3;
    return params;
}

} // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("summarize orders samples and takes the median") {
    const auto odd = bench::summarize({30, 10, 20});
    CHECK(odd.median_ms == 20);
    CHECK(odd.min_ms == 10);
    CHECK(odd.max_ms == 30);

    const auto even = bench::summarize({40, 10, 20, 30});
    CHECK(even.median_ms == 25);
    CHECK(even.min_ms == 10);
    CHECK(even.max_ms == 40);

    const auto single = bench::summarize({7.5});
    CHECK(single.median_ms == 7.5);
    CHECK(single.min_ms == 7.5);
    CHECK(single.max_ms == 7.5);

    CHECK_THROWS_AS(bench::summarize({}), Error);
}

TEST_CASE("analytic model matches the delay sums") {
    const auto params = canonical_delays();
    CHECK(bench::analytic_ttfa_ms(params, true) == 150);
    CHECK(bench::analytic_ttfa_ms(params, false) == 550);

    providers::MockParams quiet;
    quiet.llm_sentences = 1;
    CHECK(bench::analytic_ttfa_ms(quiet, true) == 0);
    // With one sentence there is no inter-sentence wait to skip.
    CHECK(bench::analytic_ttfa_ms(quiet, false) ==
          bench::analytic_ttfa_ms(quiet, true));

    providers::MockParams with_stt = canonical_delays();
    with_stt.stt_ms = 40;
    CHECK(bench::analytic_ttfa_ms(with_stt, true) == 190);
    CHECK(bench::analytic_ttfa_ms(with_stt, false) == 590);
}

TEST_CASE("load_scenarios parses the file format") {
    SUBCASE("fields and defaults") {
        TempFile file("cui-bench-scenarios", R"({
            "scenarios": [
                {"name": "bare"},
                {
                    "name": "tuned",
                    "repetitions": 5,
                    "sentences": 4,
                    "delays": {"llm_initial_ms": 10, "llm_inter_sentence_ms": 20,
                               "tts_per_call_ms": 5, "stt_ms": 1},
                    "modes": ["streaming"]
                }
            ]
        })");
        const auto scenarios = bench::load_scenarios(file.str());
        REQUIRE(scenarios.size() == 2);

        CHECK(scenarios[0].name == "bare");
        CHECK(scenarios[0].repetitions == 10);
        CHECK(scenarios[0].params.llm_sentences == 3);
        CHECK(scenarios[0].params.llm_initial_ms == 0);
        CHECK(scenarios[0].run_streaming);
        CHECK(scenarios[0].run_batch);

        CHECK(scenarios[1].repetitions == 5);
        CHECK(scenarios[1].params.llm_sentences == 4);
        CHECK(scenarios[1].params.llm_initial_ms == 10);
        CHECK(scenarios[1].params.llm_inter_sentence_ms == 20);
        CHECK(scenarios[1].params.tts_per_call_ms == 5);
        CHECK(scenarios[1].params.stt_ms == 1);
        CHECK(scenarios[1].run_streaming);
        CHECK(!scenarios[1].run_batch);
    }

    SUBCASE("the shipped default file is canonical") {
        const auto scenarios = bench::load_scenarios(CUI_SCENARIO_DIR
                                                     "/default.json");
        REQUIRE(!scenarios.empty());
        const auto& first = scenarios[0];
        CHECK(first.name == "conversational");
        CHECK(first.repetitions == 10);
        CHECK(bench::analytic_ttfa_ms(first.params, true) == 150);
        CHECK(bench::analytic_ttfa_ms(first.params, false) == 550);
    }

    SUBCASE("rejections") {
        const std::vector<std::pair<const char*, const char*>> cases = {
            {"not json at all", "not valid JSON"},
            {R"([])", "needs a non-empty \"scenarios\" array"},
            {R"({"scenarios": []})", "needs a non-empty \"scenarios\" array"},
            {R"({"scenarios": [42]})", "must be an object"},
            {R"({"scenarios": [{}]})", "name must be a non-empty string"},
            {R"({"scenarios": [{"name": "x", "repetitions": 2}]})",
             "repetitions must be an integer >= 3"},
            {R"({"scenarios": [{"name": "x", "sentences": 0}]})",
             "sentences must be an integer >= 1"},
            {R"({"scenarios": [{"name": "x", "delays": {"stt_ms": -1}}]})",
             "stt_ms must be an integer >= 0"},
            {R"({"scenarios": [{"name": "x", "modes": []}]})",
             "modes must be a non-empty array"},
            {R"({"scenarios": [{"name": "x", "modes": ["turbo"]}]})",
             "must be \"streaming\" or \"batch\""},
            {R"({"scenarios": [{"name": "x", "llm": "openai-compatible"}]})",
             "only mock providers can be benchmarked"},
        };
        for (const auto& [body, needle] : cases) {
            CAPTURE(body);
            TempFile file("cui-bench-bad", body);
            try {
                bench::load_scenarios(file.str());
                FAIL_CHECK("expected ConfigError for: " << body);
            } catch (const ConfigError& e) {
                CHECK(std::string(e.what()).find(needle) != std::string::npos);
            }
        }
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(bench::load_scenarios("/nonexistent/scenarios.json"),
                        InputError);
    }
}

TEST_CASE("run_scenario measures both modes over a live loopback server") {
    bench::Scenario scenario;
    scenario.name = "smoke";
    scenario.repetitions = 3;
    scenario.params.llm_sentences = 2;

    const auto result = bench::run_scenario(scenario);
    CHECK(result.name == "smoke");
    REQUIRE(result.modes.size() == 2);
    CHECK(result.modes[0].mode == "streaming");
    CHECK(result.modes[1].mode == "batch");
    for (const auto& mode : result.modes) {
        CHECK(mode.ttfa.min_ms > 0);
        CHECK(mode.ttfa.min_ms <= mode.ttfa.median_ms);
        CHECK(mode.ttfa.median_ms <= mode.ttfa.max_ms);
        CHECK(mode.total.min_ms >= mode.ttfa.min_ms);
        CHECK(mode.analytic_ttfa_ms == 0);
    }
}

TEST_CASE("streaming beats batch once inter-sentence delay exists") {
    bench::Scenario scenario;
    scenario.name = "dominance";
    scenario.repetitions = 3;
    scenario.params.llm_sentences = 2;
    scenario.params.llm_inter_sentence_ms = 100;

    const auto result = bench::run_scenario(scenario);
    REQUIRE(result.modes.size() == 2);
    const auto& streaming = result.modes[0];
    const auto& batch = result.modes[1];
    CHECK(streaming.ttfa.median_ms < batch.ttfa.median_ms);
    // Batch waits out the full delta stream before any synthesis.
    CHECK(batch.ttfa.median_ms >= 100);
}

TEST_CASE("run_scenario honors mode selection") {
    bench::Scenario scenario;
    scenario.name = "solo";
    scenario.repetitions = 3;
    scenario.params.llm_sentences = 1;
    scenario.run_batch = false;

    const auto result = bench::run_scenario(scenario);
    REQUIRE(result.modes.size() == 1);
    CHECK(result.modes[0].mode == "streaming");
}

TEST_CASE("csv report has one row per metric") {
    bench::ScenarioResult result;
    result.name = "demo";
    result.modes = {
        {"streaming", {1.5, 1.0, 2.0}, {10.5, 10.0, 11.0}, 150.0},
        {"batch", {5.5, 5.0, 6.0}, {12.5, 12.0, 13.0}, 550.0},
    };

    TempFile file("cui-bench-report");
    bench::write_csv({result}, file.str());

    std::vector<std::string> lines;
    std::istringstream in(file.slurp());
    for (std::string line; std::getline(in, line);) lines.push_back(line);

    REQUIRE(lines.size() == 5);
    CHECK(lines[0] == "scenario,mode,metric,median_ms,min_ms,max_ms");
    CHECK(lines[1] == "demo,streaming,ttfa,1.500,1.000,2.000");
    CHECK(lines[2] == "demo,streaming,total,10.500,10.000,11.000");
    CHECK(lines[3] == "demo,batch,ttfa,5.500,5.000,6.000");
    CHECK(lines[4] == "demo,batch,total,12.500,12.000,13.000");
}

TEST_CASE("csv report rejects empty results and bad paths") {
    CHECK_THROWS_AS(bench::write_csv({}, "/tmp/unused.csv"), Error);

    bench::ScenarioResult result;
    result.name = "demo";
    result.modes = {{"streaming", {1, 1, 1}, {2, 2, 2}, 0.0}};
    CHECK_THROWS_AS(bench::write_csv({result}, "/nonexistent/dir/report.csv"),
                    InputError);
}

TEST_CASE("summary table lists every mode with the analytic column") {
    bench::ScenarioResult result;
    result.name = "demo";
    result.modes = {
        {"streaming", {151.2, 150.0, 160.0}, {600.0, 590.0, 610.0}, 150.0},
        {"batch", {552.9, 550.0, 570.0}, {620.0, 610.0, 630.0}, 550.0},
    };

    const auto plain = bench::format_table({result});
    CHECK(plain.find("scenario") != std::string::npos);
    CHECK(plain.find("analytic") != std::string::npos);
    CHECK(plain.find("demo") != std::string::npos);
    CHECK(plain.find("streaming") != std::string::npos);
    CHECK(plain.find("batch") != std::string::npos);
    CHECK(plain.find("151.2") != std::string::npos);
    CHECK(plain.find("550.0") != std::string::npos);
    CHECK(plain.find("jitter") == std::string::npos);

    const auto with_jitter = bench::format_table({result}, 60);
    CHECK(with_jitter.find("scheduling jitter allowance: 60 ms") !=
          std::string::npos);
}

TEST_SUITE_END();
