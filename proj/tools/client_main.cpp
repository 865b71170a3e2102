#include "cui/audio.hpp"
#include "cui/client.hpp"
#include "cui/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;

constexpr int kExitServerError = 3;
constexpr int kExitConnectFailed = 4;

json load_config(const std::string& path) {
    if (path.empty()) {
        return json{{"stt", "mock"}, {"llm", "mock"}, {"tts", "mock"}};
    }
    std::ifstream in(path);
    if (!in) {
        throw cui::InputError("cannot open config file '" + path + "'");
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw cui::InputError("config file '" + path +
                              "' is not a JSON object");
    }
    return doc;
}

cui::AudioFormat output_format(const json& config) {
    cui::AudioFormat format;
    if (const auto it = config.find("audio_out");
        it != config.end() && it->is_object()) {
        format.sample_rate = it->value("sample_rate", format.sample_rate);
    }
    return format;
}

void print_report(const cui::client::TurnReport& report, bool metrics,
                  const std::string& out_prefix,
                  const cui::AudioFormat& format) {
    if (!report.transcript.empty()) {
        std::printf("transcript: %s\n", report.transcript.c_str());
    }
    for (const auto& sentence : report.sentences) {
        std::printf("s%d: %s (%zu audio bytes)\n", sentence.index,
                    sentence.text.c_str(), sentence.audio.size());
        if (!out_prefix.empty()) {
            const std::string path =
                out_prefix + "-s" + std::to_string(sentence.index) + ".wav";
            cui::wav::write_file(path, format, sentence.audio);
            std::printf("wrote %s\n", path.c_str());
        }
    }
    if (metrics) {
        if (report.ttfa_ms) {
            std::printf("ttfa_ms: %.1f\n", *report.ttfa_ms);
        }
        if (report.total_ms) {
            std::printf("total_ms: %.1f\n", *report.total_ms);
        }
    }
    if (report.error) {
        std::fprintf(stderr, "server error [%s]: %s\n",
                     report.error->code.c_str(),
                     report.error->message.c_str());
    } else if (!report.completed) {
        std::fprintf(stderr, "error: response did not complete\n");
    }
}

int interactive_loop(cui::client::GatewayConnection& conn, bool metrics,
                     const std::string& out_prefix,
                     const cui::AudioFormat& format) {
    std::printf("type a line to talk, /reset to clear history, /quit to exit\n");
    std::string line;
    while (true) {
        std::printf("> ");
        std::fflush(stdout);
        if (!std::getline(std::cin, line)) return 0;
        if (line.empty()) continue;
        if (line == "/quit") return 0;
        if (line == "/reset") {
            conn.reset_history();
            std::printf("history cleared\n");
            continue;
        }
        const auto report = conn.text_turn(line);
        print_report(report, metrics, out_prefix, format);
        if (report.error && report.error->code != "PROVIDER_FAILURE") {
            return kExitServerError; // the server closed on us
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference client for the voice gateway"};

    std::string server = "127.0.0.1:7061";
    std::string config_path;
    std::string wav_path;
    std::string raw_text;
    std::string text;
    std::string out_prefix;
    bool interactive = false;
    bool metrics = false;

    app.add_option("--server", server, "Gateway address HOST:PORT")
        ->capture_default_str();
    app.add_option("--config", config_path, "Session config JSON file");
    auto* wav_opt =
        app.add_option("--wav", wav_path, "Speak one WAV file (PCM s16le mono)");
    auto* raw_opt = app.add_option(
        "--raw", raw_text, "Send TEXT bytes as a raw audio utterance");
    auto* text_opt =
        app.add_option("--text", text, "Send TEXT directly, skipping STT");
    auto* inter_opt = app.add_flag("--interactive", interactive,
                                   "Line-by-line text conversation");
    app.add_option("--out", out_prefix,
                   "Write each reply sentence to PREFIX-s<i>.wav");
    app.add_flag("--metrics", metrics, "Print client-side latency");

    wav_opt->excludes(raw_opt)->excludes(text_opt)->excludes(inter_opt);
    raw_opt->excludes(text_opt)->excludes(inter_opt);
    text_opt->excludes(inter_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (wav_path.empty() && raw_text.empty() && text.empty() && !interactive) {
        std::fprintf(stderr,
                     "error: pick one of --wav, --raw, --text, --interactive\n");
        return 2;
    }

    try {
        json config = load_config(config_path);

        std::vector<std::uint8_t> audio;
        if (!wav_path.empty()) {
            const auto parsed =
                cui::wav::parse(cui::wav::read_file(wav_path));
            audio = parsed.samples;
            if (const auto it = config.find("audio_in");
                it != config.end() && it->is_object() &&
                it->contains("sample_rate") &&
                (*it)["sample_rate"] != parsed.format.sample_rate) {
                throw cui::InputError(
                    "WAV sample rate " +
                    std::to_string(parsed.format.sample_rate) +
                    " does not match the configured audio_in rate");
            }
            config["audio_in"] = json{{"sample_rate", parsed.format.sample_rate},
                                      {"channels", 1},
                                      {"encoding", "pcm_s16le"}};
        } else if (!raw_text.empty()) {
            audio.assign(raw_text.begin(), raw_text.end());
        }

        const auto [host, port] = cui::net::parse_hostport(server);
        cui::client::GatewayConnection conn(host, port);

        const auto hs = conn.handshake(config);
        if (!hs.ok()) {
            std::fprintf(stderr, "config rejected [%s]: %s\n",
                         hs.error->code.c_str(), hs.error->message.c_str());
            return kExitServerError;
        }
        std::fprintf(stderr, "session %s\n", hs.session_id.c_str());

        const auto format = output_format(config);
        if (interactive) {
            return interactive_loop(conn, metrics, out_prefix, format);
        }

        const auto report = text.empty() ? conn.audio_turn(audio)
                                         : conn.text_turn(text);
        print_report(report, metrics, out_prefix, format);
        if (report.error) return kExitServerError;
        return report.completed ? 0 : 1;
    } catch (const cui::net::ConnectRefused& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return kExitConnectFailed;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
