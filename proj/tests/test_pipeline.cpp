#include "doctest.h"

#include "cui/detail/bounded_queue.hpp"
#include "cui/errors.hpp"
#include "cui/pipeline.hpp"
#include "cui/registry.hpp"
#include "cui/session.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

using namespace cui::pipeline;
using cui::Error;
using cui::ProtocolError;
using cui::ProviderError;
using cui::providers::AudioChunkSink;
using cui::providers::DeltaSink;
using cui::providers::LlmMessage;
using cui::providers::LlmProvider;
using cui::providers::ProviderRegistry;
using cui::providers::TtsProvider;
using cui::session::Session;
using cui::session::SessionConfig;

namespace {

// Emits a fixed delta list, optionally throwing once they are out.
struct ScriptedLlm final : LlmProvider {
    std::vector<std::string> deltas;
    bool fail_after = false;
    std::atomic<int> delivered{0};

    void generate(const std::vector<LlmMessage>&, const std::string&,
                  const DeltaSink& on_delta) override {
        for (const auto& d : deltas) {
            delivered.fetch_add(1);
            if (!on_delta(d)) return;
        }
        if (fail_after) throw ProviderError("llm", "model fell over");
    }
};

// Throws on the n-th synthesize call; otherwise emits one tiny chunk.
struct FlakyTts final : TtsProvider {
    int fail_on_call = -1;
    int calls = 0;

    void synthesize(std::string_view, const std::string&,
                    const cui::AudioFormat&,
                    const AudioChunkSink& on_chunk) override {
        if (calls++ == fail_on_call) {
            throw ProviderError("tts", "synth exploded");
        }
        const std::uint8_t pcm[4] = {1, 2, 3, 4};
        on_chunk(pcm);
    }
};

// Blocks every synthesize call until the test opens the gate.
struct GatedTts final : TtsProvider {
    std::mutex m;
    std::condition_variable cv;
    bool open = false;

    void release() {
        std::lock_guard lock(m);
        open = true;
        cv.notify_all();
    }

    void synthesize(std::string_view, const std::string&,
                    const cui::AudioFormat&,
                    const AudioChunkSink& on_chunk) override {
        std::unique_lock lock(m);
        cv.wait(lock, [this] { return open; });
        const std::uint8_t pcm[2] = {0, 0};
        on_chunk(pcm);
    }
};

struct Recorder {
    std::mutex m;
    std::vector<OutputEvent> events;

    EventSink sink() {
        return [this](const OutputEvent& e) {
            std::lock_guard lock(m);
            events.push_back(e);
        };
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& e : events) out.emplace_back(event_name(e));
        return out;
    }

    std::vector<std::string> sentence_texts() const {
        std::vector<std::string> out;
        for (const auto& e : events) {
            if (const auto* s = std::get_if<SentenceTextEvent>(&e)) {
                out.push_back(s->text);
            }
        }
        return out;
    }

    std::size_t audio_bytes(int index) const {
        std::size_t total = 0;
        for (const auto& e : events) {
            if (const auto* c = std::get_if<SentenceAudioChunkEvent>(&e)) {
                if (c->index == index) total += c->bytes.size();
            }
        }
        return total;
    }
};

// Checks the clean-run ordering law: Transcript, then per sentence i the
// text / chunks / end block, then ResponseEnd, nothing else.
void check_ordering(const std::vector<OutputEvent>& events, int sentences) {
    REQUIRE(!events.empty());
    REQUIRE(std::holds_alternative<TranscriptEvent>(events.front()));
    REQUIRE(std::holds_alternative<ResponseEndEvent>(events.back()));

    int expected = 0;
    enum { want_text, in_audio } state = want_text;
    for (std::size_t i = 1; i + 1 < events.size(); ++i) {
        const auto& e = events[i];
        if (state == want_text) {
            const auto* text = std::get_if<SentenceTextEvent>(&e);
            REQUIRE(text != nullptr);
            REQUIRE(text->index == expected);
            state = in_audio;
        } else if (const auto* chunk = std::get_if<SentenceAudioChunkEvent>(&e)) {
            REQUIRE(chunk->index == expected);
        } else {
            const auto* end = std::get_if<SentenceAudioEndEvent>(&e);
            REQUIRE(end != nullptr);
            REQUIRE(end->index == expected);
            ++expected;
            state = want_text;
        }
    }
    REQUIRE(state == want_text);
    REQUIRE(expected == sentences);
}

SessionConfig mock_config() {
    SessionConfig cfg;
    cfg.system_prompt = "";
    return cfg;
}

Session make_mock_session(SessionConfig cfg = mock_config()) {
    static const ProviderRegistry reg = ProviderRegistry::with_builtins();
    return Session(std::move(cfg), reg);
}

// A registry whose "test" providers are the given doubles; absent roles
// fall back to the mocks.
ProviderRegistry doubles_registry(std::shared_ptr<LlmProvider> llm,
                                  std::shared_ptr<TtsProvider> tts = nullptr) {
    auto reg = ProviderRegistry::with_builtins();
    if (llm) {
        reg.add_llm("test", {}, [llm](const auto&) { return llm; });
    }
    if (tts) {
        reg.add_tts("test", {}, [tts](const auto&) { return tts; });
    }
    return reg;
}

RunInput text_input(std::string text) {
    RunInput in;
    in.direct_text = std::move(text);
    return in;
}

} // namespace

TEST_CASE("utterance buffer enforces the cap and the close contract") {
    UtteranceBuffer buf(10);
    const std::uint8_t chunk[6] = {1, 2, 3, 4, 5, 6};
    buf.append(chunk);
    CHECK(buf.size() == 6);
    CHECK_FALSE(buf.closed());
    CHECK_THROWS_AS(buf.append(chunk), ProtocolError); // 12 > 10
    CHECK(buf.size() == 6);

    buf.close();
    CHECK(buf.closed());
    CHECK_THROWS_AS(buf.append(std::span(chunk, 2)), Error);

    buf.reset();
    CHECK(buf.empty());
    CHECK_FALSE(buf.closed());
    buf.append(chunk);
    CHECK(buf.size() == 6);
}

TEST_CASE("bounded queue blocks at capacity and drains after close") {
    cui::detail::BoundedQueue<int> q(2);
    CHECK(q.push(1));
    CHECK(q.push(2));

    std::atomic<bool> third_pushed{false};
    std::thread producer([&] {
        q.push(3);
        third_pushed = true;
    });
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK_FALSE(third_pushed.load()); // blocked on the full queue

    CHECK(q.pop() == 1);
    producer.join();
    CHECK(third_pushed.load());

    q.close();
    CHECK_FALSE(q.push(4));
    CHECK(q.pop() == 2);
    CHECK(q.pop() == 3);
    CHECK_FALSE(q.pop().has_value());
}

TEST_CASE("streaming run emits the full ordered event sequence") {
    auto session = make_mock_session();
    Recorder rec;
    const auto record = run_streaming(session, text_input("Hi"), rec.sink());

    REQUIRE(record.has_value());
    CHECK(record->transcript == "Hi");
    CHECK(record->response_text ==
          "You said: Hi. This is sentence two. This is sentence three.");
    CHECK(record->error.empty());
    CHECK_FALSE(record->aborted);

    check_ordering(rec.events, 3);
    CHECK(rec.sentence_texts() ==
          std::vector<std::string>{"You said: Hi.", "This is sentence two.",
                                   "This is sentence three."});
    // 25 ms per character at 16 kHz, 2 bytes per sample.
    CHECK(rec.audio_bytes(0) == 10400);
    CHECK(rec.audio_bytes(1) == 16800);
    CHECK(rec.audio_bytes(2) == 18400);

    CHECK(session.history_size() == 1);
    CHECK(session.turn_index() == 1);
}

TEST_CASE("batch run collects everything into a single sentence") {
    SessionConfig cfg = mock_config();
    cfg.streaming_enabled = false;
    auto session = make_mock_session(cfg);
    Recorder rec;
    const auto record = run_turn(session, text_input("abc"), rec.sink());

    REQUIRE(record.has_value());
    CHECK(record->response_text ==
          "You said: abc. This is sentence two. This is sentence three.");

    check_ordering(rec.events, 1);
    const auto texts = rec.sentence_texts();
    REQUIRE(texts.size() == 1);
    CHECK(texts[0] == record->response_text);
    CHECK(rec.audio_bytes(0) == 48000); // one call over all 60 characters
}

TEST_CASE("streaming and batch commit identical text for the same input") {
    auto streaming = make_mock_session();
    SessionConfig batch_cfg = mock_config();
    batch_cfg.streaming_enabled = false;
    auto batch = make_mock_session(batch_cfg);

    Recorder s_rec, b_rec;
    const auto s = run_turn(streaming, text_input("compare me"), s_rec.sink());
    const auto b = run_turn(batch, text_input("compare me"), b_rec.sink());
    REQUIRE(s.has_value());
    REQUIRE(b.has_value());
    CHECK(s->transcript == b->transcript);
    CHECK(s->response_text == b->response_text);
    CHECK(s_rec.sentence_texts().size() == 3);
    CHECK(b_rec.sentence_texts().size() == 1);

    // Batch synthesizes the two sentence-joining spaces too; streaming
    // sentences lose them. 2 chars * 25 ms * 32 bytes/ms.
    const auto total = [](const Recorder& r) {
        return r.audio_bytes(0) + r.audio_bytes(1) + r.audio_bytes(2);
    };
    CHECK(total(b_rec) == total(s_rec) + 1600);
}

TEST_CASE("audio utterances flow through stt before the llm") {
    auto session = make_mock_session();
    UtteranceBuffer utterance;
    const std::string pseudo_audio = "spoken words";
    utterance.append(std::span(
        reinterpret_cast<const std::uint8_t*>(pseudo_audio.data()),
        pseudo_audio.size()));
    utterance.close();

    RunInput in;
    in.utterance = &utterance;
    Recorder rec;
    const auto record = run_streaming(session, in, rec.sink());
    REQUIRE(record.has_value());
    CHECK(record->transcript == "spoken words");
    CHECK(std::get<TranscriptEvent>(rec.events.front()).text == "spoken words");
    CHECK(record->metrics.stt_ms.has_value());
}

TEST_CASE("empty or invalid input fails as an stt error and commits nothing") {
    auto session = make_mock_session();

    const auto expect_stt_error = [&](const RunInput& in) {
        Recorder rec;
        const auto record = run_streaming(session, in, rec.sink());
        CHECK_FALSE(record.has_value());
        REQUIRE(rec.events.size() == 1);
        const auto* err = std::get_if<PipelineErrorEvent>(&rec.events[0]);
        REQUIRE(err != nullptr);
        CHECK(err->stage == "stt");
    };

    UtteranceBuffer empty;
    empty.close();
    RunInput no_audio;
    no_audio.utterance = &empty;
    expect_stt_error(no_audio);

    expect_stt_error(text_input("   "));
    expect_stt_error(text_input("\xFF\xFE"));

    UtteranceBuffer junk;
    const std::uint8_t bad[2] = {0xFF, 0xFE};
    junk.append(bad);
    junk.close();
    RunInput junk_in;
    junk_in.utterance = &junk;
    expect_stt_error(junk_in);

    CHECK(session.turn_index() == 0);
    CHECK(session.history_size() == 0);
}

TEST_CASE("llm failure mid-stream keeps the sentences already heard") {
    auto llm = std::make_shared<ScriptedLlm>();
    llm->deltas = {"First one. ", "Second one. "};
    llm->fail_after = true;
    const auto reg = doubles_registry(llm);

    SessionConfig cfg;
    cfg.llm.provider = "test";
    Session session(cfg, reg);

    Recorder rec;
    const auto record = run_streaming(session, text_input("Hi"), rec.sink());
    REQUIRE(record.has_value());
    CHECK(record->response_text == "First one. Second one.");
    CHECK(record->error == "llm: model fell over");
    CHECK_FALSE(record->aborted);

    const auto names = rec.names();
    REQUIRE(names.size() >= 3);
    CHECK(names.front() == "transcript");
    CHECK(names[names.size() - 2] == "pipeline_error");
    CHECK(names.back() == "response_end");
    CHECK(rec.sentence_texts() ==
          std::vector<std::string>{"First one.", "Second one."});

    // Partial but audible: the exchange still becomes history.
    CHECK(session.history_size() == 1);
}

TEST_CASE("tts failure stops the turn after the failing sentence") {
    auto llm = std::make_shared<ScriptedLlm>();
    llm->deltas = {"Zero. ", "One. ", "Two."};
    auto tts = std::make_shared<FlakyTts>();
    tts->fail_on_call = 1;
    const auto reg = doubles_registry(llm, tts);

    SessionConfig cfg;
    cfg.llm.provider = "test";
    cfg.tts.provider = "test";
    Session session(cfg, reg);

    Recorder rec;
    const auto record = run_streaming(session, text_input("Hi"), rec.sink());
    REQUIRE(record.has_value());
    CHECK(record->error == "tts: synth exploded");

    // Sentence 0 completes; sentence 1 announces, then errors; sentence 2
    // never surfaces.
    CHECK(rec.names() == std::vector<std::string>{
                             "transcript", "sentence_text",
                             "sentence_audio_chunk", "sentence_audio_end",
                             "sentence_text", "pipeline_error", "response_end"});
    CHECK(rec.sentence_texts() == std::vector<std::string>{"Zero.", "One."});
}

TEST_CASE("batch llm failure emits no audio at all") {
    auto llm = std::make_shared<ScriptedLlm>();
    llm->deltas = {"Half a reply"};
    llm->fail_after = true;
    const auto reg = doubles_registry(llm);

    SessionConfig cfg;
    cfg.llm.provider = "test";
    cfg.streaming_enabled = false;
    Session session(cfg, reg);

    Recorder rec;
    const auto record = run_batch(session, text_input("Hi"), rec.sink());
    REQUIRE(record.has_value());
    CHECK(record->error == "llm: model fell over");
    CHECK(rec.names() == std::vector<std::string>{"transcript",
                                                  "pipeline_error",
                                                  "response_end"});
}

TEST_CASE("empty llm output ends the response without synthesis") {
    auto llm = std::make_shared<ScriptedLlm>(); // no deltas
    const auto reg = doubles_registry(llm);

    SessionConfig cfg;
    cfg.llm.provider = "test";
    Session session(cfg, reg);

    Recorder rec;
    const auto record = run_streaming(session, text_input("Hi"), rec.sink());
    REQUIRE(record.has_value());
    CHECK(record->response_text.empty());
    CHECK(record->error.empty());
    CHECK(rec.names() ==
          std::vector<std::string>{"transcript", "response_end"});
    CHECK_FALSE(record->metrics.ttfa_ms.has_value()); // no audio happened
    CHECK(record->metrics.total_ms.has_value());
    CHECK(session.history_size() == 0); // nothing worth remembering

    SessionConfig batch_cfg = cfg;
    batch_cfg.streaming_enabled = false;
    Session batch(batch_cfg, reg);
    Recorder brec;
    REQUIRE(run_batch(batch, text_input("Hi"), brec.sink()).has_value());
    CHECK(brec.names() ==
          std::vector<std::string>{"transcript", "response_end"});
}

TEST_CASE("cancellation aborts the turn without a response end") {
    auto session = make_mock_session();
    auto cancel = std::make_shared<std::atomic<bool>>(false);
    RunOptions options;
    options.cancel = cancel;

    Recorder rec;
    EventSink cancelling = [&](const OutputEvent& e) {
        rec.sink()(e);
        if (std::holds_alternative<SentenceAudioChunkEvent>(e)) {
            cancel->store(true);
        }
    };
    const auto record =
        run_streaming(session, text_input("Hi"), cancelling, options);
    REQUIRE(record.has_value());
    CHECK(record->aborted);
    CHECK(session.history_size() == 0);

    for (const auto& name : rec.names()) {
        CHECK(name != "response_end");
    }
    // The turn got as far as one sentence's audio, not the whole reply.
    CHECK(rec.audio_bytes(0) <= 10400);
    CHECK(rec.audio_bytes(2) == 0);
}

TEST_CASE("back-pressure caps how far the llm can run ahead of playback") {
    auto llm = std::make_shared<ScriptedLlm>();
    for (int i = 0; i < 10; ++i) {
        llm->deltas.push_back("Sentence number " + std::to_string(i) + ". ");
    }
    auto tts = std::make_shared<GatedTts>();
    const auto reg = doubles_registry(llm, tts);

    SessionConfig cfg;
    cfg.llm.provider = "test";
    cfg.tts.provider = "test";
    Session session(cfg, reg);

    Recorder rec;
    std::optional<cui::session::TurnRecord> record;
    std::thread runner([&] {
        record = run_streaming(session, text_input("Hi"), rec.sink());
    });

    // With synthesis stalled, the producer may fill the queue (2) plus the
    // sentence in flight and one delta blocked mid-push, no more.
    std::this_thread::sleep_for(std::chrono::milliseconds(150));
    const int stalled = llm->delivered.load();
    CHECK(stalled >= 3);
    CHECK(stalled <= 5);

    tts->release();
    runner.join();
    CHECK(llm->delivered.load() == 10);
    REQUIRE(record.has_value());
    CHECK(record->error.empty());
    check_ordering(rec.events, 10);
}

TEST_CASE("metrics come from the recorded trace points") {
    EventTrace empty;
    const auto none = measure_metrics(empty);
    CHECK_FALSE(none.stt_ms.has_value());
    CHECK_FALSE(none.llm_first_delta_ms.has_value());
    CHECK_FALSE(none.ttfa_ms.has_value());
    CHECK_FALSE(none.total_ms.has_value());

    EventTrace trace;
    trace.mark(TracePoint::utterance_closed);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    trace.mark(TracePoint::first_audio_chunk);
    trace.mark(TracePoint::first_audio_chunk); // later marks are ignored
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
    trace.mark(TracePoint::response_end);

    const auto metrics = measure_metrics(trace);
    CHECK_FALSE(metrics.stt_ms.has_value());
    REQUIRE(metrics.ttfa_ms.has_value());
    REQUIRE(metrics.total_ms.has_value());
    CHECK(*metrics.ttfa_ms >= 20.0);
    CHECK(*metrics.ttfa_ms <= *metrics.total_ms);
}

TEST_CASE("mock delays surface in the measured metrics") {
    SessionConfig cfg;
    cfg.provider_params = {{"llm_initial_ms", 100},
                           {"llm_inter_sentence_ms", 40},
                           {"tts_per_call_ms", 50}};
    auto session = make_mock_session(cfg);

    Recorder rec;
    const auto record = run_streaming(session, text_input("Hi"), rec.sink());
    REQUIRE(record.has_value());
    const auto& m = record->metrics;
    REQUIRE(m.llm_first_delta_ms.has_value());
    REQUIRE(m.ttfa_ms.has_value());
    REQUIRE(m.total_ms.has_value());
    CHECK(*m.llm_first_delta_ms >= 100.0);
    CHECK(*m.ttfa_ms >= 150.0); // initial delay + one synthesis delay
    CHECK(*m.ttfa_ms < *m.total_ms);
    CHECK(*m.total_ms >= 100.0 + 2 * 40.0 + 50.0);
}
