#pragma once

#include "cui/session.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cui::pipeline {

// Audio chunks for one utterance, concatenated in arrival order.
class UtteranceBuffer {
public:
    explicit UtteranceBuffer(std::size_t max_bytes = kDefaultMaxBytes);

    // Throws ProtocolError(oversize) past the cap; appending after close is
    // a caller bug and throws Error.
    void append(std::span<const std::uint8_t> chunk);
    void close();
    void reset();

    bool closed() const { return closed_; }
    bool empty() const { return data_.empty(); }
    std::size_t size() const { return data_.size(); }
    std::span<const std::uint8_t> bytes() const { return data_; }

    static constexpr std::size_t kDefaultMaxBytes = 10 * 1024 * 1024;

private:
    std::size_t max_bytes_;
    std::vector<std::uint8_t> data_;
    bool closed_ = false;
};

// Everything a pipeline run can tell the transport, in emission order.
struct TranscriptEvent {
    std::string text;
};
struct SentenceTextEvent {
    int index;
    std::string text;
};
struct SentenceAudioChunkEvent {
    int index;
    std::vector<std::uint8_t> bytes;
};
struct SentenceAudioEndEvent {
    int index;
};
struct ResponseEndEvent {};
struct PipelineErrorEvent {
    std::string stage; // "stt" | "llm" | "tts"
    std::string reason;
};

using OutputEvent =
    std::variant<TranscriptEvent, SentenceTextEvent, SentenceAudioChunkEvent,
                 SentenceAudioEndEvent, ResponseEndEvent, PipelineErrorEvent>;

using EventSink = std::function<void(const OutputEvent&)>;

std::string_view event_name(const OutputEvent& event);

// Milestones a run passes through; each point keeps its first occurrence.
enum class TracePoint {
    utterance_closed,
    prompt_sent,
    transcript_ready,
    first_llm_delta,
    first_audio_chunk,
    response_end,
};
inline constexpr std::size_t kTracePointCount = 6;

class EventTrace {
public:
    void mark(TracePoint point);
    std::optional<std::chrono::steady_clock::time_point>
    at(TracePoint point) const;

private:
    std::optional<std::chrono::steady_clock::time_point>
        points_[kTracePointCount];
};

// Derives per-turn latencies; any metric whose endpoints were not both
// recorded stays empty.
//   stt_ms            = transcript_ready - utterance_closed
//   llm_first_delta_ms = first_llm_delta - prompt_sent
//   ttfa_ms           = first_audio_chunk - utterance_closed
//   total_ms          = response_end - utterance_closed
session::TurnMetrics measure_metrics(const EventTrace& trace);

// The input of one turn: either a closed audio utterance or text that skips
// the STT stage entirely.
struct RunInput {
    const UtteranceBuffer* utterance = nullptr;
    std::optional<std::string> direct_text;
};

struct RunOptions {
    // Checked between events; a cancelled run stops emitting and commits an
    // aborted record.
    std::shared_ptr<std::atomic<bool>> cancel;
    // Sentences synthesized ahead of the one being emitted.
    std::size_t tts_queue_depth = 2;
};

// Runs one turn sentence-by-sentence: the reply is segmented as it streams
// and each complete sentence is synthesized and emitted while the model is
// still generating. Returns the committed record, or nothing when the turn
// failed before producing a transcript (an STT failure emits PipelineError
// and commits no turn).
std::optional<session::TurnRecord> run_streaming(session::Session& session,
                                                 const RunInput& input,
                                                 const EventSink& sink,
                                                 const RunOptions& options = {});

// Waits for the full reply, then synthesizes it as one piece: one
// SentenceText covering everything, one audio stream. The latency baseline.
std::optional<session::TurnRecord> run_batch(session::Session& session,
                                             const RunInput& input,
                                             const EventSink& sink,
                                             const RunOptions& options = {});

// Dispatches on the session's streaming flag.
std::optional<session::TurnRecord> run_turn(session::Session& session,
                                            const RunInput& input,
                                            const EventSink& sink,
                                            const RunOptions& options = {});

} // namespace cui::pipeline
