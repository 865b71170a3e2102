#include "cui/pipeline.hpp"

#include "cui/detail/bounded_queue.hpp"
#include "cui/detail/utf8.hpp"
#include "cui/errors.hpp"
#include "cui/segmenter.hpp"

#include <thread>

namespace cui::pipeline {

namespace {

bool cancelled(const RunOptions& options) {
    return options.cancel && options.cancel->load();
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string join_sentences(const std::vector<std::string>& sentences) {
    std::string out;
    for (const auto& s : sentences) {
        if (!out.empty()) out += ' ';
        out += s;
    }
    return out;
}

// Resolves the turn's transcript (running STT unless the input is already
// text). On failure emits PipelineError("stt", ...) and returns nothing;
// such a turn is never committed.
std::optional<std::string> acquire_transcript(session::Session& session,
                                              const RunInput& input,
                                              const EventSink& sink,
                                              const RunOptions& options,
                                              EventTrace& trace) {
    try {
        std::string transcript;
        if (input.direct_text) {
            if (!detail::utf8_valid(*input.direct_text)) {
                throw ProviderError("stt", "text input is not valid UTF-8");
            }
            transcript = *input.direct_text;
            if (trim(transcript).empty()) {
                throw ProviderError("stt", "text input is empty");
            }
        } else {
            if (!input.utterance || input.utterance->empty()) {
                throw ProviderError("stt", "utterance contains no audio");
            }
            transcript = session.stt().transcribe(
                input.utterance->bytes(), session.config().audio_in);
        }
        trace.mark(TracePoint::transcript_ready);
        if (!cancelled(options)) sink(TranscriptEvent{transcript});
        return transcript;
    } catch (const ProviderError& e) {
        if (!cancelled(options)) sink(PipelineErrorEvent{e.stage(), e.what()});
        return std::nullopt;
    }
}

} // namespace

UtteranceBuffer::UtteranceBuffer(std::size_t max_bytes)
    : max_bytes_(max_bytes) {}

void UtteranceBuffer::append(std::span<const std::uint8_t> chunk) {
    if (closed_) {
        throw Error("utterance is already closed");
    }
    if (data_.size() + chunk.size() > max_bytes_) {
        throw ProtocolError(ProtocolError::Kind::oversize,
                            "utterance exceeds " +
                                std::to_string(max_bytes_) + " bytes");
    }
    data_.insert(data_.end(), chunk.begin(), chunk.end());
}

void UtteranceBuffer::close() { closed_ = true; }

void UtteranceBuffer::reset() {
    data_.clear();
    closed_ = false;
}

std::string_view event_name(const OutputEvent& event) {
    struct Visitor {
        std::string_view operator()(const TranscriptEvent&) { return "transcript"; }
        std::string_view operator()(const SentenceTextEvent&) { return "sentence_text"; }
        std::string_view operator()(const SentenceAudioChunkEvent&) { return "sentence_audio_chunk"; }
        std::string_view operator()(const SentenceAudioEndEvent&) { return "sentence_audio_end"; }
        std::string_view operator()(const ResponseEndEvent&) { return "response_end"; }
        std::string_view operator()(const PipelineErrorEvent&) { return "pipeline_error"; }
    };
    return std::visit(Visitor{}, event);
}

void EventTrace::mark(TracePoint point) {
    auto& slot = points_[static_cast<std::size_t>(point)];
    if (!slot) slot = std::chrono::steady_clock::now();
}

std::optional<std::chrono::steady_clock::time_point>
EventTrace::at(TracePoint point) const {
    return points_[static_cast<std::size_t>(point)];
}

session::TurnMetrics measure_metrics(const EventTrace& trace) {
    const auto gap = [&](TracePoint from,
                         TracePoint to) -> std::optional<double> {
        const auto a = trace.at(from);
        const auto b = trace.at(to);
        if (!a || !b) return std::nullopt;
        return std::chrono::duration<double, std::milli>(*b - *a).count();
    };
    session::TurnMetrics out;
    out.stt_ms = gap(TracePoint::utterance_closed, TracePoint::transcript_ready);
    out.llm_first_delta_ms =
        gap(TracePoint::prompt_sent, TracePoint::first_llm_delta);
    out.ttfa_ms =
        gap(TracePoint::utterance_closed, TracePoint::first_audio_chunk);
    out.total_ms = gap(TracePoint::utterance_closed, TracePoint::response_end);
    return out;
}

std::optional<session::TurnRecord> run_streaming(session::Session& session,
                                                 const RunInput& input,
                                                 const EventSink& sink,
                                                 const RunOptions& options) {
    EventTrace trace;
    trace.mark(TracePoint::utterance_closed);

    auto transcript = acquire_transcript(session, input, sink, options, trace);
    if (!transcript) return std::nullopt;

    const auto messages = session.render_prompt(*transcript);
    trace.mark(TracePoint::prompt_sent);

    // The producer segments the delta stream into sentences; the capacity
    // bound keeps synthesis at most a couple of sentences ahead of what the
    // client has been sent.
    detail::BoundedQueue<std::string> queue(
        std::max<std::size_t>(1, options.tts_queue_depth));
    bool llm_failed = false;
    std::string llm_reason;

    std::thread producer([&] {
        SentenceSegmenter segmenter;
        try {
            session.llm().generate(
                messages, session.config().llm.model,
                [&](std::string_view delta) {
                    trace.mark(TracePoint::first_llm_delta);
                    for (auto& sentence : segmenter.feed(delta)) {
                        if (!queue.push(std::move(sentence))) return false;
                    }
                    return !cancelled(options);
                });
            if (auto tail = segmenter.flush()) {
                queue.push(std::move(*tail));
            }
        } catch (const std::exception& e) {
            llm_failed = true;
            llm_reason = e.what();
        }
        queue.close();
    });

    std::vector<std::string> sentences;
    bool tts_failed = false;
    std::string tts_reason;
    bool aborted = false;
    int index = 0;
    while (auto sentence = queue.pop()) {
        if (cancelled(options)) {
            aborted = true;
            break;
        }
        sink(SentenceTextEvent{index, *sentence});
        sentences.push_back(std::move(*sentence));
        try {
            session.tts().synthesize(
                sentences.back(), session.config().voice,
                session.config().audio_out,
                [&](std::span<const std::uint8_t> chunk) {
                    if (cancelled(options)) return false;
                    trace.mark(TracePoint::first_audio_chunk);
                    sink(SentenceAudioChunkEvent{
                        index, {chunk.begin(), chunk.end()}});
                    return true;
                });
        } catch (const std::exception& e) {
            tts_failed = true;
            tts_reason = e.what();
            break;
        }
        if (cancelled(options)) {
            aborted = true;
            break;
        }
        sink(SentenceAudioEndEvent{index});
        ++index;
    }
    queue.close(); // unblock the producer if we bailed early
    producer.join();
    if (cancelled(options)) aborted = true;

    std::string error;
    if (tts_failed) {
        error = "tts: " + tts_reason;
        if (!aborted) sink(PipelineErrorEvent{"tts", tts_reason});
    } else if (llm_failed) {
        error = "llm: " + llm_reason;
        if (!aborted) sink(PipelineErrorEvent{"llm", llm_reason});
    }

    trace.mark(TracePoint::response_end);
    if (!aborted) sink(ResponseEndEvent{});

    return session.commit_turn(std::move(*transcript),
                               join_sentences(sentences),
                               measure_metrics(trace), std::move(error),
                               aborted);
}

std::optional<session::TurnRecord> run_batch(session::Session& session,
                                             const RunInput& input,
                                             const EventSink& sink,
                                             const RunOptions& options) {
    EventTrace trace;
    trace.mark(TracePoint::utterance_closed);

    auto transcript = acquire_transcript(session, input, sink, options, trace);
    if (!transcript) return std::nullopt;

    const auto messages = session.render_prompt(*transcript);
    trace.mark(TracePoint::prompt_sent);

    std::string full_text;
    bool llm_failed = false;
    std::string llm_reason;
    try {
        session.llm().generate(messages, session.config().llm.model,
                               [&](std::string_view delta) {
                                   trace.mark(TracePoint::first_llm_delta);
                                   full_text += delta;
                                   return !cancelled(options);
                               });
    } catch (const std::exception& e) {
        llm_failed = true;
        llm_reason = e.what();
    }
    full_text = trim(full_text);

    bool aborted = cancelled(options);
    std::string error;
    if (llm_failed) {
        error = "llm: " + llm_reason;
        if (!aborted) sink(PipelineErrorEvent{"llm", llm_reason});
    } else if (!full_text.empty() && !aborted) {
        sink(SentenceTextEvent{0, full_text});
        try {
            session.tts().synthesize(
                full_text, session.config().voice, session.config().audio_out,
                [&](std::span<const std::uint8_t> chunk) {
                    if (cancelled(options)) return false;
                    trace.mark(TracePoint::first_audio_chunk);
                    sink(SentenceAudioChunkEvent{0, {chunk.begin(), chunk.end()}});
                    return true;
                });
            if (!cancelled(options)) sink(SentenceAudioEndEvent{0});
        } catch (const std::exception& e) {
            error = std::string("tts: ") + e.what();
            if (!cancelled(options)) sink(PipelineErrorEvent{"tts", e.what()});
        }
    }
    if (cancelled(options)) aborted = true;

    trace.mark(TracePoint::response_end);
    if (!aborted) sink(ResponseEndEvent{});

    return session.commit_turn(std::move(*transcript), std::move(full_text),
                               measure_metrics(trace), std::move(error),
                               aborted);
}

std::optional<session::TurnRecord> run_turn(session::Session& session,
                                            const RunInput& input,
                                            const EventSink& sink,
                                            const RunOptions& options) {
    if (session.config().streaming_enabled) {
        return run_streaming(session, input, sink, options);
    }
    return run_batch(session, input, sink, options);
}

} // namespace cui::pipeline
