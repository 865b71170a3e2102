#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cui::pipeline {

// Incremental sentence splitter over an LLM delta stream.
//
// A boundary fires when a terminator (".", "!", "?", or U+2026) is already
// followed by at least one whitespace byte in the buffer. A trailing
// terminator ("Hello.") waits for the next delta or flush(). Emitted
// sentences are trimmed of leading whitespace and keep their terminator;
// the whitespace run after the terminator is consumed.
//
// The rule is deliberately naive: abbreviations like "Dr." split early,
// which costs TTS prosody, not correctness.
class SentenceSegmenter {
public:
    // Appends the delta and returns every completed sentence, in order.
    std::vector<std::string> feed(std::string_view delta);

    // Ends the stream: returns the trimmed remainder as a final sentence
    // if it is non-blank. Empties the pending buffer either way.
    std::optional<std::string> flush();

    const std::string& pending() const { return pending_; }

private:
    std::string pending_;
};

} // namespace cui::pipeline
