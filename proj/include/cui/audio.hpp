#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cui {

// Uncompressed mono PCM, signed 16-bit little-endian. The only encoding the
// gateway moves around; anything else is rejected at config time.
struct AudioFormat {
    int sample_rate = 16000;
    int channels = 1;
    std::string encoding = "pcm_s16le";

    bool operator==(const AudioFormat&) const = default;
};

bool is_allowed_sample_rate(int rate);

// Throws ConfigError when the format is outside the allowed set
// (rate in {8000, 16000, 22050, 24000, 44100, 48000}, mono, pcm_s16le).
void validate_audio_format(const AudioFormat& format);

namespace wav {

inline constexpr std::size_t kHeaderSize = 44;

// Canonical 44-byte RIFF/WAVE header for PCM s16le.
std::vector<std::uint8_t> build_header(const AudioFormat& format,
                                       std::uint32_t data_bytes);

struct ParsedWav {
    AudioFormat format;
    std::vector<std::uint8_t> samples;
};

// Accepts PCM (format code 1), 16-bit, mono only; skips unknown chunks.
// Throws InputError on malformed headers, unsupported codec/bit depth, or
// when the data chunk declares more bytes than are present ("truncated").
ParsedWav parse(std::span<const std::uint8_t> bytes);

// Writes header + samples. Throws InputError on I/O failure.
void write_file(const std::string& path, const AudioFormat& format,
                std::span<const std::uint8_t> samples);

std::vector<std::uint8_t> read_file(const std::string& path);

} // namespace wav

} // namespace cui
