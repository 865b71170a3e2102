#include "cui/audio.hpp"

#include "cui/errors.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace cui {

namespace {

constexpr std::array<int, 6> kAllowedRates = {8000,  16000, 22050,
                                              24000, 44100, 48000};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) |
           (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return at + 4 <= b.size() && std::memcmp(b.data() + at, tag, 4) == 0;
}

} // namespace

bool is_allowed_sample_rate(int rate) {
    for (int r : kAllowedRates) {
        if (r == rate) return true;
    }
    return false;
}

void validate_audio_format(const AudioFormat& format) {
    if (!is_allowed_sample_rate(format.sample_rate)) {
        throw ConfigError("unsupported sample rate " +
                          std::to_string(format.sample_rate));
    }
    if (format.channels != 1) {
        throw ConfigError("only mono audio is supported");
    }
    if (format.encoding != "pcm_s16le") {
        throw ConfigError("unsupported encoding '" + format.encoding + "'");
    }
}

namespace wav {

std::vector<std::uint8_t> build_header(const AudioFormat& format,
                                       std::uint32_t data_bytes) {
    const auto rate = static_cast<std::uint32_t>(format.sample_rate);
    const auto channels = static_cast<std::uint16_t>(format.channels);
    const std::uint16_t bits = 16;
    const std::uint16_t block_align = channels * (bits / 8);
    const std::uint32_t byte_rate = rate * block_align;

    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + data_bytes);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    put_u32(out, 16);          // PCM fmt chunk size
    put_u16(out, 1);           // format code: PCM
    put_u16(out, channels);
    put_u32(out, rate);
    put_u32(out, byte_rate);
    put_u16(out, block_align);
    put_u16(out, bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, data_bytes);
    return out;
}

ParsedWav parse(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize || !tag_is(bytes, 0, "RIFF") ||
        !tag_is(bytes, 8, "WAVE")) {
        throw InputError("not a RIFF/WAVE file");
    }

    ParsedWav result;
    bool saw_fmt = false;
    bool saw_data = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_size = get_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (tag_is(bytes, pos, "fmt ")) {
            if (chunk_size < 16 || body + 16 > bytes.size()) {
                throw InputError("malformed fmt chunk");
            }
            const std::uint16_t code = get_u16(bytes, body);
            if (code != 1) {
                throw InputError("unsupported WAV codec (only PCM)");
            }
            const std::uint16_t channels = get_u16(bytes, body + 2);
            if (channels != 1) {
                throw InputError("only mono WAV is supported");
            }
            const std::uint16_t bits = get_u16(bytes, body + 14);
            if (bits != 16) {
                throw InputError("only 16-bit WAV is supported");
            }
            result.format.sample_rate =
                static_cast<int>(get_u32(bytes, body + 4));
            result.format.channels = 1;
            result.format.encoding = "pcm_s16le";
            saw_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            if (body + chunk_size > bytes.size()) {
                throw InputError("truncated WAV data chunk");
            }
            result.samples.assign(bytes.begin() + body,
                                  bytes.begin() + body + chunk_size);
            saw_data = true;
        }
        // Chunks are word-aligned; odd sizes carry one pad byte.
        pos = body + chunk_size + (chunk_size & 1);
    }

    if (!saw_fmt || !saw_data) {
        throw InputError("WAV is missing fmt or data chunk");
    }
    return result;
}

void write_file(const std::string& path, const AudioFormat& format,
                std::span<const std::uint8_t> samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot open '" + path + "' for writing");
    }
    const auto header =
        build_header(format, static_cast<std::uint32_t>(samples.size()));
    out.write(reinterpret_cast<const char*>(header.data()),
              static_cast<std::streamsize>(header.size()));
    out.write(reinterpret_cast<const char*>(samples.data()),
              static_cast<std::streamsize>(samples.size()));
    if (!out) {
        throw InputError("failed writing '" + path + "'");
    }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    return {std::istreambuf_iterator<char>(in),
            std::istreambuf_iterator<char>()};
}

} // namespace wav

} // namespace cui
