#include "doctest.h"

#include "cui/sse.hpp"

#include <random>
#include <string>
#include <vector>

using cui::remote::kSseDone;
using cui::remote::SseParser;

namespace {

std::vector<std::string> feed_all(const std::string& body,
                                  const std::vector<std::size_t>& cuts) {
    SseParser parser;
    std::vector<std::string> events;
    std::size_t pos = 0;
    auto take = [&](std::vector<std::string> got) {
        for (auto& e : got) events.push_back(std::move(e));
    };
    for (std::size_t cut : cuts) {
        take(parser.feed(std::string_view(body).substr(pos, cut - pos)));
        pos = cut;
    }
    take(parser.feed(std::string_view(body).substr(pos)));
    take(parser.finish());
    return events;
}

} // namespace

TEST_CASE("sse events are the data payloads, one per blank-line boundary") {
    SseParser parser;
    const auto events =
        parser.feed("data: {\"a\":1}\n\ndata: {\"b\":2}\n\ndata: [DONE]\n\n");
    REQUIRE(events.size() == 3);
    CHECK(events[0] == "{\"a\":1}");
    CHECK(events[1] == "{\"b\":2}");
    CHECK(events[2] == kSseDone);
}

TEST_CASE("sse tolerates CRLF, comments, and other fields") {
    SseParser parser;
    const auto events = parser.feed(
        ": keep-alive\r\n\r\n"
        "event: message\r\n"
        "id: 42\r\n"
        "data: hello\r\n"
        "\r\n");
    REQUIRE(events.size() == 1);
    CHECK(events[0] == "hello");
}

TEST_CASE("multiple data lines join with a newline") {
    SseParser parser;
    const auto events = parser.feed("data: line one\ndata: line two\n\n");
    REQUIRE(events.size() == 1);
    CHECK(events[0] == "line one\nline two");
}

TEST_CASE("data without the optional space is accepted") {
    SseParser parser;
    const auto events = parser.feed("data:tight\n\n");
    REQUIRE(events.size() == 1);
    CHECK(events[0] == "tight");
}

TEST_CASE("an empty data line still produces an event") {
    SseParser parser;
    const auto events = parser.feed("data:\n\n");
    REQUIRE(events.size() == 1);
    CHECK(events[0].empty());
}

TEST_CASE("finish flushes a stream cut mid-event") {
    SseParser parser;
    CHECK(parser.feed("data: half").empty());
    CHECK(parser.mid_event());
    const auto events = parser.finish();
    REQUIRE(events.size() == 1);
    CHECK(events[0] == "half");
    CHECK_FALSE(parser.mid_event());

    SseParser clean;
    clean.feed("data: whole\n\n");
    CHECK_FALSE(clean.mid_event());
    CHECK(clean.finish().empty());
}

TEST_CASE("event boundaries are independent of transport fragmentation") {
    std::string body;
    std::vector<std::string> expected;
    for (int i = 0; i < 24; ++i) {
        const std::string payload =
            "{\"choices\":[{\"delta\":{\"content\":\"w" + std::to_string(i) +
            "\"}}]}";
        body += "data: " + payload + "\n\n";
        expected.push_back(payload);
    }
    body += "data: [DONE]\n\n";
    expected.emplace_back(kSseDone);

    CHECK(feed_all(body, {}) == expected);

    // Byte-at-a-time is the worst case.
    std::vector<std::size_t> every_byte;
    for (std::size_t i = 1; i < body.size(); ++i) every_byte.push_back(i);
    CHECK(feed_all(body, every_byte) == expected);

    std::mt19937 rng(777);
    std::uniform_int_distribution<std::size_t> cut_at(0, body.size());
    for (int iter = 0; iter < 120; ++iter) {
        std::uniform_int_distribution<int> cut_count(1, 40);
        std::vector<std::size_t> cuts;
        const int k = cut_count(rng);
        for (int i = 0; i < k; ++i) cuts.push_back(cut_at(rng));
        std::sort(cuts.begin(), cuts.end());
        REQUIRE(feed_all(body, cuts) == expected);
    }
}
