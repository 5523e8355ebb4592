#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <zlib.h>

#include "kgrev/util.hpp"
#include "support/tempdir.hpp"

using namespace kgrev;

TEST_CASE("fnv1a64 matches published vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("fnv1a64 seed changes the stream") {
    CHECK(fnv1a64("anthem", fnv1a64("word:1")) != fnv1a64("anthem", fnv1a64("word:2")));
    CHECK(fnv1a64("anthem") == fnv1a64("anthem"));
}

TEST_CASE("splitmix64 matches the reference stream") {
    // First output of the reference splitmix64 generator seeded with 1234567.
    CHECK(splitmix64(1234567) == 6457827717110365317ULL);
    CHECK(splitmix64(0) != splitmix64(1));
}

TEST_CASE("base64 known vectors and padding") {
    auto enc = [](std::string_view s) { return base64_encode(s.data(), s.size()); };
    CHECK(enc("Man") == "TWFu");
    CHECK(enc("Ma") == "TWE=");
    CHECK(enc("M") == "TQ==");
    CHECK(enc("") == "");
}

TEST_CASE("base64 round-trips random binary data") {
    std::mt19937_64 rng(99);
    for (int len : {0, 1, 2, 3, 57, 256, 1000}) {
        std::vector<uint8_t> bytes(static_cast<size_t>(len), 0);
        for (auto& b : bytes) b = uint8_t(rng());
        auto text = base64_encode(bytes.data(), bytes.size());
        CHECK(base64_decode(text) == bytes);
    }
}

TEST_CASE("base64 decode rejects corrupt input") {
    CHECK_THROWS_AS(base64_decode("not valid!!"), Error);
    CHECK_THROWS_AS(base64_decode("TWF"), Error);
}

TEST_CASE("parse_instant handles the revision timestamp dialects") {
    CHECK(parse_instant("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_instant("2021-03-04T05:06:07Z") == 1614834367);
    CHECK(parse_instant("2021-03-04T05:06:07.123Z") == 1614834367);
    CHECK(parse_instant("+2021-03-04T05:06:07Z") == 1614834367);
    CHECK(parse_instant("2020-02-29T00:00:00Z") == 1582934400);  // leap day
}

TEST_CASE("parse_instant rejects non-timestamps") {
    CHECK_THROWS_AS(parse_instant(""), IoError);
    CHECK_THROWS_AS(parse_instant("yesterday"), IoError);
    CHECK_THROWS_AS(parse_instant("2021-13-01T00:00:00Z"), IoError);
    CHECK_THROWS_AS(parse_instant("2021-03-04"), IoError);
}

TEST_CASE("format_instant inverts parse_instant") {
    CHECK(format_instant(0) == "1970-01-01T00:00:00Z");
    for (const char* iso : {"2001-09-09T01:46:40Z", "2021-03-04T05:06:07Z",
                            "2038-01-19T03:14:07Z"}) {
        CHECK(format_instant(parse_instant(iso)) == iso);
    }
}

TEST_CASE("read_lines reads plain and gzipped files identically") {
    testgen::TempDir dir;
    std::string content = "first line\nsecond line\n\nfourth line";
    write_file(dir.file("plain.jsonl"), content);

    auto gz = gzopen(dir.file("packed.jsonl.gz").c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, content.data(), unsigned(content.size()));
    gzclose(gz);

    auto plain = read_lines(dir.file("plain.jsonl"));
    auto packed = read_lines(dir.file("packed.jsonl.gz"));
    REQUIRE(plain.size() == 4);
    CHECK(plain[0] == "first line");
    CHECK(plain[2] == "");
    CHECK(plain == packed);
}

TEST_CASE("read_file throws on a missing path") {
    CHECK_THROWS_AS(read_file("/nonexistent/kgrev-no-such-file"), IoError);
}

TEST_CASE("identifier matchers") {
    CHECK(matches_entity_id("Q42"));
    CHECK(matches_entity_id("Q888888888"));
    CHECK_FALSE(matches_entity_id("P42"));
    CHECK_FALSE(matches_entity_id("Q"));
    CHECK_FALSE(matches_entity_id("Q42x"));
    CHECK_FALSE(matches_entity_id("q42"));

    CHECK(matches_property_id("P999999"));
    CHECK_FALSE(matches_property_id("Q42"));

    CHECK(matches_any_id("Q1"));
    CHECK(matches_any_id("P1"));
    CHECK_FALSE(matches_any_id("L1"));
}

TEST_CASE("language code validation") {
    CHECK(valid_language_code("en"));
    CHECK(valid_language_code("pt-br"));
    CHECK(valid_language_code("zh-hant"));
    CHECK(valid_language_code("es-419"));
    CHECK_FALSE(valid_language_code(""));
    CHECK_FALSE(valid_language_code("EN"));
    CHECK_FALSE(valid_language_code("en_US"));
    CHECK_FALSE(valid_language_code("en-"));
    CHECK_FALSE(valid_language_code("-en"));
    CHECK_FALSE(valid_language_code("419"));  // first subtag must be alphabetic
}
