#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kgrev {

// Base class for all library errors. Subclasses carry the condition name
// used in diagnostics and exit-code mapping.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define KGREV_DEFINE_ERROR(Name)                                   \
    class Name : public Error {                                    \
    public:                                                        \
        explicit Name(const std::string& what) : Error(what) {}    \
    }

KGREV_DEFINE_ERROR(MalformedDocument);
KGREV_DEFINE_ERROR(InvalidIdentifier);
KGREV_DEFINE_ERROR(EntityMismatch);
KGREV_DEFINE_ERROR(InconsistentDelta);
KGREV_DEFINE_ERROR(EmptyRevision);
KGREV_DEFINE_ERROR(InvalidRatio);
KGREV_DEFINE_ERROR(EmptyPartition);
KGREV_DEFINE_ERROR(SingleClass);
KGREV_DEFINE_ERROR(EmptyInput);
KGREV_DEFINE_ERROR(EmptyValidation);
KGREV_DEFINE_ERROR(SingleClassInGroup);
KGREV_DEFINE_ERROR(EmptyGroup);
KGREV_DEFINE_ERROR(ZeroPrivilegedRate);
KGREV_DEFINE_ERROR(NoPositives);
KGREV_DEFINE_ERROR(InvalidModel);
KGREV_DEFINE_ERROR(IoError);
KGREV_DEFINE_ERROR(NotFound);
KGREV_DEFINE_ERROR(RateLimited);
KGREV_DEFINE_ERROR(UpstreamError);
KGREV_DEFINE_ERROR(UpstreamTimeout);

#undef KGREV_DEFINE_ERROR

// FNV-1a, 64 bit. Stable across platforms; used for feature hashing and
// content fingerprints, never for security.
constexpr uint64_t fnv1a64(std::string_view data, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64: cheap, well-mixed derivation of per-stream seeds from a
// master seed, so parallel substreams stay reproducible.
constexpr uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string base64_encode(const void* data, size_t len);
std::vector<uint8_t> base64_decode(std::string_view text);

// Seconds since the Unix epoch, UTC.
using Instant = int64_t;

/// Parses "YYYY-MM-DDTHH:MM:SSZ" (fractional seconds and a leading '+'
// tolerated). Throws IoError on anything else.
Instant parse_instant(std::string_view iso);
std::string format_instant(Instant t);

// Reads a whole text file, transparently gunzipping when the content is
// gzip-compressed (detected by magic bytes, not extension).
std::vector<std::string> read_lines(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

bool matches_entity_id(std::string_view s);    // Q<digits>
bool matches_property_id(std::string_view s);  // P<digits>
bool matches_any_id(std::string_view s);       // [PQ]<digits>
bool valid_language_code(std::string_view s);  // lowercase ASCII + hyphenated subtags

}  // namespace kgrev
