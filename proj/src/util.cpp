#include "kgrev/util.hpp"

#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace kgrev {

namespace {

constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_value(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

}  // namespace

std::string base64_encode(const void* data, size_t len) {
    const auto* bytes = static_cast<const uint8_t*>(data);
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (size_t i = 0; i < len; i += 3) {
        uint32_t chunk = uint32_t(bytes[i]) << 16;
        if (i + 1 < len) chunk |= uint32_t(bytes[i + 1]) << 8;
        if (i + 2 < len) chunk |= uint32_t(bytes[i + 2]);
        out.push_back(kB64Alphabet[(chunk >> 18) & 0x3f]);
        out.push_back(kB64Alphabet[(chunk >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? kB64Alphabet[(chunk >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? kB64Alphabet[chunk & 0x3f] : '=');
    }
    return out;
}

std::vector<uint8_t> base64_decode(std::string_view text) {
    std::vector<uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    size_t sig = 0, pads = 0;
    for (char c : text) {
        if (c == '\n' || c == '\r') continue;
        if (c == '=') {
            ++pads;
            continue;
        }
        if (pads > 0) throw IoError("base64: data after padding");
        int v = b64_value(c);
        if (v < 0) throw IoError("base64: invalid character");
        acc = (acc << 6) | uint32_t(v);
        bits += 6;
        ++sig;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(uint8_t((acc >> bits) & 0xff));
        }
    }
    if ((sig + pads) % 4 != 0 || sig % 4 == 1 || pads > 2) {
        throw IoError("base64: truncated input");
    }
    if (bits > 0 && (acc & ((1u << bits) - 1)) != 0) {
        throw IoError("base64: nonzero padding bits");
    }
    return out;
}

Instant parse_instant(std::string_view iso) {
    std::string s(iso);
    if (!s.empty() && s.front() == '+') s.erase(s.begin());
    int year = 0, mon = 0, day = 0, hh = 0, mm = 0, consumed = 0;
    double ss = -1.0;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%lf%n", &year, &mon, &day, &hh, &mm, &ss,
                    &consumed) != 6) {
        throw IoError("unparseable timestamp: " + s);
    }
    std::string rest = s.substr(size_t(consumed));
    if (!rest.empty() && rest != "Z") throw IoError("unparseable timestamp: " + s);
    if (ss < 0.0 || ss >= 60.0) throw IoError("timestamp field out of range: " + s);
    std::tm tm{};
    tm.tm_year = year - 1900;
    tm.tm_mon = mon - 1;
    tm.tm_mday = day;
    tm.tm_hour = hh;
    tm.tm_min = mm;
    tm.tm_sec = int(ss);
    time_t t = timegm(&tm);
    if (t == time_t(-1) && year != 1969) throw IoError("timestamp out of range: " + s);
    // timegm normalizes out-of-range fields; a changed field means the
    // input was not a real calendar time.
    std::tm check{};
    gmtime_r(&t, &check);
    if (check.tm_year != year - 1900 || check.tm_mon != mon - 1 || check.tm_mday != day ||
        check.tm_hour != hh || check.tm_min != mm || check.tm_sec != int(ss)) {
        throw IoError("timestamp field out of range: " + s);
    }
    return Instant(t);
}

std::string format_instant(Instant t) {
    std::tm tm{};
    time_t tt = time_t(t);
    gmtime_r(&tt, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string raw = buf.str();
    if (raw.size() >= 2 && uint8_t(raw[0]) == 0x1f && uint8_t(raw[1]) == 0x8b) {
        gzFile gz = gzopen(path.c_str(), "rb");
        if (!gz) throw IoError("cannot gzopen " + path);
        std::string out;
        char chunk[1 << 16];
        int n;
        while ((n = gzread(gz, chunk, sizeof(chunk))) > 0) out.append(chunk, size_t(n));
        bool bad = n < 0;
        gzclose(gz);
        if (bad) throw IoError("gzip read error in " + path);
        return out;
    }
    return raw;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::string content = read_file(path);
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < content.size()) {
        size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        size_t len = end - start;
        if (len > 0 && content[start + len - 1] == '\r') --len;
        lines.emplace_back(content.substr(start, len));
        start = end + 1;
    }
    return lines;
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(content.data(), std::streamsize(content.size()));
    if (!out) throw IoError("write failed: " + path);
}

namespace {
bool id_with_prefix(std::string_view s, char prefix) {
    if (s.size() < 2 || s[0] != prefix) return false;
    for (size_t i = 1; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return false;
    }
    return true;
}
}  // namespace

bool matches_entity_id(std::string_view s) { return id_with_prefix(s, 'Q'); }
bool matches_property_id(std::string_view s) { return id_with_prefix(s, 'P'); }
bool matches_any_id(std::string_view s) {
    return matches_entity_id(s) || matches_property_id(s);
}

bool valid_language_code(std::string_view s) {
    if (s.empty()) return false;
    bool first_subtag = true;
    size_t subtag_len = 0;
    for (char c : s) {
        if (c == '-') {
            if (subtag_len == 0) return false;
            subtag_len = 0;
            first_subtag = false;
            continue;
        }
        bool lower = c >= 'a' && c <= 'z';
        bool digit = c >= '0' && c <= '9';
        if (!(lower || (digit && !first_subtag))) return false;
        ++subtag_len;
    }
    return subtag_len > 0;
}

}  // namespace kgrev
