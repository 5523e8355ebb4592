#pragma once
// Knowledge-graph entity documents: the parsed form of one revision's JSON
// content. The accepted dialect is the Wikibase labels/descriptions/aliases/
// claims shape; everything downstream works on the normalized types here.
//
// All types are immutable-by-convention after construction and safe to share
// across threads.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kgrev/util.hpp"

namespace kgrev {

struct EntityRef {
    std::string id;  // Q<digits>
    auto operator<=>(const EntityRef&) const = default;
};

struct Text {
    std::string value;
    auto operator<=>(const Text&) const = default;
};

struct MonolingualText {
    std::string language;
    std::string value;
    auto operator<=>(const MonolingualText&) const = default;
};

struct Quantity {
    // Amount kept as the decimal string of the source document ("+5.2") so
    // equality and round-trips stay exact.
    std::string amount;
    std::optional<std::string> unit;  // entity id, absent for dimensionless
    auto operator<=>(const Quantity&) const = default;
};

struct TimePoint {
    std::string timestamp;  // ISO-8601-like, e.g. "+2021-01-01T00:00:00Z"
    int precision = 11;     // 0..14, Wikibase scale (11 = day)
    auto operator<=>(const TimePoint&) const = default;
};

struct Coordinate {
    double latitude = 0.0;   // [-90, 90]
    double longitude = 0.0;  // [-180, 180]
    auto operator<=>(const Coordinate&) const = default;
};

struct SomeValue {
    auto operator<=>(const SomeValue&) const = default;
};
struct NoValue {
    auto operator<=>(const NoValue&) const = default;
};

// Exactly one variant is populated. Unsupported source value kinds are
// degraded to Text of their canonical serialized JSON so the diff engine
// still sees changes to them.
using StatementValue = std::variant<EntityRef, Text, MonolingualText, Quantity, TimePoint,
                                    Coordinate, SomeValue, NoValue>;

// Stable ordering key; used wherever deltas or statements need a
// deterministic order that is independent of container iteration.
std::string canonical_value_key(const StatementValue& v);

struct Statement {
    std::string property;  // P<digits>
    StatementValue value;
    auto operator<=>(const Statement&) const = default;
};

struct EntityDocument {
    std::string id;  // Q<digits>
    std::map<std::string, std::string> labels;        // language -> text
    std::map<std::string, std::string> descriptions;  // language -> text
    std::map<std::string, std::vector<std::string>> aliases;  // language -> ordered, deduped
    std::map<std::string, std::vector<Statement>> statements;  // property -> source order

    bool operator==(const EntityDocument&) const = default;
};

// Parses Wikibase entity JSON. Statement values of kinds beyond the
// supported variants (or with out-of-range payloads) fall back to Text of
// their serialized form. Qualifiers and ranks are accepted and dropped.
// Throws MalformedDocument (not JSON / missing id) or InvalidIdentifier.
EntityDocument parse_entity(std::string_view raw);

// Inverse of parse_entity for supported content: parse(serialize(d)) == d.
std::string serialize_entity(const EntityDocument& doc);

// English labels for entity/property ids.
class LabelMap {
public:
    LabelMap() = default;

    // TSV, two tab-separated columns: id<TAB>english_label. UTF-8, one
    // entry per line. Later duplicates win. Throws IoError on bad rows.
    static LabelMap load_tsv(const std::string& path);
    static LabelMap from_entries(std::map<std::string, std::string> entries);

    void set(const std::string& id, const std::string& label);
    size_t size() const { return entries_.size(); }

    // Total: returns the mapped label, or "unknown" when the id is absent.
    const std::string& resolve(std::string_view id) const;

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

// The fallback label for unmapped ids; also a legitimate model signal.
inline constexpr std::string_view kUnknownLabel = "unknown";

}  // namespace kgrev
