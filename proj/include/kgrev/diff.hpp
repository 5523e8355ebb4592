#pragma once
// Fine-grained structural diff between two entity documents. Emits typed
// insert/remove/change deltas; apply_deltas is the inverse used as the
// round-trip oracle.
//
// Alignment rules:
//  - labels/descriptions diff per language key
//  - aliases diff per language as set differences (inserts/removes only)
//  - statements diff per property as multisets; one unmatched old value
//    paired with one unmatched new value collapses into a single Change
//
// Equality for round-trip purposes is diff_equal(): alias lists and
// per-property statement lists compare as multisets, everything else
// strictly. The differ cannot observe pure reorderings, by construction.

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kgrev/entity.hpp"

namespace kgrev {

enum class DeltaAction { Insert, Remove, Change };

enum class TargetFamily { Label, Description, Alias, Statement };

struct DeltaTarget {
    TargetFamily family = TargetFamily::Label;
    // language for Label/Description/Alias, property id for Statement
    std::string key;
    auto operator<=>(const DeltaTarget&) const = default;
};

// PlainText for textual targets, TripleValue for statement targets.
struct DeltaValue {
    std::variant<std::string, StatementValue> v;
    bool operator==(const DeltaValue&) const = default;

    bool is_plain_text() const { return v.index() == 0; }
    const std::string& plain_text() const { return std::get<0>(v); }
    const StatementValue& triple_value() const { return std::get<1>(v); }
};

struct ContentDelta {
    DeltaAction action = DeltaAction::Insert;
    DeltaTarget target;
    std::optional<DeltaValue> old_value;  // present for Remove/Change
    std::optional<DeltaValue> new_value;  // present for Insert/Change
    bool operator==(const ContentDelta&) const = default;
};

const char* to_string(DeltaAction a);
const char* to_string(TargetFamily f);
std::optional<DeltaAction> delta_action_from(std::string_view s);
std::optional<TargetFamily> target_family_from(std::string_view s);

// The Insert/Remove/Change presence rules from the type contract.
bool delta_is_well_formed(const ContentDelta& d);

// All deltas turning parent into current, in deterministic order: labels,
// descriptions, aliases, statements; lexicographic by key within each
// family. Absent parent (page creation) yields Insert deltas for all
// content. Throws EntityMismatch when ids differ.
std::vector<ContentDelta> diff_entities(const std::optional<EntityDocument>& parent,
                                        const EntityDocument& current);

// Applies deltas produced against this parent. Absent parent starts from an
// empty document whose id is left empty. Throws InconsistentDelta when a
// delta references content the document does not have.
EntityDocument apply_deltas(const std::optional<EntityDocument>& parent,
                            const std::vector<ContentDelta>& deltas);

// Equality modulo the differ's view: aliases and per-property statement
// lists as multisets. This is the round-trip oracle's comparison.
bool diff_equal(const EntityDocument& a, const EntityDocument& b);

enum class RevisionShape { InsertOnly, ChangeOnly, RemoveOnly, Mixed };

const char* to_string(RevisionShape s);

// Throws EmptyRevision on an empty delta list.
RevisionShape classify_revision_shape(const std::vector<ContentDelta>& deltas);

}  // namespace kgrev
