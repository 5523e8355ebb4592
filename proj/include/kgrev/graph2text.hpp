#pragma once
// Renders every content delta as one prefixed text string, the unit the
// content scorer consumes. The template is a format contract: models are
// only valid for the template version they were trained on.
//
// Prefix scheme (kTemplateVersion "g2t.v1"):
//   "{action} {family}:"  with action in insert|remove|change and family in
//   label|description|alias|statement, lowercase, single-space separated.
// Bodies:
//   textual targets   "{lang}: {text}"        (change: "{lang}: old: {o} new: {n}")
//   statement targets "{property-label} {value-text}"
//                     (change: "{property-label} old: {o} new: {n}")
// Statement ids are always replaced by labels via LabelMap::resolve, so a
// raw Q/P id never reaches the scorer; unmapped ids render as "unknown".

#include <optional>
#include <string>
#include <vector>

#include "kgrev/diff.hpp"
#include "kgrev/entity.hpp"

namespace kgrev {

inline constexpr std::string_view kTemplateVersion = "g2t.v1";

struct TextualizeOptions {
    // Upper bound on full_text length, in bytes; bounds scorer input.
    size_t max_chars = 512;
    // When set, statement bodies start with the subject entity's label.
    bool include_subject_label = false;
    std::string subject_id;  // consulted only when include_subject_label
};

struct TextualizedChange {
    std::string prefix;     // "{action} {family}:"
    std::string body;
    std::string full_text;  // prefix + ' ' + body, truncated
    DeltaTarget source_target;
    std::optional<std::string> language;  // textual targets only
};

std::string prefix_for(DeltaAction action, TargetFamily family);

// Total over well-formed deltas; deterministic for a fixed LabelMap.
TextualizedChange textualize(const ContentDelta& delta, const LabelMap& labels,
                             const TextualizeOptions& options = {});

// Element-wise textualize, order preserved.
std::vector<TextualizedChange> textualize_revision(const std::vector<ContentDelta>& deltas,
                                                   const LabelMap& labels,
                                                   const TextualizeOptions& options = {});

// Human-readable rendering of a statement value with ids resolved.
std::string render_value(const StatementValue& value, const LabelMap& labels);

}  // namespace kgrev
