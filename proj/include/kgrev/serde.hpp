#pragma once
// JSON codecs for diff types, shared by the corpus format, the diff and
// textualize commands, and model containers.
//
// StatementValue encoding: {"kind": ...} with kind one of entity|text|
// monolingual|quantity|time|coordinate|somevalue|novalue.
// ContentDelta encoding: {"action","target","lang"|"property","old","new"};
// old/new are plain strings for textual targets, value objects for
// statement targets.

#include <json.hpp>

#include "kgrev/diff.hpp"

namespace kgrev {

nlohmann::json value_to_json(const StatementValue& value);
StatementValue value_from_json(const nlohmann::json& j);

nlohmann::json delta_to_json(const ContentDelta& delta);
ContentDelta delta_from_json(const nlohmann::json& j);

nlohmann::json deltas_to_json(const std::vector<ContentDelta>& deltas);
std::vector<ContentDelta> deltas_from_json(const nlohmann::json& j);

}  // namespace kgrev
