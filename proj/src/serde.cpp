#include "kgrev/serde.hpp"

namespace kgrev {

using nlohmann::json;

json value_to_json(const StatementValue& value) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, EntityRef>) {
                return json{{"kind", "entity"}, {"id", x.id}};
            } else if constexpr (std::is_same_v<T, Text>) {
                return json{{"kind", "text"}, {"value", x.value}};
            } else if constexpr (std::is_same_v<T, MonolingualText>) {
                return json{{"kind", "monolingual"}, {"lang", x.language}, {"value", x.value}};
            } else if constexpr (std::is_same_v<T, Quantity>) {
                json out{{"kind", "quantity"}, {"amount", x.amount}};
                if (x.unit) out["unit"] = *x.unit;
                return out;
            } else if constexpr (std::is_same_v<T, TimePoint>) {
                return json{{"kind", "time"}, {"time", x.timestamp},
                            {"precision", x.precision}};
            } else if constexpr (std::is_same_v<T, Coordinate>) {
                return json{{"kind", "coordinate"}, {"lat", x.latitude}, {"lon", x.longitude}};
            } else if constexpr (std::is_same_v<T, SomeValue>) {
                return json{{"kind", "somevalue"}};
            } else {
                return json{{"kind", "novalue"}};
            }
        },
        value);
}

StatementValue value_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "entity") return EntityRef{j.at("id").get<std::string>()};
    if (kind == "text") return Text{j.at("value").get<std::string>()};
    if (kind == "monolingual") {
        return MonolingualText{j.at("lang").get<std::string>(),
                               j.at("value").get<std::string>()};
    }
    if (kind == "quantity") {
        Quantity q;
        q.amount = j.at("amount").get<std::string>();
        if (j.contains("unit") && !j["unit"].is_null()) {
            q.unit = j["unit"].get<std::string>();
        }
        return q;
    }
    if (kind == "time") {
        return TimePoint{j.at("time").get<std::string>(), j.value("precision", 11)};
    }
    if (kind == "coordinate") {
        return Coordinate{j.at("lat").get<double>(), j.at("lon").get<double>()};
    }
    if (kind == "somevalue") return SomeValue{};
    if (kind == "novalue") return NoValue{};
    throw IoError("unknown statement value kind: " + kind);
}

namespace {

json delta_value_to_json(const DeltaValue& v) {
    if (v.is_plain_text()) return json(v.plain_text());
    return value_to_json(v.triple_value());
}

DeltaValue delta_value_from_json(const json& j, TargetFamily family) {
    if (family == TargetFamily::Statement) return DeltaValue{value_from_json(j)};
    return DeltaValue{j.get<std::string>()};
}

}  // namespace

json delta_to_json(const ContentDelta& delta) {
    json out;
    out["action"] = to_string(delta.action);
    out["target"] = to_string(delta.target.family);
    if (delta.target.family == TargetFamily::Statement) {
        out["property"] = delta.target.key;
    } else {
        out["lang"] = delta.target.key;
    }
    if (delta.old_value) out["old"] = delta_value_to_json(*delta.old_value);
    if (delta.new_value) out["new"] = delta_value_to_json(*delta.new_value);
    return out;
}

ContentDelta delta_from_json(const json& j) {
    ContentDelta d;
    auto action = delta_action_from(j.at("action").get<std::string>());
    auto family = target_family_from(j.at("target").get<std::string>());
    if (!action || !family) throw IoError("bad delta action/target: " + j.dump());
    d.action = *action;
    d.target.family = *family;
    d.target.key = *family == TargetFamily::Statement ? j.at("property").get<std::string>()
                                                      : j.at("lang").get<std::string>();
    if (j.contains("old") && !j["old"].is_null()) {
        d.old_value = delta_value_from_json(j["old"], *family);
    }
    if (j.contains("new") && !j["new"].is_null()) {
        d.new_value = delta_value_from_json(j["new"], *family);
    }
    if (!delta_is_well_formed(d)) throw IoError("delta violates presence rules: " + j.dump());
    return d;
}

json deltas_to_json(const std::vector<ContentDelta>& deltas) {
    json arr = json::array();
    for (const auto& d : deltas) arr.push_back(delta_to_json(d));
    return arr;
}

std::vector<ContentDelta> deltas_from_json(const json& j) {
    std::vector<ContentDelta> out;
    if (!j.is_array()) throw IoError("delta list must be a JSON array");
    out.reserve(j.size());
    for (const auto& item : j) out.push_back(delta_from_json(item));
    return out;
}

}  // namespace kgrev
