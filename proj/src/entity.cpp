#include "kgrev/entity.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <unordered_set>

namespace kgrev {

using nlohmann::json;

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

// Entity id carried by a wikibase-entityid payload. Prefers the explicit
// "id"; falls back to entity-type + numeric-id.
std::optional<std::string> entityid_from_payload(const json& value) {
    if (value.contains("id") && value["id"].is_string()) {
        std::string id = value["id"].get<std::string>();
        if (matches_any_id(id)) return id;
        return std::nullopt;
    }
    if (value.contains("numeric-id") && value["numeric-id"].is_number_integer()) {
        std::string prefix;
        std::string etype = value.value("entity-type", "item");
        if (etype == "item") prefix = "Q";
        else if (etype == "property") prefix = "P";
        else return std::nullopt;
        return prefix + std::to_string(value["numeric-id"].get<int64_t>());
    }
    return std::nullopt;
}

std::optional<std::string> unit_from_uri(const std::string& unit) {
    if (unit.empty() || unit == "1") return std::nullopt;
    size_t slash = unit.find_last_of('/');
    std::string tail = slash == std::string::npos ? unit : unit.substr(slash + 1);
    if (matches_entity_id(tail)) return tail;
    throw MalformedDocument("unit is not an entity: " + unit);
}

// Interprets one datavalue. Throws on any shape surprise; the caller
// degrades to the Text fallback.
StatementValue value_from_datavalue(const json& dv) {
    const std::string type = dv.at("type").get<std::string>();
    const json& value = dv.at("value");
    if (type == "wikibase-entityid") {
        auto id = entityid_from_payload(value);
        if (!id) throw MalformedDocument("bad entityid payload");
        return EntityRef{*id};
    }
    if (type == "string") {
        return Text{value.get<std::string>()};
    }
    if (type == "monolingualtext") {
        std::string lang = lowercase(value.at("language").get<std::string>());
        if (!valid_language_code(lang)) throw MalformedDocument("bad monolingual language");
        return MonolingualText{lang, value.at("text").get<std::string>()};
    }
    if (type == "quantity") {
        Quantity q;
        q.amount = value.at("amount").get<std::string>();
        if (value.contains("unit") && value["unit"].is_string()) {
            q.unit = unit_from_uri(value["unit"].get<std::string>());
        }
        return q;
    }
    if (type == "time") {
        TimePoint t;
        t.timestamp = value.at("time").get<std::string>();
        t.precision = value.value("precision", 11);
        if (t.precision < 0 || t.precision > 14) throw MalformedDocument("bad time precision");
        return t;
    }
    if (type == "globecoordinate") {
        Coordinate c;
        c.latitude = value.at("latitude").get<double>();
        c.longitude = value.at("longitude").get<double>();
        if (c.latitude < -90.0 || c.latitude > 90.0 || c.longitude < -180.0 ||
            c.longitude > 180.0) {
            throw MalformedDocument("coordinate out of range");
        }
        return c;
    }
    throw MalformedDocument("unsupported datavalue type: " + type);
}

StatementValue value_from_snak(const json& snak) {
    const std::string snaktype = snak.value("snaktype", "value");
    if (snaktype == "somevalue") return SomeValue{};
    if (snaktype == "novalue") return NoValue{};
    const json& dv = snak.at("datavalue");
    try {
        return value_from_datavalue(dv);
    } catch (const std::exception&) {
        return Text{dv.dump()};
    }
}

void parse_term_map(const json& doc, const char* key,
                    std::map<std::string, std::string>& out) {
    if (!doc.contains(key) || !doc[key].is_object()) return;
    for (const auto& [lang_key, term] : doc[key].items()) {
        std::string lang = lowercase(lang_key);
        if (!valid_language_code(lang)) continue;
        if (term.is_object() && term.contains("value") && term["value"].is_string()) {
            out[lang] = term["value"].get<std::string>();
        } else if (term.is_string()) {
            out[lang] = term.get<std::string>();
        }
    }
}

json term_object(const std::string& lang, const std::string& value) {
    return json{{"language", lang}, {"value", value}};
}

json snak_for(const std::string& property, const StatementValue& value) {
    json snak{{"snaktype", "value"}, {"property", property}};
    if (std::holds_alternative<SomeValue>(value)) {
        snak["snaktype"] = "somevalue";
        return snak;
    }
    if (std::holds_alternative<NoValue>(value)) {
        snak["snaktype"] = "novalue";
        return snak;
    }
    json dv;
    if (const auto* e = std::get_if<EntityRef>(&value)) {
        dv["type"] = "wikibase-entityid";
        dv["value"] = json{{"entity-type", e->id[0] == 'P' ? "property" : "item"},
                           {"id", e->id}};
    } else if (const auto* t = std::get_if<Text>(&value)) {
        dv["type"] = "string";
        dv["value"] = t->value;
    } else if (const auto* m = std::get_if<MonolingualText>(&value)) {
        dv["type"] = "monolingualtext";
        dv["value"] = json{{"language", m->language}, {"text", m->value}};
    } else if (const auto* q = std::get_if<Quantity>(&value)) {
        dv["type"] = "quantity";
        dv["value"] = json{{"amount", q->amount},
                           {"unit", q->unit ? "http://www.wikidata.org/entity/" + *q->unit
                                            : std::string("1")}};
    } else if (const auto* tp = std::get_if<TimePoint>(&value)) {
        dv["type"] = "time";
        dv["value"] = json{{"time", tp->timestamp}, {"precision", tp->precision}};
    } else if (const auto* c = std::get_if<Coordinate>(&value)) {
        dv["type"] = "globecoordinate";
        dv["value"] = json{{"latitude", c->latitude}, {"longitude", c->longitude}};
    }
    snak["datavalue"] = dv;
    return snak;
}

}  // namespace

EntityDocument parse_entity(std::string_view raw) {
    json doc = json::parse(raw, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw MalformedDocument("entity content is not a JSON object");
    }
    if (!doc.contains("id") || !doc["id"].is_string()) {
        throw MalformedDocument("entity document lacks an id");
    }
    EntityDocument out;
    out.id = doc["id"].get<std::string>();
    if (!matches_entity_id(out.id)) {
        throw InvalidIdentifier("not an entity id: " + out.id);
    }

    parse_term_map(doc, "labels", out.labels);
    parse_term_map(doc, "descriptions", out.descriptions);

    if (doc.contains("aliases") && doc["aliases"].is_object()) {
        for (const auto& [lang_key, list] : doc["aliases"].items()) {
            std::string lang = lowercase(lang_key);
            if (!valid_language_code(lang) || !list.is_array()) continue;
            std::vector<std::string> values;
            std::unordered_set<std::string> seen;
            for (const auto& item : list) {
                std::string v;
                if (item.is_object() && item.contains("value") && item["value"].is_string()) {
                    v = item["value"].get<std::string>();
                } else if (item.is_string()) {
                    v = item.get<std::string>();
                } else {
                    continue;
                }
                if (seen.insert(v).second) values.push_back(std::move(v));
            }
            if (!values.empty()) out.aliases[lang] = std::move(values);
        }
    }

    const char* claims_key = doc.contains("claims") ? "claims" : "statements";
    if (doc.contains(claims_key) && doc[claims_key].is_object()) {
        for (const auto& [prop, list] : doc[claims_key].items()) {
            if (!matches_property_id(prop) || !list.is_array()) continue;
            std::vector<Statement> parsed;
            for (const auto& claim : list) {
                if (!claim.is_object() || !claim.contains("mainsnak")) continue;
                try {
                    parsed.push_back(Statement{prop, value_from_snak(claim["mainsnak"])});
                } catch (const std::exception&) {
                    // snak without a datavalue despite snaktype "value": drop
                }
            }
            if (!parsed.empty()) out.statements[prop] = std::move(parsed);
        }
    }
    return out;
}

std::string serialize_entity(const EntityDocument& doc) {
    json out;
    out["id"] = doc.id;
    out["labels"] = json::object();
    for (const auto& [lang, v] : doc.labels) out["labels"][lang] = term_object(lang, v);
    out["descriptions"] = json::object();
    for (const auto& [lang, v] : doc.descriptions) {
        out["descriptions"][lang] = term_object(lang, v);
    }
    out["aliases"] = json::object();
    for (const auto& [lang, list] : doc.aliases) {
        json arr = json::array();
        for (const auto& v : list) arr.push_back(term_object(lang, v));
        out["aliases"][lang] = arr;
    }
    out["claims"] = json::object();
    for (const auto& [prop, list] : doc.statements) {
        json arr = json::array();
        for (const auto& st : list) {
            arr.push_back(json{{"mainsnak", snak_for(prop, st.value)},
                               {"type", "statement"},
                               {"rank", "normal"}});
        }
        out["claims"][prop] = arr;
    }
    return out.dump();
}

std::string canonical_value_key(const StatementValue& v) {
    char buf[96];
    return std::visit(
        [&](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, EntityRef>) {
                return "e:" + x.id;
            } else if constexpr (std::is_same_v<T, Text>) {
                return "t:" + x.value;
            } else if constexpr (std::is_same_v<T, MonolingualText>) {
                return "m:" + x.language + ":" + x.value;
            } else if constexpr (std::is_same_v<T, Quantity>) {
                return "q:" + x.amount + ":" + (x.unit ? *x.unit : "");
            } else if constexpr (std::is_same_v<T, TimePoint>) {
                std::snprintf(buf, sizeof(buf), "d:%s:%d", x.timestamp.c_str(), x.precision);
                return buf;
            } else if constexpr (std::is_same_v<T, Coordinate>) {
                std::snprintf(buf, sizeof(buf), "c:%.17g:%.17g", x.latitude, x.longitude);
                return buf;
            } else if constexpr (std::is_same_v<T, SomeValue>) {
                return "s:";
            } else {
                return "n:";
            }
        },
        v);
}

LabelMap LabelMap::load_tsv(const std::string& path) {
    LabelMap map;
    size_t lineno = 0;
    for (const auto& line : read_lines(path)) {
        ++lineno;
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected id<TAB>label");
        }
        std::string id = line.substr(0, tab);
        std::string label = line.substr(tab + 1);
        if (!matches_any_id(id) || label.empty()) {
            throw IoError(path + ":" + std::to_string(lineno) + ": bad label row");
        }
        map.entries_[std::move(id)] = std::move(label);
    }
    return map;
}

LabelMap LabelMap::from_entries(std::map<std::string, std::string> entries) {
    LabelMap map;
    for (auto& [id, label] : entries) map.entries_[id] = label;
    return map;
}

void LabelMap::set(const std::string& id, const std::string& label) {
    entries_[id] = label;
}

const std::string& LabelMap::resolve(std::string_view id) const {
    static const std::string unknown{kUnknownLabel};
    auto it = entries_.find(id);
    return it == entries_.end() ? unknown : it->second;
}

}  // namespace kgrev
