#include "kgrev/diff.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace kgrev {

namespace {

DeltaValue plain(const std::string& s) { return DeltaValue{s}; }
DeltaValue triple(const StatementValue& v) { return DeltaValue{v}; }

ContentDelta make_insert(DeltaTarget target, DeltaValue value) {
    return ContentDelta{DeltaAction::Insert, std::move(target), std::nullopt, std::move(value)};
}
ContentDelta make_remove(DeltaTarget target, DeltaValue value) {
    return ContentDelta{DeltaAction::Remove, std::move(target), std::move(value), std::nullopt};
}
ContentDelta make_change(DeltaTarget target, DeltaValue old_v, DeltaValue new_v) {
    return ContentDelta{DeltaAction::Change, std::move(target), std::move(old_v),
                        std::move(new_v)};
}

void diff_term_map(TargetFamily family, const std::map<std::string, std::string>& old_map,
                   const std::map<std::string, std::string>& new_map,
                   std::vector<ContentDelta>& out) {
    auto oi = old_map.begin();
    auto ni = new_map.begin();
    while (oi != old_map.end() || ni != new_map.end()) {
        if (ni == new_map.end() || (oi != old_map.end() && oi->first < ni->first)) {
            out.push_back(make_remove({family, oi->first}, plain(oi->second)));
            ++oi;
        } else if (oi == old_map.end() || ni->first < oi->first) {
            out.push_back(make_insert({family, ni->first}, plain(ni->second)));
            ++ni;
        } else {
            if (oi->second != ni->second) {
                out.push_back(
                    make_change({family, oi->first}, plain(oi->second), plain(ni->second)));
            }
            ++oi;
            ++ni;
        }
    }
}

void diff_aliases(const std::map<std::string, std::vector<std::string>>& old_map,
                  const std::map<std::string, std::vector<std::string>>& new_map,
                  std::vector<ContentDelta>& out) {
    std::set<std::string> languages;
    for (const auto& [lang, _] : old_map) languages.insert(lang);
    for (const auto& [lang, _] : new_map) languages.insert(lang);
    for (const auto& lang : languages) {
        static const std::vector<std::string> kNone;
        const auto& olds = old_map.count(lang) ? old_map.at(lang) : kNone;
        const auto& news = new_map.count(lang) ? new_map.at(lang) : kNone;
        std::set<std::string> old_set(olds.begin(), olds.end());
        std::set<std::string> new_set(news.begin(), news.end());
        for (const auto& v : old_set) {
            if (!new_set.count(v)) {
                out.push_back(make_remove({TargetFamily::Alias, lang}, plain(v)));
            }
        }
        for (const auto& v : new_set) {
            if (!old_set.count(v)) {
                out.push_back(make_insert({TargetFamily::Alias, lang}, plain(v)));
            }
        }
    }
}

// Per-property multiset alignment. Matched values cancel; a lone leftover
// on each side becomes one Change, anything else becomes removes+inserts.
void diff_statements(const std::map<std::string, std::vector<Statement>>& old_map,
                     const std::map<std::string, std::vector<Statement>>& new_map,
                     std::vector<ContentDelta>& out) {
    std::set<std::string> properties;
    for (const auto& [p, _] : old_map) properties.insert(p);
    for (const auto& [p, _] : new_map) properties.insert(p);
    for (const auto& prop : properties) {
        using Entry = std::pair<std::string, const StatementValue*>;
        std::vector<Entry> old_left, new_left;
        auto collect = [](const std::map<std::string, std::vector<Statement>>& m,
                          const std::string& p, std::vector<Entry>& out_list) {
            if (auto it = m.find(p); it != m.end()) {
                for (const auto& st : it->second) {
                    out_list.emplace_back(canonical_value_key(st.value), &st.value);
                }
            }
            std::sort(out_list.begin(), out_list.end(),
                      [](const Entry& a, const Entry& b) { return a.first < b.first; });
        };
        collect(old_map, prop, old_left);
        collect(new_map, prop, new_left);
        for (auto oi = old_left.begin(); oi != old_left.end();) {
            auto ni = std::find_if(new_left.begin(), new_left.end(), [&](const Entry& e) {
                return *e.second == *oi->second;
            });
            if (ni != new_left.end()) {
                new_left.erase(ni);
                oi = old_left.erase(oi);
            } else {
                ++oi;
            }
        }
        DeltaTarget target{TargetFamily::Statement, prop};
        if (old_left.size() == 1 && new_left.size() == 1) {
            out.push_back(make_change(target, triple(*old_left.front().second),
                                      triple(*new_left.front().second)));
            continue;
        }
        for (const auto& [_, v] : old_left) out.push_back(make_remove(target, triple(*v)));
        for (const auto& [_, v] : new_left) out.push_back(make_insert(target, triple(*v)));
    }
}

}  // namespace

const char* to_string(DeltaAction a) {
    switch (a) {
        case DeltaAction::Insert: return "insert";
        case DeltaAction::Remove: return "remove";
        case DeltaAction::Change: return "change";
    }
    return "?";
}

const char* to_string(TargetFamily f) {
    switch (f) {
        case TargetFamily::Label: return "label";
        case TargetFamily::Description: return "description";
        case TargetFamily::Alias: return "alias";
        case TargetFamily::Statement: return "statement";
    }
    return "?";
}

std::optional<DeltaAction> delta_action_from(std::string_view s) {
    if (s == "insert") return DeltaAction::Insert;
    if (s == "remove") return DeltaAction::Remove;
    if (s == "change") return DeltaAction::Change;
    return std::nullopt;
}

std::optional<TargetFamily> target_family_from(std::string_view s) {
    if (s == "label") return TargetFamily::Label;
    if (s == "description") return TargetFamily::Description;
    if (s == "alias") return TargetFamily::Alias;
    if (s == "statement") return TargetFamily::Statement;
    return std::nullopt;
}

bool delta_is_well_formed(const ContentDelta& d) {
    switch (d.action) {
        case DeltaAction::Insert:
            return !d.old_value && d.new_value.has_value();
        case DeltaAction::Remove:
            return d.old_value.has_value() && !d.new_value;
        case DeltaAction::Change:
            return d.old_value && d.new_value && !(*d.old_value == *d.new_value);
    }
    return false;
}

std::vector<ContentDelta> diff_entities(const std::optional<EntityDocument>& parent,
                                        const EntityDocument& current) {
    static const EntityDocument kEmpty;
    const EntityDocument& base = parent ? *parent : kEmpty;
    if (parent && parent->id != current.id) {
        throw EntityMismatch("diff across entities: " + parent->id + " vs " + current.id);
    }
    std::vector<ContentDelta> out;
    diff_term_map(TargetFamily::Label, base.labels, current.labels, out);
    diff_term_map(TargetFamily::Description, base.descriptions, current.descriptions, out);
    diff_aliases(base.aliases, current.aliases, out);
    diff_statements(base.statements, current.statements, out);
    return out;
}

namespace {

void apply_term_delta(const ContentDelta& d, std::map<std::string, std::string>& terms) {
    const std::string& lang = d.target.key;
    auto it = terms.find(lang);
    switch (d.action) {
        case DeltaAction::Insert:
            if (it != terms.end()) throw InconsistentDelta("insert over existing " + lang);
            terms[lang] = d.new_value->plain_text();
            break;
        case DeltaAction::Remove:
            if (it == terms.end() || it->second != d.old_value->plain_text()) {
                throw InconsistentDelta("remove of absent value for " + lang);
            }
            terms.erase(it);
            break;
        case DeltaAction::Change:
            if (it == terms.end() || it->second != d.old_value->plain_text()) {
                throw InconsistentDelta("change of absent value for " + lang);
            }
            it->second = d.new_value->plain_text();
            break;
    }
}

void apply_alias_delta(const ContentDelta& d,
                       std::map<std::string, std::vector<std::string>>& aliases) {
    const std::string& lang = d.target.key;
    auto& list = aliases[lang];
    if (d.action == DeltaAction::Insert) {
        const std::string& v = d.new_value->plain_text();
        if (std::find(list.begin(), list.end(), v) != list.end()) {
            throw InconsistentDelta("alias insert duplicates " + v);
        }
        list.push_back(v);
    } else if (d.action == DeltaAction::Remove) {
        const std::string& v = d.old_value->plain_text();
        auto it = std::find(list.begin(), list.end(), v);
        if (it == list.end()) throw InconsistentDelta("alias remove of absent " + v);
        list.erase(it);
    } else {
        // The differ never emits alias changes; accept hand-built ones.
        const std::string& ov = d.old_value->plain_text();
        auto it = std::find(list.begin(), list.end(), ov);
        if (it == list.end()) throw InconsistentDelta("alias change of absent " + ov);
        *it = d.new_value->plain_text();
    }
    if (list.empty()) aliases.erase(lang);
}

void apply_statement_delta(const ContentDelta& d,
                           std::map<std::string, std::vector<Statement>>& statements) {
    const std::string& prop = d.target.key;
    auto& list = statements[prop];
    auto find_value = [&](const StatementValue& v) {
        return std::find_if(list.begin(), list.end(),
                            [&](const Statement& st) { return st.value == v; });
    };
    if (d.action == DeltaAction::Insert) {
        list.push_back(Statement{prop, d.new_value->triple_value()});
    } else if (d.action == DeltaAction::Remove) {
        auto it = find_value(d.old_value->triple_value());
        if (it == list.end()) throw InconsistentDelta("statement remove of absent value");
        list.erase(it);
    } else {
        auto it = find_value(d.old_value->triple_value());
        if (it == list.end()) throw InconsistentDelta("statement change of absent value");
        it->value = d.new_value->triple_value();
    }
    if (list.empty()) statements.erase(prop);
}

}  // namespace

EntityDocument apply_deltas(const std::optional<EntityDocument>& parent,
                            const std::vector<ContentDelta>& deltas) {
    EntityDocument doc = parent ? *parent : EntityDocument{};
    for (const auto& d : deltas) {
        if (!delta_is_well_formed(d)) throw InconsistentDelta("malformed delta");
        switch (d.target.family) {
            case TargetFamily::Label: apply_term_delta(d, doc.labels); break;
            case TargetFamily::Description: apply_term_delta(d, doc.descriptions); break;
            case TargetFamily::Alias: apply_alias_delta(d, doc.aliases); break;
            case TargetFamily::Statement: apply_statement_delta(d, doc.statements); break;
        }
    }
    return doc;
}

bool diff_equal(const EntityDocument& a, const EntityDocument& b) {
    if (a.labels != b.labels || a.descriptions != b.descriptions) return false;
    auto alias_view = [](const std::map<std::string, std::vector<std::string>>& m) {
        std::map<std::string, std::multiset<std::string>> out;
        for (const auto& [lang, list] : m) {
            if (!list.empty()) out[lang] = {list.begin(), list.end()};
        }
        return out;
    };
    if (alias_view(a.aliases) != alias_view(b.aliases)) return false;
    auto stmt_view = [](const std::map<std::string, std::vector<Statement>>& m) {
        std::map<std::string, std::multiset<std::string>> out;
        for (const auto& [prop, list] : m) {
            if (list.empty()) continue;
            auto& keys = out[prop];
            for (const auto& st : list) keys.insert(canonical_value_key(st.value));
        }
        return out;
    };
    return stmt_view(a.statements) == stmt_view(b.statements);
}

const char* to_string(RevisionShape s) {
    switch (s) {
        case RevisionShape::InsertOnly: return "insert_only";
        case RevisionShape::ChangeOnly: return "change_only";
        case RevisionShape::RemoveOnly: return "remove_only";
        case RevisionShape::Mixed: return "mixed";
    }
    return "?";
}

RevisionShape classify_revision_shape(const std::vector<ContentDelta>& deltas) {
    if (deltas.empty()) throw EmptyRevision("no deltas to classify");
    bool ins = false, rem = false, chg = false;
    for (const auto& d : deltas) {
        ins |= d.action == DeltaAction::Insert;
        rem |= d.action == DeltaAction::Remove;
        chg |= d.action == DeltaAction::Change;
    }
    int kinds = int(ins) + int(rem) + int(chg);
    if (kinds > 1) return RevisionShape::Mixed;
    if (ins) return RevisionShape::InsertOnly;
    if (rem) return RevisionShape::RemoveOnly;
    return RevisionShape::ChangeOnly;
}

}  // namespace kgrev
