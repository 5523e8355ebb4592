#pragma once
// Seeded fixture generators shared by the unit and acceptance tests.

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "kgrev/corpus.hpp"
#include "kgrev/entity.hpp"

namespace kgrev::testgen {

inline const std::vector<std::string>& languages() {
    static const std::vector<std::string> langs = {"en", "de", "fr", "es", "bg", "pt-br", "zh"};
    return langs;
}

inline std::string random_words(std::mt19937_64& rng, int min_words = 1, int max_words = 5) {
    static const std::vector<std::string> pool = {
        "country", "city",   "river",  "anthem",  "state",  "region", "physicist",
        "tallest", "europe", "south",  "capital", "museum", "north",  "island",
        "writer",  "horse",  "bridge", "ninth",   "blue",   "ancient"};
    std::uniform_int_distribution<int> n_words(min_words, max_words);
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    std::string out;
    int n = n_words(rng);
    for (int i = 0; i < n; ++i) {
        if (!out.empty()) out += ' ';
        out += pool[pick(rng)];
    }
    return out;
}

inline StatementValue random_value(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> kind(0, 7);
    std::uniform_int_distribution<int> qid(1, 2000);
    switch (kind(rng)) {
        case 0: return EntityRef{"Q" + std::to_string(qid(rng))};
        case 1: return Text{random_words(rng)};
        case 2: {
            std::uniform_int_distribution<size_t> lang(0, languages().size() - 1);
            return MonolingualText{languages()[lang(rng)], random_words(rng)};
        }
        case 3: {
            std::uniform_int_distribution<int> amount(-100000, 100000);
            Quantity q{"+" + std::to_string(amount(rng)), std::nullopt};
            if (qid(rng) % 3 == 0) q.unit = "Q" + std::to_string(qid(rng));
            return q;
        }
        case 4: {
            std::uniform_int_distribution<int> year(1200, 2100);
            std::uniform_int_distribution<int> month(1, 12);
            char buf[40];
            std::snprintf(buf, sizeof(buf), "+%04d-%02d-01T00:00:00Z", year(rng), month(rng));
            return TimePoint{buf, 11};
        }
        case 5: {
            std::uniform_real_distribution<double> lat(-90.0, 90.0);
            std::uniform_real_distribution<double> lon(-180.0, 180.0);
            return Coordinate{lat(rng), lon(rng)};
        }
        case 6: return SomeValue{};
        default: return NoValue{};
    }
}

inline EntityDocument random_document(std::mt19937_64& rng, const std::string& id) {
    EntityDocument doc;
    doc.id = id;
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> few(0, 3);
    for (const auto& lang : languages()) {
        if (coin(rng)) doc.labels[lang] = random_words(rng, 1, 3);
        if (coin(rng)) doc.descriptions[lang] = random_words(rng, 2, 6);
        int n_alias = few(rng);
        if (n_alias > 0) {
            std::vector<std::string> aliases;
            for (int i = 0; i < n_alias; ++i) aliases.push_back(random_words(rng, 1, 2));
            std::sort(aliases.begin(), aliases.end());
            aliases.erase(std::unique(aliases.begin(), aliases.end()), aliases.end());
            doc.aliases[lang] = aliases;
        }
    }
    std::uniform_int_distribution<int> n_stmts(0, 8);
    std::uniform_int_distribution<int> pid(1, 40);
    int n = n_stmts(rng);
    for (int i = 0; i < n; ++i) {
        std::string prop = "P" + std::to_string(pid(rng));
        Statement s{prop, random_value(rng)};
        doc.statements[prop].push_back(s);
        if (few(rng) == 0) doc.statements[prop].push_back(s);  // duplicates occur in the wild
    }
    return doc;
}

// Applies 1..n_edits random edits; the id never changes.
inline EntityDocument mutate_document(std::mt19937_64& rng, EntityDocument doc,
                                      int max_edits = 6) {
    std::uniform_int_distribution<int> n_edits(1, max_edits);
    std::uniform_int_distribution<int> op(0, 8);
    std::uniform_int_distribution<size_t> lang_pick(0, languages().size() - 1);
    int n = n_edits(rng);
    for (int i = 0; i < n; ++i) {
        const std::string& lang = languages()[lang_pick(rng)];
        switch (op(rng)) {
            case 0: doc.labels[lang] = random_words(rng, 1, 3); break;
            case 1: doc.labels.erase(lang); break;
            case 2: doc.descriptions[lang] = random_words(rng, 2, 6); break;
            case 3: doc.descriptions.erase(lang); break;
            case 4: {
                auto& aliases = doc.aliases[lang];
                std::string alias = random_words(rng, 1, 2);
                if (std::find(aliases.begin(), aliases.end(), alias) == aliases.end()) {
                    aliases.push_back(alias);
                }
                break;
            }
            case 5: {
                auto it = doc.aliases.find(lang);
                if (it != doc.aliases.end() && !it->second.empty()) {
                    it->second.pop_back();
                    if (it->second.empty()) doc.aliases.erase(it);
                }
                break;
            }
            case 6: {
                std::uniform_int_distribution<int> pid(1, 40);
                std::string prop = "P" + std::to_string(pid(rng));
                doc.statements[prop].push_back({prop, random_value(rng)});
                break;
            }
            case 7:
                if (!doc.statements.empty()) {
                    std::uniform_int_distribution<size_t> pick_prop(0, doc.statements.size() - 1);
                    auto it = std::next(doc.statements.begin(), ptrdiff_t(pick_prop(rng)));
                    std::uniform_int_distribution<size_t> pick(0, it->second.size() - 1);
                    it->second.erase(it->second.begin() + ptrdiff_t(pick(rng)));
                    if (it->second.empty()) doc.statements.erase(it);
                }
                break;
            default:
                if (!doc.statements.empty()) {
                    std::uniform_int_distribution<size_t> pick_prop(0, doc.statements.size() - 1);
                    auto it = std::next(doc.statements.begin(), ptrdiff_t(pick_prop(rng)));
                    std::uniform_int_distribution<size_t> pick(0, it->second.size() - 1);
                    it->second[pick(rng)].value = random_value(rng);
                }
                break;
        }
    }
    return doc;
}

inline EditorInfo registered_editor(const std::string& id, Instant registration,
                                    int64_t prior_edits) {
    EditorInfo e;
    e.editor_id = id;
    e.is_anonymous = false;
    e.registration_time = registration;
    e.prior_edit_count = prior_edits;
    return e;
}

inline RevisionRecord basic_record(int64_t revision_id, const std::string& entity_id,
                                   Instant timestamp, bool reverted = false) {
    RevisionRecord r;
    r.revision_id = revision_id;
    r.entity_id = entity_id;
    r.timestamp = timestamp;
    r.tags = {"wikidata-ui"};
    r.reverted = reverted;
    ContentDelta d;
    d.action = DeltaAction::Insert;
    d.target = {TargetFamily::Description, "en"};
    d.new_value = DeltaValue{std::string("generated fixture text")};
    r.deltas = {d};
    return r;
}

// Random labeled corpus with plausible structure; used for split and
// filter properties, not for model quality.
inline std::vector<RevisionRecord> random_corpus(std::mt19937_64& rng, int n_entities,
                                                 int n_revisions) {
    std::vector<RevisionRecord> records;
    std::uniform_int_distribution<int> entity(1, n_entities);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Instant base = parse_instant("2020-01-01T00:00:00Z");
    for (int i = 0; i < n_revisions; ++i) {
        auto r = basic_record(1000 + i, "Q" + std::to_string(entity(rng)),
                              base + int64_t(i) * 3600, unit(rng) < 0.2);
        if (unit(rng) < 0.3) {
            r.editor = EditorInfo{};
        } else {
            int id = int(unit(rng) * 50.0);
            r.editor = registered_editor("User" + std::to_string(id),
                                         base - 86400 * int64_t(30 + id * 20), 10 + id * 7);
        }
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace kgrev::testgen
