#include "kgrev/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "kgrev/serde.hpp"

namespace kgrev {

using nlohmann::json;

namespace {

json editor_to_json(const EditorInfo& e) {
    json out;
    out["editor_id"] = e.editor_id ? json(*e.editor_id) : json(nullptr);
    out["is_anonymous"] = e.is_anonymous;
    out["registration_time"] =
        e.registration_time ? json(format_instant(*e.registration_time)) : json(nullptr);
    out["groups"] = e.groups;
    out["prior_edit_count"] = e.prior_edit_count;
    return out;
}

EditorInfo editor_from_json(const json& j) {
    EditorInfo e;
    if (j.contains("editor_id") && !j["editor_id"].is_null()) {
        e.editor_id = j["editor_id"].get<std::string>();
    }
    e.is_anonymous = j.value("is_anonymous", !e.editor_id.has_value());
    if (j.contains("registration_time") && !j["registration_time"].is_null()) {
        e.registration_time = parse_instant(j["registration_time"].get<std::string>());
    }
    if (j.contains("groups")) {
        for (const auto& g : j["groups"]) e.groups.insert(g.get<std::string>());
    }
    e.prior_edit_count = j.value("prior_edit_count", int64_t(0));
    // Registered editors may lack a registration time (unknown for the
    // oldest accounts), but anonymous ones must not carry one.
    if (e.is_anonymous != !e.editor_id.has_value() ||
        (e.is_anonymous && e.registration_time)) {
        throw IoError("editor anonymity fields disagree: " + j.dump());
    }
    return e;
}

}  // namespace

std::string editor_to_json_text(const EditorInfo& editor) { return editor_to_json(editor).dump(); }

EditorInfo editor_from_json_text(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("editor is not a JSON object");
    try {
        return editor_from_json(j);
    } catch (const json::exception& e) {
        throw IoError(std::string("bad editor record: ") + e.what());
    }
}

std::string record_to_json_line(const RevisionRecord& r) {
    json out;
    out["revision_id"] = r.revision_id;
    out["entity_id"] = r.entity_id;
    out["timestamp"] = format_instant(r.timestamp);
    out["parent_revision_id"] =
        r.parent_revision_id ? json(*r.parent_revision_id) : json(nullptr);
    out["editor"] = editor_to_json(r.editor);
    out["tags"] = r.tags;
    out["deltas"] = deltas_to_json(r.deltas);
    out["reverted"] = r.reverted;
    out["reverting_editor"] = r.reverting_editor ? json(*r.reverting_editor) : json(nullptr);
    out["is_revert_of"] = r.is_revert_of ? json(*r.is_revert_of) : json(nullptr);
    return out.dump();
}

RevisionRecord record_from_json_line(std::string_view line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("corpus line is not a JSON object");
    try {
        RevisionRecord r;
        r.revision_id = j.at("revision_id").get<int64_t>();
        r.entity_id = j.at("entity_id").get<std::string>();
        r.timestamp = parse_instant(j.at("timestamp").get<std::string>());
        if (j.contains("parent_revision_id") && !j["parent_revision_id"].is_null()) {
            r.parent_revision_id = j["parent_revision_id"].get<int64_t>();
        }
        r.editor = editor_from_json(j.at("editor"));
        if (j.contains("tags")) {
            for (const auto& t : j["tags"]) r.tags.insert(t.get<std::string>());
        }
        if (j.contains("deltas")) r.deltas = deltas_from_json(j["deltas"]);
        r.reverted = j.value("reverted", false);
        if (j.contains("reverting_editor") && !j["reverting_editor"].is_null()) {
            r.reverting_editor = j["reverting_editor"].get<std::string>();
        }
        if (j.contains("is_revert_of") && !j["is_revert_of"].is_null()) {
            r.is_revert_of = j["is_revert_of"].get<int64_t>();
        }
        return r;
    } catch (const json::exception& e) {
        throw IoError(std::string("bad corpus record: ") + e.what());
    }
}

std::vector<RevisionRecord> read_corpus(const std::string& path) {
    std::vector<RevisionRecord> out;
    for (const auto& line : read_lines(path)) {
        if (line.empty()) continue;
        out.push_back(record_from_json_line(line));
    }
    return out;
}

void write_corpus(const std::string& path, const std::vector<RevisionRecord>& records) {
    std::ostringstream buf;
    for (const auto& r : records) buf << record_to_json_line(r) << '\n';
    write_file(path, buf.str());
}

std::vector<RevisionRecord> filter_human_ui_edits(const std::vector<RevisionRecord>& records,
                                                  std::string_view tag) {
    std::vector<RevisionRecord> out;
    for (const auto& r : records) {
        if (r.tags.count(std::string(tag))) out.push_back(r);
    }
    return out;
}

std::vector<RevisionRecord> filter_self_reverts(const std::vector<RevisionRecord>& records) {
    std::vector<RevisionRecord> out;
    for (const auto& r : records) {
        bool self_revert = r.reverted && r.editor.editor_id && r.reverting_editor &&
                           *r.editor.editor_id == *r.reverting_editor;
        if (!self_revert) out.push_back(r);
    }
    return out;
}

namespace {

// Union-find over revision ids, scoped to one entity's history.
class RevisionClusters {
public:
    int64_t find(int64_t id) {
        auto it = parent_.find(id);
        if (it == parent_.end()) {
            parent_[id] = id;
            return id;
        }
        int64_t root = id;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[id] != root) {
            int64_t next = parent_[id];
            parent_[id] = root;
            id = next;
        }
        return root;
    }

    void unite(int64_t a, int64_t b) { parent_[find(a)] = find(b); }

private:
    std::unordered_map<int64_t, int64_t> parent_;
};

}  // namespace

std::vector<RevisionRecord> filter_edit_wars(const std::vector<RevisionRecord>& records,
                                             EditWarStats* stats) {
    // Chains are connected components of the "reverts" relation within one
    // entity; a component with at least two reverts is a war and every
    // member revision (reverts and their targets) is dropped.
    std::unordered_map<std::string, RevisionClusters> clusters;
    std::unordered_map<std::string, std::unordered_map<int64_t, int>> reverts_per_root;

    for (const auto& r : records) {
        if (r.is_revert_of) clusters[r.entity_id].unite(r.revision_id, *r.is_revert_of);
    }
    for (const auto& r : records) {
        if (r.is_revert_of) {
            auto& uf = clusters[r.entity_id];
            reverts_per_root[r.entity_id][uf.find(r.revision_id)]++;
        }
    }

    EditWarStats local;
    local.input_records = records.size();
    std::vector<RevisionRecord> out;
    for (const auto& r : records) {
        if (r.reverted) local.input_reverted++;
        bool in_war = false;
        auto cit = clusters.find(r.entity_id);
        if (cit != clusters.end()) {
            auto& counts = reverts_per_root[r.entity_id];
            auto root_it = counts.find(cit->second.find(r.revision_id));
            in_war = root_it != counts.end() && root_it->second >= 2;
        }
        if (in_war) {
            local.removed_records++;
            if (r.reverted) local.removed_reverted++;
        } else {
            out.push_back(r);
        }
    }
    if (stats) *stats = local;
    return out;
}

std::vector<RevisionRecord> balance_negatives(const std::vector<RevisionRecord>& records,
                                              int ratio, uint64_t seed) {
    if (ratio < 1) throw InvalidRatio("negative balancing ratio must be >= 1");
    std::vector<size_t> negative_indices;
    size_t positives = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].reverted) {
            positives++;
        } else {
            negative_indices.push_back(i);
        }
    }
    size_t want = positives * size_t(ratio);
    std::vector<bool> keep(records.size(), false);
    for (size_t i = 0; i < records.size(); ++i) keep[i] = records[i].reverted;
    if (negative_indices.size() <= want) {
        for (size_t i : negative_indices) keep[i] = true;
    } else {
        std::mt19937_64 rng(seed);
        std::shuffle(negative_indices.begin(), negative_indices.end(), rng);
        for (size_t k = 0; k < want; ++k) keep[negative_indices[k]] = true;
    }
    std::vector<RevisionRecord> out;
    for (size_t i = 0; i < records.size(); ++i) {
        if (keep[i]) out.push_back(records[i]);
    }
    return out;
}

DatasetSplit split_dataset(const std::vector<RevisionRecord>& records, Instant cutoff,
                           double ratio, uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InvalidRatio("train split ratio must be in (0,1)");
    DatasetSplit split;
    split.cutoff = cutoff;
    split.ratio = ratio;

    std::vector<const RevisionRecord*> train_pool;
    for (const auto& r : records) {
        if (r.timestamp >= cutoff) {
            split.holdout.push_back(r);
        } else {
            train_pool.push_back(&r);
        }
    }

    std::unordered_map<std::string, size_t> entity_counts;
    for (const auto* r : train_pool) entity_counts[r->entity_id]++;
    std::vector<std::string> entities;
    entities.reserve(entity_counts.size());
    for (const auto& [e, _] : entity_counts) entities.push_back(e);
    std::sort(entities.begin(), entities.end());
    std::mt19937_64 rng(seed);
    std::shuffle(entities.begin(), entities.end(), rng);

    // Greedy packing: each entity goes to whichever train partition keeps
    // the lmc share closest to `ratio`, all of its records with it.
    std::unordered_set<std::string> lmc_entities;
    size_t lmc_count = 0, final_count = 0;
    for (const auto& e : entities) {
        size_t n = entity_counts[e];
        double total = double(lmc_count + final_count + n);
        double share_if_lmc = double(lmc_count + n) / total;
        double share_if_final = double(lmc_count) / total;
        if (std::abs(share_if_lmc - ratio) <= std::abs(share_if_final - ratio)) {
            lmc_entities.insert(e);
            lmc_count += n;
        } else {
            final_count += n;
        }
    }

    for (const auto* r : train_pool) {
        if (lmc_entities.count(r->entity_id)) {
            split.lmc_train.push_back(*r);
        } else {
            split.final_train.push_back(*r);
        }
    }
    if (split.lmc_train.empty() || split.final_train.empty() || split.holdout.empty()) {
        throw EmptyPartition("dataset split produced an empty partition");
    }
    return split;
}

std::pair<std::vector<RevisionRecord>, std::vector<RevisionRecord>> split_time_tail(
    const std::vector<RevisionRecord>& records, int64_t tail_seconds) {
    std::pair<std::vector<RevisionRecord>, std::vector<RevisionRecord>> out;
    if (records.empty()) return out;
    Instant newest = records.front().timestamp;
    for (const auto& r : records) newest = std::max(newest, r.timestamp);
    Instant boundary = newest - tail_seconds;
    for (const auto& r : records) {
        (r.timestamp >= boundary ? out.second : out.first).push_back(r);
    }
    return out;
}

std::vector<ChangeSample> balance_lmc_training(const std::vector<ChangeSample>& samples,
                                               uint64_t seed) {
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < samples.size(); ++i) {
        (samples[i].label ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw SingleClass("per-change training set has a single class");
    }
    auto& majority = pos.size() > neg.size() ? pos : neg;
    size_t target = std::min(pos.size(), neg.size());
    std::mt19937_64 rng(seed);
    std::shuffle(majority.begin(), majority.end(), rng);
    majority.resize(target);

    std::vector<bool> keep(samples.size(), false);
    for (size_t i : pos) keep[i] = true;
    for (size_t i : neg) keep[i] = true;
    std::vector<ChangeSample> out;
    out.reserve(2 * target);
    for (size_t i = 0; i < samples.size(); ++i) {
        if (keep[i]) out.push_back(samples[i]);
    }
    return out;
}

void EntityHistoryIndex::add(const std::vector<RevisionRecord>& records) {
    for (const auto& r : records) {
        by_entity_[r.entity_id].emplace_back(r.timestamp, r.revision_id);
    }
    sorted_ = false;
}

void EntityHistoryIndex::ensure_sorted() const {
    if (sorted_) return;
    auto& self = const_cast<EntityHistoryIndex&>(*this);
    for (auto& [_, v] : self.by_entity_) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    self.sorted_ = true;
}

std::optional<Instant> EntityHistoryIndex::previous_timestamp(const std::string& entity_id,
                                                              Instant timestamp,
                                                              int64_t revision_id) const {
    ensure_sorted();
    auto it = by_entity_.find(entity_id);
    if (it == by_entity_.end()) return std::nullopt;
    const auto& v = it->second;
    auto pos = std::lower_bound(v.begin(), v.end(), std::make_pair(timestamp, revision_id));
    if (pos == v.begin()) return std::nullopt;
    return std::prev(pos)->first;
}

bool is_newcomer(const RevisionRecord& record, const NewcomerRule& rule) {
    if (record.editor.is_anonymous) return false;
    int64_t age = record.editor.registration_time
                      ? record.timestamp - *record.editor.registration_time
                      : 0;
    return age < rule.max_account_age_days * 86400 ||
           record.editor.prior_edit_count < rule.min_prior_edits;
}

std::map<std::string, std::string> standard_groups(const RevisionRecord& record,
                                                   const NewcomerRule& rule) {
    std::map<std::string, std::string> groups;
    groups["editor"] = record.editor.is_anonymous ? "anonymous" : "registered";
    if (!record.editor.is_anonymous) {
        groups["experience"] = is_newcomer(record, rule) ? "new" : "experienced";
    }
    bool textual = false, any_en = false;
    for (const auto& d : record.deltas) {
        if (d.target.family != TargetFamily::Statement) {
            textual = true;
            if (d.target.key == "en" || d.target.key.rfind("en-", 0) == 0) any_en = true;
        }
    }
    if (record.deltas.empty()) {
        groups["content"] = "none";
        groups["language"] = "none";
    } else {
        groups["content"] = textual ? "textual" : "non-textual";
        groups["language"] = textual ? (any_en ? "english" : "non-english") : "none";
    }
    return groups;
}

void label_identity_reverts(std::vector<RevisionRecord>& records,
                            const std::vector<uint64_t>& hash_before,
                            const std::vector<uint64_t>& hash_after) {
    if (records.size() != hash_before.size() || records.size() != hash_after.size()) {
        throw EmptyInput("fingerprint vectors must align with records");
    }
    for (size_t i = 0; i < records.size(); ++i) {
        if (hash_after[i] == hash_before[i]) continue;  // null edit, not a revert
        for (size_t j = i; j-- > 0;) {
            if (hash_after[i] == hash_before[j]) {
                // records[j..i-1] were undone by records[i]
                for (size_t k = j; k < i; ++k) {
                    records[k].reverted = true;
                    records[k].reverting_editor = records[i].editor.editor_id;
                }
                records[i].is_revert_of = records[i - 1].revision_id;
                break;
            }
        }
    }
}

}  // namespace kgrev
