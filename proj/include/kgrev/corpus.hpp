#pragma once
// Labeled revision streams: the canonical JSON-Lines corpus format, the
// quality filters applied before training, negative balancing, and the
// entity-disjoint / time-based dataset split.
//
// Canonical corpus format: UTF-8 JSON-Lines, one RevisionRecord per line,
// field names exactly as in the types below; timestamps ISO-8601 UTC;
// gzip-compressed input accepted transparently.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kgrev/diff.hpp"
#include "kgrev/graph2text.hpp"
#include "kgrev/util.hpp"

namespace kgrev {

struct EditorInfo {
    std::optional<std::string> editor_id;  // absent <=> anonymous
    bool is_anonymous = true;
    std::optional<Instant> registration_time;  // absent <=> anonymous
    std::set<std::string> groups;
    int64_t prior_edit_count = 0;

    bool operator==(const EditorInfo&) const = default;
};

struct RevisionRecord {
    int64_t revision_id = 0;
    std::string entity_id;
    Instant timestamp = 0;
    std::optional<int64_t> parent_revision_id;
    EditorInfo editor;
    std::set<std::string> tags;
    std::vector<ContentDelta> deltas;
    bool reverted = false;
    std::optional<std::string> reverting_editor;
    std::optional<int64_t> is_revert_of;

    bool operator==(const RevisionRecord&) const = default;
};

// JSON codecs for the canonical corpus schema (nlohmann::json carried as
// dumped strings at this boundary to keep the header light).
std::string record_to_json_line(const RevisionRecord& record);
RevisionRecord record_from_json_line(std::string_view line);
std::string editor_to_json_text(const EditorInfo& editor);
EditorInfo editor_from_json_text(std::string_view text);

std::vector<RevisionRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<RevisionRecord>& records);

// ---- quality filters -----------------------------------------------------
// All filters preserve input order and are idempotent.

inline constexpr std::string_view kDefaultHumanUiTag = "wikidata-ui";

// Keeps exactly the records whose tags contain `tag`.
std::vector<RevisionRecord> filter_human_ui_edits(const std::vector<RevisionRecord>& records,
                                                  std::string_view tag = kDefaultHumanUiTag);

// Drops records reverted by their own editor.
std::vector<RevisionRecord> filter_self_reverts(const std::vector<RevisionRecord>& records);

struct EditWarStats {
    size_t input_records = 0;
    size_t input_reverted = 0;
    size_t removed_records = 0;
    size_t removed_reverted = 0;
};

// Removes every revision participating in a revert chain of length >= 2 on
// one entity (the reverts and the revisions they target). A single revert
// with no counter-revert is not a war.
std::vector<RevisionRecord> filter_edit_wars(const std::vector<RevisionRecord>& records,
                                             EditWarStats* stats = nullptr);

// Keeps all reverted records and a seeded uniform sample of unreverted ones
// at reverted:unreverted = 1:ratio (or all, if fewer available). Input
// order is preserved. Throws InvalidRatio for ratio < 1.
std::vector<RevisionRecord> balance_negatives(const std::vector<RevisionRecord>& records,
                                              int ratio, uint64_t seed);

// ---- dataset split -------------------------------------------------------

struct DatasetSplit {
    std::vector<RevisionRecord> lmc_train;
    std::vector<RevisionRecord> final_train;
    std::vector<RevisionRecord> holdout;
    Instant cutoff = 0;
    double ratio = 0.8;
};

// Holdout = records at/after cutoff. Remaining records are assigned to the
// two train partitions entity-disjointly: entities are shuffled (seeded)
// and greedily packed by record count to approximate `ratio` for
// lmc_train. Throws EmptyPartition when any partition ends up empty.
DatasetSplit split_dataset(const std::vector<RevisionRecord>& records, Instant cutoff,
                           double ratio, uint64_t seed);

// Time-based tail used as the final classifier's validation slice.
// Returns (head, tail): tail = records within `tail_seconds` of the newest.
std::pair<std::vector<RevisionRecord>, std::vector<RevisionRecord>> split_time_tail(
    const std::vector<RevisionRecord>& records, int64_t tail_seconds);

// ---- per-change training set ----------------------------------------------

struct ChangeSample {
    TextualizedChange change;
    int label = 0;  // revision label propagated to each of its changes
};

// Random downsampling of the overrepresented class to exact balance; the
// minority class is untouched; order preserved. Throws SingleClass.
std::vector<ChangeSample> balance_lmc_training(const std::vector<ChangeSample>& samples,
                                               uint64_t seed);

// ---- derived lookups -------------------------------------------------------

// Previous-revision timestamps per entity, for the time-since-previous
// feature. Build once over all corpora that may contain history.
class EntityHistoryIndex {
public:
    void add(const std::vector<RevisionRecord>& records);

    // Timestamp of the latest revision on `entity_id` strictly before
    // (timestamp, revision_id); absent when this is the first known one.
    std::optional<Instant> previous_timestamp(const std::string& entity_id, Instant timestamp,
                                              int64_t revision_id) const;

private:
    std::map<std::string, std::vector<std::pair<Instant, int64_t>>> by_entity_;
    mutable bool sorted_ = true;
    void ensure_sorted() const;
};

/// Newcomer rule for fairness slicing: registered account younger than
// `max_account_age_days` at edit time OR prior_edit_count below
// `min_prior_edits`.
struct NewcomerRule {
    int64_t max_account_age_days = 30;
    int64_t min_prior_edits = 50;
};

bool is_newcomer(const RevisionRecord& record, const NewcomerRule& rule = {});

/// Group values used by the sliced evaluation: editor (anonymous|registered),
// experience (new|experienced, registered only), content
// (textual|non-textual|none), language (english|non-english|none).
std::map<std::string, std::string> standard_groups(const RevisionRecord& record,
                                                   const NewcomerRule& rule = {});

// ---- fixture tooling -------------------------------------------------------

/// Derives revert linkage from content fingerprints: when a revision's
// content equals the content that held before some earlier run of
// revisions, that run is marked reverted by this revision. `hash_before`
// is the content fingerprint before each revision, `hash_after` after it,
// aligned with `records` (one entity, time-sorted). Fixture generation
// only; real corpora carry revert labels as input.
void label_identity_reverts(std::vector<RevisionRecord>& records,
                            const std::vector<uint64_t>& hash_before,
                            const std::vector<uint64_t>& hash_after);

}  // namespace kgrev
