#pragma once
// Revision-level scoring: metadata feature extraction, mean pooling of
// per-change content scores, the canonical feature-vector layout shared
// by the full model and its feature-masked baselines, and the composed
// end-to-end scorer.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kgrev/content_scorer.hpp"
#include "kgrev/corpus.hpp"
#include "kgrev/gbdt.hpp"

namespace kgrev {

struct MetadataFeatures {
    bool is_anonymous = false;
    int64_t account_age_seconds = 0;  // 0 for anonymous editors
    int64_t prior_edit_count = 0;
    // -1 when this is the first known revision on the entity; the
    // sentinel is paired with the first_on_entity indicator column.
    int64_t seconds_since_previous = -1;
    int n_deltas = 0;
    bool insert_only = false;
    bool change_only = false;
    bool remove_only = false;
    bool mixed = false;  // shape flags all false iff n_deltas == 0
    bool has_textual_change = false;
    bool has_statement_change = false;

    bool operator==(const MetadataFeatures&) const = default;
};

MetadataFeatures extract_metadata_features(const RevisionRecord& record,
                                           const EntityHistoryIndex& history);

// Arithmetic mean; empty input means the revision had no scorable
// content and yields nullopt.
std::optional<double> pool_scores(const std::vector<double>& scores);

// Canonical feature layout. Column indices are a persistence contract:
// models store them implicitly through their trees.
inline constexpr int kFeatureCount = 15;
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "is_anonymous",           // 0
    "account_age_seconds",    // 1
    "prior_edit_count",       // 2
    "seconds_since_previous",  // 3, -1 sentinel for first revisions
    "first_on_entity",        // 4
    "n_deltas",               // 5
    "insert_only",            // 6
    "change_only",            // 7
    "remove_only",            // 8
    "mixed",                  // 9
    "has_textual_change",     // 10
    "has_statement_change",   // 11
    "pooled_content_score",   // 12, 0.5 imputed when absent
    "content_score_missing",  // 13
    "n_scored_changes",       // 14
};

std::vector<double> feature_row(const MetadataFeatures& meta, std::optional<double> pooled_score,
                                int n_scored_changes);

// Baselines are the full model restricted to a column subset; there is
// no separate baseline implementation.
enum class FeatureMask { Full, MetadataOnly, ContentOnly };

std::vector<int> mask_columns(FeatureMask mask);
std::vector<std::string> feature_name_vector();

struct RevisionScore {
    double probability = 0.0;
    std::optional<double> pooled_content;
    std::vector<TextualizedChange> changes;
    std::vector<double> change_scores;  // aligned with changes
};

// diff-derived deltas -> textualize -> per-change scores -> mean pool ->
// metadata features -> final prediction. Pure in (models, labels,
// record, history); empty-delta revisions score from metadata plus the
// missing-content indicator.
RevisionScore score_revision(const ContentScorer& content, const GbdtClassifier& final_model,
                             const LabelMap& labels, const RevisionRecord& record,
                             const EntityHistoryIndex& history);

struct FinalTrainingData {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
};

FinalTrainingData build_final_rows(const std::vector<RevisionRecord>& records,
                                   const ContentScorer& content, const LabelMap& labels,
                                   const EntityHistoryIndex& history);

GbdtClassifier train_final_model(const FinalTrainingData& train, const FinalTrainingData& valid,
                                 const GbdtConfig& config, FeatureMask mask);

}  // namespace kgrev
