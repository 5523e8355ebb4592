#include "kgrev/pipeline.hpp"

#include <numeric>

namespace kgrev {

MetadataFeatures extract_metadata_features(const RevisionRecord& record,
                                           const EntityHistoryIndex& history) {
    MetadataFeatures m;
    m.is_anonymous = record.editor.is_anonymous;
    if (record.editor.registration_time) {
        m.account_age_seconds = std::max<int64_t>(0, record.timestamp -
                                                         *record.editor.registration_time);
    }
    m.prior_edit_count = record.editor.prior_edit_count;
    auto prev = history.previous_timestamp(record.entity_id, record.timestamp,
                                           record.revision_id);
    if (prev) m.seconds_since_previous = std::max<int64_t>(0, record.timestamp - *prev);
    m.n_deltas = int(record.deltas.size());
    if (!record.deltas.empty()) {
        switch (classify_revision_shape(record.deltas)) {
            case RevisionShape::InsertOnly: m.insert_only = true; break;
            case RevisionShape::ChangeOnly: m.change_only = true; break;
            case RevisionShape::RemoveOnly: m.remove_only = true; break;
            case RevisionShape::Mixed: m.mixed = true; break;
        }
    }
    for (const auto& d : record.deltas) {
        if (d.target.family == TargetFamily::Statement) {
            m.has_statement_change = true;
        } else {
            m.has_textual_change = true;
        }
    }
    return m;
}

std::optional<double> pool_scores(const std::vector<double>& scores) {
    if (scores.empty()) return std::nullopt;
    double sum = std::accumulate(scores.begin(), scores.end(), 0.0);
    return sum / double(scores.size());
}

std::vector<double> feature_row(const MetadataFeatures& meta, std::optional<double> pooled_score,
                                int n_scored_changes) {
    return {
        meta.is_anonymous ? 1.0 : 0.0,
        double(meta.account_age_seconds),
        double(meta.prior_edit_count),
        double(meta.seconds_since_previous),
        meta.seconds_since_previous < 0 ? 1.0 : 0.0,
        double(meta.n_deltas),
        meta.insert_only ? 1.0 : 0.0,
        meta.change_only ? 1.0 : 0.0,
        meta.remove_only ? 1.0 : 0.0,
        meta.mixed ? 1.0 : 0.0,
        meta.has_textual_change ? 1.0 : 0.0,
        meta.has_statement_change ? 1.0 : 0.0,
        pooled_score ? *pooled_score : 0.5,
        pooled_score ? 0.0 : 1.0,
        double(n_scored_changes),
    };
}

std::vector<int> mask_columns(FeatureMask mask) {
    switch (mask) {
        case FeatureMask::MetadataOnly: return {0, 1, 2, 3, 4};
        case FeatureMask::ContentOnly: return {5, 6, 7, 8, 9, 10, 11, 12, 13, 14};
        case FeatureMask::Full: break;
    }
    std::vector<int> all(kFeatureCount);
    std::iota(all.begin(), all.end(), 0);
    return all;
}

std::vector<std::string> feature_name_vector() {
    return std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
}

RevisionScore score_revision(const ContentScorer& content, const GbdtClassifier& final_model,
                             const LabelMap& labels, const RevisionRecord& record,
                             const EntityHistoryIndex& history) {
    RevisionScore out;
    out.changes = textualize_revision(record.deltas, labels);
    out.change_scores.reserve(out.changes.size());
    for (const auto& c : out.changes) out.change_scores.push_back(content.score(c));
    out.pooled_content = pool_scores(out.change_scores);
    MetadataFeatures meta = extract_metadata_features(record, history);
    auto row = feature_row(meta, out.pooled_content, int(out.change_scores.size()));
    out.probability = final_model.predict(row);
    return out;
}

FinalTrainingData build_final_rows(const std::vector<RevisionRecord>& records,
                                   const ContentScorer& content, const LabelMap& labels,
                                   const EntityHistoryIndex& history) {
    FinalTrainingData data;
    data.rows.reserve(records.size());
    data.labels.reserve(records.size());
    for (const auto& r : records) {
        std::vector<double> scores;
        for (const auto& d : r.deltas) scores.push_back(content.score(textualize(d, labels)));
        MetadataFeatures meta = extract_metadata_features(r, history);
        data.rows.push_back(feature_row(meta, pool_scores(scores), int(scores.size())));
        data.labels.push_back(r.reverted ? 1 : 0);
    }
    return data;
}

GbdtClassifier train_final_model(const FinalTrainingData& train, const FinalTrainingData& valid,
                                 const GbdtConfig& config, FeatureMask mask) {
    return GbdtClassifier::train(train.rows, train.labels, valid.rows, valid.labels, config,
                                 mask_columns(mask), feature_name_vector());
}

}  // namespace kgrev
