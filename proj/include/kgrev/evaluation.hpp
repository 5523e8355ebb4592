#pragma once
// Ranking and fairness metrics over scored datasets: Mann-Whitney AUC,
// seeded bootstrap confidence intervals, filter rate at a recall level,
// disparate impact ratio, AUC difference between groups, and the
// assembled sliced report.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgrev/corpus.hpp"

namespace kgrev {

struct ScoredRow {
    double score = 0.0;
    int label = 0;
    std::map<std::string, std::string> groups;  // slice name -> group value
};

struct ScoredDataset {
    std::vector<ScoredRow> rows;
};

struct FairnessGroupSpec {
    std::string slice;
    std::string privileged;    // group value
    std::string unprivileged;  // group value
    double threshold = 0.5;    // Y-hat = 1 iff score >= threshold
};

// Probability that a random positive outranks a random negative:
// (concordant + 0.5 * tied) / (positives * negatives), computed from
// average ranks in O(n log n). Throws SingleClass.
double auc(const ScoredDataset& data);

// Seeded bootstrap: `n_resamples` resamples of `resample_size` rows with
// replacement, AUC per resample, 5th/95th percentiles with linear
// interpolation. Single-class resamples are redrawn, keeping the count
// exact. Substream seeds derive from `seed` via splitmix64, so results
// are reproducible and resamples independent.
std::pair<double, double> bootstrap_ci(const ScoredDataset& data, int n_resamples,
                                       int resample_size, uint64_t seed);

// Largest removable fraction, dropping lowest-scored rows first, such
// that retained rows still hold >= recall * total positives. Tied rows
// are removed or retained as one block (retained when splitting would be
// needed, so the rate is never overstated). Throws NoPositives;
// InvalidRatio unless 0 < recall <= 1.
double filter_rate_at_recall(const ScoredDataset& data, double recall);

// Pr(Y-hat = 1 | unprivileged) / Pr(Y-hat = 1 | privileged).
// Throws EmptyGroup; ZeroPrivilegedRate when the denominator is 0.
double disparate_impact_ratio(const ScoredDataset& data, const FairnessGroupSpec& spec);

// AUC(privileged) - AUC(unprivileged); 0 means parity.
// Throws SingleClassInGroup (an empty group is a degenerate case of it).
double delta_auc(const ScoredDataset& data, const FairnessGroupSpec& spec);

struct BootstrapParams {
    int n_resamples = 10000;
    int resample_size = 10000;
};

struct EvaluationReport {
    double auc_value = 0.0;
    std::pair<double, double> auc_ci{0.0, 0.0};
    size_t n_rows = 0;
    std::map<double, double> fr;  // recall level -> filter rate
    std::map<std::string, double> dir;
    std::map<std::string, double> dauc;
    // slice -> group value -> AUC; single-class subsets are omitted
    // rather than failing the whole report.
    std::map<std::string, std::map<std::string, double>> per_slice_auc;
    std::string dauc_convention = "privileged minus unprivileged";

    bool operator==(const EvaluationReport&) const = default;
};

std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(std::string_view text);

EvaluationReport sliced_report(const ScoredDataset& data,
                               const std::vector<FairnessGroupSpec>& specs,
                               const std::vector<std::string>& slices,
                               const std::vector<double>& recalls, const BootstrapParams& bootstrap,
                               uint64_t seed);

// Anonymous editors flagged as vandalism, everyone else cleared; labels
// and groups carried over for evaluation.
ScoredDataset rule_based_baseline(const std::vector<RevisionRecord>& records);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One point per distinct score, descending thresholds.
std::vector<PrPoint> precision_recall_table(const ScoredDataset& data);

// Scored JSON-Lines: {"score": number, "label": 0|1, "groups": object}.
ScoredDataset read_scored(const std::string& path);
void write_scored(const std::string& path, const ScoredDataset& data);

}  // namespace kgrev
