#pragma once
// Brute-force counterparts of the ranking and fairness metrics, written
// against the definitions rather than the production algorithms: pairwise
// counting for AUC, a threshold sweep for the filter rate, and direct
// group counting for the fairness measures. Quadratic is fine at test
// sizes.

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "kgrev/evaluation.hpp"

namespace kgrev::oracle {

// (concordant pairs + half the tied pairs) / (positives * negatives).
inline double pairwise_auc(const ScoredDataset& data) {
    std::vector<double> pos, neg;
    for (const auto& row : data.rows) {
        (row.label == 1 ? pos : neg).push_back(row.score);
    }
    double numerator = 0.0;
    for (double p : pos) {
        for (double n : neg) {
            if (p > n) {
                numerator += 1.0;
            } else if (p == n) {
                numerator += 0.5;
            }
        }
    }
    return numerator / (double(pos.size()) * double(neg.size()));
}

// Sweeps retain-thresholds over {-inf} and every distinct score; rows
// with score >= t are retained. Returns the largest removed fraction
// whose retained set still covers `recall` of the positives.
inline double threshold_sweep_filter_rate(const ScoredDataset& data, double recall) {
    size_t total_pos = 0;
    for (const auto& row : data.rows) total_pos += row.label == 1;
    std::set<double> thresholds{-std::numeric_limits<double>::infinity()};
    for (const auto& row : data.rows) thresholds.insert(row.score);

    double best = 0.0;
    for (double t : thresholds) {
        size_t retained_pos = 0, removed = 0;
        for (const auto& row : data.rows) {
            if (row.score >= t) {
                retained_pos += row.label == 1;
            } else {
                ++removed;
            }
        }
        if (double(retained_pos) + 1e-9 >= recall * double(total_pos)) {
            double rate = double(removed) / double(data.rows.size());
            if (rate > best) best = rate;
        }
    }
    return best;
}

inline double direct_disparate_impact(const ScoredDataset& data,
                                      const FairnessGroupSpec& spec) {
    size_t priv_n = 0, priv_flagged = 0, unpriv_n = 0, unpriv_flagged = 0;
    for (const auto& row : data.rows) {
        auto it = row.groups.find(spec.slice);
        if (it == row.groups.end()) continue;
        bool flagged = row.score >= spec.threshold;
        if (it->second == spec.privileged) {
            ++priv_n;
            priv_flagged += flagged;
        } else if (it->second == spec.unprivileged) {
            ++unpriv_n;
            unpriv_flagged += flagged;
        }
    }
    double priv_rate = double(priv_flagged) / double(priv_n);
    double unpriv_rate = double(unpriv_flagged) / double(unpriv_n);
    return unpriv_rate / priv_rate;
}

inline double per_group_delta_auc(const ScoredDataset& data, const FairnessGroupSpec& spec) {
    ScoredDataset priv, unpriv;
    for (const auto& row : data.rows) {
        auto it = row.groups.find(spec.slice);
        if (it == row.groups.end()) continue;
        if (it->second == spec.privileged) priv.rows.push_back(row);
        if (it->second == spec.unprivileged) unpriv.rows.push_back(row);
    }
    return pairwise_auc(priv) - pairwise_auc(unpriv);
}

}  // namespace kgrev::oracle
