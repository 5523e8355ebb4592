#pragma once
// Gradient-boosted shallow regression trees with logistic loss, a
// positive-class weight for imbalanced data, and best-iteration
// selection on a validation set. Split search is exhaustive and
// deterministic: no row or column sampling, ties broken by feature
// order then threshold.

#include <cstdint>
#include <string>
#include <vector>

#include "kgrev/util.hpp"

namespace kgrev {

struct GbdtConfig {
    int iterations = 2500;  // reference default; desk-scale configs shrink this
    double learning_rate = 0.005;
    int max_depth = 3;
    int min_samples_leaf = 1;
    double min_child_hessian = 1e-4;
    double l2_leaf = 1.0;
    bool positive_class_weighting = true;  // weight = negatives / positives
    std::string model_version = "final-gbdt.v1";
};

struct TreeNode {
    int feature = -1;  // -1: leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf value, learning rate already applied
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root; left if x[feature] <= threshold

    double predict(const std::vector<double>& x) const;
};

class GbdtClassifier {
public:
    GbdtClassifier() = default;

    // Fits `iterations` trees on weighted logistic-loss gradients with
    // Newton leaf values, then truncates to the iteration with the best
    // unweighted validation loss. `feature_mask` restricts split search
    // to the listed column indices (empty: all columns). Throws
    // SingleClass (train) or EmptyValidation.
    static GbdtClassifier train(const std::vector<std::vector<double>>& train_x,
                                const std::vector<int>& train_y,
                                const std::vector<std::vector<double>>& valid_x,
                                const std::vector<int>& valid_y, const GbdtConfig& config,
                                const std::vector<int>& feature_mask = {},
                                const std::vector<std::string>& feature_names = {});

    // Log-odds at the best iteration.
    double predict_margin(const std::vector<double>& x) const;
    // Probability, strictly inside (0,1) (margin clamped to [-30, 30]).
    double predict(const std::vector<double>& x) const;

    int best_iteration() const { return best_iteration_; }  // trees used by predict
    int trained_iterations() const { return int(trees_.size()); }
    double base_margin() const { return base_margin_; }
    double positive_weight() const { return positive_weight_; }
    const std::vector<double>& validation_loss() const { return validation_loss_; }
    const std::vector<RegressionTree>& trees() const { return trees_; }
    const std::vector<int>& feature_mask() const { return feature_mask_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::string& model_version() const { return config_.model_version; }
    const std::string& template_version() const { return template_version_; }
    const GbdtConfig& config() const { return config_; }

    // JSON container; loading fails with InvalidModel when the stored
    // textualization template version differs from this build's.
    void save(const std::string& path) const;
    static GbdtClassifier load(const std::string& path);

private:
    GbdtConfig config_;
    std::vector<RegressionTree> trees_;
    double base_margin_ = 0.0;
    double positive_weight_ = 1.0;
    int best_iteration_ = 0;
    int feature_count_ = 0;
    std::vector<int> feature_mask_;
    std::vector<std::string> feature_names_;
    std::vector<double> validation_loss_;
    std::string template_version_;
};

}  // namespace kgrev
