#include "kgrev/gbdt.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kgrev/graph2text.hpp"

namespace kgrev {

using nlohmann::json;

namespace {

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

double logloss(double z, int y) {
    double m = (y ? -1.0 : 1.0) * z;
    return m > 35.0 ? m : std::log1p(std::exp(m));
}

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& x;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const GbdtConfig& cfg;
    const std::vector<int>& features;
    std::vector<TreeNode> nodes;
    std::vector<int> leaf_of_row;

    double leaf_value(double g, double h) const { return -g / (h + cfg.l2_leaf); }

    double score(double g, double h) const { return g * g / (h + cfg.l2_leaf); }

    int build(std::vector<size_t>&& rows, int depth) {
        double g_sum = 0.0, h_sum = 0.0;
        for (size_t r : rows) {
            g_sum += grad[r];
            h_sum += hess[r];
        }

        SplitCandidate best;
        if (depth < cfg.max_depth && rows.size() >= size_t(2 * cfg.min_samples_leaf)) {
            std::vector<std::pair<double, size_t>> order(rows.size());
            for (int f : features) {
                for (size_t i = 0; i < rows.size(); ++i) order[i] = {x[rows[i]][f], rows[i]};
                std::sort(order.begin(), order.end());
                double gl = 0.0, hl = 0.0;
                for (size_t i = 0; i + 1 < order.size(); ++i) {
                    gl += grad[order[i].second];
                    hl += hess[order[i].second];
                    if (order[i].first == order[i + 1].first) continue;
                    if (i + 1 < size_t(cfg.min_samples_leaf) ||
                        order.size() - i - 1 < size_t(cfg.min_samples_leaf)) {
                        continue;
                    }
                    double hr = h_sum - hl;
                    if (hl < cfg.min_child_hessian || hr < cfg.min_child_hessian) continue;
                    double gain =
                        score(gl, hl) + score(g_sum - gl, hr) - score(g_sum, h_sum);
                    if (gain > best.gain + 1e-12) {
                        best = {gain, f, (order[i].first + order[i + 1].first) / 2.0};
                    }
                }
            }
        }

        int node_id = int(nodes.size());
        nodes.emplace_back();
        if (best.feature < 0) {
            nodes[node_id].value = cfg.learning_rate * leaf_value(g_sum, h_sum);
            for (size_t r : rows) leaf_of_row[r] = node_id;
            return node_id;
        }

        std::vector<size_t> left_rows, right_rows;
        for (size_t r : rows) {
            (x[r][best.feature] <= best.threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        nodes[node_id].feature = best.feature;
        nodes[node_id].threshold = best.threshold;
        nodes[node_id].left = build(std::move(left_rows), depth + 1);
        nodes[node_id].right = build(std::move(right_rows), depth + 1);
        return node_id;
    }
};

}  // namespace

double RegressionTree::predict(const std::vector<double>& x) const {
    int i = 0;
    while (nodes[i].feature >= 0) {
        i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    }
    return nodes[i].value;
}

GbdtClassifier GbdtClassifier::train(const std::vector<std::vector<double>>& train_x,
                                     const std::vector<int>& train_y,
                                     const std::vector<std::vector<double>>& valid_x,
                                     const std::vector<int>& valid_y, const GbdtConfig& config,
                                     const std::vector<int>& feature_mask,
                                     const std::vector<std::string>& feature_names) {
    if (train_x.empty()) throw EmptyInput("final classifier needs training rows");
    if (valid_x.empty()) throw EmptyValidation("final classifier needs validation rows");
    size_t positives = 0;
    for (int y : train_y) positives += size_t(y != 0);
    size_t negatives = train_x.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw SingleClass("final classifier needs both classes in training data");
    }

    GbdtClassifier model;
    model.config_ = config;
    model.feature_count_ = int(train_x[0].size());
    model.feature_names_ = feature_names;
    model.template_version_ = std::string(kTemplateVersion);
    model.positive_weight_ =
        config.positive_class_weighting ? double(negatives) / double(positives) : 1.0;
    model.feature_mask_ = feature_mask;
    std::vector<int> features = feature_mask;
    if (features.empty()) {
        features.resize(model.feature_count_);
        std::iota(features.begin(), features.end(), 0);
    }

    double weighted_pos = model.positive_weight_ * double(positives);
    model.base_margin_ = std::log(weighted_pos / double(negatives));

    const size_t n = train_x.size();
    std::vector<double> margin(n, model.base_margin_);
    std::vector<double> valid_margin(valid_x.size(), model.base_margin_);
    std::vector<double> grad(n), hess(n);

    double best_loss = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < config.iterations; ++iter) {
        for (size_t i = 0; i < n; ++i) {
            double w = train_y[i] ? model.positive_weight_ : 1.0;
            double p = stable_sigmoid(margin[i]);
            grad[i] = w * (p - double(train_y[i]));
            hess[i] = w * p * (1.0 - p);
        }

        TreeBuilder builder{train_x, grad, hess, config, features, {}, {}};
        builder.leaf_of_row.assign(n, -1);
        std::vector<size_t> all(n);
        std::iota(all.begin(), all.end(), size_t(0));
        builder.build(std::move(all), 0);

        RegressionTree tree{std::move(builder.nodes)};
        for (size_t i = 0; i < n; ++i) margin[i] += tree.nodes[builder.leaf_of_row[i]].value;
        for (size_t i = 0; i < valid_x.size(); ++i) valid_margin[i] += tree.predict(valid_x[i]);
        model.trees_.push_back(std::move(tree));

        double loss = 0.0;
        for (size_t i = 0; i < valid_x.size(); ++i) loss += logloss(valid_margin[i], valid_y[i]);
        loss /= double(valid_x.size());
        model.validation_loss_.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            model.best_iteration_ = iter + 1;
        }
    }
    return model;
}

double GbdtClassifier::predict_margin(const std::vector<double>& x) const {
    if (int(x.size()) != feature_count_) {
        throw InvalidModel("feature row has " + std::to_string(x.size()) + " columns, model has " +
                           std::to_string(feature_count_));
    }
    double z = base_margin_;
    for (int t = 0; t < best_iteration_; ++t) z += trees_[t].predict(x);
    return z;
}

double GbdtClassifier::predict(const std::vector<double>& x) const {
    return stable_sigmoid(std::clamp(predict_margin(x), -30.0, 30.0));
}

void GbdtClassifier::save(const std::string& path) const {
    json out;
    out["format"] = "kgrev.final_classifier";
    out["format_version"] = 1;
    out["model_version"] = config_.model_version;
    out["template_version"] = template_version_;
    out["feature_count"] = feature_count_;
    out["feature_names"] = feature_names_;
    out["feature_mask"] = feature_mask_;
    out["base_margin"] = base_margin_;
    out["positive_weight"] = positive_weight_;
    out["best_iteration"] = best_iteration_;
    out["learning_rate"] = config_.learning_rate;
    out["validation_loss"] = validation_loss_;
    json trees = json::array();
    for (const auto& t : trees_) {
        json nodes = json::array();
        for (const auto& nd : t.nodes) {
            nodes.push_back({{"f", nd.feature},
                             {"t", nd.threshold},
                             {"l", nd.left},
                             {"r", nd.right},
                             {"v", nd.value}});
        }
        trees.push_back(std::move(nodes));
    }
    out["trees"] = std::move(trees);
    write_file(path, out.dump());
}

GbdtClassifier GbdtClassifier::load(const std::string& path) {
    json in = json::parse(read_file(path), nullptr, false);
    if (in.is_discarded() || in.value("format", "") != "kgrev.final_classifier") {
        throw InvalidModel("not a final classifier model: " + path);
    }
    GbdtClassifier model;
    model.template_version_ = in.at("template_version").get<std::string>();
    if (model.template_version_ != kTemplateVersion) {
        throw InvalidModel("model built for textualization template '" +
                           model.template_version_ + "', this build uses '" +
                           std::string(kTemplateVersion) + "'");
    }
    model.config_.model_version = in.at("model_version").get<std::string>();
    model.config_.learning_rate = in.value("learning_rate", model.config_.learning_rate);
    model.feature_count_ = in.at("feature_count").get<int>();
    model.feature_names_ = in.value("feature_names", std::vector<std::string>{});
    model.feature_mask_ = in.value("feature_mask", std::vector<int>{});
    model.base_margin_ = in.at("base_margin").get<double>();
    model.positive_weight_ = in.at("positive_weight").get<double>();
    model.best_iteration_ = in.at("best_iteration").get<int>();
    if (in.contains("validation_loss")) {
        model.validation_loss_ = in["validation_loss"].get<std::vector<double>>();
    }
    for (const auto& jt : in.at("trees")) {
        RegressionTree tree;
        for (const auto& jn : jt) {
            tree.nodes.push_back({jn.at("f").get<int>(), jn.at("t").get<double>(),
                                  jn.at("l").get<int>(), jn.at("r").get<int>(),
                                  jn.at("v").get<double>()});
        }
        model.trees_.push_back(std::move(tree));
    }
    if (model.best_iteration_ < 0 || model.best_iteration_ > int(model.trees_.size())) {
        throw InvalidModel("best_iteration outside the stored ensemble");
    }
    model.config_.iterations = int(model.trees_.size());
    return model;
}

}  // namespace kgrev
