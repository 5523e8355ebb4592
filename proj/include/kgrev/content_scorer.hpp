#pragma once
// Per-change content scorer: logistic regression over hashed token
// n-grams of the textualized change string. Desk-scale stand-in for a
// fine-tuned multilingual text classifier behind the same interface
// (text in, probability out); the featurizer is the only part a
// different backbone would replace.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrev/corpus.hpp"
#include "kgrev/graph2text.hpp"

namespace kgrev {

struct SparseFeature {
    uint32_t index = 0;
    float value = 0.0f;

    bool operator==(const SparseFeature&) const = default;
};

using SparseRow = std::vector<SparseFeature>;

struct ContentScorerConfig {
    int feature_bits = 20;  // hashed feature space = 2^feature_bits
    bool word_unigrams = true;
    bool word_bigrams = true;
    bool char_trigrams = true;
    bool l2_normalize = true;
    int epochs = 12;
    double learning_rate = 0.2;
    double l2 = 0.0;
    double validation_fraction = 0.05;
    uint64_t seed = 7;
    std::string model_version = "content-lr.v1";
};

// Hashed n-gram counts for one text. Words are maximal runs of ASCII
// alphanumerics or non-ASCII bytes, lowercased (ASCII only); character
// trigrams run over the lowercased text including spaces. Feature
// families hash under distinct seeds. Indices are sorted and unique;
// values L2-normalized when configured. Empty text yields an empty row.
SparseRow featurize_text(std::string_view text, const ContentScorerConfig& config);

// Mean logistic loss over `rows` plus (l2/2)*||weights||^2.
double logistic_loss(const std::vector<double>& weights, double bias,
                     const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                     double l2);

// Analytic gradient of logistic_loss; checked against central finite
// differences in the test suite.
void logistic_gradient(const std::vector<double>& weights, double bias,
                       const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                       double l2, std::vector<double>& grad_weights, double& grad_bias);

class ContentScorer {
public:
    ContentScorer() = default;

    // Seeded SGD over shuffled samples; a random `validation_fraction`
    // slice (when large enough to afford one) selects the checkpoint
    // with the lowest validation loss. Throws EmptyInput (< 2 samples)
    // or SingleClass.
    static ContentScorer train(const std::vector<ChangeSample>& samples,
                               const ContentScorerConfig& config);

    // Probability in (0,1); the margin is clamped to [-30, 30] so the
    // open interval holds even for extreme inputs. Empty text scores
    // sigmoid(bias).
    double score_text(std::string_view text) const;
    double score(const TextualizedChange& change) const { return score_text(change.full_text); }

    const ContentScorerConfig& config() const { return config_; }
    double bias() const { return bias_; }
    int best_epoch() const { return best_epoch_; }
    const std::vector<double>& validation_loss() const { return validation_loss_; }
    const std::string& template_version() const { return template_version_; }
    const std::string& model_version() const { return config_.model_version; }

    // JSON container with float32 weights (base64). Loading a model
    // saved under a different textualization template throws
    // InvalidModel: scores are only meaningful for the text format the
    // model was trained on.
    void save(const std::string& path) const;
    static ContentScorer load(const std::string& path);

private:
    ContentScorerConfig config_;
    std::vector<float> weights_;
    double bias_ = 0.0;
    int best_epoch_ = -1;
    std::vector<double> validation_loss_;
    std::string template_version_{kTemplateVersion};
};

}  // namespace kgrev
