#include "kgrev/content_scorer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

namespace kgrev {

using nlohmann::json;

namespace {

constexpr uint64_t kWordUnigramSeed = fnv1a64("word:1");
constexpr uint64_t kWordBigramSeed = fnv1a64("word:2");
constexpr uint64_t kCharTrigramSeed = fnv1a64("char:3");

char ascii_lower(char c) { return c >= 'A' && c <= 'Z' ? char(c + 32) : c; }

bool word_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || (unsigned char)(c) >= 0x80;
}

double stable_sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow
double softplus(double x) { return x > 35.0 ? x : std::log1p(std::exp(x)); }

double sparse_margin(const std::vector<float>& weights, double bias, const SparseRow& row) {
    double z = bias;
    for (const auto& f : row) z += double(weights[f.index]) * double(f.value);
    return z;
}

}  // namespace

SparseRow featurize_text(std::string_view text, const ContentScorerConfig& config) {
    const uint32_t mask = (uint32_t(1) << config.feature_bits) - 1;
    std::string lower(text);
    for (auto& c : lower) c = ascii_lower(c);

    std::unordered_map<uint32_t, float> counts;
    auto bump = [&](uint64_t h) { counts[uint32_t(h) & mask] += 1.0f; };

    std::vector<std::string_view> words;
    for (size_t i = 0; i < lower.size();) {
        if (!word_char(lower[i])) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < lower.size() && word_char(lower[j])) ++j;
        words.push_back(std::string_view(lower).substr(i, j - i));
        i = j;
    }
    if (config.word_unigrams) {
        for (auto w : words) bump(fnv1a64(w, kWordUnigramSeed));
    }
    if (config.word_bigrams) {
        for (size_t i = 0; i + 1 < words.size(); ++i) {
            bump(fnv1a64(words[i + 1], fnv1a64("\x1f", fnv1a64(words[i], kWordBigramSeed))));
        }
    }
    if (config.char_trigrams) {
        for (size_t i = 0; i + 3 <= lower.size(); ++i) {
            bump(fnv1a64(std::string_view(lower).substr(i, 3), kCharTrigramSeed));
        }
    }

    SparseRow row;
    row.reserve(counts.size());
    for (const auto& [idx, v] : counts) row.push_back({idx, v});
    std::sort(row.begin(), row.end(),
              [](const SparseFeature& a, const SparseFeature& b) { return a.index < b.index; });
    if (config.l2_normalize && !row.empty()) {
        double norm = 0.0;
        for (const auto& f : row) norm += double(f.value) * double(f.value);
        float inv = float(1.0 / std::sqrt(norm));
        for (auto& f : row) f.value *= inv;
    }
    return row;
}

double logistic_loss(const std::vector<double>& weights, double bias,
                     const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                     double l2) {
    double loss = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
        double z = bias;
        for (const auto& f : rows[i]) z += weights[f.index] * double(f.value);
        double sign = labels[i] ? 1.0 : -1.0;
        loss += softplus(-sign * z);
    }
    loss /= double(rows.size());
    if (l2 != 0.0) {
        double sq = 0.0;
        for (double w : weights) sq += w * w;
        loss += 0.5 * l2 * sq;
    }
    return loss;
}

void logistic_gradient(const std::vector<double>& weights, double bias,
                       const std::vector<SparseRow>& rows, const std::vector<int>& labels,
                       double l2, std::vector<double>& grad_weights, double& grad_bias) {
    grad_weights.assign(weights.size(), 0.0);
    grad_bias = 0.0;
    for (size_t i = 0; i < rows.size(); ++i) {
        double z = bias;
        for (const auto& f : rows[i]) z += weights[f.index] * double(f.value);
        double g = stable_sigmoid(z) - double(labels[i]);
        grad_bias += g;
        for (const auto& f : rows[i]) grad_weights[f.index] += g * double(f.value);
    }
    double inv = 1.0 / double(rows.size());
    grad_bias *= inv;
    for (auto& g : grad_weights) g *= inv;
    if (l2 != 0.0) {
        for (size_t i = 0; i < weights.size(); ++i) grad_weights[i] += l2 * weights[i];
    }
}

ContentScorer ContentScorer::train(const std::vector<ChangeSample>& samples,
                                   const ContentScorerConfig& config) {
    if (samples.size() < 2) throw EmptyInput("content scorer needs at least 2 samples");
    bool any_pos = false, any_neg = false;
    for (const auto& s : samples) (s.label ? any_pos : any_neg) = true;
    if (!any_pos || !any_neg) throw SingleClass("content scorer needs both classes");

    std::vector<SparseRow> rows;
    std::vector<int> labels;
    rows.reserve(samples.size());
    labels.reserve(samples.size());
    for (const auto& s : samples) {
        rows.push_back(featurize_text(s.change.full_text, config));
        labels.push_back(s.label ? 1 : 0);
    }

    std::mt19937_64 rng(config.seed);
    std::vector<size_t> order(rows.size());
    std::iota(order.begin(), order.end(), size_t(0));
    std::shuffle(order.begin(), order.end(), rng);

    size_t n_val = size_t(double(rows.size()) * config.validation_fraction);
    std::vector<size_t> val_idx(order.begin(), order.begin() + n_val);
    std::vector<size_t> train_idx(order.begin() + n_val, order.end());
    if (val_idx.empty()) val_idx = train_idx;  // too small for a held-out slice

    const size_t dim = size_t(1) << config.feature_bits;
    std::vector<double> w(dim, 0.0);
    double b = 0.0;

    auto validation_loss = [&]() {
        double loss = 0.0;
        for (size_t i : val_idx) {
            double z = b;
            for (const auto& f : rows[i]) z += w[f.index] * double(f.value);
            double sign = labels[i] ? 1.0 : -1.0;
            loss += softplus(-sign * z);
        }
        return loss / double(val_idx.size());
    };

    ContentScorer model;
    model.config_ = config;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_w;
    double best_b = 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        for (size_t i : train_idx) {
            double z = b;
            for (const auto& f : rows[i]) z += w[f.index] * double(f.value);
            double g = stable_sigmoid(z) - double(labels[i]);
            for (const auto& f : rows[i]) {
                w[f.index] -= config.learning_rate * (g * double(f.value) + config.l2 * w[f.index]);
            }
            b -= config.learning_rate * g;
        }
        double loss = validation_loss();
        model.validation_loss_.push_back(loss);
        if (loss < best) {
            best = loss;
            best_w = w;
            best_b = b;
            model.best_epoch_ = epoch;
        }
    }

    model.weights_.resize(dim);
    for (size_t i = 0; i < dim; ++i) model.weights_[i] = float(best_w[i]);
    model.bias_ = best_b;
    return model;
}

double ContentScorer::score_text(std::string_view text) const {
    if (weights_.empty()) throw InvalidModel("content scorer is untrained");
    double z = sparse_margin(weights_, bias_, featurize_text(text, config_));
    z = std::clamp(z, -30.0, 30.0);
    return stable_sigmoid(z);
}

void ContentScorer::save(const std::string& path) const {
    if (weights_.empty()) throw InvalidModel("content scorer is untrained");
    json out;
    out["format"] = "kgrev.content_scorer";
    out["format_version"] = 1;
    out["model_version"] = config_.model_version;
    out["template_version"] = template_version_;
    out["feature_bits"] = config_.feature_bits;
    out["word_unigrams"] = config_.word_unigrams;
    out["word_bigrams"] = config_.word_bigrams;
    out["char_trigrams"] = config_.char_trigrams;
    out["l2_normalize"] = config_.l2_normalize;
    out["bias"] = bias_;
    out["best_epoch"] = best_epoch_;
    out["validation_loss"] = validation_loss_;
    out["weights_b64"] = base64_encode(weights_.data(), weights_.size() * sizeof(float));
    write_file(path, out.dump());
}

ContentScorer ContentScorer::load(const std::string& path) {
    json in = json::parse(read_file(path), nullptr, false);
    if (in.is_discarded() || in.value("format", "") != "kgrev.content_scorer") {
        throw InvalidModel("not a content scorer model: " + path);
    }
    ContentScorer model;
    model.template_version_ = in.at("template_version").get<std::string>();
    if (model.template_version_ != kTemplateVersion) {
        throw InvalidModel("model built for textualization template '" +
                           model.template_version_ + "', this build uses '" +
                           std::string(kTemplateVersion) + "'");
    }
    model.config_.model_version = in.at("model_version").get<std::string>();
    model.config_.feature_bits = in.at("feature_bits").get<int>();
    model.config_.word_unigrams = in.at("word_unigrams").get<bool>();
    model.config_.word_bigrams = in.at("word_bigrams").get<bool>();
    model.config_.char_trigrams = in.at("char_trigrams").get<bool>();
    model.config_.l2_normalize = in.at("l2_normalize").get<bool>();
    model.bias_ = in.at("bias").get<double>();
    model.best_epoch_ = in.value("best_epoch", -1);
    if (in.contains("validation_loss")) {
        model.validation_loss_ = in["validation_loss"].get<std::vector<double>>();
    }
    std::vector<uint8_t> raw = base64_decode(in.at("weights_b64").get<std::string>());
    size_t expect = (size_t(1) << model.config_.feature_bits) * sizeof(float);
    if (raw.size() != expect) throw InvalidModel("weight payload size mismatch");
    model.weights_.resize(raw.size() / sizeof(float));
    std::memcpy(model.weights_.data(), raw.data(), raw.size());
    return model;
}

}  // namespace kgrev
