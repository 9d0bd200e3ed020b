// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_MODEL_HPP
#define DRGKIT_MODEL_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drgkit/catalog.hpp"
#include "drgkit/preprocess.hpp"

namespace drg {

/// Sparse tf-idf vector; indices strictly increasing, values >= 0.
struct FeatureVector {
    std::vector<std::pair<int, double>> terms;
};

/// Token -> dense column index, built from the training split only.
/// Tokens are lowercased alphanumeric runs; document frequency below
/// min_df is pruned. Indices follow lexicographic token order.
class Vocabulary {
public:
    Vocabulary() = default;

    static Vocabulary build(std::span<const std::string> train_texts, int min_df = 2);

    /// tf * smoothed idf, L2-normalized. Unknown tokens are skipped.
    FeatureVector featurize(std::string_view text) const;

    int size() const { return static_cast<int>(df_.size()); }
    int n_docs() const { return n_docs_; }
    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::vector<int>& document_frequencies() const { return df_; }

    /// Rebuild from serialized parts (tokens already in index order).
    static Vocabulary restore(std::vector<std::string> tokens, std::vector<int> df, int n_docs);

    static std::vector<std::string> tokenize(std::string_view text);

private:
    std::unordered_map<std::string, int> index_;
    std::vector<std::string> tokens_;
    std::vector<int> df_;
    int n_docs_ = 0;
};

enum class HeadMode { Single, TwoLabel };

/// Dense C x V classification head. In TwoLabel mode the first n_base
/// rows are base-DRG logits and the last five rows are CC/MCC logits.
struct LinearHead {
    int n_classes = 0;
    int dim = 0;
    std::vector<double> weights; // row-major, n_classes x dim
    std::vector<double> bias;    // n_classes
};

/// Low-rank delta (alpha/rank) * B * A on top of a frozen head.
/// B starts at zero so the initial delta vanishes.
struct LoraAdapter {
    int rank = 0;
    double alpha = 0.0;
    double dropout = 0.0;        // applied to the adapter input while training
    std::vector<double> a;       // rank x dim
    std::vector<double> b;       // n_classes x rank

    double scale() const { return alpha / static_cast<double>(rank); }
};

/// logits = (W + scale * B * A) x + b; plain W x + b without adapter.
std::vector<double> forward(const FeatureVector& x, const LinearHead& head,
                            const LoraAdapter* adapter = nullptr);

struct LossResult {
    double loss = 0.0;
    std::vector<double> grad; // d loss / d logits
};

/// Numerically stable categorical cross entropy with softmax gradient.
LossResult single_label_loss(std::span<const double> logits, int target);

/// Base cross entropy plus lambda times the CC/MCC cross entropy over
/// the final five logits; the two gradient blocks are independent.
LossResult two_label_loss(std::span<const double> logits, int n_base, int y_base, int y_cc,
                          double lambda_cc);

struct AdamConfig {
    double learning_rate = 1e-2;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with decoupled weight decay and bias-corrected moments.
class AdamOptimizer {
public:
    AdamOptimizer(std::size_t n_params, AdamConfig config);

    /// One update; throws ValidationError on a non-finite gradient.
    void step(std::span<double> params, std::span<const double> grads);

    std::int64_t steps_taken() const { return t_; }

private:
    AdamConfig config_;
    std::vector<double> m_;
    std::vector<double> v_;
    std::int64_t t_ = 0;
};

struct TrainConfig {
    double learning_rate = 1e-2;
    double weight_decay = 0.01;
    int epochs = 3;
    int batch_size = 4;
    double lambda_cc = 0.5;
    std::uint64_t seed = 0;
    bool use_adapter = false;
    int lora_rank = 8;
    double lora_alpha = 8.0;
    double lora_dropout = 0.05;
    int min_df = 2;

    /// The configuration the reference protocol used on the full-scale
    /// network; exposed as a documented preset.
    static TrainConfig paper_preset();
};

struct ModelArtifact {
    HeadMode mode = HeadMode::Single;
    Vocabulary vocab;
    LinearHead head;
    std::optional<LoraAdapter> adapter;
    std::vector<int> class_codes; // Single: row -> DRG code, ascending
    int n_base = 0;               // TwoLabel: rows [0, n_base) are bases
    std::uint64_t catalog_fingerprint = 0;
    TrainConfig config;

    std::string to_json_string() const;
    static ModelArtifact from_json_string(std::string_view text);
    void save(const std::filesystem::path& path) const;
    static ModelArtifact load(const std::filesystem::path& path);
};

/// Seeded mini-batch training. With the adapter enabled the head stays
/// frozen and only the low-rank matrices move. Pass init_from to start
/// from an existing artifact's vocabulary and head.
ModelArtifact train(const CohortSplit& cohort, const DrgCatalog& catalog, HeadMode mode,
                    const TrainConfig& config, const ModelArtifact* init_from = nullptr);

struct ScoredCode {
    int code = 0;
    double prob = 0.0;
};

/// Full softmax ranking over every catalog code, descending probability,
/// ties by ascending code.
std::vector<ScoredCode> predict_single(const ModelArtifact& artifact, std::string_view text);

struct TwoLabelPrediction {
    std::vector<std::pair<int, double>> base_ranking; // (base_id, prob), descending
    std::array<double, kNumCcMccLabels> cc_probs{};   // unrestricted softmax
    std::vector<int> cc_ranking;                      // unrestricted, descending
    CcMccLabel cc_restricted = CcMccLabel::NotApplicable;
    int composed_code = 0;
};

/// Base argmax, CC/MCC argmax restricted to the base's valid label set,
/// then rule-based composition into a DRG code.
TwoLabelPrediction predict_two_label(const ModelArtifact& artifact, std::string_view text,
                                     const DrgCatalog& catalog);

} // namespace drg

#endif
