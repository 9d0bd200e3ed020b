// SPDX-License-Identifier: Apache-2.0

#include "drgkit/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace drg {

namespace {

using nlohmann::json;

// Uniform double in [0,1) from the top 53 bits; keeps initialization
// independent of the standard library's distribution internals.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void softmax_inplace(std::span<double> logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

// loss = logsumexp(logits) - logits[target]; grad = softmax - onehot
double cross_entropy_block(std::span<const double> logits, int target, double weight,
                           std::span<double> grad_out) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - max_logit);
    double lse = std::log(sum) + max_logit;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        double p = std::exp(logits[c] - lse);
        grad_out[c] = weight * (p - (static_cast<int>(c) == target ? 1.0 : 0.0));
    }
    return weight * (lse - logits[static_cast<std::size_t>(target)]);
}

std::vector<int> ranking_desc(std::span<const double> probs) {
    std::vector<int> order(probs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int lhs, int rhs) {
        if (probs[static_cast<std::size_t>(lhs)] != probs[static_cast<std::size_t>(rhs)])
            return probs[static_cast<std::size_t>(lhs)] > probs[static_cast<std::size_t>(rhs)];
        return lhs < rhs;
    });
    return order;
}

} // namespace

std::vector<std::string> Vocabulary::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : text) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc)) {
            current += static_cast<char>(std::tolower(uc));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vocabulary Vocabulary::build(std::span<const std::string> train_texts, int min_df) {
    if (train_texts.empty()) throw ValidationError("cannot build a vocabulary from an empty corpus");

    std::unordered_map<std::string, int> df;
    for (const auto& text : train_texts) {
        std::set<std::string> seen;
        for (auto& token : tokenize(text)) seen.insert(std::move(token));
        for (const auto& token : seen) df[token] += 1;
    }

    std::vector<std::string> kept;
    for (const auto& [token, count] : df) {
        if (count >= min_df) kept.push_back(token);
    }
    std::sort(kept.begin(), kept.end());

    Vocabulary vocab;
    vocab.n_docs_ = static_cast<int>(train_texts.size());
    vocab.tokens_ = std::move(kept);
    vocab.df_.reserve(vocab.tokens_.size());
    for (std::size_t i = 0; i < vocab.tokens_.size(); ++i) {
        vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i));
        vocab.df_.push_back(df[vocab.tokens_[i]]);
    }
    return vocab;
}

Vocabulary Vocabulary::restore(std::vector<std::string> tokens, std::vector<int> df, int n_docs) {
    if (tokens.size() != df.size()) throw ValidationError("vocabulary tokens/df size mismatch");
    Vocabulary vocab;
    vocab.tokens_ = std::move(tokens);
    vocab.df_ = std::move(df);
    vocab.n_docs_ = n_docs;
    for (std::size_t i = 0; i < vocab.tokens_.size(); ++i)
        vocab.index_.emplace(vocab.tokens_[i], static_cast<int>(i));
    return vocab;
}

FeatureVector Vocabulary::featurize(std::string_view text) const {
    std::unordered_map<int, int> tf;
    for (const auto& token : tokenize(text)) {
        auto it = index_.find(token);
        if (it != index_.end()) tf[it->second] += 1;
    }

    FeatureVector x;
    x.terms.reserve(tf.size());
    for (const auto& [index, count] : tf) x.terms.emplace_back(index, 0.0);
    std::sort(x.terms.begin(), x.terms.end());

    double norm_sq = 0.0;
    for (auto& [index, value] : x.terms) {
        double idf = std::log((1.0 + n_docs_) / (1.0 + df_[static_cast<std::size_t>(index)])) + 1.0;
        value = static_cast<double>(tf[index]) * idf;
        norm_sq += value * value;
    }
    if (norm_sq > 0.0) {
        double inv = 1.0 / std::sqrt(norm_sq);
        for (auto& [index, value] : x.terms) value *= inv;
    }
    return x;
}

std::vector<double> forward(const FeatureVector& x, const LinearHead& head,
                            const LoraAdapter* adapter) {
    for (const auto& [index, value] : x.terms) {
        if (index < 0 || index >= head.dim)
            throw ValidationError("feature index " + std::to_string(index) +
                                  " outside head dimension " + std::to_string(head.dim));
    }

    std::vector<double> logits(head.bias.begin(), head.bias.end());
    for (int c = 0; c < head.n_classes; ++c) {
        const double* row = head.weights.data() + static_cast<std::size_t>(c) * head.dim;
        double sum = 0.0;
        for (const auto& [index, value] : x.terms) sum += row[index] * value;
        logits[static_cast<std::size_t>(c)] += sum;
    }

    if (adapter) {
        std::vector<double> z(static_cast<std::size_t>(adapter->rank), 0.0);
        for (int r = 0; r < adapter->rank; ++r) {
            const double* row = adapter->a.data() + static_cast<std::size_t>(r) * head.dim;
            double sum = 0.0;
            for (const auto& [index, value] : x.terms) sum += row[index] * value;
            z[static_cast<std::size_t>(r)] = sum;
        }
        double s = adapter->scale();
        for (int c = 0; c < head.n_classes; ++c) {
            const double* row = adapter->b.data() + static_cast<std::size_t>(c) * adapter->rank;
            double sum = 0.0;
            for (int r = 0; r < adapter->rank; ++r) sum += row[r] * z[static_cast<std::size_t>(r)];
            logits[static_cast<std::size_t>(c)] += s * sum;
        }
    }
    return logits;
}

LossResult single_label_loss(std::span<const double> logits, int target) {
    if (target < 0 || static_cast<std::size_t>(target) >= logits.size())
        throw ValidationError("loss target out of range");
    LossResult result;
    result.grad.assign(logits.size(), 0.0);
    result.loss = cross_entropy_block(logits, target, 1.0, result.grad);
    return result;
}

LossResult two_label_loss(std::span<const double> logits, int n_base, int y_base, int y_cc,
                          double lambda_cc) {
    if (logits.size() != static_cast<std::size_t>(n_base) + kNumCcMccLabels)
        throw ValidationError("two-label logits must have n_base + 5 entries");
    if (y_base < 0 || y_base >= n_base) throw ValidationError("base target out of range");
    if (y_cc < 0 || y_cc >= kNumCcMccLabels) throw ValidationError("cc target out of range");

    LossResult result;
    result.grad.assign(logits.size(), 0.0);
    auto grad_span = std::span<double>(result.grad);
    result.loss = cross_entropy_block(logits.first(static_cast<std::size_t>(n_base)), y_base, 1.0,
                                      grad_span.first(static_cast<std::size_t>(n_base)));
    result.loss += cross_entropy_block(logits.last(kNumCcMccLabels), y_cc, lambda_cc,
                                       grad_span.last(kNumCcMccLabels));
    return result;
}

AdamOptimizer::AdamOptimizer(std::size_t n_params, AdamConfig config)
    : config_(config), m_(n_params, 0.0), v_(n_params, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
        throw ValidationError("optimizer size mismatch");

    t_ += 1;
    double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        if (!std::isfinite(g))
            throw ValidationError("non-finite gradient at parameter " + std::to_string(i) +
                                  " on step " + std::to_string(t_));
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g * g;
        double m_hat = m_[i] / bc1;
        double v_hat = v_[i] / bc2;
        params[i] -= config_.learning_rate *
                     (m_hat / (std::sqrt(v_hat) + config_.epsilon) + config_.weight_decay * params[i]);
    }
}

TrainConfig TrainConfig::paper_preset() {
    TrainConfig config;
    config.learning_rate = 2e-5;
    config.weight_decay = 0.01;
    config.epochs = 3;
    config.batch_size = 4;
    config.lambda_cc = 0.5;
    config.lora_rank = 8;
    config.lora_alpha = 8.0;
    config.lora_dropout = 0.05;
    return config;
}

namespace {

struct TrainTargets {
    int single = 0;
    int base = 0;
    int cc = 0;
};

int code_row(const std::vector<int>& class_codes, int code) {
    auto it = std::lower_bound(class_codes.begin(), class_codes.end(), code);
    if (it == class_codes.end() || *it != code)
        throw ValidationError("code " + std::to_string(code) + " is not in the model's class set");
    return static_cast<int>(it - class_codes.begin());
}

} // namespace

ModelArtifact train(const CohortSplit& cohort, const DrgCatalog& catalog, HeadMode mode,
                    const TrainConfig& config, const ModelArtifact* init_from) {
    if (cohort.train.empty()) throw ValidationError("training split is empty");
    if (catalog.empty()) throw ValidationError("training requires a catalog");
    if (config.lambda_cc < 0.0 || config.lambda_cc > 1.0)
        throw ValidationError("lambda_cc must lie in [0, 1]");
    if (config.learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    if (config.weight_decay < 0.0) throw ValidationError("weight decay must be non-negative");
    if (config.epochs < 0) throw ValidationError("epochs must be non-negative");
    if (config.batch_size < 1) throw ValidationError("batch size must be at least 1");
    if (init_from && init_from->mode != mode)
        throw ValidationError("init artifact mode does not match requested mode");

    ModelArtifact artifact;
    artifact.mode = mode;
    artifact.config = config;
    artifact.catalog_fingerprint = catalog.fingerprint();

    if (init_from) {
        artifact.vocab = init_from->vocab;
        artifact.head = init_from->head;
        artifact.class_codes = init_from->class_codes;
        artifact.n_base = init_from->n_base;
        if (init_from->catalog_fingerprint != artifact.catalog_fingerprint)
            throw ValidationError("init artifact was trained against a different catalog");
    } else {
        std::vector<std::string> texts;
        texts.reserve(cohort.train.size());
        for (const auto& record : cohort.train) texts.push_back(record.course_text);
        artifact.vocab = Vocabulary::build(texts, config.min_df);

        if (mode == HeadMode::Single) {
            for (const auto& entry : catalog.entries()) artifact.class_codes.push_back(entry.code.code);
            std::sort(artifact.class_codes.begin(), artifact.class_codes.end());
            artifact.head.n_classes = static_cast<int>(artifact.class_codes.size());
        } else {
            artifact.n_base = static_cast<int>(catalog.bases().size());
            artifact.head.n_classes = artifact.n_base + kNumCcMccLabels;
        }
        artifact.head.dim = artifact.vocab.size();
        artifact.head.weights.assign(
            static_cast<std::size_t>(artifact.head.n_classes) * artifact.head.dim, 0.0);
        artifact.head.bias.assign(static_cast<std::size_t>(artifact.head.n_classes), 0.0);
    }

    const LinearHead& head = artifact.head;
    std::mt19937_64 rng(config.seed);

    if (config.use_adapter) {
        if (config.lora_rank < 1) throw ValidationError("adapter rank must be at least 1");
        LoraAdapter adapter;
        adapter.rank = config.lora_rank;
        adapter.alpha = config.lora_alpha;
        adapter.dropout = config.lora_dropout;
        adapter.a.resize(static_cast<std::size_t>(adapter.rank) * head.dim);
        adapter.b.assign(static_cast<std::size_t>(head.n_classes) * adapter.rank, 0.0);
        double bound = 1.0 / std::sqrt(static_cast<double>(std::max(head.dim, 1)));
        for (double& value : adapter.a) value = (next_unit(rng) * 2.0 - 1.0) * bound;
        artifact.adapter = std::move(adapter);
    }

    // Precompute features and targets for the train split.
    std::vector<FeatureVector> features;
    std::vector<TrainTargets> targets;
    features.reserve(cohort.train.size());
    targets.reserve(cohort.train.size());
    for (const auto& record : cohort.train) {
        features.push_back(artifact.vocab.featurize(record.course_text));
        const CatalogEntry* entry = catalog.find_code(record.drg_code);
        if (!entry)
            throw ValidationError("cohort record " + record.stay_id + " carries code " +
                                  std::to_string(record.drg_code) + " absent from the catalog");
        TrainTargets t;
        if (mode == HeadMode::Single) {
            t.single = code_row(artifact.class_codes, record.drg_code);
        } else {
            t.base = entry->base_id;
            t.cc = static_cast<int>(arm_to_label(entry->arm));
        }
        targets.push_back(t);
    }

    const bool train_head = !config.use_adapter;
    const std::size_t w_size = train_head
        ? head.weights.size()
        : artifact.adapter->a.size();
    const std::size_t b_size = train_head
        ? head.bias.size()
        : artifact.adapter->b.size();

    AdamConfig adam{config.learning_rate, config.weight_decay};
    AdamOptimizer opt_w(w_size, adam);
    AdamOptimizer opt_b(b_size, adam);
    std::vector<double> grad_w(w_size);
    std::vector<double> grad_b(b_size);

    std::vector<std::size_t> order(cohort.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const int batch_size = std::max(config.batch_size, 1);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(batch_size)) {
            std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(batch_size));
            double inv_batch = 1.0 / static_cast<double>(end - begin);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);

            for (std::size_t k = begin; k < end; ++k) {
                const FeatureVector& x = features[order[k]];
                const TrainTargets& target = targets[order[k]];

                FeatureVector dropped;
                const FeatureVector* adapter_input = &x;
                if (config.use_adapter && artifact.adapter->dropout > 0.0) {
                    double keep = 1.0 - artifact.adapter->dropout;
                    for (const auto& [index, value] : x.terms) {
                        if (next_unit(rng) < keep) dropped.terms.emplace_back(index, value / keep);
                    }
                    adapter_input = &dropped;
                }

                std::vector<double> logits = head.bias;
                for (int c = 0; c < head.n_classes; ++c) {
                    const double* row = head.weights.data() + static_cast<std::size_t>(c) * head.dim;
                    double sum = 0.0;
                    for (const auto& [index, value] : x.terms) sum += row[index] * value;
                    logits[static_cast<std::size_t>(c)] += sum;
                }

                std::vector<double> z;
                if (config.use_adapter) {
                    const LoraAdapter& adapter = *artifact.adapter;
                    z.assign(static_cast<std::size_t>(adapter.rank), 0.0);
                    for (int r = 0; r < adapter.rank; ++r) {
                        const double* row = adapter.a.data() + static_cast<std::size_t>(r) * head.dim;
                        double sum = 0.0;
                        for (const auto& [index, value] : adapter_input->terms) sum += row[index] * value;
                        z[static_cast<std::size_t>(r)] = sum;
                    }
                    double s = adapter.scale();
                    for (int c = 0; c < head.n_classes; ++c) {
                        const double* row = adapter.b.data() + static_cast<std::size_t>(c) * adapter.rank;
                        double sum = 0.0;
                        for (int r = 0; r < adapter.rank; ++r) sum += row[r] * z[static_cast<std::size_t>(r)];
                        logits[static_cast<std::size_t>(c)] += s * sum;
                    }
                }

                LossResult loss = mode == HeadMode::Single
                    ? single_label_loss(logits, target.single)
                    : two_label_loss(logits, artifact.n_base, target.base, target.cc, config.lambda_cc);

                if (train_head) {
                    for (int c = 0; c < head.n_classes; ++c) {
                        double g = loss.grad[static_cast<std::size_t>(c)] * inv_batch;
                        double* row = grad_w.data() + static_cast<std::size_t>(c) * head.dim;
                        for (const auto& [index, value] : x.terms) row[index] += g * value;
                        grad_b[static_cast<std::size_t>(c)] += g;
                    }
                } else {
                    const LoraAdapter& adapter = *artifact.adapter;
                    double s = adapter.scale();
                    // dL/dB = s * g (outer) z ; dL/dA = s * (B^T g) (outer) x'
                    std::vector<double> bt_g(static_cast<std::size_t>(adapter.rank), 0.0);
                    for (int c = 0; c < head.n_classes; ++c) {
                        double g = loss.grad[static_cast<std::size_t>(c)] * inv_batch;
                        const double* b_row = adapter.b.data() + static_cast<std::size_t>(c) * adapter.rank;
                        double* gb_row = grad_b.data() + static_cast<std::size_t>(c) * adapter.rank;
                        for (int r = 0; r < adapter.rank; ++r) {
                            gb_row[r] += s * g * z[static_cast<std::size_t>(r)];
                            bt_g[static_cast<std::size_t>(r)] += b_row[r] * g;
                        }
                    }
                    for (int r = 0; r < adapter.rank; ++r) {
                        double g = s * bt_g[static_cast<std::size_t>(r)];
                        double* row = grad_w.data() + static_cast<std::size_t>(r) * head.dim;
                        for (const auto& [index, value] : adapter_input->terms) row[index] += g * value;
                    }
                }
            }

            if (train_head) {
                opt_w.step(artifact.head.weights, grad_w);
                opt_b.step(artifact.head.bias, grad_b);
            } else {
                opt_w.step(artifact.adapter->a, grad_w);
                opt_b.step(artifact.adapter->b, grad_b);
            }
        }
    }
    return artifact;
}

std::vector<ScoredCode> predict_single(const ModelArtifact& artifact, std::string_view text) {
    if (artifact.mode != HeadMode::Single)
        throw ValidationError("artifact is not a single-label model");

    FeatureVector x = artifact.vocab.featurize(text);
    std::vector<double> logits = forward(x, artifact.head,
                                         artifact.adapter ? &*artifact.adapter : nullptr);
    softmax_inplace(logits);

    std::vector<ScoredCode> ranking;
    ranking.reserve(logits.size());
    for (int row : ranking_desc(logits))
        ranking.push_back({artifact.class_codes[static_cast<std::size_t>(row)],
                           logits[static_cast<std::size_t>(row)]});
    return ranking;
}

TwoLabelPrediction predict_two_label(const ModelArtifact& artifact, std::string_view text,
                                     const DrgCatalog& catalog) {
    if (artifact.mode != HeadMode::TwoLabel)
        throw ValidationError("artifact is not a two-label model");
    if (artifact.catalog_fingerprint != catalog.fingerprint())
        throw ValidationError("artifact was trained against a different catalog");

    FeatureVector x = artifact.vocab.featurize(text);
    std::vector<double> logits = forward(x, artifact.head,
                                         artifact.adapter ? &*artifact.adapter : nullptr);

    auto base_logits = std::span<const double>(logits).first(static_cast<std::size_t>(artifact.n_base));
    auto cc_logits = std::span<const double>(logits).last(kNumCcMccLabels);

    std::vector<double> base_probs(base_logits.begin(), base_logits.end());
    softmax_inplace(base_probs);
    std::vector<double> cc_probs(cc_logits.begin(), cc_logits.end());
    softmax_inplace(cc_probs);

    TwoLabelPrediction prediction;
    prediction.base_ranking.reserve(base_probs.size());
    for (int row : ranking_desc(base_probs))
        prediction.base_ranking.emplace_back(row, base_probs[static_cast<std::size_t>(row)]);
    std::copy(cc_probs.begin(), cc_probs.end(), prediction.cc_probs.begin());
    prediction.cc_ranking = ranking_desc(cc_probs);

    int best_base = prediction.base_ranking.front().first;
    const BaseDrg* base = catalog.find_base(best_base);
    if (!base) throw ValidationError("predicted base " + std::to_string(best_base) + " not in catalog");

    std::set<CcMccLabel> valid = label_valid_set(*base);
    // argmax over the restricted label set; ties resolve to the lowest index
    CcMccLabel chosen = *valid.begin();
    double best_logit = cc_logits[static_cast<std::size_t>(*valid.begin())];
    for (CcMccLabel label : valid) {
        double logit = cc_logits[static_cast<std::size_t>(label)];
        if (logit > best_logit) {
            best_logit = logit;
            chosen = label;
        }
    }
    prediction.cc_restricted = chosen;
    prediction.composed_code = compose(best_base, chosen, catalog).code;
    return prediction;
}

namespace {

json config_to_json(const TrainConfig& config) {
    return json{{"learning_rate", config.learning_rate},
                {"weight_decay", config.weight_decay},
                {"epochs", config.epochs},
                {"batch_size", config.batch_size},
                {"lambda_cc", config.lambda_cc},
                {"seed", config.seed},
                {"use_adapter", config.use_adapter},
                {"lora_rank", config.lora_rank},
                {"lora_alpha", config.lora_alpha},
                {"lora_dropout", config.lora_dropout},
                {"min_df", config.min_df}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig config;
    config.learning_rate = j.at("learning_rate").get<double>();
    config.weight_decay = j.at("weight_decay").get<double>();
    config.epochs = j.at("epochs").get<int>();
    config.batch_size = j.at("batch_size").get<int>();
    config.lambda_cc = j.at("lambda_cc").get<double>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.use_adapter = j.at("use_adapter").get<bool>();
    config.lora_rank = j.at("lora_rank").get<int>();
    config.lora_alpha = j.at("lora_alpha").get<double>();
    config.lora_dropout = j.at("lora_dropout").get<double>();
    config.min_df = j.at("min_df").get<int>();
    return config;
}

} // namespace

std::string ModelArtifact::to_json_string() const {
    json tokens = json::array();
    for (std::size_t i = 0; i < vocab.tokens().size(); ++i)
        tokens.push_back(json::array({vocab.tokens()[i], vocab.document_frequencies()[i]}));

    json j{{"format_version", 1},
           {"mode", mode == HeadMode::Single ? "single" : "two_label"},
           {"catalog_fingerprint", catalog_fingerprint},
           {"config", config_to_json(config)},
           {"vocabulary", {{"n_docs", vocab.n_docs()}, {"tokens", std::move(tokens)}}},
           {"head",
            {{"n_classes", head.n_classes},
             {"dim", head.dim},
             {"weights", head.weights},
             {"bias", head.bias}}},
           {"classes", class_codes},
           {"n_base", n_base}};
    if (adapter) {
        j["adapter"] = json{{"rank", adapter->rank},
                            {"alpha", adapter->alpha},
                            {"dropout", adapter->dropout},
                            {"a", adapter->a},
                            {"b", adapter->b}};
    } else {
        j["adapter"] = nullptr;
    }
    return j.dump();
}

ModelArtifact ModelArtifact::from_json_string(std::string_view text) {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1)
        throw ValidationError("unsupported artifact format version");

    ModelArtifact artifact;
    std::string mode = j.at("mode").get<std::string>();
    if (mode == "single") artifact.mode = HeadMode::Single;
    else if (mode == "two_label") artifact.mode = HeadMode::TwoLabel;
    else throw ValidationError("unknown artifact mode '" + mode + "'");

    artifact.catalog_fingerprint = j.at("catalog_fingerprint").get<std::uint64_t>();
    artifact.config = config_from_json(j.at("config"));

    std::vector<std::string> tokens;
    std::vector<int> df;
    for (const auto& pair : j.at("vocabulary").at("tokens")) {
        tokens.push_back(pair.at(0).get<std::string>());
        df.push_back(pair.at(1).get<int>());
    }
    artifact.vocab = Vocabulary::restore(std::move(tokens), std::move(df),
                                         j.at("vocabulary").at("n_docs").get<int>());

    const json& head = j.at("head");
    artifact.head.n_classes = head.at("n_classes").get<int>();
    artifact.head.dim = head.at("dim").get<int>();
    artifact.head.weights = head.at("weights").get<std::vector<double>>();
    artifact.head.bias = head.at("bias").get<std::vector<double>>();
    if (artifact.head.dim != artifact.vocab.size())
        throw ValidationError("artifact head dimension disagrees with vocabulary size");
    if (artifact.head.weights.size() !=
        static_cast<std::size_t>(artifact.head.n_classes) * artifact.head.dim)
        throw ValidationError("artifact weight block has the wrong size");

    artifact.class_codes = j.at("classes").get<std::vector<int>>();
    artifact.n_base = j.at("n_base").get<int>();

    if (!j.at("adapter").is_null()) {
        LoraAdapter adapter;
        const json& a = j.at("adapter");
        adapter.rank = a.at("rank").get<int>();
        adapter.alpha = a.at("alpha").get<double>();
        adapter.dropout = a.at("dropout").get<double>();
        adapter.a = a.at("a").get<std::vector<double>>();
        adapter.b = a.at("b").get<std::vector<double>>();
        artifact.adapter = std::move(adapter);
    }
    return artifact;
}

void ModelArtifact::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json_string();
    if (!out) throw IoError("failed writing " + path.string());
}

ModelArtifact ModelArtifact::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json_string(buffer.str());
}

} // namespace drg
