// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_METRICS_HPP
#define DRGKIT_METRICS_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace drg {

/// One evaluated instance: a full class ranking (best first, every class
/// exactly once) plus per-class probabilities summing to 1.
struct PredictionSet {
    std::string id;
    std::vector<int> ranking;
    std::vector<double> probs; // indexed by class
    int truth = 0;
};

struct BootstrapStat {
    double mean = 0.0;
    double sd = 0.0;
};

struct MetricsReport {
    double acc1 = 0.0;
    double acc5 = 0.0;
    double acc10 = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    double macro_auc = 0.0;
    double micro_auc = 0.0;
    std::map<std::string, BootstrapStat> bootstrap; // metric name -> (mean, sd)
    std::size_t n = 0;
    std::string subset = "all";
    double coverage_pct = 100.0;
    // macro-F1 restricted to classes with at least one test instance;
    // the headline macro_f1 also counts classes that were only predicted.
    double macro_f1_truth_classes = 0.0;
};

struct F1Result {
    double macro = 0.0;
    double micro = 0.0;
    double macro_truth_classes = 0.0;
};

struct AucResult {
    double macro = 0.0;
    double micro = 0.0;
    std::size_t macro_classes = 0; // classes with both positives and negatives
};

struct PerDrgRow {
    int code = 0;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    double acc1 = 0.0;
    double acc5 = 0.0;
    int rank = 0; // 1 = most training cases
};

struct AccuracyBin {
    std::string range; // e.g. "[0.4,0.6)"
    std::size_t n_classes = 0;
    double median_train = 0.0;
    double q1_train = 0.0;
    double q3_train = 0.0;
};

struct PerDrgReport {
    std::vector<PerDrgRow> rows;  // ordered by rank
    std::vector<AccuracyBin> bins; // acc@5 in [0,0.2), ..., [0.8,1.0]
};

/// Fraction of instances whose truth appears in the first k ranks.
double top_k_accuracy(std::span<const PredictionSet> preds, int k);

/// Per-class F1 = 2TP / (2TP + FP + FN) with empty classes scored 0.
/// Macro averages over classes that occur as a truth or a prediction;
/// micro pools counts (and equals top-1 accuracy in single-label tasks).
F1Result f1_scores(std::span<const int> top1_preds, std::span<const int> truths, int n_classes);

/// One-vs-rest AUC per class via the rank statistic with midrank ties.
/// Macro averages classes with at least one positive and one negative;
/// micro ranks all (instance, class) pairs pooled.
AucResult auc_scores(std::span<const PredictionSet> preds, int n_classes);

/// Resample n-of-n with replacement `iterations` times and recompute the
/// metric; returns the mean and population standard deviation. Iteration
/// i draws its indices from mt19937_64(seed + i).
BootstrapStat bootstrap(const std::function<double(std::span<const PredictionSet>)>& metric_fn,
                        std::span<const PredictionSet> preds, int iterations, std::uint64_t seed);

struct ReportOptions {
    int bootstrap_iterations = 0; // 0 disables bootstrapping
    std::uint64_t seed = 0;
    std::string subset = "all";
    double coverage_pct = 100.0;
};

/// Full metric block over the given predictions.
MetricsReport compute_report(std::span<const PredictionSet> preds, int n_classes,
                             const ReportOptions& options = {});

/// Restrict to instances whose truth is among the top_n most frequent
/// training classes (count desc, class index asc) and report on those.
MetricsReport subset_eval(std::span<const PredictionSet> preds,
                          const std::map<int, std::size_t>& train_counts, std::size_t top_n,
                          int n_classes, int bootstrap_iterations = 0, std::uint64_t seed = 0);

/// Per-class accuracy table (classes present in test) plus the grouping
/// of classes by top-5 accuracy range with training-count quartiles.
PerDrgReport per_drg_report(std::span<const PredictionSet> preds,
                            const std::map<int, std::size_t>& train_counts,
                            const std::vector<int>& class_codes);

} // namespace drg

#endif
