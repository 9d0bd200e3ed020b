// SPDX-License-Identifier: Apache-2.0

#include "drgkit/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "drgkit/errors.hpp"

namespace drg {

namespace {

// Sum of average ranks (1-based, midrank ties) of the positive items.
// AUC = (rank_sum - n_pos*(n_pos+1)/2) / (n_pos * n_neg).
double rank_auc(std::vector<std::pair<double, bool>>& scored) {
    std::sort(scored.begin(), scored.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    double n_pos = 0.0;
    double n_neg = 0.0;
    double rank_sum = 0.0;
    std::size_t i = 0;
    while (i < scored.size()) {
        std::size_t j = i;
        while (j < scored.size() && scored[j].first == scored[i].first) ++j;
        double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (scored[k].second) {
                n_pos += 1.0;
                rank_sum += avg_rank;
            } else {
                n_neg += 1.0;
            }
        }
        i = j;
    }
    if (n_pos == 0.0 || n_neg == 0.0) return std::nan("");
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double quantile_median(std::span<const double> sorted) {
    if (sorted.empty()) return 0.0;
    std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

} // namespace

double top_k_accuracy(std::span<const PredictionSet> preds, int k) {
    if (preds.empty()) throw ValidationError("top-k accuracy of an empty prediction set");
    if (k < 1) throw ValidationError("k must be at least 1");
    std::size_t hits = 0;
    for (const auto& pred : preds) {
        std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(k), pred.ranking.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (pred.ranking[i] == pred.truth) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

F1Result f1_scores(std::span<const int> top1_preds, std::span<const int> truths, int n_classes) {
    if (top1_preds.size() != truths.size())
        throw ValidationError("predictions and truths differ in length");

    std::vector<std::size_t> tp(static_cast<std::size_t>(n_classes), 0);
    std::vector<std::size_t> fp(static_cast<std::size_t>(n_classes), 0);
    std::vector<std::size_t> fn(static_cast<std::size_t>(n_classes), 0);

    for (std::size_t i = 0; i < truths.size(); ++i) {
        int truth = truths[i];
        int pred = top1_preds[i];
        if (truth < 0 || truth >= n_classes || pred < 0 || pred >= n_classes)
            throw ValidationError("label outside the class universe");
        if (pred == truth) {
            tp[static_cast<std::size_t>(truth)] += 1;
        } else {
            fp[static_cast<std::size_t>(pred)] += 1;
            fn[static_cast<std::size_t>(truth)] += 1;
        }
    }

    double macro_sum = 0.0;
    std::size_t macro_n = 0;
    double truth_sum = 0.0;
    std::size_t truth_n = 0;
    std::size_t tp_total = 0;
    std::size_t fp_total = 0;
    std::size_t fn_total = 0;

    for (int c = 0; c < n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c);
        tp_total += tp[i];
        fp_total += fp[i];
        fn_total += fn[i];
        std::size_t denom = 2 * tp[i] + fp[i] + fn[i];
        if (denom == 0) continue; // class neither true nor predicted
        double f1 = 2.0 * static_cast<double>(tp[i]) / static_cast<double>(denom);
        macro_sum += f1;
        macro_n += 1;
        if (tp[i] + fn[i] > 0) { // class has test instances
            truth_sum += f1;
            truth_n += 1;
        }
    }

    F1Result result;
    result.macro = macro_n ? macro_sum / static_cast<double>(macro_n) : 0.0;
    result.macro_truth_classes = truth_n ? truth_sum / static_cast<double>(truth_n) : 0.0;
    std::size_t micro_denom = 2 * tp_total + fp_total + fn_total;
    result.micro = micro_denom
        ? 2.0 * static_cast<double>(tp_total) / static_cast<double>(micro_denom)
        : 0.0;
    return result;
}

AucResult auc_scores(std::span<const PredictionSet> preds, int n_classes) {
    AucResult result;
    double macro_sum = 0.0;

    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(preds.size() * static_cast<std::size_t>(n_classes));
    std::vector<std::pair<double, bool>> column;
    column.reserve(preds.size());

    for (int c = 0; c < n_classes; ++c) {
        column.clear();
        for (const auto& pred : preds) {
            bool positive = pred.truth == c;
            double score = pred.probs[static_cast<std::size_t>(c)];
            column.emplace_back(score, positive);
            pooled.emplace_back(score, positive);
        }
        double auc = rank_auc(column);
        if (!std::isnan(auc)) {
            macro_sum += auc;
            result.macro_classes += 1;
        }
    }

    result.macro = result.macro_classes ? macro_sum / static_cast<double>(result.macro_classes) : 0.0;
    double micro = rank_auc(pooled);
    result.micro = std::isnan(micro) ? 0.0 : micro;
    return result;
}

BootstrapStat bootstrap(const std::function<double(std::span<const PredictionSet>)>& metric_fn,
                        std::span<const PredictionSet> preds, int iterations, std::uint64_t seed) {
    if (preds.empty()) throw ValidationError("bootstrap over an empty prediction set");
    if (iterations < 1) throw ValidationError("bootstrap needs at least one iteration");

    const std::size_t n = preds.size();
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(iterations));
    std::vector<PredictionSet> resample(n);

    for (int it = 0; it < iterations; ++it) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(it));
        for (std::size_t j = 0; j < n; ++j) resample[j] = preds[rng() % n];
        values.push_back(metric_fn(resample));
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size()); // population SD
    return {mean, std::sqrt(var)};
}

MetricsReport compute_report(std::span<const PredictionSet> preds, int n_classes,
                             const ReportOptions& options) {
    if (preds.empty()) throw ValidationError("cannot report on an empty prediction set");

    std::vector<int> top1;
    std::vector<int> truths;
    top1.reserve(preds.size());
    truths.reserve(preds.size());
    for (const auto& pred : preds) {
        top1.push_back(pred.ranking.front());
        truths.push_back(pred.truth);
    }

    MetricsReport report;
    report.n = preds.size();
    report.subset = options.subset;
    report.coverage_pct = options.coverage_pct;
    report.acc1 = top_k_accuracy(preds, 1);
    report.acc5 = top_k_accuracy(preds, 5);
    report.acc10 = top_k_accuracy(preds, 10);

    F1Result f1 = f1_scores(top1, truths, n_classes);
    report.macro_f1 = f1.macro;
    report.micro_f1 = f1.micro;
    report.macro_f1_truth_classes = f1.macro_truth_classes;

    AucResult auc = auc_scores(preds, n_classes);
    report.macro_auc = auc.macro;
    report.micro_auc = auc.micro;

    if (options.bootstrap_iterations > 0) {
        auto boot = [&](const char* name, auto&& fn) {
            report.bootstrap[name] =
                bootstrap(fn, preds, options.bootstrap_iterations, options.seed);
        };
        boot("acc1", [](std::span<const PredictionSet> p) { return top_k_accuracy(p, 1); });
        boot("acc5", [](std::span<const PredictionSet> p) { return top_k_accuracy(p, 5); });
        boot("acc10", [](std::span<const PredictionSet> p) { return top_k_accuracy(p, 10); });
        auto f1_of = [n_classes](std::span<const PredictionSet> p, bool macro) {
            std::vector<int> t1;
            std::vector<int> tr;
            for (const auto& pred : p) {
                t1.push_back(pred.ranking.front());
                tr.push_back(pred.truth);
            }
            F1Result r = f1_scores(t1, tr, n_classes);
            return macro ? r.macro : r.micro;
        };
        boot("macro_f1", [&](std::span<const PredictionSet> p) { return f1_of(p, true); });
        boot("micro_f1", [&](std::span<const PredictionSet> p) { return f1_of(p, false); });
        boot("macro_auc",
             [n_classes](std::span<const PredictionSet> p) { return auc_scores(p, n_classes).macro; });
        boot("micro_auc",
             [n_classes](std::span<const PredictionSet> p) { return auc_scores(p, n_classes).micro; });
    }
    return report;
}

MetricsReport subset_eval(std::span<const PredictionSet> preds,
                          const std::map<int, std::size_t>& train_counts, std::size_t top_n,
                          int n_classes, int bootstrap_iterations, std::uint64_t seed) {
    if (top_n > static_cast<std::size_t>(n_classes))
        throw ValidationError("subset size exceeds the class universe");

    std::vector<std::pair<int, std::size_t>> ordered(train_counts.begin(), train_counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });

    std::vector<bool> selected(static_cast<std::size_t>(n_classes), false);
    for (std::size_t i = 0; i < ordered.size() && i < top_n; ++i)
        selected[static_cast<std::size_t>(ordered[i].first)] = true;

    std::vector<PredictionSet> filtered;
    for (const auto& pred : preds) {
        if (selected[static_cast<std::size_t>(pred.truth)]) filtered.push_back(pred);
    }
    if (filtered.empty())
        throw ValidationError("subset top-" + std::to_string(top_n) + " covers no test instance");

    ReportOptions options;
    options.bootstrap_iterations = bootstrap_iterations;
    options.seed = seed;
    options.subset = "top" + std::to_string(top_n);
    options.coverage_pct =
        100.0 * static_cast<double>(filtered.size()) / static_cast<double>(preds.size());
    return compute_report(filtered, n_classes, options);
}

PerDrgReport per_drg_report(std::span<const PredictionSet> preds,
                            const std::map<int, std::size_t>& train_counts,
                            const std::vector<int>& class_codes) {
    struct ClassAccumulator {
        std::size_t n_test = 0;
        std::size_t hit1 = 0;
        std::size_t hit5 = 0;
    };
    std::map<int, ClassAccumulator> per_class;

    for (const auto& pred : preds) {
        auto& acc = per_class[pred.truth];
        acc.n_test += 1;
        std::size_t depth = std::min<std::size_t>(5, pred.ranking.size());
        for (std::size_t i = 0; i < depth; ++i) {
            if (pred.ranking[i] == pred.truth) {
                acc.hit5 += 1;
                if (i == 0) acc.hit1 += 1;
                break;
            }
        }
    }

    PerDrgReport report;
    for (const auto& [cls, acc] : per_class) {
        PerDrgRow row;
        row.code = class_codes[static_cast<std::size_t>(cls)];
        auto it = train_counts.find(cls);
        row.n_train = it == train_counts.end() ? 0 : it->second;
        row.n_test = acc.n_test;
        row.acc1 = static_cast<double>(acc.hit1) / static_cast<double>(acc.n_test);
        row.acc5 = static_cast<double>(acc.hit5) / static_cast<double>(acc.n_test);
        report.rows.push_back(row);
    }

    // frequency rank 1 = most training cases, ties by ascending code
    std::sort(report.rows.begin(), report.rows.end(), [](const PerDrgRow& x, const PerDrgRow& y) {
        if (x.n_train != y.n_train) return x.n_train > y.n_train;
        return x.code < y.code;
    });
    for (std::size_t i = 0; i < report.rows.size(); ++i)
        report.rows[i].rank = static_cast<int>(i + 1);

    constexpr const char* kRanges[] = {"[0.0,0.2)", "[0.2,0.4)", "[0.4,0.6)", "[0.6,0.8)",
                                       "[0.8,1.0]"};
    std::array<std::vector<double>, 5> bin_counts;
    for (const auto& row : report.rows) {
        auto bin = std::min<std::size_t>(4, static_cast<std::size_t>(row.acc5 / 0.2));
        bin_counts[bin].push_back(static_cast<double>(row.n_train));
    }
    for (std::size_t b = 0; b < 5; ++b) {
        AccuracyBin bin;
        bin.range = kRanges[b];
        bin.n_classes = bin_counts[b].size();
        auto& values = bin_counts[b];
        std::sort(values.begin(), values.end());
        bin.median_train = quantile_median(values);
        if (!values.empty()) {
            std::size_t half = values.size() / 2;
            bin.q1_train = quantile_median(std::span<const double>(values).first(half));
            bin.q3_train = quantile_median(std::span<const double>(values).last(half));
            if (values.size() == 1) bin.q1_train = bin.q3_train = values[0];
        }
        report.bins.push_back(bin);
    }
    return report;
}

} // namespace drg
