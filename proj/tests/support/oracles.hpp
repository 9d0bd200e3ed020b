// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used to pin expected values.
// Nothing here may call into drgkit's own implementation paths.

#ifndef DRGKIT_TESTS_ORACLES_HPP
#define DRGKIT_TESTS_ORACLES_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

/// Full-matrix Levenshtein DP (distinct from the library's two-row form).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Token-sort ratio computed from scratch with the matrix DP above.
double token_sort_ratio(std::string_view a, std::string_view b);

/// Dense y = (W + scale * B * A) x + b with naive full-matrix products.
std::vector<double> dense_forward(const std::vector<std::vector<double>>& w,
                                  const std::vector<double>& bias,
                                  const std::vector<double>& x_dense,
                                  const std::vector<std::vector<double>>* b_mat = nullptr,
                                  const std::vector<std::vector<double>>* a_mat = nullptr,
                                  double scale = 1.0);

/// Central finite differences of a scalar function of the logit vector.
std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& fn,
                                         std::vector<double> point, double step = 1e-5);

/// One-vs-rest AUC by O(n^2) pair counting; ties earn half credit.
double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positives);

/// Document frequencies recounted with a different data layout.
std::size_t df_vocab_size(const std::vector<std::vector<std::string>>& tokenized_docs, int min_df);

/// Closed-form first Adam step from zero state for a scalar parameter.
double adam_first_step(double param, double grad, double lr, double weight_decay,
                       double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

/// Independent bootstrap: iteration i resamples with mt19937_64(seed+i)
/// and index = rng() % n, same contract as the library documents.
MeanSd bootstrap(const std::function<double(const std::vector<std::size_t>&)>& metric_of_indices,
                 std::size_t n, int iterations, std::uint64_t seed);

} // namespace oracle

#endif
