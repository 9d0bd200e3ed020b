// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace oracle {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    const std::size_t m = a.size();
    const std::size_t n = b.size();
    std::vector<std::vector<std::size_t>> d(m + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = 0; i <= m; ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= n; ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= m; ++i) {
        for (std::size_t j = 1; j <= n; ++j) {
            std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
        }
    }
    return d[m][n];
}

namespace {

std::string sorted_join(std::string_view s) {
    std::istringstream stream{std::string(s)};
    std::multiset<std::string> tokens;
    std::string token;
    while (stream >> token) tokens.insert(token);
    std::string joined;
    for (const auto& t : tokens) {
        if (!joined.empty()) joined += ' ';
        joined += t;
    }
    return joined;
}

} // namespace

double token_sort_ratio(std::string_view a, std::string_view b) {
    std::string sa = sorted_join(a);
    std::string sb = sorted_join(b);
    std::size_t longest = std::max(sa.size(), sb.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(sa, sb)) / static_cast<double>(longest);
}

std::vector<double> dense_forward(const std::vector<std::vector<double>>& w,
                                  const std::vector<double>& bias,
                                  const std::vector<double>& x_dense,
                                  const std::vector<std::vector<double>>* b_mat,
                                  const std::vector<std::vector<double>>* a_mat, double scale) {
    std::vector<std::vector<double>> effective = w;
    if (b_mat && a_mat) {
        const std::size_t rank = (*a_mat).size();
        for (std::size_t c = 0; c < w.size(); ++c) {
            for (std::size_t v = 0; v < x_dense.size(); ++v) {
                double delta = 0.0;
                for (std::size_t r = 0; r < rank; ++r) delta += (*b_mat)[c][r] * (*a_mat)[r][v];
                effective[c][v] += scale * delta;
            }
        }
    }
    std::vector<double> y(bias);
    for (std::size_t c = 0; c < effective.size(); ++c) {
        for (std::size_t v = 0; v < x_dense.size(); ++v) y[c] += effective[c][v] * x_dense[v];
    }
    return y;
}

std::vector<double> finite_diff_gradient(const std::function<double(std::span<const double>)>& fn,
                                         std::vector<double> point, double step) {
    std::vector<double> grad(point.size(), 0.0);
    for (std::size_t i = 0; i < point.size(); ++i) {
        double original = point[i];
        point[i] = original + step;
        double up = fn(point);
        point[i] = original - step;
        double down = fn(point);
        point[i] = original;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double pairwise_auc(const std::vector<double>& scores, const std::vector<bool>& positives) {
    double wins = 0.0;
    double pairs = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!positives[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (positives[j]) continue;
            pairs += 1.0;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    return pairs == 0.0 ? std::nan("") : wins / pairs;
}

std::size_t df_vocab_size(const std::vector<std::vector<std::string>>& tokenized_docs, int min_df) {
    std::map<std::string, std::set<std::size_t>> docs_with_token;
    for (std::size_t d = 0; d < tokenized_docs.size(); ++d) {
        for (const auto& token : tokenized_docs[d]) docs_with_token[token].insert(d);
    }
    std::size_t kept = 0;
    for (const auto& [token, docs] : docs_with_token) {
        if (docs.size() >= static_cast<std::size_t>(min_df)) ++kept;
    }
    return kept;
}

double adam_first_step(double param, double grad, double lr, double weight_decay, double beta1,
                       double beta2, double eps) {
    double m = (1.0 - beta1) * grad;
    double v = (1.0 - beta2) * grad * grad;
    double m_hat = m / (1.0 - beta1);
    double v_hat = v / (1.0 - beta2);
    return param - lr * (m_hat / (std::sqrt(v_hat) + eps) + weight_decay * param);
}

MeanSd bootstrap(const std::function<double(const std::vector<std::size_t>&)>& metric_of_indices,
                 std::size_t n, int iterations, std::uint64_t seed) {
    std::vector<double> values;
    for (int it = 0; it < iterations; ++it) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(it));
        std::vector<std::size_t> indices(n);
        for (std::size_t j = 0; j < n; ++j) indices[j] = rng() % n;
        values.push_back(metric_of_indices(indices));
    }
    MeanSd out;
    for (double v : values) out.mean += v;
    out.mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

} // namespace oracle
