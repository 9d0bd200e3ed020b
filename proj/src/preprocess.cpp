// SPDX-License-Identifier: Apache-2.0

#include "drgkit/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace drg {

namespace {

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            lines.push_back(line);
            start = i + 1;
        }
    }
    return lines;
}

double median_of_sorted(const std::vector<std::size_t>& sorted) {
    if (sorted.empty()) return 0.0;
    std::size_t n = sorted.size();
    if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
    return (static_cast<double>(sorted[n / 2 - 1]) + static_cast<double>(sorted[n / 2])) / 2.0;
}

} // namespace

std::size_t DropReport::total_dropped() const {
    std::size_t total = 0;
    for (const auto& [reason, count] : counts) total += count;
    return total;
}

int count_words(std::string_view text) {
    int count = 0;
    bool in_word = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_word) ++count;
        in_word = !space;
    }
    return count;
}

bool is_section_header(std::string_view line) {
    std::string_view t = trim_view(line);
    if (t.size() < 2 || t.back() != ':') return false;
    t.remove_suffix(1);
    t = trim_view(t);
    if (t.empty() || t.find(':') != std::string_view::npos) return false;

    int n_words = 0;
    std::size_t i = 0;
    bool first = true;
    while (i < t.size()) {
        std::size_t start = i;
        while (i < t.size() && t[i] != ' ') ++i;
        std::string_view word = t.substr(start, i - start);
        while (i < t.size() && t[i] == ' ') ++i;

        if (++n_words > 6) return false;
        bool alphabetic = std::all_of(word.begin(), word.end(), [](char c) {
            return std::isalpha(static_cast<unsigned char>(c)) || c == '/' || c == '-';
        });
        if (!alphabetic) return false;
        bool upper_initial = std::isupper(static_cast<unsigned char>(word.front()));
        bool short_connective = !first && word.size() <= 3 &&
            std::all_of(word.begin(), word.end(), [](char c) {
                return std::islower(static_cast<unsigned char>(c));
            });
        if (!upper_initial && !short_connective) return false;
        first = false;
    }
    return n_words >= 1;
}

std::optional<std::string> extract_brief_hospital_course(std::string_view full_text) {
    auto lines = split_lines(full_text);

    std::size_t header_index = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string t = lower_ascii(trim_view(lines[i]));
        if (!t.empty() && t.back() == ':') t.pop_back();
        while (!t.empty() && t.back() == ' ') t.pop_back();
        if (t == "brief hospital course") {
            header_index = i;
            break;
        }
    }
    if (header_index == lines.size()) return std::nullopt;

    std::string section;
    for (std::size_t i = header_index + 1; i < lines.size(); ++i) {
        if (is_section_header(lines[i])) break;
        if (!section.empty()) section += '\n';
        section += lines[i];
    }
    return std::string(trim_view(section));
}

std::pair<std::vector<StayRecord>, DropReport>
filter_cohort(const std::vector<CandidateRecord>& records, int min_words) {
    std::vector<StayRecord> kept;
    DropReport report;
    std::unordered_set<std::string> seen_courses;

    for (const auto& record : records) {
        if (!record.drg_code.has_value()) {
            report.counts["unmapped_drg"] += 1;
            continue;
        }
        int words = count_words(record.course_text);
        if (words < min_words) {
            report.counts["too_short"] += 1;
            continue;
        }
        if (!seen_courses.insert(record.course_text).second) {
            report.counts["duplicate"] += 1;
            continue;
        }
        kept.push_back({record.stay_id, record.course_text, words, *record.drg_code});
    }
    return {std::move(kept), std::move(report)};
}

std::vector<StayRecord> drop_rare_drgs(const std::vector<StayRecord>& records, int min_count) {
    std::unordered_map<int, int> counts;
    for (const auto& record : records) counts[record.drg_code] += 1;
    std::vector<StayRecord> kept;
    kept.reserve(records.size());
    for (const auto& record : records) {
        if (counts[record.drg_code] >= min_count) kept.push_back(record);
    }
    return kept;
}

CohortSplit stratified_split(const std::vector<StayRecord>& records, double test_fraction,
                             std::uint64_t seed) {
    // class buckets in input order, iterated by ascending code for determinism
    std::map<int, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < records.size(); ++i)
        buckets[records[i].drg_code].push_back(i);

    CohortSplit split;
    split.seed = seed;
    std::mt19937_64 rng(seed);

    for (auto& [code, indices] : buckets) {
        std::shuffle(indices.begin(), indices.end(), rng);
        double n = static_cast<double>(indices.size());
        auto train_n = static_cast<std::size_t>(std::floor((1.0 - test_fraction) * n + 0.5));
        train_n = std::clamp<std::size_t>(train_n, 1, indices.size());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            (i < train_n ? split.train : split.test).push_back(records[indices[i]]);
        }
    }
    return split;
}

CohortStats cohort_stats(const std::vector<StayRecord>& records) {
    CohortStats stats;
    stats.n_records = records.size();
    double word_sum = 0.0;
    for (const auto& record : records) {
        stats.class_counts[record.drg_code] += 1;
        word_sum += record.word_count;
    }
    stats.n_classes = stats.class_counts.size();
    stats.mean_word_count = records.empty() ? 0.0 : word_sum / static_cast<double>(records.size());

    std::vector<std::size_t> counts;
    counts.reserve(stats.class_counts.size());
    for (const auto& [code, count] : stats.class_counts) counts.push_back(count);
    std::sort(counts.begin(), counts.end());
    stats.median_cases_per_class = median_of_sorted(counts);
    return stats;
}

} // namespace drg
