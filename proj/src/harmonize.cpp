// SPDX-License-Identifier: Apache-2.0

#include "drgkit/harmonize.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>

#include "drgkit/csv.hpp"

namespace drg {

namespace {

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t start = i;
        while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        if (i > start) tokens.emplace_back(s.substr(start, i - start));
    }
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t;
    }
    return out;
}

std::string token_sort_form(std::string_view normalized) {
    auto tokens = split_tokens(normalized);
    std::sort(tokens.begin(), tokens.end());
    return join_tokens(tokens);
}

std::string format_score(double score) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

} // namespace

NormalizationRuleSet::NormalizationRuleSet(std::vector<NormalizationRule> rules, bool case_fold)
    : rules_(std::move(rules)), case_fold_(case_fold) {
    for (auto& rule : rules_) {
        if (case_fold_) {
            for (char& c : rule.pattern) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            for (char& c : rule.replacement) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
    }
    validate();
}

void NormalizationRuleSet::validate() const {
    for (const auto& rule : rules_) {
        if (rule.pattern.empty()) throw ConfigError("normalization rule with empty pattern");
        if (split_tokens(rule.pattern).size() != 1)
            throw ConfigError("rule pattern '" + rule.pattern + "' must be a single token");
        for (const auto& out_token : split_tokens(rule.replacement)) {
            for (const auto& other : rules_) {
                if (other.pattern == out_token)
                    throw ConfigError("rule set is not idempotent: replacement token '" +
                                      out_token + "' matches pattern '" + other.pattern + "'");
            }
        }
    }
}

NormalizationRuleSet NormalizationRuleSet::defaults() {
    return NormalizationRuleSet({
        {"W/O", "WITHOUT"},
        {"CATH", "CATHETERIZATION"},
        {"PROC", "PROCEDURES"},
        {"W", "WITH"},
    });
}

NormalizationRuleSet NormalizationRuleSet::from_csv(std::string_view csv_text, bool extend_defaults) {
    std::vector<NormalizationRule> rules;
    if (extend_defaults) rules = defaults().rules();
    for (const auto& row : csv::parse(csv_text)) {
        if (row.fields.size() == 2 && row.fields[0] == "pattern" && row.fields[1] == "replacement")
            continue;
        if (row.fields.size() != 2)
            throw ParseError("rules file expects 2 fields", row.line);
        rules.push_back({row.fields[0], row.fields[1]});
    }
    return NormalizationRuleSet(std::move(rules));
}

std::string normalize_description(std::string_view raw, const NormalizationRuleSet& rules) {
    std::string folded;
    folded.reserve(raw.size());
    for (char c : raw)
        folded += rules.case_fold() ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c;

    auto tokens = split_tokens(folded);
    for (const auto& rule : rules.rules()) {
        std::vector<std::string> next;
        next.reserve(tokens.size());
        for (auto& token : tokens) {
            if (token == rule.pattern) {
                for (auto& rep : split_tokens(rule.replacement)) next.push_back(std::move(rep));
            } else {
                next.push_back(std::move(token));
            }
        }
        tokens = std::move(next);
    }
    return join_tokens(tokens);
}

std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
    if (a == b) return 0;
    if (a.empty()) return b.size();
    if (b.empty()) return a.size();

    std::vector<std::size_t> prev(b.size() + 1);
    std::vector<std::size_t> curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;

    for (std::size_t i = 0; i < a.size(); ++i) {
        curr[0] = i + 1;
        for (std::size_t j = 0; j < b.size(); ++j) {
            std::size_t substitution = prev[j] + (a[i] == b[j] ? 0 : 1);
            curr[j + 1] = std::min({curr[j] + 1, prev[j + 1] + 1, substitution});
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double fuzzy_score(std::string_view a, std::string_view b) {
    std::string sa = token_sort_form(a);
    std::string sb = token_sort_form(b);
    std::size_t longest = std::max(sa.size(), sb.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein_distance(sa, sb)) / static_cast<double>(longest);
}

Harmonizer::Harmonizer(const DrgCatalog& catalog, NormalizationRuleSet rules,
                       double accept_threshold, double review_threshold)
    : catalog_(catalog), rules_(std::move(rules)),
      accept_threshold_(accept_threshold), review_threshold_(review_threshold) {
    if (catalog_.empty()) throw ConfigError("harmonizer requires a non-empty catalog");
    if (accept_threshold_ < review_threshold_)
        throw ConfigError("accept threshold must be >= review threshold");
    token_sorted_descriptions_.reserve(catalog_.entries().size());
    for (const auto& entry : catalog_.entries())
        token_sorted_descriptions_.push_back(token_sort_form(entry.code.description));
}

HarmonizationOutcome Harmonizer::harmonize(std::string_view historical) const {
    std::string normalized = normalize_description(historical, rules_);

    if (const CatalogEntry* exact = catalog_.find_description(normalized)) {
        return {HarmonizationOutcome::Kind::Matched, exact->code.code, {}};
    }

    std::string probe = token_sort_form(normalized);
    std::vector<MatchCandidate> scored;
    scored.reserve(catalog_.entries().size());
    for (std::size_t i = 0; i < catalog_.entries().size(); ++i) {
        const std::string& target = token_sorted_descriptions_[i];
        std::size_t longest = std::max(probe.size(), target.size());
        double score = longest == 0
            ? 1.0
            : 1.0 - static_cast<double>(levenshtein_distance(probe, target)) / static_cast<double>(longest);
        scored.push_back({catalog_.entries()[i].code.code, score});
    }
    std::sort(scored.begin(), scored.end(), [](const MatchCandidate& x, const MatchCandidate& y) {
        if (x.score != y.score) return x.score > y.score;
        return x.code < y.code;
    });

    const double best = scored.front().score;
    bool unique_best = scored.size() < 2 || scored[1].score < best;
    if (best >= accept_threshold_ && unique_best) {
        return {HarmonizationOutcome::Kind::Matched, scored.front().code, {}};
    }

    HarmonizationOutcome outcome;
    outcome.kind = HarmonizationOutcome::Kind::NeedsReview;
    if (best >= review_threshold_) {
        for (std::size_t i = 0; i < scored.size() && i < 5; ++i)
            outcome.candidates.push_back(scored[i]);
    }
    return outcome;
}

std::map<std::string, MappingValue>
apply_review_decisions(const std::vector<ReviewQueueItem>& queue,
                       const std::vector<ReviewDecision>& decisions,
                       const DrgCatalog& catalog) {
    std::map<std::string, MappingValue> by_description;
    for (const auto& decision : decisions) {
        if (!decision.exclude && !catalog.find_code(decision.code))
            throw ValidationError("decision assigns unknown code " + std::to_string(decision.code) +
                                  " to '" + decision.historical_description + "'");
        auto [it, inserted] = by_description.emplace(
            decision.historical_description, MappingValue{decision.exclude, decision.code});
        if (!inserted)
            throw ValidationError("duplicate decision for '" + decision.historical_description + "'");
    }

    std::map<std::string, MappingValue> table;
    for (const auto& item : queue) {
        auto it = by_description.find(item.historical_description);
        if (it == by_description.end())
            throw ValidationError("incomplete review: no decision for '" +
                                  item.historical_description + "'");
        table.emplace(item.historical_description, it->second);
    }
    return table;
}

std::string write_review_queue_csv(const std::vector<ReviewQueueItem>& queue) {
    std::string out = "historical_description";
    for (int i = 1; i <= 5; ++i) {
        out += ",candidate_" + std::to_string(i) + "_code";
        out += ",candidate_" + std::to_string(i) + "_score";
    }
    out += '\n';
    for (const auto& item : queue) {
        std::vector<std::string> fields{item.historical_description};
        for (std::size_t i = 0; i < 5; ++i) {
            if (i < item.candidates.size()) {
                fields.push_back(std::to_string(item.candidates[i].code));
                fields.push_back(format_score(item.candidates[i].score));
            } else {
                fields.emplace_back();
                fields.emplace_back();
            }
        }
        out += csv::write_row(fields);
        out += '\n';
    }
    return out;
}

std::vector<ReviewQueueItem> read_review_queue_csv(std::string_view text) {
    std::vector<ReviewQueueItem> queue;
    for (const auto& row : csv::parse(text)) {
        if (!row.fields.empty() && row.fields[0] == "historical_description") continue;
        if (row.fields.size() != 11)
            throw ParseError("review queue row expects 11 fields", row.line);
        ReviewQueueItem item;
        item.historical_description = row.fields[0];
        for (std::size_t i = 0; i < 5; ++i) {
            const std::string& code_text = row.fields[1 + 2 * i];
            const std::string& score_text = row.fields[2 + 2 * i];
            if (code_text.empty()) break;
            MatchCandidate candidate;
            auto [p, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(),
                                           candidate.code);
            if (ec != std::errc() || p != code_text.data() + code_text.size())
                throw ParseError("invalid candidate code '" + code_text + "'", row.line);
            candidate.score = std::stod(score_text);
            item.candidates.push_back(candidate);
        }
        queue.push_back(std::move(item));
    }
    return queue;
}

std::string write_mapping_csv(const std::vector<std::pair<std::string, MappingValue>>& mapping) {
    std::string out = "historical_description,decision\n";
    for (const auto& [description, value] : mapping) {
        out += csv::write_row({description, value.exclude ? "EXCLUDE" : std::to_string(value.code)});
        out += '\n';
    }
    return out;
}

std::vector<ReviewDecision> read_decisions_csv(std::string_view text) {
    std::vector<ReviewDecision> decisions;
    for (const auto& row : csv::parse(text)) {
        if (row.fields.size() == 2 && row.fields[0] == "historical_description" &&
            row.fields[1] == "decision")
            continue;
        if (row.fields.size() != 2)
            throw ParseError("decisions file expects 2 fields", row.line);
        ReviewDecision decision;
        decision.historical_description = row.fields[0];
        if (row.fields[1] == "EXCLUDE") {
            decision.exclude = true;
        } else {
            auto [p, ec] = std::from_chars(row.fields[1].data(),
                                           row.fields[1].data() + row.fields[1].size(),
                                           decision.code);
            if (ec != std::errc() || p != row.fields[1].data() + row.fields[1].size())
                throw ParseError("decision must be an integer code or EXCLUDE", row.line);
        }
        decisions.push_back(std::move(decision));
    }
    return decisions;
}

} // namespace drg
