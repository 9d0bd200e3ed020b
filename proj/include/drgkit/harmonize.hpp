// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_HARMONIZE_HPP
#define DRGKIT_HARMONIZE_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drgkit/catalog.hpp"

namespace drg {

struct NormalizationRule {
    std::string pattern;     // single whole token, uppercase
    std::string replacement; // one or more tokens, uppercase
};

/// Ordered whole-token rewrite rules applied after case folding and
/// whitespace collapsing. The rule set must be idempotent: no rule's
/// replacement may contain a token matched by any pattern.
class NormalizationRuleSet {
public:
    NormalizationRuleSet() = default;
    explicit NormalizationRuleSet(std::vector<NormalizationRule> rules, bool case_fold = true);

    /// W/O -> WITHOUT, CATH -> CATHETERIZATION, PROC -> PROCEDURES, W -> WITH.
    static NormalizationRuleSet defaults();

    /// Load `pattern,replacement` CSV rows and append them to the defaults.
    static NormalizationRuleSet from_csv(std::string_view csv_text, bool extend_defaults = true);

    const std::vector<NormalizationRule>& rules() const { return rules_; }
    bool case_fold() const { return case_fold_; }

private:
    void validate() const;

    std::vector<NormalizationRule> rules_;
    bool case_fold_ = true;
};

/// Uppercase, collapse whitespace, then apply the rule set token-wise.
/// Idempotent for any valid rule set.
std::string normalize_description(std::string_view raw, const NormalizationRuleSet& rules);

/// Edit distance between two byte strings (two-row DP).
std::size_t levenshtein_distance(std::string_view a, std::string_view b);

/// Token-sort ratio: sort whitespace tokens of each side, join with
/// single spaces, then 1 - distance/max_length. Symmetric; 1.0 for two
/// empty strings.
double fuzzy_score(std::string_view a, std::string_view b);

struct MatchCandidate {
    int code = 0;
    double score = 0.0;
};

struct HarmonizationOutcome {
    enum class Kind { Matched, NeedsReview, Excluded };
    Kind kind = Kind::NeedsReview;
    int code = 0;                           // valid when Matched
    std::vector<MatchCandidate> candidates; // top-5, score desc then code asc
};

struct ReviewQueueItem {
    std::string historical_description;
    std::vector<MatchCandidate> candidates;
};

struct ReviewDecision {
    std::string historical_description;
    bool exclude = false;
    int code = 0; // valid when !exclude
};

/// Outcome of the applied review: either a concrete code or exclusion.
struct MappingValue {
    bool exclude = false;
    int code = 0;
};

/// Maps historical descriptions onto one reference catalog.
class Harmonizer {
public:
    Harmonizer(const DrgCatalog& catalog, NormalizationRuleSet rules,
               double accept_threshold = 0.95, double review_threshold = 0.70);

    /// Exact post-normalization match wins; otherwise a unique fuzzy
    /// maximizer at or above the accept threshold; otherwise the item
    /// goes to review (with candidates when any score clears the review
    /// threshold).
    HarmonizationOutcome harmonize(std::string_view historical) const;

    const NormalizationRuleSet& rules() const { return rules_; }
    double accept_threshold() const { return accept_threshold_; }
    double review_threshold() const { return review_threshold_; }

private:
    const DrgCatalog& catalog_;
    NormalizationRuleSet rules_;
    double accept_threshold_;
    double review_threshold_;
    std::vector<std::string> token_sorted_descriptions_; // parallel to catalog entries
};

/// Resolve a review queue against physician decisions. Every queue item
/// must be covered exactly once and assigned codes must exist in the
/// catalog.
std::map<std::string, MappingValue>
apply_review_decisions(const std::vector<ReviewQueueItem>& queue,
                       const std::vector<ReviewDecision>& decisions,
                       const DrgCatalog& catalog);

/// Review queue CSV: historical_description,candidate_1_code,candidate_1_score,...
std::string write_review_queue_csv(const std::vector<ReviewQueueItem>& queue);
std::vector<ReviewQueueItem> read_review_queue_csv(std::string_view text);

/// Decisions / mapping CSV: historical_description,decision where the
/// decision is an integer code or the word EXCLUDE.
std::string write_mapping_csv(const std::vector<std::pair<std::string, MappingValue>>& mapping);
std::vector<ReviewDecision> read_decisions_csv(std::string_view text);

} // namespace drg

#endif
