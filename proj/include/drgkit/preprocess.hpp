// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_PREPROCESS_HPP
#define DRGKIT_PREPROCESS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drg {

struct RawNote {
    std::string stay_id;
    std::string full_text;
    std::string drg_description;
    std::string drg_version_tag;
};

/// A note that survived extraction, before DRG resolution is checked.
struct CandidateRecord {
    std::string stay_id;
    std::string course_text;
    std::optional<int> drg_code; // empty when harmonization left it unmapped
};

struct StayRecord {
    std::string stay_id;
    std::string course_text;
    int word_count = 0;
    int drg_code = 0;
};

struct DropReport {
    std::map<std::string, std::size_t> counts; // reason -> dropped records
    std::size_t total_dropped() const;
};

struct CohortSplit {
    std::vector<StayRecord> train;
    std::vector<StayRecord> test;
    std::uint64_t seed = 0;
};

struct CohortStats {
    std::map<int, std::size_t> class_counts;
    double median_cases_per_class = 0.0;
    double mean_word_count = 0.0;
    std::size_t n_records = 0;
    std::size_t n_classes = 0;
};

/// Whitespace-delimited token count; no punctuation stripping.
int count_words(std::string_view text);

/// Text between the `Brief Hospital Course` header line (case-insensitive,
/// optional trailing colon) and the next section header, exclusive.
/// A section header is a line of at most six title-case or uppercase words
/// ending in a colon; short lowercase connectives (<= 3 letters) are allowed
/// after the first word.
std::optional<std::string> extract_brief_hospital_course(std::string_view full_text);

bool is_section_header(std::string_view line);

/// Quality filters, applied in order per record: unmapped_drg, too_short
/// (fewer than min_words words), duplicate (exact course_text already kept
/// earlier in input order).
std::pair<std::vector<StayRecord>, DropReport>
filter_cohort(const std::vector<CandidateRecord>& records, int min_words = 40);

/// Remove every record of a class with fewer than min_count occurrences.
std::vector<StayRecord> drop_rare_drgs(const std::vector<StayRecord>& records, int min_count = 2);

/// Per class of size n the train side gets round-half-up((1-test_fraction)*n),
/// clamped to [1, n]; membership is a seeded shuffle within the class.
CohortSplit stratified_split(const std::vector<StayRecord>& records, double test_fraction,
                             std::uint64_t seed);

CohortStats cohort_stats(const std::vector<StayRecord>& records);

} // namespace drg

#endif
