// SPDX-License-Identifier: Apache-2.0

#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <random>
#include <vector>

#include <json.hpp>

#include "drgkit/catalog.hpp"
#include "drgkit/csv.hpp"
#include "drgkit/preprocess.hpp"

namespace synthetic {

namespace {

using drg::SeverityArm;
using drg::SplitType;
using nlohmann::json;

const std::vector<std::string> kSystems = {
    "CARDIAC",    "PULMONARY",  "RENAL",      "HEPATIC",   "NEUROLOGICAL", "VASCULAR",
    "GASTRIC",    "SPINAL",     "OCULAR",     "DERMAL",    "SKELETAL",     "MUSCULAR",
    "LYMPHATIC",  "ENDOCRINE",  "URETERAL",   "THORACIC",  "CRANIAL",      "FACIAL",
    "ORAL",       "NASAL",      "AURAL",      "PANCREATIC", "BILIARY",     "INTESTINAL",
    "RECTAL",     "ARTERIAL",   "VENOUS",     "BRONCHIAL", "PLEURAL",      "PERITONEAL",
    "ADRENAL",    "THYROID",    "SPLENIC",    "ESOPHAGEAL"};

const std::vector<std::string> kConditions = {
    "DEGENERATIVE DISORDERS", "ACUTE INFECTIONS",      "CHRONIC INFLAMMATION",
    "MALIGNANT NEOPLASMS",    "BENIGN LESIONS",        "TRAUMATIC INJURIES",
    "CONGENITAL ANOMALIES",   "OBSTRUCTIVE DISEASE",   "HEMORRHAGIC EVENTS",
    "ISCHEMIC EPISODES",      "FUNCTIONAL DISTURBANCES", "METABOLIC DERANGEMENTS",
    "IMMUNE REACTIONS",       "TOXIC EXPOSURES",       "COMPRESSION SYNDROMES",
    "ULCERATIVE CONDITIONS",  "FIBROTIC CHANGES",      "CYSTIC FORMATIONS",
    "VASCULITIC PROCESSES",   "SEPTIC COMPLICATIONS"};

std::vector<SeverityArm> arms_for(SplitType split) {
    switch (split) {
    case SplitType::ThreeWay:
        return {SeverityArm::WithMcc, SeverityArm::WithCc, SeverityArm::WithoutCcMcc};
    case SplitType::TwoWayCcMccVsNone:
        return {SeverityArm::WithCcMcc, SeverityArm::WithoutCcMcc};
    case SplitType::TwoWayMccVsRest:
        return {SeverityArm::WithMcc, SeverityArm::WithoutMcc};
    case SplitType::NoSplit:
        return {SeverityArm::None};
    }
    return {};
}

std::string build_catalog_csv(int three_way, int ccmcc_vs_none, int mcc_vs_rest, int no_split,
                              std::uint64_t seed) {
    std::vector<SplitType> splits;
    splits.insert(splits.end(), three_way, SplitType::ThreeWay);
    splits.insert(splits.end(), ccmcc_vs_none, SplitType::TwoWayCcMccVsNone);
    splits.insert(splits.end(), mcc_vs_rest, SplitType::TwoWayMccVsRest);
    splits.insert(splits.end(), no_split, SplitType::NoSplit);

    std::mt19937_64 rng(seed);
    std::shuffle(splits.begin(), splits.end(), rng);

    std::string csv = "code,description\n";
    int code = 1;
    for (std::size_t base = 0; base < splits.size(); ++base) {
        const std::string& system = kSystems[base % kSystems.size()];
        const std::string& condition = kConditions[base / kSystems.size()];
        std::string base_text = system + " " + condition;
        for (SeverityArm arm : arms_for(splits[base])) {
            csv += std::to_string(code++);
            csv += ',';
            csv += drg::csv::escape_field(drg::recompose_description(base_text, arm));
            csv += '\n';
        }
    }
    return csv;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string_view severity_token(SeverityArm arm) {
    switch (arm) {
    case SeverityArm::WithMcc: return "sevmcc";
    case SeverityArm::WithCc: return "sevcc";
    case SeverityArm::WithCcMcc: return "sevccmcc";
    case SeverityArm::WithoutCcMcc: return "sevnoccmcc";
    case SeverityArm::WithoutMcc: return "sevnomcc";
    case SeverityArm::None: return "sevbaseline";
    }
    return "sevbaseline";
}

std::string note_json(const std::string& stay_id, const std::string& text,
                      const std::string& description) {
    return json{{"stay_id", stay_id}, {"text", text}, {"drg_description", description}}.dump();
}

std::string course_for_entry(const drg::CatalogEntry& entry, const drg::DrgCatalog& catalog,
                             int target_words, int noise_vocab, std::mt19937_64& rng) {
    const drg::BaseDrg& base = *catalog.find_base(entry.base_id);
    std::string dx = "dx" + std::to_string(entry.base_id);
    std::string sev(severity_token(entry.arm));
    std::string course = "patient admitted with " + lower_ascii(base.base_text) + " " + dx +
                         " now documented. course notable for " + sev +
                         " severity markers. assessment " + dx + " with " + sev +
                         " features. impression remains " + sev + " overall.";
    int words = drg::count_words(course);
    while (words < target_words) {
        course += " n" + std::to_string(rng() % static_cast<std::uint64_t>(noise_vocab));
        ++words;
    }
    return course;
}

std::string wrap_note(const std::string& course) {
    return "Admission Date: 2131-06-14\nService: MEDICINE\n\nBrief Hospital Course:\n" + course +
           "\n\nMedications on Admission:\nnone listed\n";
}

} // namespace

std::string reference_catalog_csv() {
    return build_catalog_csv(154, 44, 65, 77, 20160401);
}

std::string desk_catalog_csv(const DeskSpec& spec) {
    return build_catalog_csv(spec.three_way, spec.ccmcc_vs_none, spec.mcc_vs_rest, spec.no_split,
                             spec.seed);
}

std::string desk_notes_jsonl(const DeskSpec& spec) {
    drg::DrgCatalog catalog = drg::DrgCatalog::parse(desk_catalog_csv(spec));
    const auto& entries = catalog.entries();
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);

    // Every code gets a floor of notes; the remainder follows a
    // 1/(rank+1) long-tail profile like a real cohort's imbalance.
    std::vector<int> counts(entries.size(), spec.notes_floor);
    int remaining = spec.n_notes - spec.notes_floor * static_cast<int>(entries.size());
    if (remaining < 0) remaining = 0;
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i)
        weight_sum += 1.0 / std::sqrt(static_cast<double>(i + 1));
    int assigned = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        int extra = static_cast<int>(remaining / weight_sum / std::sqrt(static_cast<double>(i + 1)));
        counts[i] += extra;
        assigned += extra;
    }
    counts[0] += remaining - assigned; // absorb rounding drift

    std::string jsonl;
    std::vector<std::string> first_courses;
    int stay = 0;
    auto next_stay = [&stay] { return "stay" + std::to_string(stay++); };

    for (std::size_t i = 0; i < entries.size(); ++i) {
        for (int k = 0; k < counts[i]; ++k) {
            int target = spec.min_words +
                         static_cast<int>(rng() % static_cast<std::uint64_t>(
                                              spec.max_words - spec.min_words + 1));
            std::string course = course_for_entry(entries[i], catalog, target, spec.noise_vocab, rng);
            if (first_courses.size() < static_cast<std::size_t>(spec.n_duplicates))
                first_courses.push_back(course);
            jsonl += note_json(next_stay(), wrap_note(course), entries[i].code.description);
            jsonl += '\n';
        }
    }

    for (int k = 0; k < spec.n_short; ++k) {
        const auto& entry = entries[rng() % entries.size()];
        jsonl += note_json(next_stay(), wrap_note("brief uneventful stay dx" +
                                                  std::to_string(entry.base_id)),
                           entry.code.description);
        jsonl += '\n';
    }
    for (int k = 0; k < spec.n_missing_section; ++k) {
        const auto& entry = entries[rng() % entries.size()];
        jsonl += note_json(next_stay(),
                           "Admission Date: 2131-06-14\nDischarge Diagnosis:\nsee course\n",
                           entry.code.description);
        jsonl += '\n';
    }
    for (const auto& course : first_courses) {
        jsonl += note_json(next_stay(), wrap_note(course), entries[0].code.description);
        jsonl += '\n';
    }
    return jsonl;
}

std::string sample_notes_jsonl() {
    drg::DrgCatalog catalog = drg::DrgCatalog::parse(reference_catalog_csv());
    // four codes, one per split type, located by their base's split
    std::vector<int> codes;
    for (auto wanted : {SplitType::ThreeWay, SplitType::TwoWayCcMccVsNone,
                        SplitType::TwoWayMccVsRest, SplitType::NoSplit}) {
        for (const auto& base : catalog.bases()) {
            if (base.split == wanted) {
                codes.push_back(base.members.begin()->second);
                break;
            }
        }
    }

    std::mt19937_64 rng(424242);
    auto long_course = [&rng](const std::string& topic) {
        std::string course = "patient admitted with " + topic +
                             " and monitored closely on the floor.";
        int words = drg::count_words(course);
        while (words < 48) {
            course += " w" + std::to_string(rng() % 400);
            ++words;
        }
        return course;
    };

    // nine valid notes with class counts {3,2,2,2}, two short, one duplicate
    std::vector<int> note_codes{codes[0], codes[0], codes[0], codes[1], codes[1],
                                codes[2], codes[2], codes[3], codes[3]};
    std::string jsonl;
    std::string first_course;
    int stay = 1;
    for (int code : note_codes) {
        const auto* entry = catalog.find_code(code);
        std::string course = long_course(lower_ascii(entry->code.description));
        if (first_course.empty()) first_course = course;
        jsonl += note_json("s" + std::to_string(stay++), wrap_note(course),
                           entry->code.description);
        jsonl += '\n';
    }
    for (int k = 0; k < 2; ++k) {
        const auto* entry = catalog.find_code(codes[static_cast<std::size_t>(k)]);
        jsonl += note_json("s" + std::to_string(stay++),
                           wrap_note("short stay, discharged home quickly"),
                           entry->code.description);
        jsonl += '\n';
    }
    jsonl += note_json("s" + std::to_string(stay++), wrap_note(first_course),
                       catalog.find_code(codes[0])->code.description);
    jsonl += '\n';
    return jsonl;
}

} // namespace synthetic
