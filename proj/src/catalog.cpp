// SPDX-License-Identifier: Apache-2.0

#include "drgkit/catalog.hpp"

#include <algorithm>
#include <cctype>

#include "drgkit/csv.hpp"

namespace drg {

namespace {

// Longest first; each candidate must be a whole-word suffix.
constexpr std::pair<std::string_view, SeverityArm> kDescriptors[] = {
    {"WITHOUT CC/MCC", SeverityArm::WithoutCcMcc},
    {"WITH CC/MCC", SeverityArm::WithCcMcc},
    {"WITHOUT MCC", SeverityArm::WithoutMcc},
    {"WITH MCC", SeverityArm::WithMcc},
    {"WITH CC", SeverityArm::WithCc},
};

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::string upper_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string arm_set_to_string(const std::set<SeverityArm>& arms) {
    std::string out = "{";
    for (auto arm : arms) {
        if (out.size() > 1) out += ", ";
        out += arm_name(arm);
    }
    return out + "}";
}

} // namespace

std::string_view arm_descriptor(SeverityArm arm) {
    switch (arm) {
    case SeverityArm::WithMcc: return "WITH MCC";
    case SeverityArm::WithCc: return "WITH CC";
    case SeverityArm::WithCcMcc: return "WITH CC/MCC";
    case SeverityArm::WithoutCcMcc: return "WITHOUT CC/MCC";
    case SeverityArm::WithoutMcc: return "WITHOUT MCC";
    case SeverityArm::None: return "";
    }
    return "";
}

std::string_view arm_name(SeverityArm arm) {
    switch (arm) {
    case SeverityArm::WithMcc: return "with_mcc";
    case SeverityArm::WithCc: return "with_cc";
    case SeverityArm::WithCcMcc: return "with_cc_mcc";
    case SeverityArm::WithoutCcMcc: return "without_cc_mcc";
    case SeverityArm::WithoutMcc: return "without_mcc";
    case SeverityArm::None: return "none";
    }
    return "none";
}

std::string_view label_name(CcMccLabel label) {
    switch (label) {
    case CcMccLabel::WithoutCcMcc: return "without_cc_mcc";
    case CcMccLabel::WithCc: return "with_cc";
    case CcMccLabel::WithMcc: return "with_mcc";
    case CcMccLabel::WithoutMcc: return "without_mcc";
    case CcMccLabel::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

std::string_view split_name(SplitType split) {
    switch (split) {
    case SplitType::ThreeWay: return "three_way";
    case SplitType::TwoWayCcMccVsNone: return "two_way_ccmcc_vs_none";
    case SplitType::TwoWayMccVsRest: return "two_way_mcc_vs_rest";
    case SplitType::NoSplit: return "no_split";
    }
    return "no_split";
}

std::optional<SeverityArm> arm_from_name(std::string_view name) {
    for (auto arm : {SeverityArm::WithMcc, SeverityArm::WithCc, SeverityArm::WithCcMcc,
                     SeverityArm::WithoutCcMcc, SeverityArm::WithoutMcc, SeverityArm::None}) {
        if (arm_name(arm) == name) return arm;
    }
    return std::nullopt;
}

std::optional<SplitType> split_from_name(std::string_view name) {
    for (auto split : {SplitType::ThreeWay, SplitType::TwoWayCcMccVsNone,
                       SplitType::TwoWayMccVsRest, SplitType::NoSplit}) {
        if (split_name(split) == name) return split;
    }
    return std::nullopt;
}

std::pair<std::string, SeverityArm> dissect_description(std::string_view description) {
    for (const auto& [descriptor, arm] : kDescriptors) {
        if (description.size() <= descriptor.size()) continue; // bare descriptor has no base
        if (!description.ends_with(descriptor)) continue;
        std::size_t cut = description.size() - descriptor.size();
        if (description[cut - 1] != ' ') continue; // whole-word boundary
        std::string_view base = description.substr(0, cut);
        while (!base.empty() && base.back() == ' ') base.remove_suffix(1);
        return {std::string(base), arm};
    }
    return {std::string(description), SeverityArm::None};
}

std::string recompose_description(std::string_view base_text, SeverityArm arm) {
    if (arm == SeverityArm::None) return std::string(base_text);
    std::string out(base_text);
    out += ' ';
    out += arm_descriptor(arm);
    return out;
}

SplitType classify_split(const std::set<SeverityArm>& arms) {
    using enum SeverityArm;
    if (arms == std::set<SeverityArm>{WithMcc, WithCc, WithoutCcMcc}) return SplitType::ThreeWay;
    if (arms == std::set<SeverityArm>{WithCcMcc, WithoutCcMcc}) return SplitType::TwoWayCcMccVsNone;
    if (arms == std::set<SeverityArm>{WithMcc, WithoutMcc}) return SplitType::TwoWayMccVsRest;
    if (arms == std::set<SeverityArm>{None}) return SplitType::NoSplit;
    throw ValidationError("inconsistent catalog: unrecognized arm set " + arm_set_to_string(arms));
}

CcMccLabel arm_to_label(SeverityArm arm) {
    switch (arm) {
    case SeverityArm::WithMcc: return CcMccLabel::WithMcc;
    case SeverityArm::WithCc: return CcMccLabel::WithCc;
    case SeverityArm::WithCcMcc: return CcMccLabel::WithCc; // weakest condition the arm implies
    case SeverityArm::WithoutCcMcc: return CcMccLabel::WithoutCcMcc;
    case SeverityArm::WithoutMcc: return CcMccLabel::WithoutMcc;
    case SeverityArm::None: return CcMccLabel::NotApplicable;
    }
    return CcMccLabel::NotApplicable;
}

SeverityArm map_label_to_arm(CcMccLabel label, SplitType split) {
    switch (split) {
    case SplitType::NoSplit:
        // any CC/MCC prediction maps to the single undescribed member
        return SeverityArm::None;
    case SplitType::TwoWayMccVsRest:
        return label == CcMccLabel::WithMcc ? SeverityArm::WithMcc : SeverityArm::WithoutMcc;
    case SplitType::ThreeWay:
        switch (label) {
        case CcMccLabel::WithMcc: return SeverityArm::WithMcc;
        case CcMccLabel::WithCc: return SeverityArm::WithCc;
        default: return SeverityArm::WithoutCcMcc;
        }
    case SplitType::TwoWayCcMccVsNone:
        switch (label) {
        case CcMccLabel::WithMcc:
        case CcMccLabel::WithCc: return SeverityArm::WithCcMcc;
        default: return SeverityArm::WithoutCcMcc;
        }
    }
    return SeverityArm::None;
}

DrgCatalog DrgCatalog::parse(std::string_view table_text, std::string_view version_tag) {
    DrgCatalog catalog;
    auto rows = csv::parse(table_text);

    struct PendingBase {
        std::set<SeverityArm> arms;
        std::vector<std::size_t> entry_indices;
    };
    std::vector<PendingBase> pending;

    for (const auto& row : rows) {
        if (row.fields.size() == 2 && row.fields[0] == "code" && row.fields[1] == "description")
            continue; // header
        if (row.fields.size() != 2)
            throw ParseError("expected 2 fields, got " + std::to_string(row.fields.size()), row.line);

        const std::string& code_text = row.fields[0];
        int code = 0;
        try {
            std::size_t used = 0;
            code = std::stoi(code_text, &used, 10);
            if (used != code_text.size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ParseError("invalid code '" + code_text + "'", row.line);
        }

        std::string description = collapse_whitespace(upper_ascii(row.fields[1]));
        if (description.empty()) throw ParseError("empty description", row.line);
        for (char c : description) {
            if (static_cast<unsigned char>(c) >= 0x80)
                throw ParseError("description is not ASCII", row.line);
        }

        if (catalog.entry_by_code_.contains(code))
            throw ValidationError("duplicate code " + std::to_string(code) + " at line " +
                                  std::to_string(row.line));

        auto [base_text, arm] = dissect_description(description);

        int base_id;
        if (auto it = catalog.base_by_text_.find(base_text); it != catalog.base_by_text_.end()) {
            base_id = it->second;
        } else {
            base_id = static_cast<int>(catalog.bases_.size());
            catalog.base_by_text_.emplace(base_text, base_id);
            catalog.bases_.push_back(BaseDrg{base_id, base_text, {}, SplitType::NoSplit});
            pending.push_back({});
        }

        BaseDrg& base = catalog.bases_[static_cast<std::size_t>(base_id)];
        if (base.members.contains(arm))
            throw ValidationError("codes " + std::to_string(base.members[arm]) + " and " +
                                  std::to_string(code) + " share base '" + base_text +
                                  "' and arm '" + std::string(arm_name(arm)) + "'");
        base.members[arm] = code;
        pending[static_cast<std::size_t>(base_id)].arms.insert(arm);

        CatalogEntry entry;
        entry.code = DrgCode{code, description, std::string(version_tag)};
        entry.base_id = base_id;
        entry.arm = arm;
        catalog.entry_by_code_.emplace(code, catalog.entries_.size());
        catalog.entry_by_description_.emplace(description, catalog.entries_.size());
        catalog.entries_.push_back(std::move(entry));
    }

    for (std::size_t i = 0; i < catalog.bases_.size(); ++i) {
        try {
            catalog.bases_[i].split = classify_split(pending[i].arms);
        } catch (const ValidationError& e) {
            throw ValidationError("base '" + catalog.bases_[i].base_text + "': " + e.what());
        }
    }
    return catalog;
}

const CatalogEntry* DrgCatalog::find_code(int code) const {
    auto it = entry_by_code_.find(code);
    return it == entry_by_code_.end() ? nullptr : &entries_[it->second];
}

const BaseDrg* DrgCatalog::find_base(int base_id) const {
    if (base_id < 0 || static_cast<std::size_t>(base_id) >= bases_.size()) return nullptr;
    return &bases_[static_cast<std::size_t>(base_id)];
}

const BaseDrg* DrgCatalog::find_base_by_text(std::string_view base_text) const {
    auto it = base_by_text_.find(std::string(base_text));
    return it == base_by_text_.end() ? nullptr : &bases_[static_cast<std::size_t>(it->second)];
}

const CatalogEntry* DrgCatalog::find_description(std::string_view description) const {
    auto it = entry_by_description_.find(std::string(description));
    return it == entry_by_description_.end() ? nullptr : &entries_[it->second];
}

std::array<std::size_t, 4> DrgCatalog::split_counts() const {
    std::array<std::size_t, 4> counts{};
    for (const auto& base : bases_) counts[static_cast<std::size_t>(base.split)] += 1;
    return counts;
}

std::uint64_t DrgCatalog::fingerprint() const {
    std::uint64_t hash = 1469598103934665603ULL;
    auto mix = [&hash](std::string_view bytes) {
        for (char c : bytes) {
            hash ^= static_cast<unsigned char>(c);
            hash *= 1099511628211ULL;
        }
    };
    for (const auto& entry : entries_) {
        mix(std::to_string(entry.code.code));
        mix("\x1f");
        mix(entry.code.description);
        mix("\x1e");
    }
    return hash;
}

std::set<CcMccLabel> label_valid_set(const BaseDrg& base) {
    std::set<CcMccLabel> labels;
    for (const auto& [arm, code] : base.members) labels.insert(arm_to_label(arm));
    return labels;
}

const DrgCode& compose(int base_id, CcMccLabel label, const DrgCatalog& catalog) {
    const BaseDrg* base = catalog.find_base(base_id);
    if (!base) throw ValidationError("unknown base id " + std::to_string(base_id));

    // Direct membership: an arm that projects onto the predicted label.
    for (const auto& [arm, code] : base->members) {
        if (arm_to_label(arm) == label) return catalog.find_code(code)->code;
    }
    SeverityArm arm = map_label_to_arm(label, base->split);
    auto it = base->members.find(arm);
    if (it == base->members.end())
        throw ValidationError("base '" + base->base_text + "' has no member for arm '" +
                              std::string(arm_name(arm)) + "'");
    return catalog.find_code(it->second)->code;
}

} // namespace drg
