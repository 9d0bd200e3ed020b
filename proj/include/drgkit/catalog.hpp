// SPDX-License-Identifier: Apache-2.0

#ifndef DRGKIT_CATALOG_HPP
#define DRGKIT_CATALOG_HPP

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drgkit/errors.hpp"

namespace drg {

/// Severity descriptor carried by a catalog description. NONE means the
/// description has no terminal CC/MCC descriptor at all.
enum class SeverityArm {
    WithMcc,
    WithCc,
    WithCcMcc,
    WithoutCcMcc,
    WithoutMcc,
    None,
};

/// The five-valued CC/MCC prediction label space. Numeric order is the
/// label index used by the two-label head and must not change.
enum class CcMccLabel {
    WithoutCcMcc = 0,
    WithCc = 1,
    WithMcc = 2,
    WithoutMcc = 3,
    NotApplicable = 4,
};

inline constexpr int kNumCcMccLabels = 5;

/// Topology of the severity arms under one base DRG.
enum class SplitType {
    ThreeWay,           // {WITH MCC, WITH CC, WITHOUT CC/MCC}
    TwoWayCcMccVsNone,  // {WITH CC/MCC, WITHOUT CC/MCC}
    TwoWayMccVsRest,    // {WITH MCC, WITHOUT MCC}
    NoSplit,            // single undescribed entry
};

struct DrgCode {
    int code = 0;
    std::string description; // uppercase, whitespace-collapsed
    std::string version_tag;
};

struct CatalogEntry {
    DrgCode code;
    int base_id = -1;
    SeverityArm arm = SeverityArm::None;
};

struct BaseDrg {
    int base_id = -1;
    std::string base_text; // principal diagnosis/procedure, uppercase
    std::map<SeverityArm, int> members; // arm -> DRG code number
    SplitType split = SplitType::NoSplit;
};

/// The descriptor string for an arm ("WITH MCC", ...); empty for NONE.
std::string_view arm_descriptor(SeverityArm arm);

/// Snake-case identifiers used in JSON dumps and CLI output.
std::string_view arm_name(SeverityArm arm);
std::string_view label_name(CcMccLabel label);
std::string_view split_name(SplitType split);
std::optional<SeverityArm> arm_from_name(std::string_view name);
std::optional<SplitType> split_from_name(std::string_view name);

/// Split an uppercase description into (base text, severity arm). The arm
/// is the longest terminal descriptor preceded by whitespace; a
/// descriptor occurring mid-description is treated as base text.
std::pair<std::string, SeverityArm> dissect_description(std::string_view description);

/// Rebuild the description from its parts; inverse of dissect_description.
std::string recompose_description(std::string_view base_text, SeverityArm arm);

/// Classify the arm-set topology. Throws ValidationError (listing the
/// arms) for any set outside the four recognized patterns.
SplitType classify_split(const std::set<SeverityArm>& arms);

/// Project a catalog arm onto the five-label prediction space.
/// WITH CC/MCC has no dedicated label and maps to WITH CC.
CcMccLabel arm_to_label(SeverityArm arm);

/// Resolve a predicted label to a member arm of a base with the given
/// split. Total over all 5x4 pairs; labels outside the base's own label
/// set fall back to the least severe member arm.
SeverityArm map_label_to_arm(CcMccLabel label, SplitType split);

class DrgCatalog {
public:
    DrgCatalog() = default;

    /// Parse a `code,description` CSV table (header optional) and build
    /// the dissected catalog. Throws ParseError on malformed rows and
    /// ValidationError on duplicate codes or inconsistent arm sets.
    static DrgCatalog parse(std::string_view table_text, std::string_view version_tag = "");

    const std::vector<CatalogEntry>& entries() const { return entries_; }
    const std::vector<BaseDrg>& bases() const { return bases_; }

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    const CatalogEntry* find_code(int code) const;
    const BaseDrg* find_base(int base_id) const;
    const BaseDrg* find_base_by_text(std::string_view base_text) const;

    /// Entry whose description equals `description` exactly, if any.
    const CatalogEntry* find_description(std::string_view description) const;

    /// Count of bases per split type, in SplitType declaration order.
    std::array<std::size_t, 4> split_counts() const;

    /// FNV-1a hash over (code, description) pairs; identifies the
    /// catalog inside model artifacts.
    std::uint64_t fingerprint() const;

private:
    std::vector<CatalogEntry> entries_;
    std::vector<BaseDrg> bases_;
    std::unordered_map<int, std::size_t> entry_by_code_;
    std::unordered_map<std::string, int> base_by_text_;
    std::unordered_map<std::string, std::size_t> entry_by_description_;
};

/// Labels reachable from the base's arms via arm_to_label; the valid set
/// V used by constrained inference.
std::set<CcMccLabel> label_valid_set(const BaseDrg& base);

/// Infer the member DRG for a predicted (base, CC/MCC label) pair.
/// Tries a direct member whose arm projects to the label, then the
/// split-specific mapping rule. Throws ValidationError for unknown base.
const DrgCode& compose(int base_id, CcMccLabel label, const DrgCatalog& catalog);

} // namespace drg

#endif
