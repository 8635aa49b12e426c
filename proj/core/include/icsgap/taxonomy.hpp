#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "icsgap/common.hpp"

namespace icsgap {

// Ordered: Missing < Mentioned < Described < Actionable.
enum class DetailLevel { Missing = 0, Mentioned = 1, Described = 2, Actionable = 3 };

std::string_view to_string(DetailLevel d);
std::optional<DetailLevel> parse_detail_level(std::string_view s);
inline bool is_searchable(DetailLevel d) { return d == DetailLevel::Actionable; }
inline constexpr DetailLevel kAllDetailLevels[] = {DetailLevel::Missing, DetailLevel::Mentioned,
                                                   DetailLevel::Described, DetailLevel::Actionable};

enum class SupportLevel { No = 0, Partial = 1, Full = 2 };

std::string_view to_string(SupportLevel s);
inline constexpr SupportLevel kAllSupportLevels[] = {SupportLevel::Full, SupportLevel::Partial, SupportLevel::No};

struct StixSupport {
    SupportLevel level = SupportLevel::No;
    std::string sco_name;  // empty iff level == No

    bool operator==(const StixSupport&) const = default;
};

class SupportParseError : public Error {
public:
    SupportParseError(const std::string& token, const std::string& why)
        : Error("invalid STIX support token '" + token + "': " + why), token_(token) {}
    const std::string& token() const { return token_; }

private:
    std::string token_;
};

// Wire form: "No", "Full: <name>", "Partial: <name>".
StixSupport parse_support_string(std::string_view s);
std::string serialize_support(const StixSupport& s);

// Standard STIX 2.1 SCO type names.
const std::vector<std::string>& sco_vocabulary();
void register_sco_extension(const std::string& name);
// Accepts "<object>" or "<object>:<property path>"; the object part is compared
// case-insensitively with spaces treated as hyphens.
bool is_known_sco(std::string_view name);

enum class ProprietaryClass { OpenStandard, ProprietaryDocumented, ProprietaryUndocumented };

std::string_view to_string(ProprietaryClass p);
std::optional<ProprietaryClass> parse_proprietary(std::string_view s);

enum class ReviewStatus { Machine, Corrected, Rejected };

std::string_view to_string(ReviewStatus r);
std::optional<ReviewStatus> parse_review_status(std::string_view s);

// Case-fold, trim, collapse whitespace, singularize the final word.
std::string normalize_label(std::string_view label);

inline constexpr std::string_view kFlagNonVerbatim = "non-verbatim";
inline constexpr std::string_view kFlagUnmappedLabel = "unmapped-label";

struct Observable {
    std::string observable_value;
    DetailLevel artifact_details = DetailLevel::Mentioned;
    std::string data_source;
    std::string classification;
    StixSupport stix_support;
    ProprietaryClass proprietary = ProprietaryClass::OpenStandard;
    std::optional<std::string> parser;  // nullopt serializes as null
    std::optional<std::string> notes;
    std::string technique_num;
    std::string description_id;
    std::string related_malware;
    std::string backend;
    ReviewStatus review_status = ReviewStatus::Machine;
    std::vector<std::string> flags;

    bool has_flag(std::string_view f) const;
    void add_flag(std::string_view f);
    bool operator==(const Observable&) const = default;
};

ojson to_json(const Observable& o);
Observable observable_from_json(const json& j);

// Datasets are kept in this order everywhere: technique, description, value, classification.
bool canonical_less(const Observable& a, const Observable& b);
void sort_canonical(std::vector<Observable>& v);

std::string dump_dataset(const std::vector<Observable>& v);
std::vector<Observable> parse_dataset(std::string_view ndjson);
std::vector<Observable> read_dataset(const std::filesystem::path& path);
std::string dataset_hash(const std::vector<Observable>& v);

struct Provenance {
    std::string technique_id;
    std::string malware_name;
};
using ProvenanceIndex = std::unordered_map<std::string, Provenance>;

std::vector<std::string> validate_observable(const Observable& o, const ProvenanceIndex* index = nullptr);
// Also reports missing or mistyped fields of the serialized form, one violation per field.
std::vector<std::string> validate_observable_json(const json& j, const ProvenanceIndex* index = nullptr);

struct CoverageRule {
    std::string label;
    std::string match;  // "exact" or "normalized-synonym"
    std::vector<std::string> synonyms;
    StixSupport verdict;
    std::string rationale;
};

struct CoverageVerdict {
    StixSupport support;
    bool mapped = false;
    const CoverageRule* rule = nullptr;
};

class CoverageMap {
public:
    static CoverageMap load(const std::filesystem::path& path);
    static CoverageMap from_json(const json& j);

    CoverageMap() = default;
    CoverageMap(const CoverageMap& other);
    CoverageMap& operator=(const CoverageMap& other);

    // Pure lookup.
    CoverageVerdict lookup(std::string_view label) const;
    // Lookup that also records unmapped labels.
    StixSupport classify(std::string_view label) const;

    const std::string& version() const { return version_; }
    const std::vector<CoverageRule>& rules() const { return rules_; }
    std::uint64_t unmapped_count() const;
    std::vector<std::string> unmapped_labels() const;

private:
    void build_index();

    std::string version_;
    std::vector<CoverageRule> rules_;
    std::unordered_map<std::string, std::vector<size_t>> index_;
    mutable std::mutex mu_;
    mutable std::uint64_t unmapped_count_ = 0;
    mutable std::set<std::string> unmapped_;
};

// Applies the map to each non-rejected observable: sets stix_support and the unmapped flag.
void classify_dataset(std::vector<Observable>& dataset, const CoverageMap& map);

}  // namespace icsgap
