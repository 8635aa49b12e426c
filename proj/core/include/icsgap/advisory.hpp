#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

inline constexpr std::string_view kHostProtocol = "NA-host";

enum class RulesAvailable { Yes, YesExternal, No };
enum class TechDetail { Yes, Partial, No };
enum class ParserAvailability { Yes, Partial, No, NA };

std::string_view to_string(RulesAvailable r);
std::string_view to_string(TechDetail t);
std::string_view to_string(ParserAvailability p);
std::optional<RulesAvailable> parse_rules_available(std::string_view s);
std::optional<TechDetail> parse_tech_detail(std::string_view s);
std::optional<ParserAvailability> parse_parser_availability(std::string_view s);

inline constexpr RulesAvailable kAllRules[] = {RulesAvailable::Yes, RulesAvailable::YesExternal, RulesAvailable::No};
inline constexpr TechDetail kAllTechDetail[] = {TechDetail::Yes, TechDetail::Partial, TechDetail::No};
inline constexpr ParserAvailability kAllParsers[] = {ParserAvailability::Yes, ParserAvailability::Partial,
                                                     ParserAvailability::No, ParserAvailability::NA};

struct AdvisoryRecord {
    std::string icsa_id;
    std::vector<std::string> cves;
    std::string vendor;
    std::string protocol;  // kHostProtocol for host-based vulnerabilities
    RulesAvailable rules_available = RulesAvailable::No;
    TechDetail tech_detail = TechDetail::No;
    std::optional<ProprietaryClass> proprietary;  // nullopt is NA
    ParserAvailability parsers = ParserAvailability::NA;
    bool in_kev = false;
    std::string note;

    bool host_based() const { return protocol == kHostProtocol; }
};

std::vector<std::string> validate_advisory(const AdvisoryRecord& r);
AdvisoryRecord advisory_from_json(const json& j);  // throws Error naming the field
ojson to_json(const AdvisoryRecord& r);

// Sorted by icsa_id. Errors carry "advisories[i].field".
std::vector<AdvisoryRecord> load_advisories(const std::filesystem::path& path);
std::vector<AdvisoryRecord> parse_advisories(const json& j);

struct ReadinessVerdict {
    bool requirement1 = false;  // detection rules or analytics available
    bool requirement2 = false;  // enough technical detail plus a way to observe it
    bool unprotectable() const { return !requirement1 && !requirement2; }
    std::string label() const;
    bool operator==(const ReadinessVerdict&) const = default;
};

ReadinessVerdict score_advisory(const AdvisoryRecord& r);

struct AdvisoryTallies {
    size_t total = 0;
    size_t with_rules = 0;
    size_t no_tech_detail = 0;
    size_t partial_tech_detail = 0;
    size_t full_tech_detail = 0;
    size_t requirement1 = 0;
    size_t requirement2 = 0;
    size_t unprotectable = 0;
    size_t host_based = 0;
    size_t in_kev = 0;
};

AdvisoryTallies tally(const std::vector<AdvisoryRecord>& records);
std::string render_scorecard(const std::vector<AdvisoryRecord>& records);
ojson scorecard_json(const std::vector<AdvisoryRecord>& records);

enum class ParserStatus { Yes, No, Qualified };

std::string_view to_string(ParserStatus s);

struct ParserRegistryEntry {
    std::string protocol;
    std::vector<std::string> aliases;
    ParserStatus parser_available = ParserStatus::No;
    std::string note;
    std::string source_context;
};

struct RegistryLookup {
    bool found = false;
    const ParserRegistryEntry* entry = nullptr;
};

class ParserRegistry {
public:
    static ParserRegistry load(const std::filesystem::path& path);
    static ParserRegistry from_json(const json& j);

    // Case-insensitive, whitespace- and hyphen-insensitive match on names and aliases.
    RegistryLookup lookup(std::string_view protocol) const;
    const std::vector<ParserRegistryEntry>& entries() const { return entries_; }

    static std::string normalize(std::string_view name);

private:
    std::vector<ParserRegistryEntry> entries_;
};

// CVE ids from a KEV catalog document ({"vulnerabilities":[{"cveID":...}]}).
std::set<std::string> parse_kev(const json& catalog);

// Fetches the catalog and stores it at cache_path; falls back to the cached copy when
// the fetch fails. Throws when neither is available.
std::set<std::string> fetch_kev(const std::string& url, const std::filesystem::path& cache_path,
                                double timeout_s = 30.0);

// Advisories whose in_kev flag disagrees with the catalog.
std::vector<std::string> kev_mismatches(const std::vector<AdvisoryRecord>& records, const std::set<std::string>& kev);

}  // namespace icsgap
