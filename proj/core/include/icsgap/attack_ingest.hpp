#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

struct BundleSource {
    std::string location;  // file path or URL
    std::string retrieved_at;
    std::string sha256;
};

struct Bundle {
    std::vector<json> objects;
    std::string spec_version;
    BundleSource source;
};

// Accepts a file path or an http(s) URL.
Bundle load_bundle(const std::string& source, double timeout_s = 60.0);
Bundle parse_bundle(std::string_view text, BundleSource source = {});

struct MalwareFilter {
    bool include_revoked = false;
    bool include_deprecated = false;
    std::set<std::string> only_names;  // empty selects every malware object
};

struct ProcedureRecord {
    std::string description_id;
    std::string technique_id;
    std::string malware_name;
    std::string description_text;
    std::vector<std::string> citations;

    bool operator==(const ProcedureRecord&) const = default;
};

struct IngestResult {
    std::vector<ProcedureRecord> records;
    std::vector<std::string> warnings;
};

IngestResult extract_procedures(const Bundle& bundle, const MalwareFilter& filter = {});

// Collapses markdown links to their text, pulls "(Citation: X)" markers out in order,
// collapses whitespace.
std::pair<std::string, std::vector<std::string>> normalize_text(std::string_view raw);

ojson to_json(const ProcedureRecord& r);
ProcedureRecord record_from_json(const json& j);
std::string dump_records(const std::vector<ProcedureRecord>& records);
std::vector<ProcedureRecord> read_records(const std::filesystem::path& path);

// Names and aliases of every malware and tool object, lower-cased.
std::set<std::string> malware_dictionary(const Bundle& bundle);

ProvenanceIndex provenance_index(const std::vector<ProcedureRecord>& records);

// ATT&CK external id of a STIX object (e.g. T0888, S0604), empty when absent.
std::string attack_external_id(const json& object);

}  // namespace icsgap
