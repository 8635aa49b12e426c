#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

struct CaseStudyRow {
    std::string technique;
    std::string data_source;
    std::string artifact;
    StixSupport stix;
    DetailLevel detail = DetailLevel::Missing;
    std::optional<ProprietaryClass> proprietary;  // nullopt renders as NA
    std::string parser;                           // Yes, No, NA or "NA - host"
};

struct CaseStudyGroup {
    std::string id;
    std::string malware;
    std::string title;
    std::vector<std::string> expected_techniques;
    std::vector<CaseStudyRow> rows;
};

struct CaseStudySet {
    std::vector<CaseStudyGroup> groups;
};

CaseStudySet load_case_studies(const std::filesystem::path& path);
CaseStudySet parse_case_studies(const json& j);  // errors name groups[i].rows[k].field

// "Full - File:hashes", "Partial - <object>", "No".
std::string render_stix_cell(const StixSupport& s);

struct CaseTableRow {
    std::string technique;
    std::string data_source;
    std::string artifact;
    std::string stix;
    std::string detail;
    std::string proprietary;
    std::string parser;

    bool operator==(const CaseTableRow&) const = default;
};

struct CaseTable {
    std::string group_id;
    std::string malware;
    std::string title;
    std::vector<CaseTableRow> rows;
    std::vector<std::string> gaps;  // expected techniques without an entry
};

struct CaseTables {
    std::vector<CaseTable> tables;
    std::vector<std::string> warnings;

    size_t row_count() const;
};

CaseTables case_study_tables(const CaseStudySet& set);
std::string render_case_tables_markdown(const CaseTables& t);
ojson case_tables_json(const CaseTables& t);

}  // namespace icsgap
