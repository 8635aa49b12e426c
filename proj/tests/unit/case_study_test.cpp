#include <gtest/gtest.h>

#include "icsgap/case_study.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;

namespace {

const CaseTables& shipped() {
    static const CaseTables t = case_study_tables(load_case_studies(kDataDir / "case_studies.json"));
    return t;
}

const CaseTableRow* find_row(const std::string& group, const std::string& technique) {
    for (const auto& t : shipped().tables)
        if (t.group_id == group)
            for (const auto& r : t.rows)
                if (r.technique == technique) return &r;
    return nullptr;
}

}  // namespace

TEST(CaseStudies, TritonWorkstationT0849) {
    auto r = find_row("triton-workstation", "T0849");
    ASSERT_NE(r, nullptr);
    EXPECT_EQ(r->stix, "Full - File:hashes");
    EXPECT_EQ(r->detail, "Actionable");
}

TEST(CaseStudies, IndustroyerSiprotecT0800) {
    const CaseTableRow* row = nullptr;
    for (const auto& t : shipped().tables)
        if (t.malware == "Industroyer" && t.title.find("SIPROTEC") != std::string::npos)
            for (const auto& r : t.rows)
                if (r.technique == "T0800") row = &r;
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row->stix, "No");
    EXPECT_EQ(row->detail, "Missing");
}

TEST(CaseStudies, EmptySetWarns) {
    auto t = case_study_tables({});
    EXPECT_TRUE(t.tables.empty());
    ASSERT_EQ(t.warnings.size(), 1u);
    EXPECT_EQ(render_case_tables_markdown(t).find("| Technique"), std::string::npos);
}

TEST(CaseStudies, ShippedShape) {
    EXPECT_EQ(shipped().tables.size(), 9u);
    EXPECT_EQ(shipped().row_count(), 53u);
    EXPECT_TRUE(shipped().warnings.empty());
    for (const auto& t : shipped().tables) EXPECT_TRUE(t.gaps.empty()) << t.group_id;
}

TEST(CaseStudies, MissingExpectedTechniqueIsAGap) {
    json j = {{"schema_version", 1},
              {"groups",
               {{{"id", "g"},
                 {"malware", "M"},
                 {"title", "T"},
                 {"expected_techniques", {"T0800", "T0801"}},
                 {"rows",
                  {{{"technique", "T0800"},
                    {"data_source", "d"},
                    {"artifact", "a"},
                    {"stix", {{"support", "No"}, {"object", nullptr}}},
                    {"artifact_details", "Missing"},
                    {"proprietary", "NA"},
                    {"parser", "NA"}}}}}}}};
    auto t = case_study_tables(parse_case_studies(j));
    ASSERT_EQ(t.tables.size(), 1u);
    EXPECT_EQ(t.tables[0].gaps, std::vector<std::string>{"T0801"});
    EXPECT_FALSE(t.warnings.empty());
    EXPECT_NE(render_case_tables_markdown(t).find("T0801"), std::string::npos);
}

TEST(CaseStudies, ErrorsCarryLocation) {
    json j = {{"schema_version", 1},
              {"groups",
               {{{"id", "g"},
                 {"malware", "M"},
                 {"title", "T"},
                 {"rows",
                  {{{"technique", "T0800"},
                    {"data_source", "d"},
                    {"artifact", "a"},
                    {"stix", {{"support", "No"}}},
                    {"artifact_details", "Sometimes"},
                    {"parser", "NA"}}}}}}}};
    try {
        parse_case_studies(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("groups[0].rows[0].artifact_details"), std::string::npos) << e.what();
    }
}

TEST(CaseStudies, StixCell) {
    EXPECT_EQ(render_stix_cell({SupportLevel::Full, "File:hashes"}), "Full - File:hashes");
    EXPECT_EQ(render_stix_cell({SupportLevel::Partial, "network-traffic"}), "Partial - network-traffic");
    EXPECT_EQ(render_stix_cell({SupportLevel::No, ""}), "No");
}

TEST(CaseStudies, JsonHasEveryRow) {
    auto j = case_tables_json(shipped());
    size_t rows = 0;
    for (const auto& t : j["tables"]) rows += t["rows"].size();
    EXPECT_EQ(rows, 53u);
}
