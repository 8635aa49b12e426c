#include <gtest/gtest.h>

#include <stdexcept>

#include "icsgap/attack_ingest.hpp"
#include "icsgap/extraction.hpp"
#include "icsgap/prompt.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;

namespace {

json csw_entry() {
    return {{"observable_value", "CSW"},
            {"artifact_details", "Described"},
            {"data_source", "ICS historian"},
            {"classification", "ICS Data Tag"},
            {"STIX_supported", "No"},
            {"proprietary_artifact", "Open/Standard Technology"},
            {"parser", "libiec61850"},
            {"notes", "Logical-node data attribute indicating circuit-breaker / switch control capability."}};
}

json csw_response() { return {{"observables", {csw_entry()}}}; }

const std::vector<ProcedureRecord>& fixture_records() {
    static const auto recs =
        extract_procedures(load_bundle((kDataDir / "attack" / "ics-attack-pinned.json").string())).records;
    return recs;
}

ExtractionBackendConfig lexicon_config() {
    ExtractionBackendConfig c;
    c.lexicon_path = kDataDir / "lexicon.json";
    return c;
}

}  // namespace

TEST(BackendConfig, LlmNeedsEndpointAndModel) {
    ExtractionBackendConfig c;
    c.kind = BackendKind::Llm;
    EXPECT_EQ(validate_config(c).size(), 2u);
    c.endpoint = "https://api.example.test/v1/chat/completions";
    c.model_name = "m";
    EXPECT_TRUE(validate_config(c).empty());
    c.endpoint = "ftp://x";
    EXPECT_EQ(validate_config(c).size(), 1u);
}

TEST(BackendConfig, LexiconForbidsEndpointAndModel) {
    auto c = lexicon_config();
    EXPECT_TRUE(validate_config(c).empty());
    c.endpoint = "https://x";
    c.model_name = "m";
    EXPECT_EQ(validate_config(c).size(), 2u);
    c = lexicon_config();
    c.max_retries = 11;
    EXPECT_EQ(validate_config(c).size(), 1u);
    EXPECT_THROW(make_backend(c), Error);
}

TEST(BackendConfig, KindNames) {
    EXPECT_EQ(parse_backend_kind("llm"), BackendKind::Llm);
    EXPECT_EQ(to_string(BackendKind::Lexicon), "lexicon");
    EXPECT_FALSE(parse_backend_kind("gpt"));
}

TEST(ValidateResponse, CswIsValid) { EXPECT_TRUE(validate_response(csw_response()).empty()); }

TEST(ValidateResponse, MissingProprietaryIsOneViolation) {
    auto r = csw_response();
    r["observables"][0].erase("proprietary_artifact");
    EXPECT_EQ(validate_response(r).size(), 1u);
}

TEST(ValidateResponse, PartiallyIsOneViolation) {
    auto r = csw_response();
    r["observables"][0]["STIX_supported"] = "Partially";
    auto v = validate_response(r);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("STIX_supported"), std::string::npos);
}

TEST(ValidateResponse, DropEachFieldGivesExactlyOneViolation) {
    const json entry = csw_entry();
    for (const auto& [field, _] : entry.items()) {
        auto r = csw_response();
        r["observables"][0].erase(field);
        auto v = validate_response(r);
        ASSERT_EQ(v.size(), 1u) << field;
        EXPECT_NE(v[0].find(field), std::string::npos);
    }
}

TEST(ValidateResponse, MissingIsNotAnExtractionLevel) {
    auto r = csw_response();
    r["observables"][0]["artifact_details"] = "Missing";
    EXPECT_EQ(validate_response(r).size(), 1u);
}

TEST(ValidateResponse, TopLevelShape) {
    EXPECT_EQ(validate_response(json::array()).size(), 1u);
    EXPECT_EQ(validate_response(json::object()).size(), 1u);
    EXPECT_EQ(validate_response(json{{"observables", 3}}).size(), 1u);
    EXPECT_TRUE(validate_response(json{{"observables", json::array()}}).empty());
}

TEST(RepairJson, FencesAndTrailingCommas) {
    auto j = repair_json("```json\n{\"observables\": [1, 2,],}\n```");
    ASSERT_TRUE(j);
    EXPECT_EQ((*j)["observables"].size(), 2u);
    auto s = repair_json(R"({"a": "keep ,] this",})");
    ASSERT_TRUE(s);
    EXPECT_EQ((*s)["a"], "keep ,] this");
    EXPECT_FALSE(repair_json("not json at all"));
}

TEST(ObservablesFromResponse, FlagsParaphrases) {
    ProcedureRecord rec{"relationship--x", "T0888", "Industroyer", "looks for CSW items", {}};
    auto r = csw_response();
    json para = csw_entry();
    para["observable_value"] = "circuit switch";
    r["observables"].push_back(para);
    auto obs = observables_from_response(r, rec, "llm:m");
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_FALSE(obs[0].has_flag(kFlagNonVerbatim));
    EXPECT_TRUE(obs[1].has_flag(kFlagNonVerbatim));
    EXPECT_EQ(obs[0].backend, "llm:m");
    EXPECT_EQ(obs[0].description_id, "relationship--x");
}

TEST(Prompt, SystemMessageContract) {
    ProcedureRecord a{"relationship--a", "T0888", "Industroyer", "first text", {}};
    ProcedureRecord b{"relationship--b", "T0800", "Triton", "second text", {}};
    auto pa = build_prompt(a), pb = build_prompt(b);
    EXPECT_NE(pa.system.find("Response format (return only this JSON)"), std::string::npos);
    EXPECT_EQ(pa.system, pb.system);
    EXPECT_NE(pa.user, pb.user);
    EXPECT_EQ(pa.user, "first text");
    EXPECT_EQ(prompt_version(), sha256_hex(system_prompt()));
    ProcedureRecord empty{"relationship--c", "T0800", "Triton", "", {}};
    EXPECT_EQ(build_prompt(empty).user, "");
}

TEST(LexiconBackend, IndustroyerT0888IncludesCsw) {
    auto backend = make_backend(lexicon_config());
    const ProcedureRecord* rec = nullptr;
    for (const auto& r : fixture_records())
        if (r.description_id == "relationship--62e818b8-38e6-42ff-9424-9a327332eb2a") rec = &r;
    ASSERT_NE(rec, nullptr);
    EXPECT_EQ(rec->technique_id, "T0888");
    EXPECT_EQ(rec->malware_name, "Industroyer");
    auto res = backend->extract(*rec);
    auto it = std::find_if(res.observables.begin(), res.observables.end(),
                           [](const Observable& o) { return o.observable_value == "CSW"; });
    ASSERT_NE(it, res.observables.end());
    EXPECT_EQ(it->classification, "ICS Data Tag");
    EXPECT_EQ(it->data_source, "ICS historian");
    EXPECT_EQ(it->stix_support.level, SupportLevel::No);
}

TEST(ExtractAll, WorkerCountDoesNotChangeOutput) {
    auto backend = make_backend(lexicon_config());
    auto one = extract_all(fixture_records(), *backend, 1);
    auto four = extract_all(fixture_records(), *backend, 4);
    EXPECT_EQ(dump_dataset(one.observables), dump_dataset(four.observables));
    EXPECT_TRUE(one.failures.empty());
    EXPECT_EQ(one.observables.size(), 593u);
}

namespace {

class ThrowingBackend : public ExtractionBackend {
public:
    std::string tag() const override { return "throwing"; }
    RecordExtraction extract(const ProcedureRecord& r) const override {
        if (r.technique_id == "T0800") throw std::runtime_error("boom");
        return {};
    }
};

}  // namespace

TEST(ExtractAll, BackendExceptionsBecomeRecordFailures) {
    std::vector<ProcedureRecord> recs{{"relationship--b", "T0800", "A", "x", {}},
                                      {"relationship--a", "T0801", "A", "y", {}},
                                      {"relationship--c", "T0800", "A", "z", {}}};
    ThrowingBackend backend;
    auto run = extract_all(recs, backend, 3);
    ASSERT_EQ(run.failures.size(), 2u);
    EXPECT_EQ(run.failures[0].description_id, "relationship--b");
    EXPECT_EQ(run.failures[0].reason, "backend-error");
    EXPECT_EQ(to_json(run.failures[1])["violations"][0], "boom");
}

TEST(ExtractAll, EmptyInput) {
    ThrowingBackend backend;
    auto run = extract_all({}, backend, 8);
    EXPECT_TRUE(run.observables.empty());
    EXPECT_TRUE(run.failures.empty());
}
