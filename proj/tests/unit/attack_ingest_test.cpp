#include <gtest/gtest.h>
#include <httplib.h>

#include <algorithm>
#include <random>
#include <set>
#include <thread>

#include "icsgap/attack_ingest.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;
using icsgap::test::oracles;

namespace {

json malware(const std::string& id, const std::string& name, bool revoked = false) {
    json j = {{"type", "malware"}, {"id", id}, {"name", name}, {"spec_version", "2.1"}};
    if (revoked) j["revoked"] = true;
    return j;
}

json technique(const std::string& id, const std::string& tid, bool deprecated = false) {
    json j = {{"type", "attack-pattern"},
              {"id", id},
              {"name", tid},
              {"external_references", {{{"source_name", "mitre-attack"}, {"external_id", tid}}}}};
    if (deprecated) j["x_mitre_deprecated"] = true;
    return j;
}

json uses(const std::string& id, const std::string& src, const std::string& dst, const std::string& desc,
          bool revoked = false) {
    json j = {{"type", "relationship"}, {"id", id},         {"relationship_type", "uses"},
              {"source_ref", src},      {"target_ref", dst}, {"description", desc}};
    if (revoked) j["revoked"] = true;
    return j;
}

Bundle bundle_of(const json& objects) {
    json b = {{"type", "bundle"}, {"id", "bundle--x"}, {"objects", objects}};
    return parse_bundle(b.dump());
}

const Bundle& fixture() {
    static const Bundle b = load_bundle((kDataDir / "attack" / "ics-attack-pinned.json").string());
    return b;
}

}  // namespace

TEST(LoadBundle, FixtureHasTechniquesAndMalware) {
    const auto& b = fixture();
    size_t ap = 0, mw = 0;
    for (const auto& o : b.objects) {
        ap += o["type"] == "attack-pattern";
        mw += o["type"] == "malware";
    }
    EXPECT_GT(ap, 0u);
    EXPECT_GT(mw, 0u);
    EXPECT_EQ(b.spec_version, "2.1");
    EXPECT_EQ(b.source.sha256.size(), 64u);
}

TEST(LoadBundle, EmptyObjectsList) { EXPECT_TRUE(parse_bundle(R"({"type":"bundle","objects":[]})").objects.empty()); }

TEST(LoadBundle, FiveObjectSyntheticMatchesNaiveScan) {
    std::string text = R"({"type":"bundle","objects":[
        {"type":"malware","id":"malware--1","name":"A"},
        {"type":"malware","id":"malware--2","name":"B"},
        {"type":"attack-pattern","id":"attack-pattern--1"},
        {"type":"identity","id":"identity--1"},
        {"type":"relationship","id":"relationship--1","relationship_type":"uses","source_ref":"malware--1","target_ref":"attack-pattern--1"}]})";
    size_t naive = 0;
    for (size_t p = text.find("\"id\":"); p != std::string::npos; p = text.find("\"id\":", p + 1)) ++naive;
    EXPECT_EQ(parse_bundle(text).objects.size(), naive);
    EXPECT_EQ(naive, 5u);
}

TEST(LoadBundle, Errors) {
    EXPECT_THROW(parse_bundle("{not json"), Error);
    EXPECT_THROW(parse_bundle(R"({"type":"bundle"})"), Error);
    EXPECT_THROW(parse_bundle(R"({"objects":[{"id":"x"}]})"), Error);
    EXPECT_THROW(parse_bundle(R"({"objects":[{"id":"r","type":"relationship","source_ref":"a"}]})"), Error);
    EXPECT_THROW(load_bundle("/nonexistent/bundle.json"), Error);
}

TEST(LoadBundle, FromHttpUrl) {
    httplib::Server svr;
    svr.Get("/bundle.json", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"type":"bundle","spec_version":"2.1","objects":[{"type":"malware","id":"malware--1"}]})",
                        "application/json");
    });
    svr.Get("/missing.json", [](const httplib::Request&, httplib::Response& res) { res.status = 404; });
    int port = svr.bind_to_any_port("127.0.0.1");
    std::thread t([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);
    auto b = load_bundle(base + "/bundle.json", 5);
    EXPECT_EQ(b.objects.size(), 1u);
    EXPECT_EQ(b.source.location, base + "/bundle.json");
    EXPECT_THROW(load_bundle(base + "/missing.json", 5), Error);
    svr.stop();
    t.join();
}

TEST(ExtractProcedures, FixtureCounts) {
    auto res = extract_procedures(fixture());
    std::set<std::string> techs, mal;
    for (const auto& r : res.records) {
        techs.insert(r.technique_id);
        mal.insert(r.malware_name);
    }
    EXPECT_EQ(res.records.size(), 196u);
    EXPECT_EQ(techs.size(), 79u);
    EXPECT_EQ(mal.size(), 22u);
}

TEST(ExtractProcedures, NoRelationshipsGivesEmpty) {
    auto b = bundle_of({malware("malware--1", "A"), technique("attack-pattern--1", "T0800")});
    EXPECT_TRUE(extract_procedures(b).records.empty());
}

TEST(ExtractProcedures, RevokedRelationshipExcluded) {
    auto b = bundle_of({malware("malware--1", "A"), technique("attack-pattern--1", "T0800"),
                        technique("attack-pattern--2", "T0801"),
                        uses("relationship--1", "malware--1", "attack-pattern--1", "one"),
                        uses("relationship--2", "malware--1", "attack-pattern--2", "two"),
                        uses("relationship--3", "malware--1", "attack-pattern--2", "three", true)});
    auto res = extract_procedures(b);
    ASSERT_EQ(res.records.size(), 2u);
    MalwareFilter all;
    all.include_revoked = true;
    EXPECT_EQ(extract_procedures(b, all).records.size(), 3u);
}

TEST(ExtractProcedures, InactiveEndpointsAndNonMalwareSourcesExcluded) {
    json tool = {{"type", "tool"}, {"id", "tool--1"}, {"name", "T"}};
    auto b = bundle_of({malware("malware--1", "A", true), malware("malware--2", "B"), tool,
                        technique("attack-pattern--1", "T0800", true), technique("attack-pattern--2", "T0801"),
                        uses("relationship--1", "malware--1", "attack-pattern--2", "x"),
                        uses("relationship--2", "malware--2", "attack-pattern--1", "x"),
                        uses("relationship--3", "tool--1", "attack-pattern--2", "x"),
                        uses("relationship--4", "malware--2", "attack-pattern--2", "   "),
                        uses("relationship--5", "malware--2", "attack-pattern--2", "kept")});
    auto res = extract_procedures(b);
    ASSERT_EQ(res.records.size(), 1u);
    EXPECT_EQ(res.records[0].description_id, "relationship--5");
    MalwareFilter only;
    only.only_names = {"A"};
    EXPECT_TRUE(extract_procedures(b, only).records.empty());
}

TEST(ExtractProcedures, DanglingRefsWarnAndSkip) {
    auto b = bundle_of({malware("malware--1", "A"), technique("attack-pattern--1", "T0800"),
                        uses("relationship--1", "malware--9", "attack-pattern--1", "x"),
                        uses("relationship--2", "malware--1", "attack-pattern--9", "x"),
                        uses("relationship--3", "intrusion-set--9", "attack-pattern--1", "x")});
    auto res = extract_procedures(b);
    EXPECT_TRUE(res.records.empty());
    EXPECT_EQ(res.warnings.size(), 2u);
}

TEST(ExtractProcedures, OrderIndependentOfObjectOrder) {
    json objs = fixture().objects;
    std::mt19937_64 rng(7);
    std::vector<json> shuffled(objs.begin(), objs.end());
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto a = extract_procedures(fixture()).records;
    auto b = extract_procedures(bundle_of(shuffled)).records;
    EXPECT_EQ(a, b);
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end(), [](const auto& x, const auto& y) {
        return std::tie(x.technique_id, x.description_id) < std::tie(y.technique_id, y.description_id);
    }));
}

TEST(ExtractProcedures, CountMatchesBruteForceScan) {
    // Independent scan over the raw JSON objects.
    std::map<std::string, json> by_id;
    for (const auto& o : fixture().objects) by_id[o["id"]] = o;
    auto active = [](const json& o) { return !o.value("revoked", false) && !o.value("x_mitre_deprecated", false); };
    size_t expected = 0;
    std::set<std::string> attack_ids;
    for (const auto& [id, o] : by_id)
        if (o["type"] == "attack-pattern") attack_ids.insert(attack_external_id(o));
    for (const auto& [id, o] : by_id) {
        if (o["type"] != "relationship" || o["relationship_type"] != "uses" || !active(o)) continue;
        auto s = by_id.find(o["source_ref"]), t = by_id.find(o["target_ref"]);
        if (s == by_id.end() || t == by_id.end()) continue;
        if (s->second["type"] != "malware" || t->second["type"] != "attack-pattern") continue;
        if (!active(s->second) || !active(t->second)) continue;
        if (normalize_text(o.value("description", "")).first.empty()) continue;
        ++expected;
    }
    auto res = extract_procedures(fixture());
    EXPECT_EQ(res.records.size(), expected);
    std::set<std::string> ids;
    for (const auto& r : res.records) {
        EXPECT_TRUE(attack_ids.count(r.technique_id)) << r.technique_id;
        EXPECT_TRUE(ids.insert(r.description_id).second);
        EXPECT_FALSE(r.description_text.empty());
        EXPECT_EQ(r.description_text.find("(Citation:"), std::string::npos);
        EXPECT_EQ(r.description_text.find("]("), std::string::npos);
    }
}

TEST(NormalizeText, ProcedureStyleDescription) {
    auto [clean, cites] = normalize_text(
        "[Industroyer](https://attack.mitre.org/software/S0604) sends ... (Citation: ESET Industroyer)");
    EXPECT_EQ(clean, "Industroyer sends ...");
    EXPECT_EQ(cites, std::vector<std::string>{"ESET Industroyer"});
}

TEST(NormalizeText, Empty) {
    auto [clean, cites] = normalize_text("");
    EXPECT_EQ(clean, "");
    EXPECT_TRUE(cites.empty());
}

TEST(NormalizeText, TwoCitationsInOrder) {
    auto [clean, cites] = normalize_text("First (Citation: Alpha) then second.(Citation: Beta)");
    EXPECT_EQ(cites, (std::vector<std::string>{"Alpha", "Beta"}));
    EXPECT_EQ(clean, "First then second.");
}

TEST(NormalizeText, MatchesReferenceModel) {
    for (const auto& c : oracles()["normalize_text"]) {
        auto [clean, cites] = normalize_text(c["raw"].get<std::string>());
        EXPECT_EQ(clean, c["clean"].get<std::string>()) << c["raw"];
        EXPECT_EQ(cites, c["citations"].get<std::vector<std::string>>()) << c["raw"];
    }
}

TEST(Records, JsonLinesRoundTrip) {
    auto recs = extract_procedures(fixture()).records;
    auto text = dump_records(recs);
    std::vector<ProcedureRecord> back;
    for (const auto& j : parse_ndjson(text)) back.push_back(record_from_json(j));
    EXPECT_EQ(back, recs);
    EXPECT_EQ(text.rfind("{\"description_id\":", 0), 0u);
    EXPECT_THROW(record_from_json(json{{"description_id", "x"}}), Error);
}

TEST(MalwareDictionary, NamesAndAliasesLowerCased) {
    json m = malware("malware--1", "Industroyer");
    m["x_mitre_aliases"] = {"CRASHOVERRIDE", "Industroyer"};
    json t = {{"type", "tool"}, {"id", "tool--1"}, {"name", "Mimikatz"}, {"aliases", {"mimi"}}};
    auto names = malware_dictionary(bundle_of({m, t}));
    EXPECT_EQ(names, (std::set<std::string>{"crashoverride", "industroyer", "mimikatz", "mimi"}));
}
