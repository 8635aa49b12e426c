#include <gtest/gtest.h>
#include <httplib.h>

#include <thread>

#include "icsgap/advisory.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;
using icsgap::test::oracles;

namespace {

AdvisoryRecord network(RulesAvailable r, TechDetail t, ParserAvailability p) {
    AdvisoryRecord a;
    a.icsa_id = "ICSA-00-000-00";
    a.cves = {"CVE-2023-0001"};
    a.protocol = "Modbus";
    a.rules_available = r;
    a.tech_detail = t;
    a.proprietary = ProprietaryClass::OpenStandard;
    a.parsers = p;
    return a;
}

const std::vector<AdvisoryRecord>& fixture() {
    static const auto v = load_advisories(kDataDir / "advisories.json");
    return v;
}

const AdvisoryRecord& by_id(const std::string& id) {
    for (const auto& r : fixture())
        if (r.icsa_id == id) return r;
    throw std::runtime_error("no advisory " + id);
}

}  // namespace

TEST(Advisories, FixtureLoadsSorted) {
    ASSERT_EQ(fixture().size(), 9u);
    for (size_t i = 1; i < fixture().size(); ++i) EXPECT_LT(fixture()[i - 1].icsa_id, fixture()[i].icsa_id);
}

TEST(Advisories, FixtureTallies) {
    auto t = tally(fixture());
    EXPECT_EQ(t.total, 9u);
    EXPECT_EQ(t.with_rules, 2u);
    EXPECT_EQ(t.no_tech_detail, 4u);
    EXPECT_EQ(t.partial_tech_detail, 3u);
}

TEST(Advisories, CipRowMeetsBoth) {
    auto v = score_advisory(by_id("ICSA-23-193-01"));
    EXPECT_TRUE(v.requirement1);
    EXPECT_TRUE(v.requirement2);
    EXPECT_EQ(v.label(), "Requirement-1 met; Requirement-2 met");
}

TEST(Advisories, PcomRowUnprotectable) {
    auto v = score_advisory(by_id("ICSA-23-320-11"));
    EXPECT_TRUE(v.unprotectable());
    EXPECT_EQ(v.label(), "unprotectable-by-detection");
}

TEST(Advisories, HostBasedShortCircuitsParsers) {
    AdvisoryRecord a = network(RulesAvailable::No, TechDetail::Yes, ParserAvailability::NA);
    a.protocol = std::string(kHostProtocol);
    a.proprietary.reset();
    EXPECT_TRUE(validate_advisory(a).empty());
    EXPECT_TRUE(score_advisory(a).requirement2);
}

TEST(Advisories, YesExternalCountsAsRules) {
    EXPECT_TRUE(score_advisory(network(RulesAvailable::YesExternal, TechDetail::No, ParserAvailability::No)).requirement1);
}

TEST(Advisories, TruthTableMatchesOracle) {
    const auto& table = oracles()["advisory_truth_table"];
    ASSERT_EQ(table.size(), 108u);
    for (const auto& row : table) {
        AdvisoryRecord a;
        a.rules_available = *parse_rules_available(row["rules"].get<std::string>());
        a.tech_detail = *parse_tech_detail(row["tech"].get<std::string>());
        a.parsers = *parse_parser_availability(row["parsers"].get<std::string>());
        std::string proto = row["protocol"];
        a.protocol = proto == "NA-host" ? std::string(kHostProtocol) : "Proto";
        if (proto == "open") a.proprietary = ProprietaryClass::OpenStandard;
        if (proto == "undocumented") a.proprietary = ProprietaryClass::ProprietaryUndocumented;
        auto v = score_advisory(a);
        EXPECT_EQ(v.requirement1, row["r1"].get<bool>()) << row.dump();
        EXPECT_EQ(v.requirement2, row["r2"].get<bool>()) << row.dump();
    }
}

TEST(Advisories, Invariants) {
    auto a = network(RulesAvailable::No, TechDetail::No, ParserAvailability::NA);
    EXPECT_EQ(validate_advisory(a).size(), 1u);
    a.parsers = ParserAvailability::No;
    a.cves = {"CVE-23-1"};
    EXPECT_EQ(validate_advisory(a).size(), 1u);
    a.cves = {"CVE-2023-12345"};
    a.protocol = std::string(kHostProtocol);
    EXPECT_EQ(validate_advisory(a).size(), 2u);
}

TEST(Advisories, EmptyFileIsEmptyList) {
    test::TempDir dir;
    write_file_atomic(dir / "a.json", "");
    EXPECT_TRUE(load_advisories(dir / "a.json").empty());
}

TEST(Advisories, MalformedCveNamesField) {
    json doc = json::parse(read_file(kDataDir / "advisories.json"));
    auto& rows = doc.is_object() ? doc["advisories"] : doc;
    rows[2]["cves"] = {"CVE-BAD"};
    try {
        parse_advisories(doc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("advisories[2].cves"), std::string::npos) << e.what();
    }
}

TEST(Advisories, JsonRoundTripAndScorecard) {
    for (const auto& r : fixture()) EXPECT_EQ(to_json(advisory_from_json(json::parse(to_json(r).dump()))), to_json(r));
    auto card = render_scorecard(fixture());
    EXPECT_NE(card.find("with rules: 2"), std::string::npos);
    auto j = scorecard_json(fixture());
    EXPECT_EQ(j["advisories"].size(), 9u);
}

TEST(Registry, KnownProtocols) {
    auto reg = ParserRegistry::load(kDataDir / "parser_registry.json");
    auto tri = reg.lookup("Tristation");
    ASSERT_TRUE(tri.found);
    EXPECT_EQ(tri.entry->parser_available, ParserStatus::No);
    auto mms = reg.lookup("IEC 61850 MMS");
    ASSERT_TRUE(mms.found);
    EXPECT_EQ(mms.entry->parser_available, ParserStatus::Yes);
    auto pb = reg.lookup("profibus");
    ASSERT_TRUE(pb.found);
    EXPECT_EQ(pb.entry->parser_available, ParserStatus::Qualified);
    EXPECT_EQ(pb.entry->note, "No, but Profinet does");
    EXPECT_TRUE(reg.lookup("iec-104").found);
    EXPECT_FALSE(reg.lookup("Unheard Of").found);
}

TEST(Registry, NormalizedNamesMustBeUniqueAcrossEntries) {
    json j = {{"entries",
               {{{"protocol", "S7Comm"}, {"aliases", {"S7", "s7"}}, {"parser_available", "Yes"}},
                {{"protocol", "Other"}, {"parser_available", "No"}}}}};
    EXPECT_NO_THROW(ParserRegistry::from_json(j));
    j["entries"][1]["aliases"] = {"S-7"};
    EXPECT_NO_THROW(ParserRegistry::from_json(j));
    j["entries"][1]["aliases"] = {"s7"};
    EXPECT_THROW(ParserRegistry::from_json(j), Error);
    EXPECT_EQ(ParserRegistry::normalize("  IEC-60870-5-104 "), "iec 60870 5 104");
}

TEST(Kev, ParseAndMismatch) {
    json cat = {{"vulnerabilities", {{{"cveID", "CVE-2023-0001"}}, {{"cveID", "CVE-2023-0002"}}}}};
    auto kev = parse_kev(cat);
    EXPECT_EQ(kev.size(), 2u);
    auto a = network(RulesAvailable::No, TechDetail::No, ParserAvailability::No);
    EXPECT_EQ(kev_mismatches({a}, kev).size(), 1u);
    a.in_kev = true;
    EXPECT_TRUE(kev_mismatches({a}, kev).empty());
    EXPECT_THROW(parse_kev(json::object()), Error);
}

TEST(Kev, FetchCachesAndFallsBack) {
    httplib::Server svr;
    svr.Get("/kev.json", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"vulnerabilities":[{"cveID":"CVE-2023-0001"}]})", "application/json");
    });
    int port = svr.bind_to_any_port("127.0.0.1");
    std::thread t([&] { svr.listen_after_bind(); });
    svr.wait_until_ready();
    test::TempDir dir;
    auto cache = dir / "kev.json";
    auto kev = fetch_kev("http://127.0.0.1:" + std::to_string(port) + "/kev.json", cache, 5);
    EXPECT_EQ(kev.count("CVE-2023-0001"), 1u);
    svr.stop();
    t.join();
    EXPECT_TRUE(std::filesystem::exists(cache));
    auto offline = fetch_kev("http://127.0.0.1:1/kev.json", cache, 1);
    EXPECT_EQ(offline, kev);
    EXPECT_THROW(fetch_kev("http://127.0.0.1:1/kev.json", dir / "none.json", 1), Error);
}
