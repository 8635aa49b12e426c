#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "icsgap/attack_ingest.hpp"
#include "icsgap/lexicon.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;
using icsgap::test::oracles;

namespace {

const Lexicon& shipped() {
    static const Lexicon lx = Lexicon::load(kDataDir / "lexicon.json");
    return lx;
}

ProcedureRecord record(std::string text) {
    return {"relationship--r1", "T0888", "Industroyer", std::move(text), {}};
}

}  // namespace

TEST(Lexicon, ShippedLoads) {
    EXPECT_EQ(shipped().version(), "1.0.0");
    EXPECT_GT(shipped().pattern_count(), 20u);
}

TEST(Lexicon, CtlTagsAreDataTags) {
    auto obs = shipped().extract(record("looks for items with the following strings: ctlSelOn, ctlOperOn"));
    ASSERT_EQ(obs.size(), 2u);
    for (const auto& o : obs) {
        EXPECT_EQ(o.classification, "ICS Data Tag");
        EXPECT_EQ(o.stix_support.level, SupportLevel::No);
        EXPECT_EQ(o.backend, "lexicon");
    }
    std::set<std::string> values{obs[0].observable_value, obs[1].observable_value};
    EXPECT_EQ(values, (std::set<std::string>{"ctlSelOn", "ctlOperOn"}));
}

TEST(Lexicon, EmptyText) { EXPECT_TRUE(shipped().extract(record("")).empty()); }

TEST(Lexicon, NothingInPlainSentence) { EXPECT_TRUE(shipped().extract(record("The malware is sophisticated.")).empty()); }

TEST(Lexicon, UdpPortSentence) {
    auto obs = shipped().extract(record("connects to UDP port 50000 and sends an 18-byte packet"));
    ASSERT_EQ(obs.size(), 1u);
    EXPECT_EQ(obs[0].observable_value, "50000");
    EXPECT_EQ(obs[0].data_source, "Network traffic");
}

TEST(Lexicon, HashAndIpv4) {
    std::string sha(64, 'a');
    sha.replace(0, 6, "0f1e2d");
    auto obs = shipped().extract(record("drops a file with hash " + sha + " and beacons to 192.168.10.5 daily"));
    ASSERT_EQ(obs.size(), 2u);
    std::set<std::string> classes{obs[0].classification, obs[1].classification};
    EXPECT_EQ(classes, (std::set<std::string>{"File hash", "IPv4 address"}));
}

TEST(Lexicon, EarlierPatternClaimsSpan) {
    // The URL claims its span, so the domain pattern inside it is dropped.
    auto m = shipped().match("fetches http://evil.example.com/payload.exe now");
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].pattern_id, "url");
}

TEST(Lexicon, TokensAreCaseSensitiveAndWordBounded) {
    EXPECT_TRUE(shipped().match("CTLSELON xctlSelOn ctlSelOnx").empty());
}

TEST(Lexicon, LongestTokenWinsAtOffset) {
    json j = {{"lexicon_version", "t"},
              {"patterns",
               {{{"id", "p"},
                 {"kind", "tokens"},
                 {"tokens", {"CSW", "CSWI", {{"token", "XCBR"}, {"notes", "breaker"}}}},
                 {"tuple",
                  {{"classification", "ICS Data Tag"},
                   {"data_source", "ICS historian"},
                   {"stix_supported", "No"},
                   {"artifact_details", "Described"},
                   {"proprietary_artifact", "Open/Standard Technology"}}}}}}};
    auto lx = Lexicon::from_json(j);
    auto m = lx.match("CSWI and XCBR and CSW");
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m[0].value, "CSWI");
    EXPECT_EQ(m[1].tuple["notes"], "breaker");
    EXPECT_EQ(m[2].offset, 18u);
}

TEST(Lexicon, RejectsMalformedPatternFiles) {
    EXPECT_THROW(Lexicon::from_json(json{{"patterns", json::array()}}), Error);
    json bad_re = {{"lexicon_version", "t"},
                   {"patterns", {{{"id", "x"}, {"kind", "regex"}, {"pattern", "("}, {"tuple", json::object()}}}}};
    EXPECT_THROW(Lexicon::from_json(bad_re), Error);
}

TEST(Lexicon, ValuesAreSubstringsWithProvenance) {
    auto b = load_bundle((kDataDir / "attack" / "ics-attack-pinned.json").string());
    for (const auto& r : extract_procedures(b).records) {
        for (const auto& o : shipped().extract(r)) {
            EXPECT_NE(r.description_text.find(o.observable_value), std::string::npos);
            EXPECT_EQ(o.description_id, r.description_id);
            EXPECT_EQ(o.technique_num, r.technique_id);
            EXPECT_EQ(o.related_malware, r.malware_name);
            EXPECT_NE(o.artifact_details, DetailLevel::Missing);
        }
    }
}

TEST(Lexicon, FixtureMatchesReferenceModel) {
    auto b = load_bundle((kDataDir / "attack" / "ics-attack-pinned.json").string());
    auto recs = extract_procedures(b).records;
    std::vector<std::string> lines;
    for (const auto& r : recs)
        for (const auto& o : shipped().extract(r))
            lines.push_back(r.description_id + "\t" + o.observable_value + "\t" + o.classification);
    std::sort(lines.begin(), lines.end());
    const auto& want = oracles()["lexicon_fixture"];
    EXPECT_EQ(recs.size(), want["records"].get<size_t>());
    EXPECT_EQ(lines.size(), want["matches"].get<size_t>());
    EXPECT_EQ(sha256_hex(join(lines, "\n") + "\n"), want["sha256"].get<std::string>());
}

TEST(ObservableFromTuple, AcceptsEitherSupportKeyAndRejectsBadEnums) {
    auto r = record("x");
    json t = {{"classification", "File hash"},
              {"data_source", "Endpoint (EDR) logs"},
              {"artifact_details", "Actionable"},
              {"stix_supported", "Full: File:hashes"},
              {"proprietary_artifact", "Open/Standard Technology"},
              {"parser", 3}};
    auto o = observable_from_tuple("abc", t, r, "lexicon");
    EXPECT_EQ(o.stix_support.level, SupportLevel::Full);
    EXPECT_FALSE(o.parser.has_value());
    t["artifact_details"] = "Sort of";
    EXPECT_THROW(observable_from_tuple("abc", t, r, "lexicon"), Error);
}
