#include <gtest/gtest.h>

#include "icsgap/stix_extensions.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kExtensionsDir;
using icsgap::test::oracles;

namespace {

const std::vector<IcsScoSchema>& schemas() {
    static const auto s = load_schemas(kExtensionsDir);
    return s;
}

const IcsScoSchema& schema(const std::string& name) {
    for (const auto& s : schemas())
        if (s.name == name) return s;
    throw std::runtime_error("no schema " + name);
}

}  // namespace

TEST(StixExtensions, FiveSchemasLoad) {
    ASSERT_EQ(schemas().size(), 5u);
    std::vector<std::string> names;
    for (const auto& s : schemas()) names.push_back(s.name);
    auto expected = ics_sco_names();
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(names, expected);
}

TEST(StixExtensions, IdsMatchOracle) {
    const auto& o = oracles()["uuid5"];
    EXPECT_EQ(identity_id(), o["identity"].get<std::string>());
    for (const auto& s : schemas())
        EXPECT_EQ(extension_definition_id(s), o["extension_definitions"][s.name].get<std::string>()) << s.name;
}

TEST(StixExtensions, DigestExampleIsCrc32) {
    const auto& s = schema("plc-program-digest");
    EXPECT_EQ(s.example["algorithm"], "crc32");
    auto inst = make_instance(s, s.example, "example");
    EXPECT_EQ(inst["type"], "plc-program-digest");
    EXPECT_TRUE(validate_instance(json::parse(inst.dump()), s).empty());
    EXPECT_THROW(make_instance(s, {{"algorithm", "md5"}, {"digest_value", "00"}}, "x"), Error);
    EXPECT_THROW(make_instance(s, {{"algorithm", "crc32"}, {"digest_value", "zz"}}, "x"), Error);
    EXPECT_THROW(make_instance(s, {{"algorithm", "crc32"}}, "x"), Error);
}

TEST(StixExtensions, EmptyBundle) {
    auto b = emit_extension_bundle({});
    EXPECT_TRUE(b["objects"].empty());
    EXPECT_TRUE(parse_extension_bundle(json::parse(b.dump())).empty());
}

TEST(StixExtensions, EmitIsDeterministic) {
    EXPECT_EQ(emit_extension_bundle(schemas()).dump(2), emit_extension_bundle(load_schemas(kExtensionsDir)).dump(2));
}

TEST(StixExtensions, EmitParseEmitFixedPoint) {
    auto first = emit_extension_bundle(schemas());
    auto parsed = parse_extension_bundle(json::parse(first.dump()));
    EXPECT_EQ(parsed, schemas());
    EXPECT_EQ(emit_extension_bundle(parsed).dump(), first.dump());
    EXPECT_TRUE(validate_extension_bundle(json::parse(first.dump())).empty());
}

TEST(StixExtensions, BundleValidationFindsBrokenInstance) {
    json b = json::parse(emit_extension_bundle(schemas()).dump());
    for (auto& o : b["objects"])
        if (o["type"] == "ics-data-tag") o.erase("tag_name");
    EXPECT_FALSE(validate_extension_bundle(b).empty());
}

TEST(StixExtensions, CswBecomesDataTag) {
    auto r = represent_observable(test::csw_observable(), schemas());
    ASSERT_TRUE(r.instance) << r.reason;
    EXPECT_EQ(r.schema, "ics-data-tag");
    EXPECT_EQ((*r.instance)["tag_name"], "CSW");
    EXPECT_EQ((*r.instance)["source_system"], "ICS historian");
    EXPECT_TRUE(validate_instance(json::parse(r.instance->dump()), schema("ics-data-tag")).empty());
}

TEST(StixExtensions, FullSupportNeedsNoExtension) {
    auto o = test::make_observable("d41d8cd98f00b204e9800998ecf8427e", "File hash");
    o.stix_support = {SupportLevel::Full, "file:hashes"};
    auto r = represent_observable(o, schemas());
    EXPECT_FALSE(r.instance);
    EXPECT_EQ(r.reason, "native SCO exists");
}

TEST(StixExtensions, TriStationDownloadBecomesProtocolMessage) {
    auto o = test::make_observable("program download", "TriStation command");
    o.stix_support = {SupportLevel::No, ""};
    o.notes = "TriStation protocol function used to write the program.";
    auto r = represent_observable(o, schemas());
    ASSERT_TRUE(r.instance) << r.reason;
    EXPECT_EQ(r.schema, "ics-protocol-message");
    EXPECT_EQ((*r.instance)["protocol_name"], "TriStation");
    EXPECT_EQ((*r.instance)["function"], "program download");
}

TEST(StixExtensions, UnrepresentableCarriesReason) {
    auto o = test::make_observable("Wireshark", "Tool name");
    o.stix_support = {SupportLevel::No, ""};
    auto r = represent_observable(o, schemas());
    EXPECT_FALSE(r.instance);
    EXPECT_FALSE(r.reason.empty());
}

TEST(StixExtensions, SchemaErrorsNameField) {
    json j = to_json(schema("ics-data-tag"));
    j["properties"][0]["type"] = "integer";
    try {
        schema_from_json(j);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("properties[0].type"), std::string::npos) << e.what();
    }
}
