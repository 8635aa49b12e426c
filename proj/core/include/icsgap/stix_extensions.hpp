#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsgap/common.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

// STIX 2.1 namespace for deterministic identifiers.
inline constexpr std::string_view kStixNamespace = "00abedb4-aa42-466c-9c01-fed23315a9b7";

struct PropertyDef {
    std::string name;
    std::string type;  // "string", "hex" or "enum:a,b,c"
    bool required = false;
    std::string description;

    bool operator==(const PropertyDef&) const = default;
};

struct IcsScoSchema {
    std::string name;
    std::string version;
    std::string created;
    std::string modified;
    std::string description;
    std::string status;  // empty, or e.g. "proposal"
    std::vector<PropertyDef> properties;
    json example;  // property values of the example instance

    const PropertyDef* property(std::string_view n) const;
    bool operator==(const IcsScoSchema&) const = default;
};

// The five ICS observable types and the properties each must require.
const std::vector<std::string>& ics_sco_names();

IcsScoSchema schema_from_json(const json& j);  // throws Error naming the field
ojson to_json(const IcsScoSchema& s);

// Reads <dir>/<name>/<version>.json for every schema, sorted by name then version, and
// registers each name as a known SCO.
std::vector<IcsScoSchema> load_schemas(const std::filesystem::path& dir);

std::string extension_definition_id(const IcsScoSchema& s);
std::string identity_id();

ojson extension_definition(const IcsScoSchema& s);
// Throws Error when a property fails validation.
ojson make_instance(const IcsScoSchema& s, const json& properties, std::string_view id_seed);

// One extension-definition and one example instance per schema.
ojson emit_extension_bundle(const std::vector<IcsScoSchema>& schemas);
// Recovers the schemas (with their examples) from an emitted bundle.
std::vector<IcsScoSchema> parse_extension_bundle(const json& bundle);

std::vector<std::string> validate_instance(const json& instance, const IcsScoSchema& s);
std::vector<std::string> validate_extension_bundle(const json& bundle);

struct Representation {
    std::optional<ojson> instance;
    std::string schema;  // name of the schema used, empty when none
    std::string reason;  // set when no instance was produced
};

Representation represent_observable(const Observable& o, const std::vector<IcsScoSchema>& schemas);

}  // namespace icsgap
