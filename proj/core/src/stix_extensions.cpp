#include "icsgap/stix_extensions.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

namespace icsgap {

namespace {

constexpr const char* kIdentityCreated = "2025-01-15T00:00:00.000Z";
const std::set<std::string> kReservedKeys = {"type", "spec_version", "id", "extensions"};

const std::map<std::string, std::vector<std::string>>& required_properties() {
    static const std::map<std::string, std::vector<std::string>> m = {
        {"ics-data-tag", {"tag_name", "source_system"}},
        {"ics-protocol-message", {"protocol_name", "function"}},
        {"plc-program-digest", {"algorithm", "digest_value"}},
        {"device-log-event", {"device", "event"}},
        {"os-api-call", {"api_name", "platform"}},
    };
    return m;
}

std::vector<std::string> enum_values(const std::string& type) {
    std::vector<std::string> out;
    std::string rest = type.substr(5);
    size_t start = 0;
    while (start <= rest.size()) {
        auto comma = rest.find(',', start);
        out.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool is_hex(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

std::optional<std::string> check_value(const PropertyDef& p, const json& v) {
    if (!v.is_string()) return p.name + ": expected a string";
    std::string s = v.get<std::string>();
    if (s.empty()) return p.name + ": empty";
    if (p.type == "hex" && !is_hex(s)) return p.name + ": '" + s + "' is not hex";
    if (p.type.rfind("enum:", 0) == 0) {
        auto allowed = enum_values(p.type);
        if (std::find(allowed.begin(), allowed.end(), s) == allowed.end())
            return p.name + ": '" + s + "' not in {" + join(allowed, ", ") + "}";
    }
    return std::nullopt;
}

std::vector<std::string> check_properties(const json& props, const IcsScoSchema& s) {
    std::vector<std::string> v;
    if (!props.is_object()) return {"properties: expected an object"};
    for (const auto& p : s.properties) {
        auto it = props.find(p.name);
        if (it == props.end()) {
            if (p.required) v.push_back(p.name + ": required property missing");
            continue;
        }
        if (auto err = check_value(p, *it)) v.push_back(*err);
    }
    for (auto it = props.begin(); it != props.end(); ++it)
        if (!kReservedKeys.count(it.key()) && !s.property(it.key()))
            v.push_back(it.key() + ": not defined by " + s.name);
    return v;
}

}  // namespace

const PropertyDef* IcsScoSchema::property(std::string_view n) const {
    for (const auto& p : properties)
        if (p.name == n) return &p;
    return nullptr;
}

const std::vector<std::string>& ics_sco_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, _] : required_properties()) v.push_back(k);
        return v;
    }();
    return names;
}

IcsScoSchema schema_from_json(const json& j) {
    static const std::regex semver(R"(\d+\.\d+\.\d+)");
    if (!j.is_object()) throw Error("schema: expected an object");
    auto str = [&](const char* f) {
        if (!j.contains(f) || !j[f].is_string()) throw Error(std::string(f) + ": missing");
        return j[f].get<std::string>();
    };
    IcsScoSchema s;
    s.name = str("name");
    auto req = required_properties().find(s.name);
    if (req == required_properties().end()) throw Error("name: '" + s.name + "' is not an ICS observable type");
    s.version = str("version");
    if (!std::regex_match(s.version, semver)) throw Error("version: expected MAJOR.MINOR.PATCH");
    s.created = str("created");
    s.modified = str("modified");
    s.description = str("description");
    s.status = j.value("status", "");
    if (!j.contains("properties") || !j["properties"].is_array()) throw Error("properties: missing");
    std::set<std::string> seen;
    for (size_t i = 0; i < j["properties"].size(); ++i) {
        const auto& p = j["properties"][i];
        std::string at = "properties[" + std::to_string(i) + "]";
        if (!p.is_object() || !p.contains("name") || !p["name"].is_string()) throw Error(at + ".name: missing");
        PropertyDef d;
        d.name = p["name"];
        d.type = p.value("type", "");
        if (d.type != "string" && d.type != "hex" && !(d.type.rfind("enum:", 0) == 0 && d.type.size() > 5))
            throw Error(at + ".type: expected string, hex or enum:<values>");
        d.required = p.value("required", false);
        d.description = p.value("description", "");
        if (!seen.insert(d.name).second) throw Error(at + ".name: duplicate '" + d.name + "'");
        s.properties.push_back(std::move(d));
    }
    for (const auto& r : req->second) {
        auto* p = s.property(r);
        if (!p || !p->required) throw Error("properties: " + s.name + " must require '" + r + "'");
    }
    if (s.name == "plc-program-digest") {
        auto vals = enum_values(s.property("algorithm")->type.rfind("enum:", 0) == 0 ? s.property("algorithm")->type : "enum:");
        std::set<std::string> got(vals.begin(), vals.end()), want{"crc16", "crc32", "checksum", "sha256"};
        if (got != want) throw Error("properties: algorithm must be enum:crc16,crc32,checksum,sha256");
    }
    s.example = j.value("example", json::object());
    auto v = check_properties(s.example, s);
    if (!v.empty()) throw Error("example: " + join(v, "; "));
    return s;
}

ojson to_json(const IcsScoSchema& s) {
    ojson j;
    j["name"] = s.name;
    j["version"] = s.version;
    j["created"] = s.created;
    j["modified"] = s.modified;
    j["description"] = s.description;
    if (!s.status.empty()) j["status"] = s.status;
    j["properties"] = ojson::array();
    for (const auto& p : s.properties) {
        ojson jp;
        jp["name"] = p.name;
        jp["type"] = p.type;
        jp["required"] = p.required;
        jp["description"] = p.description;
        j["properties"].push_back(jp);
    }
    ojson ex = ojson::object();
    for (const auto& p : s.properties)
        if (s.example.contains(p.name)) ex[p.name] = s.example[p.name].get<std::string>();
    j["example"] = ex;
    return j;
}

std::vector<IcsScoSchema> load_schemas(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
    std::vector<IcsScoSchema> out;
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            auto s = schema_from_json(json::parse(read_file(f)));
            if (f.parent_path().filename() != s.name || f.stem() != s.version)
                throw Error("file location does not match name/version");
            out.push_back(std::move(s));
        } catch (const json::parse_error& e) {
            throw Error(f.string() + ": " + e.what());
        } catch (const Error& e) {
            throw Error(f.string() + ": " + e.what());
        }
    }
    for (const auto& s : out) register_sco_extension(s.name);
    return out;
}

std::string extension_definition_id(const IcsScoSchema& s) {
    return "extension-definition--" + uuid5(kStixNamespace, s.name + "@" + s.version);
}

std::string identity_id() { return "identity--" + uuid5(kStixNamespace, "icsgap"); }

ojson extension_definition(const IcsScoSchema& s) {
    ojson j;
    j["type"] = "extension-definition";
    j["spec_version"] = "2.1";
    j["id"] = extension_definition_id(s);
    j["created_by_ref"] = identity_id();
    j["created"] = s.created;
    j["modified"] = s.modified;
    j["name"] = s.name;
    j["description"] = s.description;
    j["schema"] = "extensions/" + s.name + "/" + s.version + ".json";
    j["version"] = s.version;
    j["extension_types"] = {"new-sco"};
    j["x_ics_property_definitions"] = to_json(s)["properties"];
    if (!s.status.empty()) j["x_ics_status"] = s.status;
    return j;
}

ojson make_instance(const IcsScoSchema& s, const json& properties, std::string_view id_seed) {
    auto v = check_properties(properties, s);
    if (!v.empty()) throw Error(s.name + " instance: " + join(v, "; "));
    ojson j;
    j["type"] = s.name;
    j["spec_version"] = "2.1";
    j["id"] = s.name + "--" + uuid5(kStixNamespace, s.name + "|" + std::string(id_seed));
    for (const auto& p : s.properties)
        if (properties.contains(p.name)) j[p.name] = properties[p.name].get<std::string>();
    ojson ext;
    ext[extension_definition_id(s)] = {{"extension_type", "new-sco"}};
    j["extensions"] = ext;
    return j;
}

ojson emit_extension_bundle(const std::vector<IcsScoSchema>& schemas) {
    std::vector<const IcsScoSchema*> sorted;
    std::set<std::string> names;
    for (const auto& s : schemas) {
        if (!names.insert(s.name).second) throw Error("duplicate schema name '" + s.name + "'");
        sorted.push_back(&s);
    }
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });
    ojson objects = ojson::array();
    std::vector<std::string> ids;
    if (!sorted.empty()) {
        ojson ident;
        ident["type"] = "identity";
        ident["spec_version"] = "2.1";
        ident["id"] = identity_id();
        ident["created"] = kIdentityCreated;
        ident["modified"] = kIdentityCreated;
        ident["name"] = "icsgap";
        ident["identity_class"] = "system";
        objects.push_back(ident);
    }
    for (auto* s : sorted) {
        objects.push_back(extension_definition(*s));
        ids.push_back(extension_definition_id(*s));
    }
    for (auto* s : sorted) objects.push_back(make_instance(*s, s->example, "example"));
    ojson b;
    b["type"] = "bundle";
    b["id"] = "bundle--" + uuid5(kStixNamespace, "icsgap-extensions|" + join(ids, ","));
    b["objects"] = objects;
    return b;
}

std::vector<IcsScoSchema> parse_extension_bundle(const json& bundle) {
    if (!bundle.is_object() || bundle.value("type", "") != "bundle" || !bundle.contains("objects") ||
        !bundle["objects"].is_array())
        throw Error("bundle: expected a STIX bundle with objects");
    std::vector<IcsScoSchema> schemas;
    for (const auto& o : bundle["objects"]) {
        if (o.value("type", "") != "extension-definition") continue;
        json sj;
        sj["name"] = o.value("name", "");
        sj["version"] = o.value("version", "");
        sj["created"] = o.value("created", "");
        sj["modified"] = o.value("modified", "");
        sj["description"] = o.value("description", "");
        if (o.contains("x_ics_status")) sj["status"] = o["x_ics_status"];
        sj["properties"] = o.value("x_ics_property_definitions", json::array());
        json example = json::object();
        for (const auto& inst : bundle["objects"]) {
            if (inst.value("type", "") != sj["name"]) continue;
            for (auto it = inst.begin(); it != inst.end(); ++it)
                if (!kReservedKeys.count(it.key())) example[it.key()] = it.value();
            break;
        }
        sj["example"] = example;
        auto s = schema_from_json(sj);
        if (extension_definition_id(s) != o.value("id", ""))
            throw Error(s.name + ": extension-definition id is not the deterministic id for " + s.name + "@" + s.version);
        schemas.push_back(std::move(s));
    }
    return schemas;
}

std::vector<std::string> validate_instance(const json& instance, const IcsScoSchema& s) {
    std::vector<std::string> v;
    if (!instance.is_object()) return {"instance: expected an object"};
    if (instance.value("type", "") != s.name) v.push_back("type: expected " + s.name);
    if (instance.value("spec_version", "") != "2.1") v.push_back("spec_version: expected 2.1");
    if (instance.value("id", "").rfind(s.name + "--", 0) != 0) v.push_back("id: expected prefix " + s.name + "--");
    auto def = extension_definition_id(s);
    if (!instance.contains("extensions") || !instance["extensions"].contains(def) ||
        instance["extensions"][def].value("extension_type", "") != "new-sco")
        v.push_back("extensions: missing new-sco entry for " + def);
    for (auto& e : check_properties(instance, s)) v.push_back(std::move(e));
    return v;
}

std::vector<std::string> validate_extension_bundle(const json& bundle) {
    std::vector<IcsScoSchema> schemas;
    try {
        schemas = parse_extension_bundle(bundle);
    } catch (const Error& e) {
        return {e.what()};
    }
    std::vector<std::string> v;
    std::set<std::string> ids;
    for (const auto& o : bundle["objects"]) {
        std::string type = o.value("type", ""), id = o.value("id", "");
        if (!ids.insert(id).second) v.push_back(id + ": duplicate id");
        if (type == "identity" || type == "extension-definition") {
            if (type == "extension-definition" && o.value("created_by_ref", "") != identity_id())
                v.push_back(id + ": created_by_ref does not reference the bundle identity");
            continue;
        }
        auto s = std::find_if(schemas.begin(), schemas.end(), [&](const auto& x) { return x.name == type; });
        if (s == schemas.end()) {
            v.push_back(id + ": no extension-definition for type '" + type + "'");
            continue;
        }
        for (const auto& e : validate_instance(o, *s)) v.push_back(id + ": " + e);
    }
    return v;
}

namespace {

bool contains_any(const std::string& hay, std::initializer_list<const char*> needles) {
    for (const char* n : needles)
        if (hay.find(n) != std::string::npos) return true;
    return false;
}

// Longest needles first so "IEC 61850 MMS" wins over "MMS".
const std::vector<std::pair<std::string, std::string>>& protocol_vocabulary() {
    static const std::vector<std::pair<std::string, std::string>> v = [] {
        std::vector<std::pair<std::string, std::string>> p = {
            {"IEC 61850 MMS", "IEC 61850"}, {"IEC 61850", "IEC 61850"}, {"libiec61850", "IEC 61850"},
            {"MMS", "IEC 61850"}, {"IEC 60870-5-104", "IEC 60870-5-104"}, {"IEC 104", "IEC 60870-5-104"},
            {"IEC 60870-5-101", "IEC 60870-5-101"}, {"OPC DA", "OPC DA"}, {"TriStation", "TriStation"},
            {"S7Comm", "S7Comm"}, {"Modbus", "Modbus"}, {"DNP3", "DNP3"}, {"EtherNet/IP", "CIP"}, {"CIP", "CIP"},
            {"PROFINET", "PROFINET"}, {"Profibus", "Profibus"}, {"PCOM", "PCOM"}, {"MS SQL", "MS SQL (TDS)"},
            {"TDS", "MS SQL (TDS)"}};
        std::stable_sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
        return p;
    }();
    return v;
}

std::optional<std::string> find_protocol(const Observable& o) {
    for (const std::string* field : {o.notes ? &*o.notes : nullptr, &o.observable_value, o.parser ? &*o.parser : nullptr}) {
        if (!field) continue;
        std::string lower = to_lower(*field);
        for (const auto& [needle, canonical] : protocol_vocabulary()) {
            std::string n = to_lower(needle);
            for (auto pos = lower.find(n); pos != std::string::npos; pos = lower.find(n, pos + 1)) {
                bool left = pos == 0 || !is_word_char(lower[pos - 1]);
                bool right = pos + n.size() == lower.size() || !is_word_char(lower[pos + n.size()]);
                if (left && right) return canonical;
            }
        }
    }
    return std::nullopt;
}

}  // namespace

Representation represent_observable(const Observable& o, const std::vector<IcsScoSchema>& schemas) {
    if (o.stix_support.level == SupportLevel::Full) return {std::nullopt, "", "native SCO exists"};
    auto schema = [&](const std::string& name) -> const IcsScoSchema* {
        for (const auto& s : schemas)
            if (s.name == name) return &s;
        return nullptr;
    };
    auto build = [&](const std::string& name, json props) -> Representation {
        const IcsScoSchema* s = schema(name);
        if (!s) return {std::nullopt, name, "schema " + name + " is not loaded"};
        try {
            return {make_instance(*s, props, o.description_id + "|" + o.observable_value), name, ""};
        } catch (const Error& e) {
            return {std::nullopt, name, e.what()};
        }
    };
    const std::string label = normalize_label(o.classification);
    const std::string notes = o.notes ? *o.notes : "";

    if (contains_any(label, {"api call", "system call", "os api", "system function"})) {
        std::string platform;
        if (label.find("plc") != std::string::npos) platform = "plc-runtime";
        else if (to_lower(notes).find("windows") != std::string::npos) platform = "windows";
        else if (to_lower(notes).find("linux") != std::string::npos) platform = "linux";
        if (platform.empty()) return {std::nullopt, "os-api-call", "platform is not derivable from the observable"};
        return build("os-api-call", {{"api_name", o.observable_value}, {"platform", platform}});
    }
    if (contains_any(label, {"tag", "data attribute", "logical node", "point name"}))
        return build("ics-data-tag", {{"tag_name", o.observable_value}, {"source_system", o.data_source}});
    if (contains_any(label, {"program crc", "digest", "checksum"})) {
        std::string v = o.observable_value;
        if (v.rfind("0x", 0) == 0 || v.rfind("0X", 0) == 0) v = v.substr(2);
        if (!is_hex(v)) return {std::nullopt, "plc-program-digest", "digest_value is not a hex string"};
        std::string algo;
        if (label.find("checksum") != std::string::npos) algo = "checksum";
        else if (v.size() == 4) algo = "crc16";
        else if (v.size() == 8) algo = "crc32";
        else if (v.size() == 64) algo = "sha256";
        if (algo.empty()) return {std::nullopt, "plc-program-digest", "digest algorithm is not derivable"};
        return build("plc-program-digest", {{"algorithm", algo}, {"digest_value", to_lower(v)}});
    }
    if (contains_any(label, {"device log", "log event"})) {
        if (notes.empty()) return {std::nullopt, "device-log-event", "device is not derivable from the observable"};
        return build("device-log-event", {{"device", notes}, {"event", o.observable_value}});
    }
    if (contains_any(label, {"command", "function", "service request", "interface call", "asdu", "stored procedure",
                             "service", "function code"}) &&
        label != "service name") {
        auto proto = find_protocol(o);
        if (!proto) return {std::nullopt, "ics-protocol-message", "protocol_name is not derivable from the observable"};
        return build("ics-protocol-message", {{"protocol_name", *proto}, {"function", o.observable_value}});
    }
    if (label.find("code block") != std::string::npos || label == "plc program")
        return {std::nullopt, "plc-program-digest", "digest_value is not derivable from a program or block name"};
    return {std::nullopt, "", "no extension schema covers classification '" + o.classification + "'"};
}

}  // namespace icsgap
