#include "icsgap/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <tuple>

namespace icsgap {

std::string_view to_string(DetailLevel d) {
    switch (d) {
        case DetailLevel::Missing: return "Missing";
        case DetailLevel::Mentioned: return "Mentioned";
        case DetailLevel::Described: return "Described";
        case DetailLevel::Actionable: return "Actionable";
    }
    return "Missing";
}

std::optional<DetailLevel> parse_detail_level(std::string_view s) {
    for (auto d : kAllDetailLevels)
        if (to_string(d) == s) return d;
    return std::nullopt;
}

std::string_view to_string(SupportLevel s) {
    switch (s) {
        case SupportLevel::Full: return "Full";
        case SupportLevel::Partial: return "Partial";
        case SupportLevel::No: return "No";
    }
    return "No";
}

StixSupport parse_support_string(std::string_view s) {
    std::string str(s);
    if (str == "No") return {};
    auto colon = str.find(':');
    std::string head = colon == std::string::npos ? str : str.substr(0, colon);
    SupportLevel level;
    if (head == "Full") {
        level = SupportLevel::Full;
    } else if (head == "Partial") {
        level = SupportLevel::Partial;
    } else if (head == "No") {
        throw SupportParseError(str, "'No' takes no object name");
    } else {
        throw SupportParseError(head.empty() ? str : head, "expected Full, Partial or No");
    }
    if (colon == std::string::npos) throw SupportParseError(str, "missing ': <object name>'");
    std::string rest = str.substr(colon + 1);
    if (rest.size() < 2 || rest[0] != ' ' || std::isspace(static_cast<unsigned char>(rest[1])))
        throw SupportParseError(str, "expected exactly one space after ':'");
    std::string name = rest.substr(1);
    if (name != trim(name)) throw SupportParseError(name, "object name has surrounding whitespace");
    return {level, name};
}

std::string serialize_support(const StixSupport& s) {
    if (s.level == SupportLevel::No) return "No";
    return std::string(to_string(s.level)) + ": " + s.sco_name;
}

const std::vector<std::string>& sco_vocabulary() {
    static const std::vector<std::string> v = {
        "artifact",     "autonomous-system", "directory",       "domain-name",  "email-addr",
        "email-message", "file",             "ipv4-addr",       "ipv6-addr",    "mac-addr",
        "mutex",        "network-traffic",   "process",         "software",     "url",
        "user-account", "windows-registry-key", "x509-certificate"};
    return v;
}

namespace {

std::mutex g_ext_mu;
std::set<std::string>& extension_names() {
    static std::set<std::string> s;
    return s;
}

std::string sco_object_part(std::string_view name) {
    auto colon = name.find(':');
    std::string obj = to_lower(trim(name.substr(0, colon)));
    std::replace(obj.begin(), obj.end(), ' ', '-');
    return obj;
}

}  // namespace

void register_sco_extension(const std::string& name) {
    std::lock_guard lk(g_ext_mu);
    extension_names().insert(to_lower(name));
}

bool is_known_sco(std::string_view name) {
    std::string obj = sco_object_part(name);
    if (obj.empty()) return false;
    const auto& v = sco_vocabulary();
    if (std::find(v.begin(), v.end(), obj) != v.end()) return true;
    std::lock_guard lk(g_ext_mu);
    return extension_names().count(obj) > 0;
}

std::string_view to_string(ProprietaryClass p) {
    switch (p) {
        case ProprietaryClass::OpenStandard: return "Open/Standard Technology";
        case ProprietaryClass::ProprietaryDocumented: return "Proprietary-Documented Technology";
        case ProprietaryClass::ProprietaryUndocumented: return "Proprietary-Undocumented Technology";
    }
    return "Open/Standard Technology";
}

std::optional<ProprietaryClass> parse_proprietary(std::string_view s) {
    for (auto p : {ProprietaryClass::OpenStandard, ProprietaryClass::ProprietaryDocumented,
                   ProprietaryClass::ProprietaryUndocumented})
        if (to_string(p) == s) return p;
    return std::nullopt;
}

std::string_view to_string(ReviewStatus r) {
    switch (r) {
        case ReviewStatus::Machine: return "machine";
        case ReviewStatus::Corrected: return "corrected";
        case ReviewStatus::Rejected: return "rejected";
    }
    return "machine";
}

std::optional<ReviewStatus> parse_review_status(std::string_view s) {
    for (auto r : {ReviewStatus::Machine, ReviewStatus::Corrected, ReviewStatus::Rejected})
        if (to_string(r) == s) return r;
    return std::nullopt;
}

namespace {

bool ends_with(std::string_view s, std::string_view suf) {
    return s.size() >= suf.size() && s.substr(s.size() - suf.size()) == suf;
}

bool all_upper(std::string_view w) {
    bool any_alpha = false;
    for (char c : w) {
        if (std::islower(static_cast<unsigned char>(c))) return false;
        if (std::isalpha(static_cast<unsigned char>(c))) any_alpha = true;
    }
    return any_alpha;
}

std::string singularize(std::string w) {
    if (w.size() < 3) return w;
    if (ends_with(w, "sses") || ends_with(w, "xes") || ends_with(w, "ches") || ends_with(w, "shes"))
        return w.substr(0, w.size() - 2);
    if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is"))
        return w.substr(0, w.size() - 1);
    return w;
}

}  // namespace

std::string normalize_label(std::string_view label) {
    std::string collapsed = collapse_whitespace(label);
    auto sp = collapsed.rfind(' ');
    std::string head = sp == std::string::npos ? "" : collapsed.substr(0, sp + 1);
    std::string last = sp == std::string::npos ? collapsed : collapsed.substr(sp + 1);
    if (!all_upper(last)) last = singularize(to_lower(last));
    return to_lower(head) + to_lower(last);
}

bool Observable::has_flag(std::string_view f) const {
    return std::find(flags.begin(), flags.end(), f) != flags.end();
}

void Observable::add_flag(std::string_view f) {
    if (!has_flag(f)) flags.emplace_back(f);
}

ojson to_json(const Observable& o) {
    ojson j;
    j["observable_value"] = o.observable_value;
    j["artifact_details"] = std::string(to_string(o.artifact_details));
    j["data_source"] = o.data_source;
    j["classification"] = o.classification;
    j["STIX_supported"] = serialize_support(o.stix_support);
    j["proprietary_artifact"] = std::string(to_string(o.proprietary));
    j["parser"] = o.parser ? ojson(*o.parser) : ojson(nullptr);
    j["notes"] = o.notes ? ojson(*o.notes) : ojson(nullptr);
    j["technique_num"] = o.technique_num;
    j["description_id"] = o.description_id;
    j["related_malware"] = o.related_malware;
    j["backend"] = o.backend;
    j["review_status"] = std::string(to_string(o.review_status));
    j["flags"] = o.flags;
    return j;
}

namespace {

const char* const kRequiredFields[] = {"observable_value", "artifact_details",     "data_source", "classification",
                                       "STIX_supported",   "proprietary_artifact", "parser",      "notes",
                                       "technique_num",    "description_id",       "related_malware"};

bool nullable_field(std::string_view f) { return f == "parser" || f == "notes"; }

std::vector<std::string> structural_violations(const json& j) {
    std::vector<std::string> v;
    if (!j.is_object()) return {"observable: expected a JSON object"};
    for (const char* f : kRequiredFields) {
        auto it = j.find(f);
        if (it == j.end()) {
            v.push_back(std::string(f) + ": missing");
            continue;
        }
        if (!(it->is_string() || (nullable_field(f) && it->is_null()))) {
            v.push_back(std::string(f) + ": expected " + (nullable_field(f) ? "string or null" : "string"));
            continue;
        }
        std::string s = it->is_string() ? it->get<std::string>() : "";
        if (std::string_view(f) == "artifact_details" && !parse_detail_level(s))
            v.push_back("artifact_details: unknown detail level '" + s + "'");
        if (std::string_view(f) == "proprietary_artifact" && !parse_proprietary(s))
            v.push_back("proprietary_artifact: unknown class '" + s + "'");
        if (std::string_view(f) == "STIX_supported") {
            try {
                parse_support_string(s);
            } catch (const SupportParseError& e) {
                v.push_back(std::string("STIX_supported: ") + e.what());
            }
        }
    }
    if (auto it = j.find("review_status"); it != j.end()) {
        if (!it->is_string() || !parse_review_status(it->get<std::string>()))
            v.push_back("review_status: expected machine, corrected or rejected");
    }
    if (auto it = j.find("backend"); it != j.end() && !it->is_string()) v.push_back("backend: expected string");
    if (auto it = j.find("flags"); it != j.end()) {
        bool ok = it->is_array() && std::all_of(it->begin(), it->end(), [](const json& x) { return x.is_string(); });
        if (!ok) v.push_back("flags: expected array of strings");
    }
    return v;
}

}  // namespace

Observable observable_from_json(const json& j) {
    auto v = structural_violations(j);
    if (!v.empty()) throw Error("invalid observable: " + join(v, "; "));
    Observable o;
    o.observable_value = j.at("observable_value").get<std::string>();
    o.artifact_details = *parse_detail_level(j.at("artifact_details").get<std::string>());
    o.data_source = j.at("data_source").get<std::string>();
    o.classification = j.at("classification").get<std::string>();
    o.stix_support = parse_support_string(j.at("STIX_supported").get<std::string>());
    o.proprietary = *parse_proprietary(j.at("proprietary_artifact").get<std::string>());
    if (j.at("parser").is_string()) o.parser = j.at("parser").get<std::string>();
    if (j.at("notes").is_string()) o.notes = j.at("notes").get<std::string>();
    o.technique_num = j.at("technique_num").get<std::string>();
    o.description_id = j.at("description_id").get<std::string>();
    o.related_malware = j.at("related_malware").get<std::string>();
    o.backend = j.value("backend", "");
    if (j.contains("review_status")) o.review_status = *parse_review_status(j.at("review_status").get<std::string>());
    if (j.contains("flags")) o.flags = j.at("flags").get<std::vector<std::string>>();
    return o;
}

bool canonical_less(const Observable& a, const Observable& b) {
    auto key = [](const Observable& o) {
        return std::tie(o.technique_num, o.description_id, o.observable_value, o.classification);
    };
    if (key(a) != key(b)) return key(a) < key(b);
    // Total order for the rare identical-key case.
    return to_json(a).dump() < to_json(b).dump();
}

void sort_canonical(std::vector<Observable>& v) { std::sort(v.begin(), v.end(), canonical_less); }

std::string dump_dataset(const std::vector<Observable>& v) {
    std::vector<ojson> rows;
    rows.reserve(v.size());
    for (const auto& o : v) rows.push_back(to_json(o));
    return dump_ndjson(rows);
}

std::vector<Observable> parse_dataset(std::string_view ndjson) {
    std::vector<Observable> out;
    size_t line = 0;
    for (const auto& j : parse_ndjson(ndjson)) {
        ++line;
        try {
            out.push_back(observable_from_json(j));
        } catch (const Error& e) {
            throw Error("row " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Observable> read_dataset(const std::filesystem::path& path) {
    try {
        return parse_dataset(read_file(path));
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string dataset_hash(const std::vector<Observable>& v) { return sha256_hex(dump_dataset(v)); }

std::vector<std::string> validate_observable(const Observable& o, const ProvenanceIndex* index) {
    static const std::regex technique_re(R"(T\d{4}(\.\d{3})?)");
    std::vector<std::string> v;
    if (o.observable_value.empty()) v.push_back("observable_value: empty");
    if (o.classification.empty()) v.push_back("classification: empty");
    if (o.data_source.empty()) v.push_back("data_source: empty");
    const auto& s = o.stix_support;
    if (s.level == SupportLevel::No && !s.sco_name.empty())
        v.push_back("STIX_supported: level No must not name an object");
    if (s.level != SupportLevel::No) {
        if (s.sco_name.empty())
            v.push_back("STIX_supported: level " + std::string(to_string(s.level)) + " requires an object name");
        else if (!is_known_sco(s.sco_name))
            v.push_back("STIX_supported: unknown STIX object '" + s.sco_name + "'");
    }
    if (!std::regex_match(o.technique_num, technique_re))
        v.push_back("technique_num: '" + o.technique_num + "' is not a technique id");
    bool have_id = o.description_id.rfind("relationship--", 0) == 0;
    if (!have_id) v.push_back("description_id: '" + o.description_id + "' is not a relationship id");
    if (o.related_malware.empty()) v.push_back("related_malware: empty");
    if (index && have_id) {
        auto it = index->find(o.description_id);
        if (it == index->end()) {
            v.push_back("description_id: '" + o.description_id + "' does not resolve to a procedure record");
        } else {
            if (it->second.technique_id != o.technique_num)
                v.push_back("technique_num: record has " + it->second.technique_id);
            if (it->second.malware_name != o.related_malware)
                v.push_back("related_malware: record has " + it->second.malware_name);
        }
    }
    return v;
}

std::vector<std::string> validate_observable_json(const json& j, const ProvenanceIndex* index) {
    auto v = structural_violations(j);
    if (!v.empty()) return v;
    return validate_observable(observable_from_json(j), index);
}

}  // namespace icsgap
