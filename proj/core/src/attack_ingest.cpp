#include "icsgap/attack_ingest.hpp"

#include <algorithm>
#include <unordered_map>

#include "http.hpp"

namespace icsgap {

Bundle load_bundle(const std::string& source, double timeout_s) {
    std::string text;
    if (detail::is_url(source)) {
        auto res = detail::http_get(source, timeout_s);
        if (res.status == 0) throw Error("fetch failed for " + source + ": " + res.error);
        if (res.status != 200) throw Error("fetch failed for " + source + ": HTTP " + std::to_string(res.status));
        text = std::move(res.body);
    } else {
        text = read_file(source);
    }
    BundleSource src{source, utc_now(), sha256_hex(text)};
    return parse_bundle(text, std::move(src));
}

Bundle parse_bundle(std::string_view text, BundleSource source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("malformed bundle JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw Error("bundle: expected a JSON object");
    auto it = j.find("objects");
    if (it == j.end() || !it->is_array()) throw Error("bundle: missing 'objects' array");
    Bundle b;
    b.spec_version = j.value("spec_version", "");
    b.source = std::move(source);
    b.objects.reserve(it->size());
    for (size_t i = 0; i < it->size(); ++i) {
        auto& o = (*it)[i];
        if (!o.is_object() || !o.contains("id") || !o.contains("type"))
            throw Error("bundle: object " + std::to_string(i) + " lacks id or type");
        if (o["type"] == "relationship" &&
            (!o.contains("source_ref") || !o.contains("target_ref") || !o.contains("relationship_type")))
            throw Error("bundle: relationship " + o["id"].get<std::string>() + " is incomplete");
        if (b.spec_version.empty() && o.contains("spec_version")) b.spec_version = o["spec_version"];
        b.objects.push_back(std::move(o));
    }
    return b;
}

std::string attack_external_id(const json& object) {
    auto it = object.find("external_references");
    if (it == object.end() || !it->is_array()) return "";
    for (const auto& ref : *it) {
        if (ref.value("source_name", "") == "mitre-attack" && ref.contains("external_id"))
            return ref["external_id"].get<std::string>();
    }
    return "";
}

std::pair<std::string, std::vector<std::string>> normalize_text(std::string_view raw) {
    std::vector<std::string> citations;
    std::string cur = collapse_whitespace(raw);
    while (true) {
        std::string next;
        next.reserve(cur.size());
        size_t i = 0;
        while (i < cur.size()) {
            if (cur[i] == '[') {
                auto close = cur.find(']', i + 1);
                if (close != std::string::npos && close + 1 < cur.size() && cur[close + 1] == '(') {
                    auto paren = cur.find(')', close + 2);
                    if (paren != std::string::npos) {
                        next.append(cur, i + 1, close - i - 1);
                        i = paren + 1;
                        continue;
                    }
                }
            }
            static constexpr std::string_view kCite = "(Citation: ";
            if (cur.compare(i, kCite.size(), kCite) == 0) {
                auto paren = cur.find(')', i + kCite.size());
                if (paren != std::string::npos) {
                    citations.push_back(cur.substr(i + kCite.size(), paren - i - kCite.size()));
                    while (!next.empty() && next.back() == ' ') next.pop_back();
                    i = paren + 1;
                    continue;
                }
            }
            next.push_back(cur[i++]);
        }
        next = collapse_whitespace(next);
        if (next == cur) break;
        cur = std::move(next);
    }
    return {cur, citations};
}

namespace {

bool flagged(const json& o, const char* key) { return o.value(key, false) == true; }

bool inactive(const json& o, const MalwareFilter& f) {
    return (!f.include_revoked && flagged(o, "revoked")) || (!f.include_deprecated && flagged(o, "x_mitre_deprecated"));
}

}  // namespace

IngestResult extract_procedures(const Bundle& bundle, const MalwareFilter& filter) {
    IngestResult out;
    std::unordered_map<std::string, const json*> by_id;
    by_id.reserve(bundle.objects.size());
    for (const auto& o : bundle.objects) by_id.emplace(o["id"].get<std::string>(), &o);

    std::set<std::string> seen_ids;
    for (const auto& rel : bundle.objects) {
        if (rel["type"] != "relationship" || rel["relationship_type"] != "uses") continue;
        if (inactive(rel, filter)) continue;
        const std::string rid = rel["id"].get<std::string>();
        const std::string src_ref = rel["source_ref"].get<std::string>();
        const std::string dst_ref = rel["target_ref"].get<std::string>();
        auto src = by_id.find(src_ref);
        if (src == by_id.end()) {
            if (src_ref.rfind("malware--", 0) == 0) out.warnings.push_back(rid + ": dangling source_ref " + src_ref);
            continue;
        }
        const json& mal = *src->second;
        if (mal["type"] != "malware" || inactive(mal, filter)) continue;
        std::string name = mal.value("name", "");
        if (!filter.only_names.empty() && !filter.only_names.count(name)) continue;
        auto dst = by_id.find(dst_ref);
        if (dst == by_id.end()) {
            out.warnings.push_back(rid + ": dangling target_ref " + dst_ref);
            continue;
        }
        const json& tech = *dst->second;
        if (tech["type"] != "attack-pattern" || inactive(tech, filter)) continue;
        std::string tid = attack_external_id(tech);
        if (tid.empty()) {
            out.warnings.push_back(rid + ": target " + dst_ref + " has no ATT&CK id");
            continue;
        }
        auto [text, cites] = normalize_text(rel.value("description", ""));
        if (text.empty()) continue;
        if (!seen_ids.insert(rid).second) {
            out.warnings.push_back(rid + ": duplicate relationship id");
            continue;
        }
        out.records.push_back({rid, tid, name, std::move(text), std::move(cites)});
    }
    std::sort(out.records.begin(), out.records.end(), [](const auto& a, const auto& b) {
        return std::tie(a.technique_id, a.description_id) < std::tie(b.technique_id, b.description_id);
    });
    std::sort(out.warnings.begin(), out.warnings.end());
    return out;
}

ojson to_json(const ProcedureRecord& r) {
    ojson j;
    j["description_id"] = r.description_id;
    j["technique_id"] = r.technique_id;
    j["malware_name"] = r.malware_name;
    j["description_text"] = r.description_text;
    j["citations"] = r.citations;
    return j;
}

ProcedureRecord record_from_json(const json& j) {
    ProcedureRecord r;
    for (const char* f : {"description_id", "technique_id", "malware_name", "description_text"}) {
        if (!j.contains(f) || !j[f].is_string()) throw Error(std::string("record: '") + f + "' missing");
    }
    r.description_id = j["description_id"];
    r.technique_id = j["technique_id"];
    r.malware_name = j["malware_name"];
    r.description_text = j["description_text"];
    if (j.contains("citations")) r.citations = j["citations"].get<std::vector<std::string>>();
    return r;
}

std::string dump_records(const std::vector<ProcedureRecord>& records) {
    std::vector<ojson> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(to_json(r));
    return dump_ndjson(rows);
}

std::vector<ProcedureRecord> read_records(const std::filesystem::path& path) {
    std::vector<ProcedureRecord> out;
    for (const auto& j : read_ndjson(path)) out.push_back(record_from_json(j));
    return out;
}

std::set<std::string> malware_dictionary(const Bundle& bundle) {
    std::set<std::string> names;
    for (const auto& o : bundle.objects) {
        if (o["type"] != "malware" && o["type"] != "tool") continue;
        if (o.contains("name") && o["name"].is_string()) names.insert(to_lower(o["name"].get<std::string>()));
        for (const char* key : {"x_mitre_aliases", "aliases"}) {
            if (!o.contains(key) || !o[key].is_array()) continue;
            for (const auto& a : o[key])
                if (a.is_string()) names.insert(to_lower(a.get<std::string>()));
        }
    }
    return names;
}

ProvenanceIndex provenance_index(const std::vector<ProcedureRecord>& records) {
    ProvenanceIndex idx;
    for (const auto& r : records) idx[r.description_id] = {r.technique_id, r.malware_name};
    return idx;
}

}  // namespace icsgap
