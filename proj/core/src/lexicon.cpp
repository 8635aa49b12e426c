#include "icsgap/lexicon.hpp"

#include <algorithm>

namespace icsgap {

namespace {

const char* const kTupleFields[] = {"classification", "data_source", "stix_supported", "artifact_details",
                                    "proprietary_artifact"};

}  // namespace

Lexicon Lexicon::load(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    try {
        return from_json(j);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

Lexicon Lexicon::from_json(const json& j) {
    if (!j.is_object() || !j.contains("patterns") || !j["patterns"].is_array())
        throw Error("lexicon: missing 'patterns' array");
    Lexicon lx;
    lx.version_ = j.value("lexicon_version", "");
    if (lx.version_.empty()) throw Error("lexicon: missing 'lexicon_version'");
    std::set<std::string> ids;
    for (size_t i = 0; i < j["patterns"].size(); ++i) {
        const auto& p = j["patterns"][i];
        std::string where = "patterns[" + std::to_string(i) + "]";
        Pattern pat;
        pat.id = p.value("id", "");
        if (pat.id.empty() || !ids.insert(pat.id).second) throw Error(where + ".id: missing or duplicate");
        if (!p.contains("tuple") || !p["tuple"].is_object()) throw Error(where + ".tuple: missing");
        pat.tuple = p["tuple"];
        for (const char* f : kTupleFields)
            if (!pat.tuple.contains(f) || !pat.tuple[f].is_string()) throw Error(where + ".tuple." + f + ": missing");
        std::string kind = p.value("kind", "");
        if (kind == "regex") {
            pat.is_regex = true;
            try {
                pat.re = std::regex(p.value("pattern", ""), std::regex::ECMAScript | std::regex::optimize);
            } catch (const std::regex_error& e) {
                throw Error(where + ".pattern: " + e.what());
            }
            pat.group = p.value("group", 0u);
            if (pat.group > pat.re.mark_count()) throw Error(where + ".group: out of range");
        } else if (kind == "tokens") {
            if (!p.contains("tokens") || !p["tokens"].is_array()) throw Error(where + ".tokens: missing");
            for (const auto& t : p["tokens"]) {
                Token tok;
                if (t.is_string()) {
                    tok.text = t.get<std::string>();
                    tok.overrides = json::object();
                } else if (t.is_object() && t.contains("token") && t["token"].is_string()) {
                    tok.text = t["token"].get<std::string>();
                    tok.overrides = t;
                    tok.overrides.erase("token");
                } else {
                    throw Error(where + ".tokens: expected string or {token: ...}");
                }
                if (tok.text.empty()) throw Error(where + ".tokens: empty token");
                pat.tokens.push_back(std::move(tok));
            }
        } else {
            throw Error(where + ".kind: expected regex or tokens");
        }
        lx.patterns_.push_back(std::move(pat));
    }
    return lx;
}

std::vector<LexiconMatch> Lexicon::match(std::string_view text) const {
    std::vector<std::pair<size_t, size_t>> claims;
    std::vector<LexiconMatch> out;
    auto is_free = [&](size_t s, size_t e) {
        return std::all_of(claims.begin(), claims.end(),
                           [&](const auto& c) { return e <= c.first || s >= c.second; });
    };
    const std::string str(text);
    for (const auto& p : patterns_) {
        struct Found {
            size_t start, end;
            std::string value;
            const json* overrides;
        };
        std::vector<Found> found;
        if (p.is_regex) {
            for (auto it = std::sregex_iterator(str.begin(), str.end(), p.re); it != std::sregex_iterator(); ++it) {
                const auto& m = *it;
                if (m.length(0) == 0 || !m[p.group].matched) continue;
                found.push_back({static_cast<size_t>(m.position(0)), static_cast<size_t>(m.position(0) + m.length(0)),
                                 m.str(p.group), nullptr});
            }
        } else {
            for (const auto& tok : p.tokens) {
                for (size_t pos = str.find(tok.text); pos != std::string::npos; pos = str.find(tok.text, pos + 1)) {
                    size_t end = pos + tok.text.size();
                    bool left = pos == 0 || !is_word_char(str[pos - 1]);
                    bool right = end == str.size() || !is_word_char(str[end]);
                    if (left && right) found.push_back({pos, end, tok.text, &tok.overrides});
                }
            }
            std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
                if (a.start != b.start) return a.start < b.start;
                return a.end - a.start > b.end - b.start;
            });
        }
        for (auto& f : found) {
            if (!is_free(f.start, f.end)) continue;
            claims.emplace_back(f.start, f.end);
            json tuple = p.tuple;
            if (f.overrides)
                for (auto it = f.overrides->begin(); it != f.overrides->end(); ++it) tuple[it.key()] = it.value();
            out.push_back({f.start, f.end - f.start, p.id, std::move(f.value), std::move(tuple)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.offset < b.offset; });
    return out;
}

std::vector<Observable> Lexicon::extract(const ProcedureRecord& record) const {
    std::vector<Observable> out;
    for (const auto& m : match(record.description_text))
        out.push_back(observable_from_tuple(m.value, m.tuple, record, kLexiconBackendTag));
    return out;
}

Observable observable_from_tuple(const std::string& value, const json& tuple, const ProcedureRecord& record,
                                 std::string_view backend) {
    Observable o;
    o.observable_value = value;
    auto detail = parse_detail_level(tuple.value("artifact_details", ""));
    if (!detail) throw Error("artifact_details: unknown level '" + tuple.value("artifact_details", "") + "'");
    o.artifact_details = *detail;
    o.data_source = tuple.value("data_source", "");
    o.classification = tuple.value("classification", "");
    std::string support = tuple.contains("STIX_supported") ? tuple.value("STIX_supported", "")
                                                           : tuple.value("stix_supported", "");
    o.stix_support = parse_support_string(support);
    auto prop = parse_proprietary(tuple.value("proprietary_artifact", ""));
    if (!prop) throw Error("proprietary_artifact: unknown class '" + tuple.value("proprietary_artifact", "") + "'");
    o.proprietary = *prop;
    if (tuple.contains("parser") && tuple["parser"].is_string()) o.parser = tuple["parser"].get<std::string>();
    if (tuple.contains("notes") && tuple["notes"].is_string()) o.notes = tuple["notes"].get<std::string>();
    o.technique_num = record.technique_id;
    o.description_id = record.description_id;
    o.related_malware = record.malware_name;
    o.backend = std::string(backend);
    o.review_status = ReviewStatus::Machine;
    return o;
}

}  // namespace icsgap
