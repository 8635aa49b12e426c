#include "icsgap/advisory.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "http.hpp"

namespace icsgap {

std::string_view to_string(RulesAvailable r) {
    switch (r) {
        case RulesAvailable::Yes: return "Yes";
        case RulesAvailable::YesExternal: return "Yes-External";
        case RulesAvailable::No: return "No";
    }
    return "No";
}

std::string_view to_string(TechDetail t) {
    switch (t) {
        case TechDetail::Yes: return "Yes";
        case TechDetail::Partial: return "Partial";
        case TechDetail::No: return "No";
    }
    return "No";
}

std::string_view to_string(ParserAvailability p) {
    switch (p) {
        case ParserAvailability::Yes: return "Yes";
        case ParserAvailability::Partial: return "Partial";
        case ParserAvailability::No: return "No";
        case ParserAvailability::NA: return "NA";
    }
    return "NA";
}

std::optional<RulesAvailable> parse_rules_available(std::string_view s) {
    for (auto r : kAllRules)
        if (to_string(r) == s) return r;
    return std::nullopt;
}

std::optional<TechDetail> parse_tech_detail(std::string_view s) {
    for (auto t : kAllTechDetail)
        if (to_string(t) == s) return t;
    return std::nullopt;
}

std::optional<ParserAvailability> parse_parser_availability(std::string_view s) {
    for (auto p : kAllParsers)
        if (to_string(p) == s) return p;
    return std::nullopt;
}

std::vector<std::string> validate_advisory(const AdvisoryRecord& r) {
    static const std::regex cve_re(R"(CVE-\d{4}-\d{4,})");
    std::vector<std::string> v;
    if (r.icsa_id.empty()) v.push_back("icsa_id: empty");
    for (size_t i = 0; i < r.cves.size(); ++i)
        if (!std::regex_match(r.cves[i], cve_re))
            v.push_back("cves[" + std::to_string(i) + "]: '" + r.cves[i] + "' is not a CVE id");
    if (r.protocol.empty()) v.push_back("protocol: empty");
    if (r.host_based()) {
        if (r.proprietary) v.push_back("proprietary: must be NA for host-based advisories");
        if (r.parsers != ParserAvailability::NA) v.push_back("parsers: must be NA for host-based advisories");
    } else {
        if (!r.proprietary) v.push_back("proprietary: required for network advisories");
        if (r.parsers == ParserAvailability::NA) v.push_back("parsers: NA is reserved for host-based advisories");
    }
    return v;
}

AdvisoryRecord advisory_from_json(const json& j) {
    if (!j.is_object()) throw Error("expected object");
    auto str = [&](const char* f) {
        if (!j.contains(f) || !j[f].is_string()) throw Error(std::string(f) + ": missing");
        return j[f].get<std::string>();
    };
    AdvisoryRecord r;
    r.icsa_id = str("icsa_id");
    if (!j.contains("cves") || !j["cves"].is_array()) throw Error("cves: missing");
    for (const auto& c : j["cves"]) {
        if (!c.is_string()) throw Error("cves: expected strings");
        r.cves.push_back(c.get<std::string>());
    }
    r.vendor = j.value("vendor", "");
    r.protocol = str("protocol");
    auto rules = parse_rules_available(str("rules_available"));
    if (!rules) throw Error("rules_available: expected Yes, Yes-External or No");
    r.rules_available = *rules;
    auto tech = parse_tech_detail(str("tech_detail"));
    if (!tech) throw Error("tech_detail: expected Yes, Partial or No");
    r.tech_detail = *tech;
    std::string prop = str("proprietary");
    if (prop != "NA") {
        r.proprietary = parse_proprietary(prop);
        if (!r.proprietary) throw Error("proprietary: unknown class '" + prop + "'");
    }
    auto parsers = parse_parser_availability(str("parsers"));
    if (!parsers) throw Error("parsers: expected Yes, Partial, No or NA");
    r.parsers = *parsers;
    r.in_kev = j.value("in_kev", false);
    r.note = j.value("note", "");
    auto v = validate_advisory(r);
    if (!v.empty()) throw Error(v.front());
    return r;
}

ojson to_json(const AdvisoryRecord& r) {
    ojson j;
    j["icsa_id"] = r.icsa_id;
    j["cves"] = r.cves;
    j["vendor"] = r.vendor;
    j["protocol"] = r.protocol;
    j["rules_available"] = std::string(to_string(r.rules_available));
    j["tech_detail"] = std::string(to_string(r.tech_detail));
    j["proprietary"] = r.proprietary ? std::string(to_string(*r.proprietary)) : "NA";
    j["parsers"] = std::string(to_string(r.parsers));
    j["in_kev"] = r.in_kev;
    j["note"] = r.note;
    return j;
}

std::vector<AdvisoryRecord> parse_advisories(const json& j) {
    const json* list = &j;
    if (j.is_object()) {
        if (!j.contains("advisories")) throw Error("advisories: missing");
        list = &j["advisories"];
    }
    if (!list->is_array()) throw Error("advisories: expected an array");
    std::vector<AdvisoryRecord> out;
    std::set<std::string> ids;
    for (size_t i = 0; i < list->size(); ++i) {
        std::string at = "advisories[" + std::to_string(i) + "]";
        try {
            out.push_back(advisory_from_json((*list)[i]));
        } catch (const Error& e) {
            throw Error(at + "." + e.what());
        }
        if (!ids.insert(out.back().icsa_id).second) throw Error(at + ".icsa_id: duplicate '" + out.back().icsa_id + "'");
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.icsa_id < b.icsa_id; });
    return out;
}

std::vector<AdvisoryRecord> load_advisories(const std::filesystem::path& path) {
    std::string text = read_file(path);
    if (trim(text).empty()) return {};
    try {
        return parse_advisories(json::parse(text));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string ReadinessVerdict::label() const {
    if (requirement1 && requirement2) return "Requirement-1 met; Requirement-2 met";
    if (requirement1) return "Requirement-1 met";
    if (requirement2) return "Requirement-2 met";
    return "unprotectable-by-detection";
}

ReadinessVerdict score_advisory(const AdvisoryRecord& r) {
    ReadinessVerdict v;
    v.requirement1 = r.rules_available != RulesAvailable::No;
    bool observable = r.host_based() || r.parsers == ParserAvailability::Yes || r.parsers == ParserAvailability::Partial;
    v.requirement2 = r.tech_detail == TechDetail::Yes && observable;
    return v;
}

AdvisoryTallies tally(const std::vector<AdvisoryRecord>& records) {
    AdvisoryTallies t;
    for (const auto& r : records) {
        ++t.total;
        auto v = score_advisory(r);
        if (r.rules_available != RulesAvailable::No) ++t.with_rules;
        if (r.tech_detail == TechDetail::No) ++t.no_tech_detail;
        if (r.tech_detail == TechDetail::Partial) ++t.partial_tech_detail;
        if (r.tech_detail == TechDetail::Yes) ++t.full_tech_detail;
        if (v.requirement1) ++t.requirement1;
        if (v.requirement2) ++t.requirement2;
        if (v.unprotectable()) ++t.unprotectable;
        if (r.host_based()) ++t.host_based;
        if (r.in_kev) ++t.in_kev;
    }
    return t;
}

std::string render_scorecard(const std::vector<AdvisoryRecord>& records) {
    std::ostringstream out;
    out << "| Advisory | Protocol | Rules | Tech detail | Proprietary | Parsers | Verdict |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : records) {
        out << "| " << r.icsa_id << " | " << r.protocol << " | " << to_string(r.rules_available) << " | "
            << to_string(r.tech_detail) << " | " << (r.proprietary ? to_string(*r.proprietary) : "NA") << " | "
            << to_string(r.parsers) << " | " << score_advisory(r).label() << " |\n";
    }
    auto t = tally(records);
    out << "\nadvisories: " << t.total << "\nwith rules: " << t.with_rules << "\nno technical detail: " << t.no_tech_detail
        << "\npartial technical detail: " << t.partial_tech_detail << "\nrequirement-1 met: " << t.requirement1
        << "\nrequirement-2 met: " << t.requirement2 << "\nunprotectable-by-detection: " << t.unprotectable << "\n";
    return out.str();
}

ojson scorecard_json(const std::vector<AdvisoryRecord>& records) {
    ojson j;
    j["advisories"] = ojson::array();
    for (const auto& r : records) {
        auto v = score_advisory(r);
        ojson row = to_json(r);
        row["requirement1"] = v.requirement1;
        row["requirement2"] = v.requirement2;
        row["verdict"] = v.label();
        j["advisories"].push_back(row);
    }
    auto t = tally(records);
    ojson tj;
    tj["total"] = t.total;
    tj["with_rules"] = t.with_rules;
    tj["no_tech_detail"] = t.no_tech_detail;
    tj["partial_tech_detail"] = t.partial_tech_detail;
    tj["full_tech_detail"] = t.full_tech_detail;
    tj["requirement1"] = t.requirement1;
    tj["requirement2"] = t.requirement2;
    tj["unprotectable"] = t.unprotectable;
    tj["host_based"] = t.host_based;
    tj["in_kev"] = t.in_kev;
    j["tallies"] = tj;
    return j;
}

std::string_view to_string(ParserStatus s) {
    switch (s) {
        case ParserStatus::Yes: return "Yes";
        case ParserStatus::No: return "No";
        case ParserStatus::Qualified: return "Qualified";
    }
    return "No";
}

std::string ParserRegistry::normalize(std::string_view name) {
    std::string s = to_lower(collapse_whitespace(name));
    std::replace(s.begin(), s.end(), '-', ' ');
    return collapse_whitespace(s);
}

ParserRegistry ParserRegistry::from_json(const json& j) {
    const json* list = &j;
    if (j.is_object()) {
        if (!j.contains("entries")) throw Error("entries: missing");
        list = &j["entries"];
    }
    if (!list->is_array()) throw Error("entries: expected an array");
    ParserRegistry reg;
    std::set<std::string> names;
    for (size_t i = 0; i < list->size(); ++i) {
        const auto& e = (*list)[i];
        std::string at = "entries[" + std::to_string(i) + "]";
        if (!e.is_object() || !e.contains("protocol") || !e["protocol"].is_string())
            throw Error(at + ".protocol: missing");
        ParserRegistryEntry entry;
        entry.protocol = e["protocol"];
        if (e.contains("aliases")) entry.aliases = e["aliases"].get<std::vector<std::string>>();
        std::string avail = e.value("parser_available", "");
        if (avail == "Yes") entry.parser_available = ParserStatus::Yes;
        else if (avail == "No") entry.parser_available = ParserStatus::No;
        else if (avail == "Qualified") entry.parser_available = ParserStatus::Qualified;
        else throw Error(at + ".parser_available: expected Yes, No or Qualified");
        entry.note = e.value("note", "");
        entry.source_context = e.value("source_context", "");
        std::set<std::string> own{normalize(entry.protocol)};
        for (const auto& a : entry.aliases) own.insert(normalize(a));
        for (const auto& n : own)
            if (!names.insert(n).second) throw Error(at + ": name '" + n + "' already belongs to another entry");
        reg.entries_.push_back(std::move(entry));
    }
    return reg;
}

ParserRegistry ParserRegistry::load(const std::filesystem::path& path) {
    try {
        return from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

RegistryLookup ParserRegistry::lookup(std::string_view protocol) const {
    std::string key = normalize(protocol);
    for (const auto& e : entries_) {
        if (normalize(e.protocol) == key) return {true, &e};
        for (const auto& a : e.aliases)
            if (normalize(a) == key) return {true, &e};
    }
    return {};
}

std::set<std::string> parse_kev(const json& catalog) {
    if (!catalog.is_object() || !catalog.contains("vulnerabilities") || !catalog["vulnerabilities"].is_array())
        throw Error("KEV catalog: missing 'vulnerabilities' array");
    std::set<std::string> out;
    for (const auto& v : catalog["vulnerabilities"])
        if (v.is_object() && v.contains("cveID") && v["cveID"].is_string()) out.insert(v["cveID"].get<std::string>());
    return out;
}

std::set<std::string> fetch_kev(const std::string& url, const std::filesystem::path& cache_path, double timeout_s) {
    auto res = detail::http_get(url, timeout_s);
    if (res.status == 200) {
        json j = json::parse(res.body, nullptr, false);
        if (!j.is_discarded()) {
            auto ids = parse_kev(j);
            if (!cache_path.empty()) write_file_atomic(cache_path, res.body);
            return ids;
        }
    }
    std::error_code ec;
    if (!cache_path.empty() && std::filesystem::exists(cache_path, ec))
        return parse_kev(json::parse(read_file(cache_path)));
    std::string why = res.status == 0 ? res.error : "HTTP " + std::to_string(res.status);
    throw Error("KEV fetch failed (" + why + ") and no cached copy at " + cache_path.string());
}

std::vector<std::string> kev_mismatches(const std::vector<AdvisoryRecord>& records, const std::set<std::string>& kev) {
    std::vector<std::string> out;
    for (const auto& r : records) {
        if (r.cves.empty()) continue;
        bool listed = std::any_of(r.cves.begin(), r.cves.end(), [&](const auto& c) { return kev.count(c) > 0; });
        if (listed != r.in_kev)
            out.push_back(r.icsa_id + ": in_kev is " + (r.in_kev ? "true" : "false") + " but the catalog " +
                          (listed ? "lists" : "does not list") + " its CVEs");
    }
    return out;
}

}  // namespace icsgap
