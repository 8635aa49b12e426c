#include "icsgap/case_study.hpp"

#include <algorithm>
#include <sstream>

namespace icsgap {

namespace {

std::string req_string(const json& j, const char* f, const std::string& at) {
    if (!j.contains(f) || !j[f].is_string()) throw Error(at + "." + f + ": missing");
    return j[f].get<std::string>();
}

CaseStudyRow parse_row(const json& r, const std::string& at) {
    if (!r.is_object()) throw Error(at + ": expected object");
    CaseStudyRow row;
    row.technique = req_string(r, "technique", at);
    row.data_source = req_string(r, "data_source", at);
    row.artifact = req_string(r, "artifact", at);
    if (!r.contains("stix") || !r["stix"].is_object()) throw Error(at + ".stix: missing");
    std::string support = req_string(r["stix"], "support", at + ".stix");
    const json& obj = r["stix"].contains("object") ? r["stix"]["object"] : json(nullptr);
    if (support == "No") {
        if (!obj.is_null()) throw Error(at + ".stix.object: must be null for No");
    } else if (support == "Full" || support == "Partial") {
        if (!obj.is_string()) throw Error(at + ".stix.object: required for " + support);
        row.stix = {support == "Full" ? SupportLevel::Full : SupportLevel::Partial, obj.get<std::string>()};
        if (!is_known_sco(row.stix.sco_name))
            throw Error(at + ".stix.object: unknown STIX object '" + row.stix.sco_name + "'");
    } else {
        throw Error(at + ".stix.support: expected Full, Partial or No");
    }
    auto detail = parse_detail_level(req_string(r, "artifact_details", at));
    if (!detail) throw Error(at + ".artifact_details: unknown level");
    row.detail = *detail;
    std::string prop = req_string(r, "proprietary", at);
    if (prop != "NA") {
        row.proprietary = parse_proprietary(prop);
        if (!row.proprietary) throw Error(at + ".proprietary: unknown class '" + prop + "'");
    }
    row.parser = req_string(r, "parser", at);
    if (row.parser != "Yes" && row.parser != "No" && row.parser != "NA" && row.parser != "NA - host")
        throw Error(at + ".parser: expected Yes, No, NA or 'NA - host'");
    return row;
}

}  // namespace

CaseStudySet parse_case_studies(const json& j) {
    if (!j.is_object() || j.value("schema_version", 0) != 1) throw Error("schema_version: expected 1");
    if (!j.contains("groups") || !j["groups"].is_array()) throw Error("groups: missing");
    CaseStudySet s;
    for (size_t i = 0; i < j["groups"].size(); ++i) {
        const auto& g = j["groups"][i];
        std::string at = "groups[" + std::to_string(i) + "]";
        if (!g.is_object()) throw Error(at + ": expected object");
        CaseStudyGroup grp;
        grp.id = req_string(g, "id", at);
        grp.malware = req_string(g, "malware", at);
        grp.title = req_string(g, "title", at);
        if (g.contains("expected_techniques")) grp.expected_techniques = g["expected_techniques"].get<std::vector<std::string>>();
        if (!g.contains("rows") || !g["rows"].is_array()) throw Error(at + ".rows: missing");
        for (size_t k = 0; k < g["rows"].size(); ++k)
            grp.rows.push_back(parse_row(g["rows"][k], at + ".rows[" + std::to_string(k) + "]"));
        s.groups.push_back(std::move(grp));
    }
    return s;
}

CaseStudySet load_case_studies(const std::filesystem::path& path) {
    try {
        return parse_case_studies(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string render_stix_cell(const StixSupport& s) {
    if (s.level == SupportLevel::No) return "No";
    return std::string(to_string(s.level)) + " - " + s.sco_name;
}

size_t CaseTables::row_count() const {
    size_t n = 0;
    for (const auto& t : tables) n += t.rows.size();
    return n;
}

CaseTables case_study_tables(const CaseStudySet& set) {
    CaseTables out;
    if (set.groups.empty()) out.warnings.push_back("no case-study entries");
    for (const auto& g : set.groups) {
        CaseTable t{g.id, g.malware, g.title, {}, {}};
        for (const auto& r : g.rows) {
            t.rows.push_back({r.technique, r.data_source, r.artifact, render_stix_cell(r.stix),
                              std::string(to_string(r.detail)),
                              r.proprietary ? std::string(to_string(*r.proprietary)) : "NA", r.parser});
        }
        for (const auto& tech : g.expected_techniques) {
            bool present = std::any_of(g.rows.begin(), g.rows.end(), [&](const auto& r) { return r.technique == tech; });
            if (!present) t.gaps.push_back(tech);
        }
        if (!t.gaps.empty()) out.warnings.push_back(g.id + ": missing entries for " + join(t.gaps, ", "));
        if (t.rows.empty()) out.warnings.push_back(g.id + ": no rows");
        out.tables.push_back(std::move(t));
    }
    return out;
}

std::string render_case_tables_markdown(const CaseTables& t) {
    std::ostringstream out;
    out << "# Case-Study Tables\n";
    for (const auto& w : t.warnings) out << "\n> warning: " << w << "\n";
    for (const auto& tab : t.tables) {
        out << "\n## " << tab.malware << ": " << tab.title << "\n\n";
        out << "| Technique | Data source | Artifact | STIX | Detailedness | Proprietary | Parser |\n";
        out << "|---|---|---|---|---|---|---|\n";
        for (const auto& r : tab.rows) {
            out << "| " << r.technique << " | " << r.data_source << " | " << r.artifact << " | " << r.stix << " | "
                << r.detail << " | " << r.proprietary << " | " << r.parser << " |\n";
        }
        for (const auto& gap : tab.gaps) out << "| " << gap << " | (missing) | | | | | |\n";
    }
    return out.str();
}

ojson case_tables_json(const CaseTables& t) {
    ojson j;
    j["warnings"] = t.warnings;
    j["tables"] = ojson::array();
    for (const auto& tab : t.tables) {
        ojson jt;
        jt["group"] = tab.group_id;
        jt["malware"] = tab.malware;
        jt["title"] = tab.title;
        jt["rows"] = ojson::array();
        for (const auto& r : tab.rows) {
            ojson jr;
            jr["technique"] = r.technique;
            jr["data_source"] = r.data_source;
            jr["artifact"] = r.artifact;
            jr["stix"] = r.stix;
            jr["detail"] = r.detail;
            jr["proprietary"] = r.proprietary;
            jr["parser"] = r.parser;
            jt["rows"].push_back(jr);
        }
        jt["gaps"] = tab.gaps;
        j["tables"].push_back(jt);
    }
    return j;
}

}  // namespace icsgap
