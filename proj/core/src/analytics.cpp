#include "icsgap/analytics.hpp"

#include <algorithm>
#include <sstream>
#include <thread>

namespace icsgap {

namespace {

constexpr ProprietaryClass kAllProprietary[] = {ProprietaryClass::OpenStandard, ProprietaryClass::ProprietaryDocumented,
                                                ProprietaryClass::ProprietaryUndocumented};

size_t idx(DetailLevel d) { return static_cast<size_t>(d); }

template <class K, class V>
void add_into(std::map<K, V>& dst, const std::map<K, V>& src) {
    for (const auto& [k, v] : src) {
        if constexpr (std::is_same_v<V, DetailRow>) {
            auto& row = dst[k];
            for (size_t i = 0; i < row.size(); ++i) row[i] += v[i];
        } else {
            dst[k] += v;
        }
    }
}

}  // namespace

GapReport::GapReport() {
    for (auto s : kAllSupportLevels) support_histogram[s] = 0;
    for (auto d : kAllDetailLevels) detail_histogram[d] = 0;
    for (auto p : kAllProprietary) proprietary_histogram[p] = 0;
}

GapReport aggregate(const std::vector<Observable>& dataset) {
    GapReport r;
    for (const auto& o : dataset) {
        if (o.review_status == ReviewStatus::Rejected) continue;
        ++r.total;
        ++r.support_histogram[o.stix_support.level];
        ++r.detail_histogram[o.artifact_details];
        ++r.proprietary_histogram[o.proprietary];
        if (o.artifact_details == DetailLevel::Actionable && o.stix_support.level != SupportLevel::Full)
            ++r.actionable_unsupported;
        ++r.by_data_source[o.data_source];
        ++r.by_classification[o.classification];
        ++r.by_malware[o.related_malware];
        ++r.by_technique[o.technique_num];
        ++r.classification_by_detail[o.classification][idx(o.artifact_details)];
        ++r.data_source_by_detail[o.data_source][idx(o.artifact_details)];
        if (o.has_flag(kFlagUnmappedLabel)) r.unmapped_labels.insert(o.classification);
    }
    return r;
}

GapReport merge(const GapReport& a, const GapReport& b) {
    GapReport r = a;
    r.total += b.total;
    add_into(r.support_histogram, b.support_histogram);
    add_into(r.detail_histogram, b.detail_histogram);
    add_into(r.proprietary_histogram, b.proprietary_histogram);
    r.actionable_unsupported += b.actionable_unsupported;
    add_into(r.by_data_source, b.by_data_source);
    add_into(r.by_classification, b.by_classification);
    add_into(r.by_malware, b.by_malware);
    add_into(r.by_technique, b.by_technique);
    add_into(r.classification_by_detail, b.classification_by_detail);
    add_into(r.data_source_by_detail, b.data_source_by_detail);
    r.unmapped_labels.insert(b.unmapped_labels.begin(), b.unmapped_labels.end());
    return r;
}

GapReport aggregate_parallel(const std::vector<Observable>& dataset, unsigned workers) {
    workers = std::max(1u, workers);
    if (workers == 1 || dataset.size() < 2) return aggregate(dataset);
    std::vector<GapReport> parts(workers);
    std::vector<std::thread> pool;
    size_t chunk = (dataset.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            size_t lo = std::min(dataset.size(), w * chunk), hi = std::min(dataset.size(), lo + chunk);
            parts[w] = aggregate(std::vector<Observable>(dataset.begin() + lo, dataset.begin() + hi));
        });
    }
    for (auto& t : pool) t.join();
    GapReport r;
    for (const auto& p : parts) r = merge(r, p);
    return r;
}

std::string format_percent(Count count, Count total) {
    if (total == 0) return "0.0%";
    Count scaled = count * 1000;
    Count q = scaled / total, rem = scaled % total;
    if (2 * rem > total || (2 * rem == total && q % 2 == 1)) ++q;
    return std::to_string(q / 10) + "." + std::to_string(q % 10) + "%";
}

std::vector<std::pair<std::string, Count>> top_k(const std::map<std::string, Count>& counts, size_t k) {
    std::vector<std::pair<std::string, Count>> v(counts.begin(), counts.end());
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (v.size() > k) v.resize(k);
    return v;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
    if (s == "json") return ReportFormat::Json;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    return std::nullopt;
}

std::string_view extension_for(ReportFormat f) {
    switch (f) {
        case ReportFormat::Json: return "json";
        case ReportFormat::Csv: return "csv";
        case ReportFormat::Markdown: return "md";
    }
    return "txt";
}

std::string render(const GapReport& r, ReportFormat f) {
    switch (f) {
        case ReportFormat::Json: return render_json(r);
        case ReportFormat::Csv: return render_csv(r);
        case ReportFormat::Markdown: return render_markdown(r);
    }
    throw Error("unsupported report format");
}

namespace {

ojson detail_row_json(const DetailRow& row) {
    ojson j;
    for (auto d : kAllDetailLevels) j[std::string(to_string(d))] = row[idx(d)];
    return j;
}

ojson count_map_json(const std::map<std::string, Count>& m) {
    ojson j = ojson::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

}  // namespace

std::string render_json(const GapReport& r) {
    ojson j;
    j["schema_version"] = 1;
    j["total"] = r.total;
    ojson s;
    for (auto l : kAllSupportLevels) s[std::string(to_string(l))] = r.support_histogram.at(l);
    j["support_histogram"] = s;
    ojson d;
    for (auto l : kAllDetailLevels) d[std::string(to_string(l))] = r.detail_histogram.at(l);
    j["detail_histogram"] = d;
    ojson p;
    for (auto l : kAllProprietary) p[std::string(to_string(l))] = r.proprietary_histogram.at(l);
    j["proprietary_histogram"] = p;
    j["actionable_unsupported"] = r.actionable_unsupported;
    j["by_data_source"] = count_map_json(r.by_data_source);
    j["by_classification"] = count_map_json(r.by_classification);
    j["by_malware"] = count_map_json(r.by_malware);
    j["by_technique"] = count_map_json(r.by_technique);
    ojson cd = ojson::object();
    for (const auto& [k, row] : r.classification_by_detail) cd[k] = detail_row_json(row);
    j["classification_by_detail"] = cd;
    ojson dd = ojson::object();
    for (const auto& [k, row] : r.data_source_by_detail) dd[k] = detail_row_json(row);
    j["data_source_by_detail"] = dd;
    j["unmapped_labels"] = std::vector<std::string>(r.unmapped_labels.begin(), r.unmapped_labels.end());
    return j.dump(2) + "\n";
}

GapReport report_from_json(const json& j) {
    if (!j.is_object() || j.value("schema_version", 0) != 1) throw Error("report: expected schema_version 1");
    GapReport r;
    try {
        r.total = j.at("total").get<Count>();
        for (auto l : kAllSupportLevels) r.support_histogram[l] = j.at("support_histogram").at(std::string(to_string(l)));
        for (auto l : kAllDetailLevels) r.detail_histogram[l] = j.at("detail_histogram").at(std::string(to_string(l)));
        for (auto l : kAllProprietary)
            r.proprietary_histogram[l] = j.at("proprietary_histogram").at(std::string(to_string(l)));
        r.actionable_unsupported = j.at("actionable_unsupported").get<Count>();
        r.by_data_source = j.at("by_data_source").get<std::map<std::string, Count>>();
        r.by_classification = j.at("by_classification").get<std::map<std::string, Count>>();
        r.by_malware = j.at("by_malware").get<std::map<std::string, Count>>();
        r.by_technique = j.at("by_technique").get<std::map<std::string, Count>>();
        auto rows = [](const json& m) {
            std::map<std::string, DetailRow> out;
            for (auto it = m.begin(); it != m.end(); ++it) {
                DetailRow row{};
                for (auto d : kAllDetailLevels) row[idx(d)] = it.value().at(std::string(to_string(d)));
                out[it.key()] = row;
            }
            return out;
        };
        r.classification_by_detail = rows(j.at("classification_by_detail"));
        r.data_source_by_detail = rows(j.at("data_source_by_detail"));
        for (const auto& l : j.at("unmapped_labels")) r.unmapped_labels.insert(l.get<std::string>());
    } catch (const json::exception& e) {
        throw Error(std::string("report: ") + e.what());
    }
    return r;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

std::string render_csv(const GapReport& r) {
    std::ostringstream out;
    out << "dimension,key,count\n";
    auto row = [&](const std::string& dim, const std::string& key, Count n) {
        if (n) out << dim << ',' << csv_field(key) << ',' << n << '\n';
    };
    row("total", "observables", r.total);
    for (auto l : kAllSupportLevels) row("stix_support", std::string(to_string(l)), r.support_histogram.at(l));
    for (auto l : kAllDetailLevels) row("artifact_details", std::string(to_string(l)), r.detail_histogram.at(l));
    for (auto l : kAllProprietary) row("proprietary", std::string(to_string(l)), r.proprietary_histogram.at(l));
    row("actionable_unsupported", "Actionable & (Partial|No)", r.actionable_unsupported);
    for (const auto& [k, v] : r.by_data_source) row("data_source", k, v);
    for (const auto& [k, v] : r.by_classification) row("classification", k, v);
    for (const auto& [k, v] : r.by_malware) row("malware", k, v);
    for (const auto& [k, v] : r.by_technique) row("technique", k, v);
    return out.str();
}

std::string render_markdown(const GapReport& r) {
    std::ostringstream out;
    auto pct = [&](Count n) { return format_percent(n, r.total); };
    out << "# STIX Coverage Gap Report\n\n";
    out << "Observables analysed: " << r.total << "\n\n";

    out << "## STIX Support\n\n| Support | Count | Share |\n|---|---:|---:|\n";
    for (auto l : kAllSupportLevels)
        out << "| " << to_string(l) << " | " << r.support_histogram.at(l) << " | " << pct(r.support_histogram.at(l))
            << " |\n";
    Count unsupported = r.support_histogram.at(SupportLevel::Partial) + r.support_histogram.at(SupportLevel::No);
    out << "\nPartial or No support: " << unsupported << " (" << pct(unsupported) << ")\n\n";

    out << "## Artifact Detail\n\n| Detail | Count | Share |\n|---|---:|---:|\n";
    for (auto l : kAllDetailLevels)
        out << "| " << to_string(l) << " | " << r.detail_histogram.at(l) << " | " << pct(r.detail_histogram.at(l))
            << " |\n";
    Count actionable = r.detail_histogram.at(DetailLevel::Actionable);
    out << "\nNot actionable: " << r.total - actionable << " (" << pct(r.total - actionable) << ")\n";
    out << "Actionable with Partial or No support: " << r.actionable_unsupported << " of " << actionable << " ("
        << format_percent(r.actionable_unsupported, actionable) << ")\n\n";

    out << "## Proprietary Dependency\n\n| Technology | Count | Share |\n|---|---:|---:|\n";
    for (auto l : kAllProprietary)
        out << "| " << to_string(l) << " | " << r.proprietary_histogram.at(l) << " | "
            << pct(r.proprietary_histogram.at(l)) << " |\n";

    auto stacked = [&](const char* title, const char* dim, const std::map<std::string, Count>& counts,
                       const std::map<std::string, DetailRow>& rows, size_t k) {
        out << "\n## " << title << "\n\n| " << dim;
        for (auto d : kAllDetailLevels) out << " | " << to_string(d);
        out << " | Total |\n|---";
        for (size_t i = 0; i <= std::size(kAllDetailLevels); ++i) out << "|---:";
        out << "|\n";
        for (const auto& [label, n] : top_k(counts, k)) {
            out << "| " << md_cell(label);
            const auto& row = rows.at(label);
            for (auto d : kAllDetailLevels) out << " | " << row[idx(d)];
            out << " | " << n << " |\n";
        }
    };
    stacked("Top 10 Classification Categories", "Classification", r.by_classification, r.classification_by_detail, 10);
    stacked("Top 5 Data Sources", "Data source", r.by_data_source, r.data_source_by_detail, 5);

    out << "\n## Malware Families\n\n| Malware | Count |\n|---|---:|\n";
    for (const auto& [k, v] : top_k(r.by_malware, r.by_malware.size())) out << "| " << md_cell(k) << " | " << v << " |\n";

    out << "\n## Unmapped Classification Labels\n\n";
    if (r.unmapped_labels.empty()) out << "None.\n";
    for (const auto& l : r.unmapped_labels) out << "- " << l << "\n";
    return out.str();
}

}  // namespace icsgap
