// Acceptance run over the shipped fixtures. One PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "icsgap/advisory.hpp"
#include "icsgap/analytics.hpp"
#include "icsgap/attack_ingest.hpp"
#include "icsgap/case_study.hpp"
#include "icsgap/extraction.hpp"
#include "icsgap/pipeline.hpp"
#include "icsgap/quality_control.hpp"
#include "icsgap/stix_extensions.hpp"
#include "test_support.hpp"

using namespace icsgap;
using icsgap::test::kDataDir;
using icsgap::test::kExtensionsDir;
using icsgap::test::kFixtureDir;
using icsgap::test::oracles;

namespace {

namespace fs = std::filesystem;

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [" << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const fs::path kBundle = kDataDir / "attack" / "ics-attack-pinned.json";
const fs::path kCurated = kDataDir / "curation" / "observables.curated.jsonl";

void ingestion(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto result = extract_procedures(load_bundle(kBundle.string()));
    double secs = seconds_since(t0);
    std::set<std::string> techniques, malware;
    for (const auto& r : result.records) {
        techniques.insert(r.technique_id);
        malware.insert(r.malware_name);
    }
    o.detail << "records=" << result.records.size() << " techniques=" << techniques.size()
             << " malware=" << malware.size() << " time=" << secs << "s";
    o.check(result.records.size() == 196, "records != 196");
    o.check(techniques.size() == 79, "techniques != 79");
    o.check(malware.size() == 22, "malware != 22");
    o.check(secs < 5.0, "slower than 5 s");
}

void headline(Outcome& o) {
    auto t0 = std::chrono::steady_clock::now();
    GapReport r = aggregate(read_dataset(kCurated));
    double secs = seconds_since(t0);
    Count full = r.support_histogram[SupportLevel::Full], partial = r.support_histogram[SupportLevel::Partial],
          no = r.support_histogram[SupportLevel::No], act = r.detail_histogram[DetailLevel::Actionable];
    o.detail << "support=" << full << "/" << partial << "/" << no << " actionable=" << act << "/" << r.total - act
             << " actionable_unsupported=" << r.actionable_unsupported << " time=" << secs << "s";
    o.check(full == 101 && partial == 191 && no == 69, "support split");
    o.check(act == 87 && r.total - act == 274, "detail split");
    o.check(r.actionable_unsupported == 48, "actionable unsupported");
    o.check(secs < 1.0, "slower than 1 s");
}

void data_sources(Outcome& o) {
    GapReport r = aggregate(read_dataset(kCurated));
    Count net = r.by_data_source["Network traffic"], hist = r.by_data_source["ICS historian"];
    o.detail << "Network traffic=" << net << " ICS historian=" << hist;
    o.check(net == 93, "network traffic != 93");
    o.check(hist == 50, "ICS historian != 50");
}

std::string level_of(const std::string& stix_cell) { return stix_cell.substr(0, stix_cell.find(" - ")); }

std::string parser_key(const std::string& p) { return collapse_whitespace(to_lower(std::string(p))); }

void case_tables(Outcome& o) {
    auto tables = case_study_tables(load_case_studies(kDataDir / "case_studies.json"));
    json cells = json::parse(read_file(kFixtureDir / "case_cells.json"));
    std::vector<CaseTableRow> rows;
    for (const auto& t : tables.tables) rows.insert(rows.end(), t.rows.begin(), t.rows.end());
    size_t mismatches = 0;
    for (size_t i = 0; i < std::min(rows.size(), cells.size()); ++i) {
        const auto& c = cells[i];
        std::string parser = rows[i].parser;
        std::replace(parser.begin(), parser.end(), '-', ' ');
        bool same = rows[i].technique == c["technique"] && level_of(rows[i].stix) == c["stix"] &&
                    rows[i].detail == c["detail"] && rows[i].proprietary == c["proprietary"] &&
                    parser_key(parser) == c["parser"];
        if (!same) {
            ++mismatches;
            o.detail << " mismatch@" << i << "(" << rows[i].technique << ")";
        }
    }
    o.detail << "tables=" << tables.tables.size() << " rows=" << rows.size() << " source_rows=" << cells.size()
             << " mismatches=" << mismatches;
    o.check(tables.tables.size() == 9, "tables != 9");
    o.check(rows.size() == cells.size(), "row count differs from the source tables");
    o.check(mismatches == 0, "cell mismatches");
    o.check(tables.warnings.empty(), "warnings");
}

void advisories(Outcome& o) {
    auto t = tally(load_advisories(kDataDir / "advisories.json"));
    size_t combos = 0, wrong = 0;
    for (const auto& row : oracles()["advisory_truth_table"]) {
        AdvisoryRecord a;
        a.rules_available = *parse_rules_available(row["rules"].get<std::string>());
        a.tech_detail = *parse_tech_detail(row["tech"].get<std::string>());
        a.parsers = *parse_parser_availability(row["parsers"].get<std::string>());
        std::string proto = row["protocol"];
        a.protocol = proto == "NA-host" ? std::string(kHostProtocol) : "Proto";
        if (proto == "open") a.proprietary = ProprietaryClass::OpenStandard;
        if (proto == "undocumented") a.proprietary = ProprietaryClass::ProprietaryUndocumented;
        auto v = score_advisory(a);
        ++combos;
        if (v.requirement1 != row["r1"].get<bool>() || v.requirement2 != row["r2"].get<bool>()) ++wrong;
    }
    o.detail << "advisories=" << t.total << " with_rules=" << t.with_rules << " no_detail=" << t.no_tech_detail
             << " partial=" << t.partial_tech_detail << " truth_table=" << combos - wrong << "/" << combos;
    o.check(t.total == 9, "rows != 9");
    o.check(t.with_rules == 2 && t.no_tech_detail == 4 && t.partial_tech_detail == 3, "tallies");
    o.check(combos == 108 && wrong == 0, "truth table");
}

RunConfig run_config(const fs::path& out, unsigned workers) {
    RunConfig c;
    c.bundle_source = kBundle.string();
    c.backend.lexicon_path = kDataDir / "lexicon.json";
    c.coverage_map = kDataDir / "coverage_map.json";
    c.corrections = kDataDir / "curation" / "corrections.json";
    c.out_dir = out;
    c.workers = workers;
    return c;
}

std::string citation_tail(test::ObservableGen& g) {
    static const std::vector<std::string> tails{"", "(Citation: B)", "[a](b) c", "\t end"};
    return g.pick(tails);
}

// Compact versions of the property suites, 1000 seeded cases each.
size_t property_failures() {
    size_t bad = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        test::ObservableGen g(seed);
        auto d = g.dataset(30);
        auto once = dedupe(d);
        if (dedupe(once) != once) ++bad;
        std::string raw = "see [Triton](http://x)  (Citation: A)\n " + (d.empty() ? "" : d[0].observable_value) +
                          std::string(g.below(3), ' ') + citation_tail(g);
        auto n = normalize_text(raw);
        if (normalize_text(n.first).first != n.first) ++bad;
        Observable x = g.next();
        if (parse_support_string(serialize_support(x.stix_support)) != x.stix_support) ++bad;
        if (observable_from_json(json::parse(to_json(x).dump())) != x) ++bad;
        GapReport r = aggregate(d);
        Count sum = 0;
        for (const auto& [k, v] : r.support_histogram) sum += v;
        if (sum != r.total) ++bad;
        if (aggregate_parallel(d, 4) != r) ++bad;
        std::vector<Correction> cs;
        for (size_t i = 0; i < once.size() && i < 3; ++i) {
            Correction c;
            c.target = {once[i].description_id, once[i].observable_value, once[i].classification};
            c.reviewer = "r";
            c.rationale = "x";
            c.timestamp = "2025-01-01T00:00:00Z";
            if (i == 1) {
                c.action = CorrectionAction::Reject;
            } else {
                c.field = "data_source";
                c.old_value = once[i].data_source;
                c.new_value = "ICS historian";
            }
            cs.push_back(c);
        }
        auto applied = apply_corrections(once, cs);
        if (replay_audit(once, applied.audit) != applied.dataset) ++bad;
    }
    return bad;
}

void determinism(Outcome& o) {
    test::TempDir dir;
    std::ostringstream log;
    std::vector<std::string> manifests;
    for (auto [name, workers] : {std::pair{"a", 1u}, {"b", 1u}, {"c", 4u}}) {
        int rc = run_pipeline(run_config(dir / name, workers), log);
        o.check(rc == kExitOk, std::string("run ") + name + " exit " + std::to_string(rc));
        manifests.push_back(rc == kExitOk ? read_file(dir / name / stage_files::kManifest) : "");
    }
    bool runs_equal = manifests[0] == manifests[1] && manifests[0] == manifests[2];
    auto schemas = load_schemas(kExtensionsDir);
    bool emit_equal = emit_extension_bundle(schemas).dump() == emit_extension_bundle(load_schemas(kExtensionsDir)).dump();
    size_t bad = property_failures();
    o.detail << "runs{1,1,4 workers} identical=" << (runs_equal ? "yes" : "no")
             << " extension emission identical=" << (emit_equal ? "yes" : "no") << " property failures=" << bad << "/1000 seeds";
    o.check(runs_equal, "pipeline outputs differ");
    o.check(emit_equal, "extension emission differs");
    o.check(bad == 0, "property failures");
}

void csw_contract(Outcome& o) {
    json csw = json::parse(read_file(kDataDir / "examples" / "csw_observable.json"));
    static const std::vector<std::string> model_fields{"observable_value", "artifact_details", "data_source",
                                                       "classification",   "STIX_supported",   "proprietary_artifact",
                                                       "parser",           "notes"};
    json model = json::object();
    for (const auto& f : model_fields) model[f] = csw[f];
    auto records = extract_procedures(load_bundle(kBundle.string())).records;
    ProvenanceIndex index = provenance_index(records);
    size_t resp = validate_response({{"observables", {model}}}).size();
    size_t obs = validate_observable_json(csw, &index).size();
    o.detail << "response violations=" << resp << " observable violations=" << obs;
    o.check(resp == 0, "response violations");
    o.check(obs == 0, "observable violations");
    size_t bad = 0;
    for (const auto& f : model_fields) {
        json m = model;
        m.erase(f);
        if (validate_response({{"observables", {m}}}).size() != 1) {
            ++bad;
            o.detail << " response-drop(" << f << ")";
        }
    }
    for (const auto& [f, v] : csw.items()) {
        json m = csw;
        m.erase(f);
        if (validate_observable_json(m, &index).size() != 1) {
            ++bad;
            o.detail << " observable-drop(" << f << ")";
        }
    }
    o.detail << " mutations=" << model_fields.size() + csw.size() << " not-exactly-one=" << bad;
    o.check(bad == 0, "mutation violations");
}

void stix_round_trip(Outcome& o) {
    auto schemas = load_schemas(kExtensionsDir);
    auto first = emit_extension_bundle(schemas);
    auto parsed = parse_extension_bundle(json::parse(first.dump()));
    bool fixed = emit_extension_bundle(parsed).dump() == first.dump() && parsed == schemas;
    size_t bundle_violations = validate_extension_bundle(json::parse(first.dump())).size();
    size_t eligible = 0, converted = 0, reasoned = 0, invalid = 0;
    for (const auto& x : read_dataset(kCurated)) {
        if (x.review_status == ReviewStatus::Rejected || x.stix_support.level == SupportLevel::Full) continue;
        ++eligible;
        auto r = represent_observable(x, schemas);
        if (r.instance) {
            ++converted;
            for (const auto& s : schemas)
                if (s.name == r.schema && !validate_instance(json::parse(r.instance->dump()), s).empty()) ++invalid;
        } else if (!r.reason.empty()) {
            ++reasoned;
        }
    }
    o.detail << "schemas=" << schemas.size() << " fixed_point=" << (fixed ? "yes" : "no")
             << " bundle_violations=" << bundle_violations << " partial_or_no=" << eligible << " converted=" << converted
             << " with_reason=" << reasoned << " invalid_instances=" << invalid;
    o.check(schemas.size() == 5, "schemas != 5");
    o.check(fixed, "not a fixed point");
    o.check(bundle_violations == 0, "bundle violations");
    o.check(eligible > 0 && converted + reasoned == eligible, "unaccounted observables");
    o.check(invalid == 0, "invalid instances");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {"ingestion counts", ingestion},
        {"headline aggregates", headline},
        {"data-source distribution", data_sources},
        {"case-study tables", case_tables},
        {"advisory scorecard", advisories},
        {"determinism", determinism},
        {"CSW contract", csw_contract},
        {"STIX extension round-trip", stix_round_trip}};
    int failed = 0;
    int n = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail << " exception: " << e.what();
        }
        if (!o.ok) ++failed;
        std::cout << (o.ok ? "PASS" : "FAIL") << " " << ++n << " " << name << ": " << o.detail.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
