#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "icsgap/advisory.hpp"
#include "icsgap/analytics.hpp"
#include "icsgap/attack_ingest.hpp"
#include "icsgap/case_study.hpp"
#include "icsgap/extraction.hpp"
#include "icsgap/pipeline.hpp"
#include "icsgap/quality_control.hpp"
#include "icsgap/stix_extensions.hpp"
#include "icsgap/taxonomy.hpp"
#include "icsgap/version.hpp"

namespace fs = std::filesystem;
using namespace icsgap;

namespace {

const fs::path kDataDir = ICSGAP_DEFAULT_DATA_DIR;
const fs::path kExtensionsDir = ICSGAP_DEFAULT_EXTENSIONS_DIR;

struct ConfigError : Error {
    using Error::Error;
};

void require_file(const fs::path& p, const std::string& what) {
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw ConfigError(what + ": file not found: " + p.string());
}

void emit(const std::string& content, const std::string& out) {
    if (out.empty() || out == "-") std::cout << content;
    else write_file_atomic(out, content);
}

std::vector<Observable> read_input_dataset(const fs::path& p) {
    require_file(p, "dataset");
    return read_dataset(p);
}

struct Opts {
    // shared
    std::string in, out, out_dir, format = "markdown";
    std::string bundle = (kDataDir / "attack" / "ics-attack-pinned.json").string();
    std::string map = (kDataDir / "coverage_map.json").string();
    std::string lexicon = (kDataDir / "lexicon.json").string();
    std::string corrections;
    std::string records;
    unsigned workers = 1;
    // ingest
    bool include_revoked = false, include_deprecated = false;
    std::vector<std::string> malware;
    // extract
    std::string backend = "lexicon", endpoint, model, cache_dir, failures;
    int max_retries = 2;
    double timeout = 60.0, rate = 60.0;
    bool trace = false;
    // qc
    std::string audit;
    // report / run
    std::vector<std::string> formats{"json", "csv", "markdown"};
    // advisories / registry / case tables / extensions
    bool fixture = false;
    std::string advisories, registry, case_studies, kev_url, kev_cache;
    std::string protocol;
    std::string extensions_dir = kExtensionsDir.string();
};

ExtractionBackendConfig backend_config(const Opts& o) {
    ExtractionBackendConfig c;
    auto kind = parse_backend_kind(o.backend);
    if (!kind) throw ConfigError("--backend: expected lexicon or llm");
    c.kind = *kind;
    if (c.kind == BackendKind::Llm) {
        if (!o.endpoint.empty()) c.endpoint = o.endpoint;
        if (!o.model.empty()) c.model_name = o.model;
        c.cache_dir = o.cache_dir;
    } else {
        if (!o.endpoint.empty()) c.endpoint = o.endpoint;
        if (!o.model.empty()) c.model_name = o.model;
        c.lexicon_path = o.lexicon;
    }
    c.max_retries = o.max_retries;
    c.timeout_s = o.timeout;
    c.max_requests_per_minute = o.rate;
    c.trace = o.trace;
    auto errors = validate_config(c);
    if (!errors.empty()) throw ConfigError(join(errors, "; "));
    if (c.kind == BackendKind::Lexicon) require_file(c.lexicon_path, "lexicon");
    return c;
}

int cmd_ingest(const Opts& o) {
    if (!o.bundle.empty() && o.bundle.rfind("http", 0) != 0) require_file(o.bundle, "bundle");
    MalwareFilter f;
    f.include_revoked = o.include_revoked;
    f.include_deprecated = o.include_deprecated;
    f.only_names.insert(o.malware.begin(), o.malware.end());
    Bundle b = load_bundle(o.bundle);
    auto res = extract_procedures(b, f);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
    std::set<std::string> techniques, malware;
    for (const auto& r : res.records) {
        techniques.insert(r.technique_id);
        malware.insert(r.malware_name);
    }
    emit(dump_records(res.records), o.out);
    std::cerr << "records: " << res.records.size() << "\ntechniques: " << techniques.size()
              << "\nmalware: " << malware.size() << "\n";
    return kExitOk;
}

int cmd_extract(const Opts& o) {
    require_file(o.records, "records");
    auto cfg = backend_config(o);
    auto records = read_records(o.records);
    auto backend = make_backend(cfg);
    auto run = extract_all(records, *backend, o.workers);
    emit(dump_dataset(run.observables), o.out);
    if (!o.failures.empty()) {
        std::vector<ojson> rows;
        for (const auto& f : run.failures) rows.push_back(to_json(f));
        write_file_atomic(o.failures, dump_ndjson(rows));
    }
    std::cerr << "observables: " << run.observables.size() << "\nfailed records: " << run.failures.size()
              << "\ncache hits: " << run.cache_hits << "\n";
    return kExitOk;
}

int cmd_classify(const Opts& o) {
    require_file(o.map, "coverage map");
    auto ds = read_input_dataset(o.in);
    auto map = CoverageMap::load(o.map);
    classify_dataset(ds, map);
    sort_canonical(ds);
    emit(dump_dataset(ds), o.out);
    for (const auto& l : map.unmapped_labels()) std::cerr << "unmapped label: " << l << "\n";
    return kExitOk;
}

int cmd_qc_apply(const Opts& o) {
    require_file(o.map, "coverage map");
    if (o.out_dir.empty()) throw ConfigError("--out-dir is required");
    if (!o.corrections.empty()) require_file(o.corrections, "corrections");
    if (o.bundle.rfind("http", 0) != 0) require_file(o.bundle, "bundle");
    auto ds = read_input_dataset(o.in);
    auto map = CoverageMap::load(o.map);
    CorrectionSet cs;
    if (!o.corrections.empty()) cs = load_corrections(o.corrections);
    std::vector<RemovedObservable> removed;
    auto deduped = dedupe(ds, &removed);
    auto filtered = filter_malware_entities(deduped, malware_dictionary(load_bundle(o.bundle)));
    for (auto& r : filtered.removed) removed.push_back(std::move(r));
    auto applied = apply_corrections(filtered.kept, cs.corrections, &map);
    fs::path dir = o.out_dir;
    write_file_atomic(dir / stage_files::kMachine, dump_dataset(filtered.kept));
    write_file_atomic(dir / stage_files::kCurated, dump_dataset(applied.dataset));
    write_file_atomic(dir / stage_files::kAudit, dump_audit(applied.audit));
    std::vector<ojson> rows;
    for (const auto& r : removed) rows.push_back(to_json(r));
    write_file_atomic(dir / stage_files::kRemoved, dump_ndjson(rows));
    ojson issues = ojson::array();
    for (const auto& i : applied.issues) issues.push_back(to_json(i));
    write_file_atomic(dir / stage_files::kIssues, issues.dump(2) + "\n");
    std::cerr << "removed: " << removed.size() << "\napplied: " << applied.audit.size()
              << "\nskipped: " << applied.issues.size() << "\n";
    return kExitOk;
}

int cmd_qc_diff(const Opts& o) {
    require_file(o.corrections, "corrections");
    auto ds = read_input_dataset(o.in);
    std::optional<CoverageMap> map;
    if (!o.map.empty()) {
        require_file(o.map, "coverage map");
        map = CoverageMap::load(o.map);
    }
    auto applied = apply_corrections(ds, load_corrections(o.corrections).corrections, map ? &*map : nullptr);
    emit(render_diff(applied), o.out);
    return kExitOk;
}

int cmd_qc_replay(const Opts& o) {
    require_file(o.audit, "audit log");
    require_file(o.map, "coverage map");
    auto ds = read_input_dataset(o.in);
    auto map = CoverageMap::load(o.map);
    auto replayed = replay_audit(ds, read_audit(o.audit), &map);
    emit(dump_dataset(replayed), o.out);
    std::cerr << "replayed dataset sha256: " << dataset_hash(replayed) << "\n";
    return kExitOk;
}

int cmd_report(const Opts& o) {
    auto fmt = parse_report_format(o.format);
    if (!fmt) throw ConfigError("--format: expected json, csv or markdown");
    auto ds = read_input_dataset(o.in);
    std::vector<std::string> violations;
    for (size_t i = 0; i < ds.size(); ++i)
        for (const auto& v : validate_observable(ds[i])) violations.push_back("row " + std::to_string(i + 1) + ": " + v);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << v << "\n";
        return kExitStageFailure;
    }
    emit(render(aggregate(ds), *fmt), o.out);
    return kExitOk;
}

int cmd_case_tables(const Opts& o) {
    fs::path file = o.case_studies.empty() ? kDataDir / "case_studies.json" : fs::path(o.case_studies);
    require_file(file, "case studies");
    auto tables = case_study_tables(load_case_studies(file));
    for (const auto& w : tables.warnings) std::cerr << "warning: " << w << "\n";
    if (o.format == "json") emit(case_tables_json(tables).dump(2) + "\n", o.out);
    else emit(render_case_tables_markdown(tables), o.out);
    return kExitOk;
}

int cmd_advisories_score(const Opts& o) {
    fs::path file = o.advisories.empty() || o.fixture ? kDataDir / "advisories.json" : fs::path(o.advisories);
    require_file(file, "advisories");
    auto records = load_advisories(file);
    if (!o.kev_url.empty()) {
        auto kev = fetch_kev(o.kev_url, o.kev_cache);
        for (const auto& m : kev_mismatches(records, kev)) std::cerr << "kev: " << m << "\n";
    }
    if (o.format == "json") emit(scorecard_json(records).dump(2) + "\n", o.out);
    else emit(render_scorecard(records), o.out);
    return kExitOk;
}

int cmd_registry_lookup(const Opts& o) {
    fs::path file = o.registry.empty() ? kDataDir / "parser_registry.json" : fs::path(o.registry);
    require_file(file, "parser registry");
    auto reg = ParserRegistry::load(file);
    auto res = reg.lookup(o.protocol);
    if (!res.found) {
        std::cout << "not found: " << o.protocol << "\n";
        return kExitStageFailure;
    }
    const auto& e = *res.entry;
    std::cout << to_string(e.parser_available) << "\n";
    std::cerr << "protocol: " << e.protocol << "\n";
    if (!e.note.empty()) std::cerr << "note: " << e.note << "\n";
    if (!e.source_context.empty()) std::cerr << "context: " << e.source_context << "\n";
    return kExitOk;
}

int cmd_stix_emit(const Opts& o) {
    auto schemas = load_schemas(o.extensions_dir);
    auto bundle = emit_extension_bundle(schemas);
    auto violations = validate_extension_bundle(json::parse(bundle.dump()));
    for (const auto& v : violations) std::cerr << "invalid: " << v << "\n";
    emit(bundle.dump(2) + "\n", o.out);
    return violations.empty() ? kExitOk : kExitStageFailure;
}

int cmd_stix_validate(const Opts& o) {
    require_file(o.in, "bundle");
    auto v = validate_extension_bundle(json::parse(read_file(o.in)));
    for (const auto& e : v) std::cout << e << "\n";
    if (v.empty()) std::cout << "valid\n";
    return v.empty() ? kExitOk : kExitStageFailure;
}

int cmd_stix_represent(const Opts& o) {
    auto schemas = load_schemas(o.extensions_dir);
    auto ds = read_input_dataset(o.in);
    ojson rows = ojson::array();
    size_t converted = 0, reasoned = 0;
    for (const auto& ob : ds) {
        if (ob.review_status == ReviewStatus::Rejected || ob.stix_support.level == SupportLevel::Full) continue;
        auto r = represent_observable(ob, schemas);
        ojson row;
        row["description_id"] = ob.description_id;
        row["observable_value"] = ob.observable_value;
        row["classification"] = ob.classification;
        if (r.instance) {
            ++converted;
            row["instance"] = *r.instance;
        } else {
            ++reasoned;
            row["reason"] = r.reason;
        }
        rows.push_back(row);
    }
    emit(rows.dump(2) + "\n", o.out);
    std::cerr << "converted: " << converted << "\nnot converted (with reason): " << reasoned << "\n";
    return kExitOk;
}

int cmd_validate(const Opts& o) {
    require_file(o.in, "dataset");
    std::vector<json> rows;
    json whole = json::parse(read_file(o.in), nullptr, false);
    if (whole.is_object()) rows.push_back(whole);
    else if (whole.is_array()) rows.assign(whole.begin(), whole.end());
    else rows = read_ndjson(o.in);
    std::optional<ProvenanceIndex> index;
    if (!o.records.empty()) {
        require_file(o.records, "records");
        index = provenance_index(read_records(o.records));
    }
    size_t bad = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
        auto v = validate_observable_json(rows[i], index ? &*index : nullptr);
        for (const auto& e : v) std::cout << "row " << i + 1 << ": " << e << "\n";
        if (!v.empty()) ++bad;
    }
    std::cout << rows.size() << " observables, " << bad << " invalid\n";
    return bad ? kExitStageFailure : kExitOk;
}

int cmd_run(const Opts& o) {
    RunConfig cfg;
    cfg.bundle_source = o.bundle;
    auto kind = parse_backend_kind(o.backend);
    if (!kind) throw ConfigError("--backend: expected lexicon or llm");
    cfg.backend.kind = *kind;
    if (!o.endpoint.empty()) cfg.backend.endpoint = o.endpoint;
    if (!o.model.empty()) cfg.backend.model_name = o.model;
    if (cfg.backend.kind == BackendKind::Lexicon) cfg.backend.lexicon_path = o.lexicon;
    cfg.backend.cache_dir = o.cache_dir;
    cfg.backend.max_retries = o.max_retries;
    cfg.backend.timeout_s = o.timeout;
    cfg.backend.max_requests_per_minute = o.rate;
    cfg.backend.trace = o.trace;
    cfg.coverage_map = o.map;
    if (!o.corrections.empty()) cfg.corrections = fs::path(o.corrections);
    cfg.out_dir = o.out_dir;
    cfg.workers = o.workers;
    cfg.formats.clear();
    for (const auto& f : o.formats) {
        auto rf = parse_report_format(f);
        if (!rf) throw ConfigError("--format: unknown format '" + f + "'");
        cfg.formats.push_back(*rf);
    }
    return run_pipeline(cfg, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ICS threat-intelligence observable coverage toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Opts o;
    std::function<int()> action;
    auto bind = [&](CLI::App* sub, std::function<int()> fn) { sub->callback([&action, fn] { action = fn; }); };

    auto* ingest = app.add_subcommand("ingest", "Extract procedure records from an ATT&CK for ICS bundle");
    ingest->add_option("--bundle", o.bundle, "Bundle file or http(s) URL");
    ingest->add_option("-o,--out", o.out, "Records output (JSON lines); stdout when omitted");
    ingest->add_flag("--include-revoked", o.include_revoked);
    ingest->add_flag("--include-deprecated", o.include_deprecated);
    ingest->add_option("--malware", o.malware, "Restrict to these malware names");
    bind(ingest, [&] { return cmd_ingest(o); });

    auto add_backend_opts = [&](CLI::App* sub) {
        sub->add_option("--backend", o.backend, "lexicon or llm")->capture_default_str();
        sub->add_option("--lexicon", o.lexicon, "Lexicon pattern file")->capture_default_str();
        sub->add_option("--endpoint", o.endpoint, "Chat-completion URL (llm)");
        sub->add_option("--model", o.model, "Model name (llm)");
        sub->add_option("--max-retries", o.max_retries)->capture_default_str();
        sub->add_option("--timeout", o.timeout, "Request timeout in seconds")->capture_default_str();
        sub->add_option("--rate", o.rate, "Maximum requests per minute")->capture_default_str();
        sub->add_option("--cache-dir", o.cache_dir, "Response cache directory (llm)");
        sub->add_flag("--trace", o.trace, "Log requests and responses to stderr, credential redacted");
        sub->add_option("-j,--workers", o.workers)->capture_default_str();
    };

    auto* extract = app.add_subcommand("extract", "Extract observables from procedure records");
    extract->add_option("--records", o.records)->required();
    extract->add_option("-o,--out", o.out);
    extract->add_option("--failures", o.failures, "Write failed records here");
    add_backend_opts(extract);
    bind(extract, [&] { return cmd_extract(o); });

    auto* classify = app.add_subcommand("classify", "Apply the STIX coverage map to a dataset");
    classify->add_option("--in", o.in)->required();
    classify->add_option("--map", o.map)->capture_default_str();
    classify->add_option("-o,--out", o.out);
    bind(classify, [&] { return cmd_classify(o); });

    auto* qc = app.add_subcommand("qc", "Quality control: dedupe, filter and corrections");
    qc->require_subcommand(1);
    auto* qc_apply = qc->add_subcommand("apply", "Dedupe, filter malware entities and apply corrections");
    qc_apply->add_option("--in", o.in, "Classified dataset")->required();
    qc_apply->add_option("--bundle", o.bundle, "Bundle used for the malware dictionary")->capture_default_str();
    qc_apply->add_option("--map", o.map)->capture_default_str();
    qc_apply->add_option("--corrections", o.corrections);
    qc_apply->add_option("--out-dir", o.out_dir)->required();
    bind(qc_apply, [&] { return cmd_qc_apply(o); });
    auto* qc_diff = qc->add_subcommand("diff", "Show what a corrections file changes");
    qc_diff->add_option("--in", o.in, "Machine dataset")->required();
    qc_diff->add_option("--corrections", o.corrections)->required();
    qc_diff->add_option("--map", o.map)->capture_default_str();
    qc_diff->add_option("-o,--out", o.out);
    bind(qc_diff, [&] { return cmd_qc_diff(o); });
    auto* qc_replay = qc->add_subcommand("replay", "Replay an audit log over the machine dataset");
    qc_replay->add_option("--in", o.in, "Machine dataset")->required();
    qc_replay->add_option("--audit", o.audit)->required();
    qc_replay->add_option("--map", o.map)->capture_default_str();
    qc_replay->add_option("-o,--out", o.out);
    bind(qc_replay, [&] { return cmd_qc_replay(o); });

    auto* report = app.add_subcommand("report", "Aggregate a curated dataset");
    report->add_option("--in", o.in)->required();
    report->add_option("--format", o.format, "json, csv or markdown")->capture_default_str();
    report->add_option("-o,--out", o.out);
    bind(report, [&] { return cmd_report(o); });

    auto* cases = app.add_subcommand("case-tables", "Render the case-study tables");
    cases->add_option("--file", o.case_studies);
    cases->add_option("--format", o.format, "markdown or json")->capture_default_str();
    cases->add_option("-o,--out", o.out);
    bind(cases, [&] { return cmd_case_tables(o); });

    auto* adv = app.add_subcommand("advisories", "Vulnerability advisory review");
    adv->require_subcommand(1);
    auto* score = adv->add_subcommand("score", "Score advisories against the detection requirements");
    score->add_flag("--fixture", o.fixture, "Use the shipped advisory fixture");
    score->add_option("--file", o.advisories);
    score->add_option("--format", o.format, "markdown or json")->capture_default_str();
    score->add_option("--kev-url", o.kev_url, "Cross-check in_kev against a KEV catalog");
    score->add_option("--kev-cache", o.kev_cache, "Local copy of the KEV catalog");
    score->add_option("-o,--out", o.out);
    bind(score, [&] { return cmd_advisories_score(o); });

    auto* reg = app.add_subcommand("registry", "Protocol parser registry");
    reg->require_subcommand(1);
    auto* lookup = reg->add_subcommand("lookup", "Look up parser availability for a protocol");
    lookup->add_option("protocol", o.protocol)->required();
    lookup->add_option("--registry", o.registry);
    bind(lookup, [&] { return cmd_registry_lookup(o); });

    auto* ext = app.add_subcommand("stix-ext", "ICS STIX extension definitions");
    ext->require_subcommand(1);
    auto* ext_emit = ext->add_subcommand("emit", "Emit the extension-definition bundle");
    ext_emit->add_option("--dir", o.extensions_dir)->capture_default_str();
    ext_emit->add_option("-o,--out", o.out);
    bind(ext_emit, [&] { return cmd_stix_emit(o); });
    auto* ext_validate = ext->add_subcommand("validate", "Validate an extension bundle");
    ext_validate->add_option("bundle", o.in)->required();
    bind(ext_validate, [&] { return cmd_stix_validate(o); });
    auto* ext_rep = ext->add_subcommand("represent", "Map Partial/No observables onto extension instances");
    ext_rep->add_option("--in", o.in)->required();
    ext_rep->add_option("--dir", o.extensions_dir)->capture_default_str();
    ext_rep->add_option("-o,--out", o.out);
    bind(ext_rep, [&] { return cmd_stix_represent(o); });

    auto* validate = app.add_subcommand("validate", "Validate a dataset file");
    validate->add_option("dataset", o.in)->required();
    validate->add_option("--records", o.records, "Procedure records for provenance checks");
    bind(validate, [&] { return cmd_validate(o); });

    auto* run = app.add_subcommand("run", "Run ingest, extract, classify, qc and report");
    run->add_option("--bundle", o.bundle)->capture_default_str();
    run->add_option("--map", o.map)->capture_default_str();
    run->add_option("--corrections", o.corrections);
    run->add_option("--out-dir", o.out_dir)->required();
    run->add_option("--format", o.formats, "Report formats")->capture_default_str();
    add_backend_opts(run);
    bind(run, [&] { return cmd_run(o); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }
    try {
        return action ? action() : kExitConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
}
