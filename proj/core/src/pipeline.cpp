#include "icsgap/pipeline.hpp"

#include <cstdlib>

#include "http.hpp"
#include "icsgap/prompt.hpp"
#include "icsgap/quality_control.hpp"
#include "icsgap/version.hpp"

namespace icsgap {

namespace fs = std::filesystem;

std::vector<std::string> validate_run_config(const RunConfig& cfg) {
    std::vector<std::string> v;
    std::error_code ec;
    if (cfg.bundle_source.empty()) v.push_back("bundle: no source given");
    else if (!detail::is_url(cfg.bundle_source) && !fs::is_regular_file(cfg.bundle_source, ec))
        v.push_back("bundle: file not found: " + cfg.bundle_source);
    if (!fs::is_regular_file(cfg.coverage_map, ec)) {
        v.push_back("coverage map: file not found: " + cfg.coverage_map.string());
    } else {
        try {
            CoverageMap::load(cfg.coverage_map);
        } catch (const Error& e) {
            v.push_back(std::string("coverage map: ") + e.what());
        }
    }
    for (auto& e : validate_config(cfg.backend)) v.push_back("backend: " + e);
    if (cfg.backend.kind == BackendKind::Lexicon && !cfg.backend.lexicon_path.empty()) {
        if (!fs::is_regular_file(cfg.backend.lexicon_path, ec)) {
            v.push_back("lexicon: file not found: " + cfg.backend.lexicon_path.string());
        } else {
            try {
                Lexicon::load(cfg.backend.lexicon_path);
            } catch (const Error& e) {
                v.push_back(std::string("lexicon: ") + e.what());
            }
        }
    }
    if (cfg.backend.kind == BackendKind::Llm && !std::getenv(kApiKeyEnv))
        v.push_back(std::string("backend: credential not set: export ") + kApiKeyEnv);
    if (cfg.corrections) {
        if (!fs::is_regular_file(*cfg.corrections, ec)) {
            v.push_back("corrections: file not found: " + cfg.corrections->string());
        } else {
            try {
                load_corrections(*cfg.corrections);
            } catch (const Error& e) {
                v.push_back(std::string("corrections: ") + e.what());
            }
        }
    }
    if (cfg.out_dir.empty()) v.push_back("out: no output directory given");
    else if (fs::exists(cfg.out_dir, ec) && !fs::is_directory(cfg.out_dir, ec))
        v.push_back("out: not a directory: " + cfg.out_dir.string());
    if (cfg.formats.empty()) v.push_back("format: at least one report format is required");
    if (cfg.workers == 0 || cfg.workers > 256) v.push_back("workers: expected 1..256");
    return v;
}

std::vector<std::string> validate_dataset(const std::vector<Observable>& dataset, const ProvenanceIndex* index) {
    std::vector<std::string> out;
    for (size_t i = 0; i < dataset.size(); ++i)
        for (const auto& e : validate_observable(dataset[i], index)) out.push_back("row " + std::to_string(i + 1) + ": " + e);
    return out;
}

namespace {

struct Outputs {
    fs::path dir;
    ojson hashes = ojson::object();

    void write(const std::string& rel, const std::string& content) {
        write_file_atomic(dir / rel, content);
        hashes[rel] = sha256_hex(content);
    }
};

std::string dump_rows(const std::vector<ojson>& rows) { return dump_ndjson(rows); }

}  // namespace

int run_pipeline(const RunConfig& cfg, std::ostream& log) {
    auto errors = validate_run_config(cfg);
    if (!errors.empty()) {
        for (const auto& e : errors) log << "config error: " << e << "\n";
        return kExitConfigError;
    }
    Outputs out{cfg.out_dir};
    ojson manifest;
    manifest["tool"] = "icsgap";
    manifest["tool_version"] = kVersion;
    std::string stage = "ingest";
    try {
        // ingest
        Bundle bundle = load_bundle(cfg.bundle_source);
        IngestResult ingest = extract_procedures(bundle, cfg.filter);
        for (const auto& w : ingest.warnings) log << "ingest warning: " << w << "\n";
        out.write(stage_files::kRecords, dump_records(ingest.records));
        log << "ingest: " << ingest.records.size() << " procedure records\n";

        // extract
        stage = "extract";
        auto backend = make_backend(cfg.backend);
        ExtractionRun run = extract_all(ingest.records, *backend, cfg.workers);
        out.write(stage_files::kExtracted, dump_dataset(run.observables));
        std::vector<ojson> failures;
        for (const auto& f : run.failures) failures.push_back(to_json(f));
        out.write(stage_files::kFailures, dump_rows(failures));
        log << "extract: " << run.observables.size() << " observables, " << run.failures.size()
            << " failed records, " << run.cache_hits << " cache hits\n";

        // classify
        stage = "classify";
        CoverageMap map = CoverageMap::load(cfg.coverage_map);
        std::vector<Observable> classified = run.observables;
        classify_dataset(classified, map);
        sort_canonical(classified);
        out.write(stage_files::kClassified, dump_dataset(classified));
        log << "classify: " << map.unmapped_labels().size() << " unmapped labels\n";

        // qc
        stage = "qc";
        std::vector<RemovedObservable> removed;
        auto deduped = dedupe(classified, &removed);
        auto filtered = filter_malware_entities(deduped, malware_dictionary(bundle));
        for (auto& r : filtered.removed) removed.push_back(std::move(r));
        out.write(stage_files::kMachine, dump_dataset(filtered.kept));
        std::vector<ojson> removed_rows;
        for (const auto& r : removed) removed_rows.push_back(to_json(r));
        out.write(stage_files::kRemoved, dump_rows(removed_rows));
        CorrectionSet corrections;
        if (cfg.corrections) corrections = load_corrections(*cfg.corrections);
        ApplyResult applied = apply_corrections(filtered.kept, corrections.corrections, &map);
        out.write(stage_files::kCurated, dump_dataset(applied.dataset));
        out.write(stage_files::kAudit, dump_audit(applied.audit));
        ojson issues = ojson::array();
        for (const auto& i : applied.issues) issues.push_back(to_json(i));
        out.write(stage_files::kIssues, issues.dump(2) + "\n");
        log << "qc: " << removed.size() << " removed, " << applied.audit.size() << " corrections applied, "
            << applied.issues.size() << " skipped\n";
        ProvenanceIndex index = provenance_index(ingest.records);
        auto violations = validate_dataset(applied.dataset, &index);
        if (!violations.empty()) {
            for (const auto& e : violations) log << "validation: " << e << "\n";
            throw Error(std::to_string(violations.size()) + " invalid observables in the curated dataset");
        }

        // report
        stage = "report";
        GapReport report = aggregate(applied.dataset);
        for (auto f : cfg.formats)
            out.write(std::string(stage_files::kReportDir) + "/gap_report." + std::string(extension_for(f)),
                      render(report, f));
        log << "report: " << report.total << " observables\n";

        ojson inputs;
        inputs["bundle"] = {{"source", bundle.source.location}, {"sha256", bundle.source.sha256}};
        inputs["coverage_map"] = {{"path", cfg.coverage_map.string()}, {"sha256", sha256_file(cfg.coverage_map)}};
        if (cfg.backend.kind == BackendKind::Lexicon)
            inputs["lexicon"] = {{"path", cfg.backend.lexicon_path.string()},
                                 {"sha256", sha256_file(cfg.backend.lexicon_path)}};
        if (cfg.corrections)
            inputs["corrections"] = {{"path", cfg.corrections->string()}, {"sha256", sha256_file(*cfg.corrections)}};
        manifest["inputs"] = inputs;
        manifest["backend"] = backend->tag();
        manifest["prompt_version"] = prompt_version();
        manifest["map_version"] = map.version();
        if (auto* lx = dynamic_cast<const LexiconBackend*>(backend.get())) manifest["lexicon_version"] = lx->lexicon().version();
        ojson counts;
        counts["records"] = ingest.records.size();
        counts["extracted"] = run.observables.size();
        counts["failed_records"] = run.failures.size();
        counts["removed"] = removed.size();
        counts["machine"] = filtered.kept.size();
        counts["corrections_applied"] = applied.audit.size();
        counts["corrections_skipped"] = applied.issues.size();
        counts["curated_active"] = report.total;
        manifest["counts"] = counts;
        manifest["outputs"] = out.hashes;
        write_file_atomic(cfg.out_dir / stage_files::kManifest, manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        log << "stage " << stage << " failed: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitOk;
}

}  // namespace icsgap
