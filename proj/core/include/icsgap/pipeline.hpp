#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "icsgap/analytics.hpp"
#include "icsgap/attack_ingest.hpp"
#include "icsgap/extraction.hpp"

namespace icsgap {

enum ExitCode : int { kExitOk = 0, kExitStageFailure = 1, kExitConfigError = 2 };

struct RunConfig {
    std::string bundle_source;  // path or URL
    ExtractionBackendConfig backend;
    std::filesystem::path coverage_map;
    std::optional<std::filesystem::path> corrections;
    std::filesystem::path out_dir;
    std::vector<ReportFormat> formats{ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown};
    unsigned workers = 1;
    MalwareFilter filter;
};

// Checks every input before any stage runs. Empty means valid.
std::vector<std::string> validate_run_config(const RunConfig& cfg);

// Stage file names inside the output directory.
namespace stage_files {
inline constexpr const char* kRecords = "01_records.jsonl";
inline constexpr const char* kExtracted = "02_extracted.jsonl";
inline constexpr const char* kFailures = "02_failures.jsonl";
inline constexpr const char* kClassified = "03_classified.jsonl";
inline constexpr const char* kMachine = "04_machine.jsonl";
inline constexpr const char* kCurated = "04_curated.jsonl";
inline constexpr const char* kRemoved = "04_removed.jsonl";
inline constexpr const char* kAudit = "04_audit.jsonl";
inline constexpr const char* kIssues = "04_qc_issues.json";
inline constexpr const char* kReportDir = "reports";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace stage_files

// Runs ingest, extract, classify, qc and report. Progress goes to log.
int run_pipeline(const RunConfig& cfg, std::ostream& log);

// Provenance check over a dataset: per-observable violations prefixed with the row number.
std::vector<std::string> validate_dataset(const std::vector<Observable>& dataset, const ProvenanceIndex* index);

}  // namespace icsgap
