#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "icsgap/attack_ingest.hpp"
#include "icsgap/lexicon.hpp"
#include "icsgap/llm_client.hpp"
#include "icsgap/taxonomy.hpp"

namespace icsgap {

enum class BackendKind { Lexicon, Llm };

std::string_view to_string(BackendKind k);
std::optional<BackendKind> parse_backend_kind(std::string_view s);

struct ExtractionBackendConfig {
    BackendKind kind = BackendKind::Lexicon;
    std::optional<std::string> endpoint;
    std::optional<std::string> model_name;
    int max_retries = 2;
    double timeout_s = 60.0;
    std::string prompt_version;  // empty means the built-in prompt
    std::filesystem::path lexicon_path;
    std::filesystem::path cache_dir;  // empty disables the response cache
    double max_requests_per_minute = 60.0;
    bool trace = false;
};

std::vector<std::string> validate_config(const ExtractionBackendConfig& cfg);

// Checks the model response against the observable-extraction response format.
std::vector<std::string> validate_response(const json& raw);

// Parses model output; on failure, one repair pass strips code fences and trailing
// commas and tries again.
std::optional<json> repair_json(std::string_view text);

struct RecordFailure {
    std::string description_id;
    std::string technique_id;
    std::string reason;
    int attempts = 0;
    std::vector<std::string> violations;
};

ojson to_json(const RecordFailure& f);

struct RecordExtraction {
    std::vector<Observable> observables;
    std::optional<RecordFailure> failure;
    int attempts = 0;
    bool cache_hit = false;
};

class ExtractionBackend {
public:
    virtual ~ExtractionBackend() = default;
    virtual std::string tag() const = 0;
    virtual RecordExtraction extract(const ProcedureRecord& record) const = 0;
};

class LexiconBackend : public ExtractionBackend {
public:
    explicit LexiconBackend(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
    std::string tag() const override { return std::string(kLexiconBackendTag); }
    RecordExtraction extract(const ProcedureRecord& record) const override;
    const Lexicon& lexicon() const { return lexicon_; }

private:
    Lexicon lexicon_;
};

class LlmBackend : public ExtractionBackend {
public:
    LlmBackend(LlmConfig cfg, int max_retries, std::optional<std::filesystem::path> cache_dir);
    std::string tag() const override;
    RecordExtraction extract(const ProcedureRecord& record) const override;

private:
    LlmClient client_;
    int max_retries_;
    std::optional<ResponseCache> cache_;
};

// Converts a validated response into Observables carrying the record's provenance.
// Values that are not substrings of the record text are flagged non-verbatim.
std::vector<Observable> observables_from_response(const json& raw, const ProcedureRecord& record,
                                                  std::string_view backend);

std::unique_ptr<ExtractionBackend> make_backend(const ExtractionBackendConfig& cfg);

struct ExtractionRun {
    std::vector<Observable> observables;  // canonical order
    std::vector<RecordFailure> failures;  // sorted by description_id
    size_t cache_hits = 0;
};

// Runs the backend over every record with a bounded worker pool. Output does not
// depend on the worker count.
ExtractionRun extract_all(const std::vector<ProcedureRecord>& records, const ExtractionBackend& backend,
                          unsigned workers = 1);

}  // namespace icsgap
