#include "icsgap/extraction.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <thread>

#include "icsgap/prompt.hpp"

namespace icsgap {

std::string_view to_string(BackendKind k) { return k == BackendKind::Llm ? "llm" : "lexicon"; }

std::optional<BackendKind> parse_backend_kind(std::string_view s) {
    if (s == "llm") return BackendKind::Llm;
    if (s == "lexicon") return BackendKind::Lexicon;
    return std::nullopt;
}

std::vector<std::string> validate_config(const ExtractionBackendConfig& cfg) {
    std::vector<std::string> v;
    if (cfg.kind == BackendKind::Llm) {
        if (!cfg.endpoint || cfg.endpoint->empty()) v.push_back("endpoint: required for the llm backend");
        else if (cfg.endpoint->rfind("http://", 0) != 0 && cfg.endpoint->rfind("https://", 0) != 0)
            v.push_back("endpoint: expected an http(s) URL");
        if (!cfg.model_name || cfg.model_name->empty()) v.push_back("model_name: required for the llm backend");
        if (!cfg.prompt_version.empty() && cfg.prompt_version != prompt_version())
            v.push_back("prompt_version: does not match the built-in prompt " + prompt_version());
    } else {
        if (cfg.endpoint) v.push_back("endpoint: not allowed for the lexicon backend");
        if (cfg.model_name) v.push_back("model_name: not allowed for the lexicon backend");
        if (cfg.lexicon_path.empty()) v.push_back("lexicon_path: required for the lexicon backend");
    }
    if (cfg.max_retries < 0 || cfg.max_retries > 10) v.push_back("max_retries: expected 0..10");
    if (cfg.timeout_s <= 0) v.push_back("timeout: expected a positive number of seconds");
    return v;
}

std::vector<std::string> validate_response(const json& raw) {
    if (!raw.is_object()) return {"response: expected a JSON object"};
    auto it = raw.find("observables");
    if (it == raw.end()) return {"observables: missing"};
    if (!it->is_array()) return {"observables: expected an array"};
    std::vector<std::string> v;
    for (size_t i = 0; i < it->size(); ++i) {
        const auto& e = (*it)[i];
        std::string at = "observables[" + std::to_string(i) + "]";
        if (!e.is_object()) {
            v.push_back(at + ": expected an object");
            continue;
        }
        auto str = [&](const char* f) -> const json* {
            auto fi = e.find(f);
            if (fi == e.end()) {
                v.push_back(at + "." + f + ": missing");
                return nullptr;
            }
            if (!fi->is_string()) {
                v.push_back(at + "." + f + ": expected string");
                return nullptr;
            }
            return &*fi;
        };
        if (auto s = str("observable_value"); s && s->get<std::string>().empty())
            v.push_back(at + ".observable_value: empty");
        if (auto s = str("artifact_details")) {
            auto d = parse_detail_level(s->get<std::string>());
            if (!d || *d == DetailLevel::Missing)
                v.push_back(at + ".artifact_details: expected Mentioned, Described or Actionable");
        }
        str("data_source");
        if (auto s = str("classification"); s && s->get<std::string>().empty())
            v.push_back(at + ".classification: empty");
        if (auto s = str("STIX_supported")) {
            try {
                parse_support_string(s->get<std::string>());
            } catch (const SupportParseError& err) {
                v.push_back(at + ".STIX_supported: " + err.what());
            }
        }
        if (auto s = str("proprietary_artifact"); s && !parse_proprietary(s->get<std::string>()))
            v.push_back(at + ".proprietary_artifact: unknown class '" + s->get<std::string>() + "'");
        for (const char* f : {"parser", "notes"}) {
            auto fi = e.find(f);
            if (fi == e.end()) v.push_back(at + "." + f + ": missing");
            else if (!fi->is_string() && !fi->is_null()) v.push_back(at + "." + f + ": expected string or null");
        }
    }
    return v;
}

std::optional<json> repair_json(std::string_view text) {
    auto attempt = [](std::string_view s) -> std::optional<json> {
        auto j = json::parse(s, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        return j;
    };
    if (auto j = attempt(text)) return j;

    std::string s = trim(text);
    if (s.rfind("```", 0) == 0) {
        auto nl = s.find('\n');
        s = nl == std::string::npos ? "" : s.substr(nl + 1);
        auto fence = s.rfind("```");
        if (fence != std::string::npos) s = s.substr(0, fence);
    }
    // Drop commas that directly precede a closing bracket, outside string literals.
    std::string out;
    out.reserve(s.size());
    bool in_str = false, esc = false;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            out.push_back(c);
            if (esc) esc = false;
            else if (c == '\\') esc = true;
            else if (c == '"') in_str = false;
            continue;
        }
        if (c == '"') in_str = true;
        if (c == ',') {
            size_t k = i + 1;
            while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
            if (k < s.size() && (s[k] == '}' || s[k] == ']')) continue;
        }
        out.push_back(c);
    }
    return attempt(out);
}

ojson to_json(const RecordFailure& f) {
    ojson j;
    j["description_id"] = f.description_id;
    j["technique_id"] = f.technique_id;
    j["reason"] = f.reason;
    j["attempts"] = f.attempts;
    j["violations"] = f.violations;
    return j;
}

RecordExtraction LexiconBackend::extract(const ProcedureRecord& record) const {
    RecordExtraction r;
    r.attempts = 1;
    r.observables = lexicon_.extract(record);
    return r;
}

std::vector<Observable> observables_from_response(const json& raw, const ProcedureRecord& record,
                                                  std::string_view backend) {
    std::vector<Observable> out;
    for (const auto& e : raw.at("observables")) {
        std::string value = e.at("observable_value").get<std::string>();
        Observable o = observable_from_tuple(value, e, record, backend);
        if (record.description_text.find(value) == std::string::npos) o.add_flag(kFlagNonVerbatim);
        out.push_back(std::move(o));
    }
    return out;
}

LlmBackend::LlmBackend(LlmConfig cfg, int max_retries, std::optional<std::filesystem::path> cache_dir)
    : client_(std::move(cfg)), max_retries_(max_retries) {
    if (cache_dir) cache_.emplace(*cache_dir);
}

std::string LlmBackend::tag() const { return "llm:" + client_.config().model; }

RecordExtraction LlmBackend::extract(const ProcedureRecord& record) const {
    RecordExtraction r;
    auto fail = [&](std::string reason, std::vector<std::string> violations) {
        r.failure = RecordFailure{record.description_id, record.technique_id, std::move(reason), r.attempts,
                                  std::move(violations)};
        return r;
    };
    Prompt p = build_prompt(record);
    if (p.user.empty()) return fail("empty-description", {"description text is empty; request not sent"});

    std::string key = ResponseCache::key(prompt_version(), record);
    if (cache_) {
        if (auto cached = cache_->get(key)) {
            auto j = repair_json(*cached);
            if (j && validate_response(*j).empty()) {
                r.cache_hit = true;
                r.observables = observables_from_response(*j, record, tag());
                return r;
            }
        }
    }

    std::vector<ChatMessage> messages{{"system", p.system}, {"user", p.user}};
    std::vector<std::string> last;
    std::string last_reason = "schema-violation";
    for (int attempt = 0; attempt <= max_retries_; ++attempt) {
        ++r.attempts;
        ChatReply reply = client_.complete(messages);
        if (!reply.ok) {
            last = {reply.error};
            last_reason = "request-failed";
            if (!reply.retryable) break;
            continue;
        }
        auto j = repair_json(reply.content);
        std::vector<std::string> violations =
            j ? validate_response(*j) : std::vector<std::string>{"response: not valid JSON"};
        if (violations.empty()) {
            try {
                r.observables = observables_from_response(*j, record, tag());
            } catch (const Error& e) {
                violations.push_back(e.what());
            }
        }
        if (violations.empty()) {
            if (cache_) cache_->put(key, j->dump());
            return r;
        }
        last = violations;
        last_reason = "schema-violation";
        messages.push_back({"assistant", reply.content});
        messages.push_back({"user", "Your previous response did not match the response format:\n- " +
                                        join(violations, "\n- ") +
                                        "\nReturn only the corrected JSON object."});
    }
    r.observables.clear();
    return fail(last_reason, last);
}

std::unique_ptr<ExtractionBackend> make_backend(const ExtractionBackendConfig& cfg) {
    auto errors = validate_config(cfg);
    if (!errors.empty()) throw Error("extraction config: " + join(errors, "; "));
    if (cfg.kind == BackendKind::Lexicon) return std::make_unique<LexiconBackend>(Lexicon::load(cfg.lexicon_path));
    LlmConfig lc;
    lc.endpoint = *cfg.endpoint;
    lc.model = *cfg.model_name;
    lc.timeout_s = cfg.timeout_s;
    lc.max_requests_per_minute = cfg.max_requests_per_minute;
    lc.trace = cfg.trace;
    std::optional<std::filesystem::path> cache;
    if (!cfg.cache_dir.empty()) cache = cfg.cache_dir;
    return std::make_unique<LlmBackend>(std::move(lc), cfg.max_retries, std::move(cache));
}

ExtractionRun extract_all(const std::vector<ProcedureRecord>& records, const ExtractionBackend& backend,
                          unsigned workers) {
    std::vector<RecordExtraction> results(records.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next++; i < records.size(); i = next++) {
            try {
                results[i] = backend.extract(records[i]);
            } catch (const std::exception& e) {
                results[i] = {};
                results[i].failure =
                    RecordFailure{records[i].description_id, records[i].technique_id, "backend-error", 1, {e.what()}};
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<size_t>(1, records.size()))));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    ExtractionRun run;
    for (auto& r : results) {
        if (r.cache_hit) ++run.cache_hits;
        if (r.failure) run.failures.push_back(std::move(*r.failure));
        for (auto& o : r.observables) run.observables.push_back(std::move(o));
    }
    sort_canonical(run.observables);
    std::sort(run.failures.begin(), run.failures.end(),
              [](const auto& a, const auto& b) { return a.description_id < b.description_id; });
    return run;
}

}  // namespace icsgap
