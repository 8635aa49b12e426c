#pragma once

#include <chrono>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "icsgap/attack_ingest.hpp"
#include "icsgap/common.hpp"

namespace icsgap {

inline constexpr const char* kApiKeyEnv = "ICSGAP_LLM_API_KEY";

struct LlmConfig {
    std::string endpoint;  // full chat-completions URL
    std::string model;
    double temperature = 0.0;
    double timeout_s = 60.0;
    double max_requests_per_minute = 60.0;  // <= 0 disables the ceiling
    std::string api_key_env = kApiKeyEnv;
    bool trace = false;
    std::ostream* trace_sink = nullptr;  // defaults to std::cerr
};

struct ChatMessage {
    std::string role;
    std::string content;
};

struct ChatReply {
    bool ok = false;
    bool retryable = false;
    int status = 0;
    std::string content;
    std::string error;
    json usage;
    long latency_ms = 0;
};

// Chat-completion client. Safe to share between worker threads.
class LlmClient {
public:
    explicit LlmClient(LlmConfig cfg);

    ChatReply complete(const std::vector<ChatMessage>& messages) const;
    json request_body(const std::vector<ChatMessage>& messages) const;
    const LlmConfig& config() const { return cfg_; }

private:
    void wait_for_slot() const;
    void trace(const std::string& line) const;

    LlmConfig cfg_;
    std::string api_key_;
    mutable std::mutex rate_mu_;
    mutable std::chrono::steady_clock::time_point next_slot_{};
    mutable std::mutex trace_mu_;
};

// Content-addressed response cache: <dir>/<key[0:2]>/<key>.json.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);

    static std::string key(const std::string& prompt_version, const ProcedureRecord& record);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& content) const;
    std::filesystem::path path_for(const std::string& key) const;

private:
    std::filesystem::path dir_;
};

}  // namespace icsgap
