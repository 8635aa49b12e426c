#include "icsgap/llm_client.hpp"

#include <cstdlib>
#include <iostream>
#include <thread>

#include "http.hpp"

namespace icsgap {

LlmClient::LlmClient(LlmConfig cfg) : cfg_(std::move(cfg)) {
    if (const char* k = std::getenv(cfg_.api_key_env.c_str())) api_key_ = k;
}

json LlmClient::request_body(const std::vector<ChatMessage>& messages) const {
    json body;
    body["model"] = cfg_.model;
    body["temperature"] = cfg_.temperature;
    body["response_format"] = {{"type", "json_object"}};
    body["messages"] = json::array();
    for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    return body;
}

void LlmClient::wait_for_slot() const {
    if (cfg_.max_requests_per_minute <= 0) return;
    auto interval = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / cfg_.max_requests_per_minute));
    std::chrono::steady_clock::time_point slot;
    {
        std::lock_guard lk(rate_mu_);
        auto now = std::chrono::steady_clock::now();
        slot = std::max(now, next_slot_);
        next_slot_ = slot + interval;
    }
    std::this_thread::sleep_until(slot);
}

void LlmClient::trace(const std::string& line) const {
    if (!cfg_.trace) return;
    std::string redacted = line;
    if (!api_key_.empty())
        for (auto pos = redacted.find(api_key_); pos != std::string::npos; pos = redacted.find(api_key_, pos))
            redacted.replace(pos, api_key_.size(), "[REDACTED]");
    std::lock_guard lk(trace_mu_);
    (cfg_.trace_sink ? *cfg_.trace_sink : std::cerr) << "[llm] " << redacted << '\n';
}

ChatReply LlmClient::complete(const std::vector<ChatMessage>& messages) const {
    ChatReply reply;
    if (api_key_.empty()) {
        reply.error = "credential not set: export " + cfg_.api_key_env;
        return reply;
    }
    wait_for_slot();
    std::string body = request_body(messages).dump();
    trace("POST " + cfg_.endpoint + " Authorization: Bearer [REDACTED] body=" + body);
    auto t0 = std::chrono::steady_clock::now();
    auto res = detail::http_post(cfg_.endpoint, body, "application/json",
                                 {{"Authorization", "Bearer " + api_key_}}, cfg_.timeout_s);
    reply.latency_ms = static_cast<long>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count());
    reply.status = res.status;
    trace("status=" + std::to_string(res.status) + " latency_ms=" + std::to_string(reply.latency_ms) +
          " body=" + res.body + (res.error.empty() ? "" : " error=" + res.error));
    if (res.status == 0) {
        reply.retryable = true;
        reply.error = "network failure: " + res.error;
        return reply;
    }
    if (res.status != 200) {
        reply.retryable = res.status == 429 || res.status >= 500;
        reply.error = "HTTP " + std::to_string(res.status);
        return reply;
    }
    try {
        auto j = json::parse(res.body);
        reply.content = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) reply.usage = j["usage"];
        reply.ok = true;
    } catch (const std::exception& e) {
        reply.retryable = true;
        reply.error = std::string("malformed completion envelope: ") + e.what();
    }
    return reply;
}

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ResponseCache::key(const std::string& prompt_version, const ProcedureRecord& record) {
    return sha256_hex(prompt_version + "\n" + sha256_hex(to_json(record).dump()));
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    auto p = path_for(key);
    std::error_code ec;
    if (!std::filesystem::exists(p, ec)) return std::nullopt;
    try {
        auto j = json::parse(read_file(p));
        return j.at("content").get<std::string>();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void ResponseCache::put(const std::string& key, const std::string& content) const {
    auto p = path_for(key);
    std::filesystem::create_directories(p.parent_path());
    ojson j;
    j["key"] = key;
    j["content"] = content;
    write_file_atomic(p, j.dump() + "\n");
}

}  // namespace icsgap
