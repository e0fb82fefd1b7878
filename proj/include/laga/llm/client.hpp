#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "httplib.h"

// <resolv.h>, dragged in by the HTTP layer, leaves `_res` defined as an
// object-like macro that mangles Eigen's kernel signatures when Eigen is
// parsed later in the same translation unit.
#ifdef _res
#undef _res
#endif

#include "json.hpp"

#include "laga/detail/sha256.hpp"
#include "laga/llm/prompts.hpp"

namespace laga::llm {

struct ClientConfig {
    std::string endpoint;  // empty: never touch the network
    std::string api_key;
    std::string model = "local";
    std::string cache_dir = ".llm-cache";
    bool fallback_enabled = true;
    bool cache_enabled = true;
    int timeout_seconds = 60;
    int max_in_flight = 4;
    int schema_retries = 2;
    int max_tokens = 512;

    static ClientConfig from_env() {
        auto env_or = [](const char* name, std::string def) {
            const char* v = std::getenv(name);
            return v ? std::string(v) : std::move(def);
        };
        ClientConfig c;
        c.endpoint = env_or("LAGA_LLM_ENDPOINT", "");
        c.api_key = env_or("LAGA_LLM_API_KEY", "");
        c.model = env_or("LAGA_LLM_MODEL", c.model);
        return c;
    }
};

struct ProviderRequest {
    Role role = Role::plan_severity;
    std::string prompt;
    nlohmann::json fallback;  // deterministic answer, must satisfy the schema
    double temperature = 0.0;
    int max_tokens = 0;  // 0: use the config default
};

struct ProviderResponse {
    nlohmann::json payload;
    bool fallback = false;
    bool from_cache = false;
};

// Chat-completions client with a content-addressed response cache. Safe to
// share across threads; at most max_in_flight requests are on the wire at any
// time and cache writes are serialized.
class LlmClient {
  public:
    explicit LlmClient(ClientConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.max_in_flight < 1) throw LlmError("max_in_flight must be positive");
        if (cfg_.timeout_seconds < 1) throw LlmError("timeout must be positive");
        if (cfg_.schema_retries < 0) throw LlmError("schema_retries must be nonnegative");
    }

    ProviderResponse complete(const ProviderRequest& req) {
        if (req.prompt.empty()) throw LlmError("empty prompt");
        if (cfg_.fallback_enabled && !validate_payload(req.role, req.fallback))
            throw LlmError(std::string("fallback payload violates schema ") +
                           schema_id(req.role));

        const std::string key = cache_key(req);
        if (cfg_.cache_enabled) {
            if (auto hit = cache_lookup(key); hit && validate_payload(req.role, *hit))
                return {*hit, false, true};
        }
        if (cfg_.endpoint.empty()) return fallback_or_throw(req, "no endpoint configured");

        std::string err = "no attempt made";
        for (int attempt = 0; attempt <= cfg_.schema_retries; ++attempt) {
            auto got = post_once(req, err);
            if (!got) continue;
            if (!validate_payload(req.role, *got)) {
                err = std::string("response violates schema ") + schema_id(req.role);
                continue;
            }
            if (cfg_.cache_enabled) cache_store(key, req, *got);
            return {*got, false, false};
        }
        return fallback_or_throw(req, err);
    }

    long network_calls() const { return network_calls_.load(); }
    const ClientConfig& config() const { return cfg_; }

  private:
    // Blocks until one of the max_in_flight wire slots frees up.
    struct SlotGuard {
        LlmClient* c;
        explicit SlotGuard(LlmClient* client) : c(client) {
            std::unique_lock lk(c->slots_mu_);
            c->slots_cv_.wait(lk, [&] { return c->in_flight_ < c->cfg_.max_in_flight; });
            ++c->in_flight_;
        }
        ~SlotGuard() {
            {
                std::lock_guard lk(c->slots_mu_);
                --c->in_flight_;
            }
            c->slots_cv_.notify_one();
        }
    };

    ProviderResponse fallback_or_throw(const ProviderRequest& req, const std::string& why) {
        if (!cfg_.fallback_enabled)
            throw LlmError(std::string(to_string(req.role)) + " request failed: " + why);
        return {req.fallback, true, false};
    }

    std::optional<nlohmann::json> post_once(const ProviderRequest& req, std::string& err) {
        SlotGuard slot(this);
        httplib::Client http(cfg_.endpoint);
        http.set_connection_timeout(cfg_.timeout_seconds, 0);
        http.set_read_timeout(cfg_.timeout_seconds, 0);
        http.set_write_timeout(cfg_.timeout_seconds, 0);

        httplib::Headers headers;
        if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

        nlohmann::ordered_json body;
        body["model"] = cfg_.model;
        body["temperature"] = req.temperature;
        body["max_tokens"] = req.max_tokens > 0 ? req.max_tokens : cfg_.max_tokens;
        body["messages"] = nlohmann::ordered_json::array(
            {nlohmann::ordered_json{{"role", "user"}, {"content", req.prompt}}});

        network_calls_.fetch_add(1, std::memory_order_relaxed);
        auto res = http.Post("/v1/chat/completions", headers, body.dump(), "application/json");
        if (!res) {
            err = "transport error: " + httplib::to_string(res.error());
            return std::nullopt;
        }
        if (res->status < 200 || res->status >= 300) {
            err = "http status " + std::to_string(res->status);
            return std::nullopt;
        }
        try {
            const auto wire = nlohmann::json::parse(res->body);
            const auto content =
                wire.at("choices").at(0).at("message").at("content").get<std::string>();
            return nlohmann::json::parse(content);
        } catch (const std::exception& e) {
            err = std::string("malformed response: ") + e.what();
            return std::nullopt;
        }
    }

    std::string cache_key(const ProviderRequest& req) const {
        std::string material;
        material += schema_id(req.role);
        material += '\n';
        material += cfg_.model;
        material += '\n';
        material += req.prompt;
        return detail::sha256_hex(material);
    }

    std::filesystem::path cache_path(const std::string& key) const {
        return std::filesystem::path(cfg_.cache_dir) / (key + ".json");
    }

    std::optional<nlohmann::json> cache_lookup(const std::string& key) const {
        std::lock_guard lk(cache_mu_);
        std::ifstream in(cache_path(key));
        if (!in) return std::nullopt;
        try {
            nlohmann::json j;
            in >> j;
            return j.at("response");
        } catch (...) {
            return std::nullopt;  // unreadable entries count as misses
        }
    }

    static std::string timestamp_utc() {
        const std::time_t now =
            std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    void cache_store(const std::string& key, const ProviderRequest& req,
                     const nlohmann::json& payload) {
        std::lock_guard lk(cache_mu_);
        std::error_code ec;
        std::filesystem::create_directories(cfg_.cache_dir, ec);
        nlohmann::ordered_json entry;
        entry["schema"] = schema_id(req.role);
        entry["model"] = cfg_.model;
        entry["role"] = to_string(req.role);
        entry["prompt_sha256"] = detail::sha256_hex(req.prompt);
        entry["provider"] = cfg_.endpoint;
        entry["created"] = timestamp_utc();
        entry["response"] = payload;

        const auto path = cache_path(key);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << entry.dump(2) << '\n';
        }
        std::filesystem::rename(tmp, path, ec);
        if (ec) std::filesystem::remove(tmp, ec);
    }

    ClientConfig cfg_;
    mutable std::mutex cache_mu_;
    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    int in_flight_ = 0;
    std::atomic<long> network_calls_{0};
};

}  // namespace laga::llm
