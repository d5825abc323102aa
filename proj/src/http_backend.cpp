#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "pbench/backends.hpp"
#include "pbench/util.hpp"

namespace pbench {

namespace {

const char* wire_role(ChatMessage::Role role) {
    switch (role) {
        case ChatMessage::Role::System: return "system";
        case ChatMessage::Role::Donor: return "user";
        case ChatMessage::Role::Agent: return "assistant";
    }
    throw InvalidArgument("bad message role");
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendConfig config) : config_(std::move(config)) {
    config_.validate();
    // the credential comes from the environment, never from config files
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable " + config_.api_key_env +
                          " is not set (backend '" + config_.model_id + "' needs it)");
    api_key_ = key;
}

void HttpChatBackend::pace() {
    if (config_.min_interval_ms <= 0) return;
    std::chrono::steady_clock::time_point wake;
    {
        std::lock_guard<std::mutex> lock(pace_mutex_);
        auto now = std::chrono::steady_clock::now();
        wake = std::max(now, next_allowed_);
        next_allowed_ = wake + std::chrono::milliseconds(config_.min_interval_ms);
    }
    std::this_thread::sleep_until(wake);
}

std::string HttpChatBackend::complete(const std::vector<ChatMessage>& messages,
                                      std::uint64_t seed) {
    nlohmann::json body{
        {"model", config_.model_name.empty() ? config_.model_id : config_.model_name},
        {"temperature", config_.temperature},
        {"max_tokens", config_.max_tokens},
        {"seed", seed},
    };
    auto& wire_messages = body["messages"] = nlohmann::json::array();
    for (const auto& m : messages)
        wire_messages.push_back({{"role", wire_role(m.role)}, {"content", m.content}});
    std::string payload = body.dump();

    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

    std::string last_error;
    int last_status = 0;
    for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
        if (attempt > 1) {
            int wait = config_.backoff_initial_ms << (attempt - 2);
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }
        pace();

        // one client per request; keep-alive state is not worth sharing
        // across worker threads
        httplib::Client client(config_.base_url);
        client.set_connection_timeout(config_.timeout_seconds, 0);
        client.set_read_timeout(config_.timeout_seconds, 0);
        client.set_write_timeout(config_.timeout_seconds, 0);

        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            last_status = 0;
            continue;  // retryable
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            last_status = res->status;
            continue;  // retryable
        }
        if (res->status < 200 || res->status >= 300) {
            throw BackendError("backend '" + config_.model_id + "' rejected the request: HTTP " +
                                   std::to_string(res->status) + " " + res->body,
                               res->status);
        }
        try {
            auto parsed = nlohmann::json::parse(res->body);
            return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw BackendError("backend '" + config_.model_id +
                                   "' returned an unexpected body: " + e.what(),
                               res->status);
        }
    }
    throw BackendError("backend '" + config_.model_id + "' failed after " +
                           std::to_string(config_.max_attempts) + " attempts: " + last_error,
                       last_status);
}

void BackendConfig::validate() const {
    if (model_id.empty()) throw ConfigError("backend has no model id");
    if (kind != "mock" && kind != "http")
        throw ConfigError("backend '" + model_id + "': unknown kind '" + kind +
                          "' (expected mock|http)");
    if (kind == "mock") {
        if (fixture.empty())
            throw ConfigError("backend '" + model_id + "': mock backends need a fixture path");
        return;
    }
    if (base_url.empty())
        throw ConfigError("backend '" + model_id + "': http backends need a base_url");
    if (api_key_env.empty())
        throw ConfigError("backend '" + model_id + "': api_key_env must name a variable");
    if (max_attempts < 1)
        throw ConfigError("backend '" + model_id + "': max_attempts must be >= 1");
    if (timeout_seconds < 1)
        throw ConfigError("backend '" + model_id + "': timeout_seconds must be >= 1");
    if (max_tokens < 1) throw ConfigError("backend '" + model_id + "': max_tokens must be >= 1");
    if (temperature < 0.0)
        throw ConfigError("backend '" + model_id + "': temperature must be >= 0");
    if (backoff_initial_ms < 0 || min_interval_ms < 0)
        throw ConfigError("backend '" + model_id + "': wait times must be >= 0");
}

BackendConfig backend_config_from_ini(const IniFile& ini, const std::string& model_id,
                                      const std::string& base_dir) {
    std::string section = "backend." + model_id;
    if (!ini.has_section(section))
        throw ConfigError("missing [" + section + "] section");
    BackendConfig cfg;
    cfg.model_id = model_id;
    cfg.kind = ini.get(section, "kind");
    cfg.fixture = ini.get_or(section, "fixture", "");
    if (!cfg.fixture.empty() && !base_dir.empty() && cfg.fixture.front() != '/')
        cfg.fixture = base_dir + "/" + cfg.fixture;
    cfg.base_url = ini.get_or(section, "base_url", "");
    cfg.path = ini.get_or(section, "path", cfg.path);
    cfg.model_name = ini.get_or(section, "model_name", "");
    cfg.api_key_env = ini.get_or(section, "api_key_env", cfg.api_key_env);
    cfg.temperature = ini.get_double(section, "temperature", cfg.temperature);
    cfg.max_tokens = static_cast<int>(ini.get_int(section, "max_tokens", cfg.max_tokens));
    cfg.timeout_seconds =
        static_cast<int>(ini.get_int(section, "timeout_seconds", cfg.timeout_seconds));
    cfg.max_attempts = static_cast<int>(ini.get_int(section, "max_attempts", cfg.max_attempts));
    cfg.backoff_initial_ms =
        static_cast<int>(ini.get_int(section, "backoff_initial_ms", cfg.backoff_initial_ms));
    cfg.min_interval_ms =
        static_cast<int>(ini.get_int(section, "min_interval_ms", cfg.min_interval_ms));
    cfg.validate();
    return cfg;
}

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    config.validate();
    if (config.kind == "mock")
        return std::make_unique<MockBackend>(MockFixture::load(config.fixture), config.model_id);
    return std::make_unique<HttpChatBackend>(config);
}

}  // namespace pbench
