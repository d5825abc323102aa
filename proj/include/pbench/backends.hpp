#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "pbench/config.hpp"
#include "pbench/session.hpp"

namespace pbench {

/// Wire settings for one backend, read from a `[backend.<model>]` config
/// section. API keys never appear here: `api_key_env` names the
/// environment variable that holds the credential.
struct BackendConfig {
    std::string model_id;
    std::string kind;  // "mock" or "http"

    // mock
    std::string fixture;  // path to the response fixture

    // http
    std::string base_url;  // scheme://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model_name;  // wire-level model, defaults to model_id
    std::string api_key_env = "PBENCH_API_KEY";
    double temperature = 1.0;
    int max_tokens = 256;
    int timeout_seconds = 60;
    int max_attempts = 3;
    int backoff_initial_ms = 250;  // doubles after each retried attempt
    int min_interval_ms = 0;       // spacing between request starts

    void validate() const;  // throws ConfigError
};

/// Reads `[backend.<model>]` from `ini`. Relative fixture paths resolve
/// against `base_dir` when non-empty.
BackendConfig backend_config_from_ini(const IniFile& ini, const std::string& model_id,
                                      const std::string& base_dir = {});

std::unique_ptr<ChatBackend> make_backend(const BackendConfig& config);

// --- Simulated backend ---------------------------------------------------

struct MockProfile {
    std::string match;  // glob over persona ids, e.g. "opt-*"
    std::map<std::string, double> rates;
};

/// Word-sampling plan for the simulated backend. Each response token is
/// drawn independently: with probability rates[c] it comes from
/// category_words[c], otherwise from filler. Profiles whose glob matches
/// the persona id are merged in file order, later rates overriding
/// earlier ones per category.
struct MockFixture {
    std::vector<std::string> filler;
    std::map<std::string, std::vector<std::string>> category_words;
    int response_length = 50;
    std::vector<MockProfile> profiles;

    static MockFixture from_json(const std::string& text, const std::string& origin);
    static MockFixture load(const std::string& path);

    /// Merged rates for a persona; throws ConfigError when no profile
    /// matches or the merged rates sum past 1.
    std::map<std::string, double> rates_for(const std::string& persona_id) const;
};

/// Deterministic response text for (persona, seed).
std::string mock_respond(const MockFixture& fixture, const std::string& persona_id,
                         std::uint64_t seed);

class MockBackend : public ChatBackend {
public:
    MockBackend(MockFixture fixture, std::string model_id)
        : fixture_(std::move(fixture)), model_id_(std::move(model_id)) {}

    /// Reads the persona id from the `[persona:<id>]` tag in the system
    /// message; throws ConfigError when the tag is absent.
    std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override;
    bool deterministic() const override { return true; }
    bool wants_persona_tag() const override { return true; }
    const std::string& model_id() const override { return model_id_; }

    const MockFixture& fixture() const { return fixture_; }

private:
    MockFixture fixture_;
    std::string model_id_;
};

// --- HTTP backend --------------------------------------------------------

/// Chat-completions client. Retries transport errors and 5xx responses
/// with exponential backoff; 4xx responses fail immediately. Requests are
/// spaced at least min_interval_ms apart across all threads.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(BackendConfig config);

    std::string complete(const std::vector<ChatMessage>& messages, std::uint64_t seed) override;
    bool deterministic() const override { return false; }
    bool wants_persona_tag() const override { return false; }
    const std::string& model_id() const override { return config_.model_id; }

private:
    void pace();

    BackendConfig config_;
    std::string api_key_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_allowed_{};
};

}  // namespace pbench
