#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "pbench/backends.hpp"
#include "pbench/errors.hpp"

using namespace pbench;
using nlohmann::json;

namespace {

// In-process chat-completions endpoint with a scriptable status sequence.
class FakeServer {
public:
    FakeServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            int call = calls.fetch_add(1);
            int status = call < int(statuses.size()) ? statuses[call] : 200;
            if (status != 200) {
                res.status = status;
                res.set_content("synthetic failure", "text/plain");
                return;
            }
            json reply{{"choices", json::array({json{
                           {"message", json{{"role", "assistant"}, {"content", content}}}}})}};
            res.set_content(reply.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    BackendConfig config() const {
        BackendConfig cfg;
        cfg.model_id = "live";
        cfg.kind = "http";
        cfg.base_url = "http://127.0.0.1:" + std::to_string(port_);
        cfg.max_attempts = 3;
        cfg.backoff_initial_ms = 1;  // keep retries fast under test
        cfg.timeout_seconds = 5;
        return cfg;
    }

    std::vector<int> statuses;  // per-call status; 200 after the list runs out
    std::string content = "Glad you asked about the crossings.";
    std::atomic<int> calls{0};
    std::string last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

std::vector<ChatMessage> sample_messages() {
    return {{ChatMessage::Role::System, "you are the solicitor", 0},
            {ChatMessage::Role::Donor, "hello", 1},
            {ChatMessage::Role::Agent, "hi there", 1},
            {ChatMessage::Role::Donor, "why donate?", 2}};
}

struct EnvKey {
    EnvKey() { setenv("PBENCH_API_KEY", "test-key-123", 1); }
    ~EnvKey() { unsetenv("PBENCH_API_KEY"); }
};

}  // namespace

TEST_CASE("a successful request carries the full wire format") {
    EnvKey env;
    FakeServer server;
    HttpChatBackend backend(server.config());
    CHECK_FALSE(backend.deterministic());
    CHECK_FALSE(backend.wants_persona_tag());

    std::string reply = backend.complete(sample_messages(), 42);
    CHECK(reply == server.content);
    CHECK(server.calls == 1);
    CHECK(server.last_auth == "Bearer test-key-123");

    json body = json::parse(server.last_body);
    CHECK(body.at("model") == "live");
    CHECK(body.at("seed") == 42);
    CHECK(body.at("max_tokens") == 256);
    REQUIRE(body.at("messages").size() == 4);
    CHECK(body["messages"][0]["role"] == "system");
    CHECK(body["messages"][1]["role"] == "user");
    CHECK(body["messages"][2]["role"] == "assistant");
    CHECK(body["messages"][3]["content"] == "why donate?");
}

TEST_CASE("server errors are retried until one attempt lands") {
    EnvKey env;
    FakeServer server;
    server.statuses = {500, 503};  // two failures, then 200
    HttpChatBackend backend(server.config());
    CHECK(backend.complete(sample_messages(), 1) == server.content);
    CHECK(server.calls == 3);
}

TEST_CASE("client errors fail immediately, no retry") {
    EnvKey env;
    FakeServer server;
    server.statuses = {400};
    HttpChatBackend backend(server.config());
    try {
        backend.complete(sample_messages(), 1);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status() == 400);
        CHECK(std::string(e.what()).find("rejected") != std::string::npos);
    }
    CHECK(server.calls == 1);
}

TEST_CASE("persistent server failure surfaces the last status after max attempts") {
    EnvKey env;
    FakeServer server;
    server.statuses = {500, 500, 500, 500};
    HttpChatBackend backend(server.config());
    try {
        backend.complete(sample_messages(), 1);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status() == 500);
        CHECK(std::string(e.what()).find("after 3 attempts") != std::string::npos);
    }
    CHECK(server.calls == 3);
}

TEST_CASE("an unreachable host is a transport error with status 0") {
    EnvKey env;
    BackendConfig cfg;
    cfg.model_id = "ghost";
    cfg.kind = "http";
    cfg.base_url = "http://127.0.0.1:1";  // reserved port, nothing listens
    cfg.max_attempts = 2;
    cfg.backoff_initial_ms = 1;
    HttpChatBackend backend(cfg);
    try {
        backend.complete(sample_messages(), 1);
        FAIL("expected BackendError");
    } catch (const BackendError& e) {
        CHECK(e.status() == 0);
        CHECK(std::string(e.what()).find("transport error") != std::string::npos);
    }
}

TEST_CASE("a malformed success body is an immediate backend error") {
    EnvKey env;
    // a server that returns 200 with non-chat JSON
    httplib::Server raw;
    raw.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"unexpected\": true}", "application/json");
    });
    int port = raw.bind_to_any_port("127.0.0.1");
    std::thread th([&raw] { raw.listen_after_bind(); });
    raw.wait_until_ready();

    BackendConfig cfg;
    cfg.model_id = "odd";
    cfg.kind = "http";
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.max_attempts = 1;
    HttpChatBackend backend(cfg);
    CHECK_THROWS_AS(backend.complete(sample_messages(), 1), BackendError);

    raw.stop();
    th.join();
}

TEST_CASE("the api key must come from the environment") {
    unsetenv("PBENCH_API_KEY");
    FakeServer server;
    try {
        HttpChatBackend backend(server.config());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("PBENCH_API_KEY") != std::string::npos);
    }

    // empty value counts as unset
    setenv("PBENCH_API_KEY", "", 1);
    CHECK_THROWS_AS(HttpChatBackend(server.config()), ConfigError);
    unsetenv("PBENCH_API_KEY");

    // a custom variable name is honored
    setenv("OTHER_KEY_VAR", "k", 1);
    BackendConfig cfg = server.config();
    cfg.api_key_env = "OTHER_KEY_VAR";
    HttpChatBackend backend(cfg);
    CHECK(backend.complete(sample_messages(), 9) == server.content);
    unsetenv("OTHER_KEY_VAR");
}

TEST_CASE("backend config validation covers both kinds") {
    BackendConfig cfg;
    cfg.model_id = "m";
    cfg.kind = "carrier-pigeon";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg.kind = "mock";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no fixture path
    cfg.fixture = "f.json";
    cfg.validate();

    cfg.kind = "http";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);  // no base_url
    cfg.base_url = "http://h";
    cfg.validate();
    cfg.max_attempts = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.max_attempts = 3;
    cfg.temperature = -0.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("backend sections load from config files with path resolution") {
    IniFile ini = IniFile::parse(
        "[backend.sim]\n"
        "kind = mock\n"
        "fixture = fixtures/words.json\n"
        "[backend.live]\n"
        "kind = http\n"
        "base_url = http://127.0.0.1:9\n"
        "model_name = gpt-x\n"
        "temperature = 0.7\n"
        "max_tokens = 128\n"
        "max_attempts = 5\n"
        "api_key_env = MY_KEY\n");

    BackendConfig sim = backend_config_from_ini(ini, "sim", "/cfg/dir");
    CHECK(sim.kind == "mock");
    CHECK(sim.fixture == "/cfg/dir/fixtures/words.json");  // relative to the config

    BackendConfig live = backend_config_from_ini(ini, "live");
    CHECK(live.kind == "http");
    CHECK(live.model_name == "gpt-x");
    CHECK(live.temperature == 0.7);
    CHECK(live.max_tokens == 128);
    CHECK(live.max_attempts == 5);
    CHECK(live.api_key_env == "MY_KEY");
    CHECK(live.path == "/v1/chat/completions");  // default preserved

    CHECK_THROWS_AS(backend_config_from_ini(ini, "absent"), ConfigError);
}

TEST_CASE("make_backend dispatches on kind") {
    BackendConfig mock_cfg;
    mock_cfg.model_id = "sim";
    mock_cfg.kind = "mock";
    mock_cfg.fixture = std::string(PBENCH_DATA_DIR) + "/mock_fixture.json";
    auto mock = make_backend(mock_cfg);
    CHECK(mock->deterministic());
    CHECK(mock->wants_persona_tag());
    CHECK(mock->model_id() == "sim");

    EnvKey env;
    FakeServer server;
    auto http = make_backend(server.config());
    CHECK_FALSE(http->deterministic());
    CHECK(http->model_id() == "live");
}
