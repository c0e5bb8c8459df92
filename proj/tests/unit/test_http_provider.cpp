#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "goaltm/errors.hpp"
#include "goaltm/providers.hpp"

using namespace goaltm;
using nlohmann::json;

namespace {

// Local HTTP stub standing in for a completion/embedding endpoint.
struct StubServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    StubServer() = default;

    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~StubServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpOptions quick_options(const std::string& base_url) {
    HttpOptions opt;
    opt.base_url = base_url;
    opt.attempts = 3;
    opt.backoff_ms = 1;
    return opt;
}

Document doc(const std::string& id, const std::string& text) {
    Document d;
    d.id = id;
    d.raw_text = text;
    d.tokens = tokenize_fallback(text);
    return d;
}

struct EnvKey {
    EnvKey(const char* value) { ::setenv("GOALTM_API_KEY", value, 1); }
    ~EnvKey() { ::unsetenv("GOALTM_API_KEY"); }
};

} // namespace

TEST_CASE("http completion sends the rendered prompt and auth header") {
    EnvKey key("sk-test-123");
    StubServer stub;
    json seen;
    std::string seen_auth;
    stub.server.Post("/v9/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        seen_auth = req.get_header_value("Authorization");
        json body{{"choices", json::array({json{{"message", json{{"content",
                       "money worries; job stress; sleep loss"}}}}})}};
        res.set_content(body.dump(), "application/json");
    });
    stub.start();

    HttpCompletionProvider provider(quick_options(stub.base_url() + "/v9"));
    DocGoals g = summarize_goals(provider, doc("d1", "broke and tired"), "life problems");

    REQUIRE(g.goals.size() == 3);
    CHECK(g.goals[1] == "job stress");
    CHECK(seen_auth == "Bearer sk-test-123");
    CHECK(seen["model"] == "gpt-4o-mini");
    CHECK(seen["temperature"] == 0.0);
    REQUIRE(seen["messages"].size() == 2);
    CHECK(seen["messages"][0]["role"] == "system");
    std::string user = seen["messages"][1]["content"].get<std::string>();
    CHECK(user.find("life problems") != std::string::npos);
    CHECK(user.find("broke and tired") != std::string::npos);
}

TEST_CASE("http completion retries transient failures then succeeds") {
    StubServer stub;
    std::atomic<int> hits{0};
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 503;
            res.set_content("busy", "text/plain");
            return;
        }
        json body{{"choices", json::array({json{{"message", json{{"content", "ok text"}}}}})}};
        res.set_content(body.dump(), "application/json");
    });
    stub.start();

    HttpCompletionProvider provider(quick_options(stub.base_url()));
    auto [a, b] = provider.augment(doc("d1", "hello"));
    CHECK(a == "ok text");
    CHECK(b == "ok text");
    CHECK(hits.load() == 4); // two failures, success, then the second rewrite
}

TEST_CASE("http completion surfaces transport failure after exhausting retries") {
    StubServer stub;
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("down", "text/plain");
    });
    stub.start();

    HttpCompletionProvider provider(quick_options(stub.base_url()));
    CHECK_THROWS_AS(provider.summarize(doc("d1", "text"), "goal"), TransportError);
}

TEST_CASE("http completion rejects malformed response bodies") {
    StubServer stub;
    stub.server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content("not json at all", "application/json");
    });
    stub.server.Post("/shape/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"choices": []})", "application/json");
    });
    stub.start();

    HttpCompletionProvider bad_json(quick_options(stub.base_url()));
    CHECK_THROWS_AS(bad_json.summarize(doc("d1", "text"), "goal"), ProtocolError);

    HttpCompletionProvider bad_shape(quick_options(stub.base_url() + "/shape"));
    CHECK_THROWS_AS(bad_shape.summarize(doc("d1", "text"), "goal"), ProtocolError);
}

TEST_CASE("http embeddings round-trip rows and validate dimensions") {
    StubServer stub;
    json seen;
    stub.server.Post("/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        seen = json::parse(req.body);
        json data = json::array();
        for (size_t i = 0; i < seen["input"].size(); ++i) {
            json row = json::array();
            for (int d = 0; d < 3; ++d) row.push_back(0.5 * static_cast<double>(i) + 0.25 * d);
            data.push_back(json{{"embedding", row}});
        }
        res.set_content(json{{"data", data}}.dump(), "application/json");
    });
    stub.start();

    HttpOptions opt = quick_options(stub.base_url());
    opt.embedding_dim = 3;
    HttpEmbeddingProvider provider(opt);
    Mat m = provider.embed_tokens({"alpha", "beta"});
    CHECK(m.rows == 2);
    CHECK(m.at(0, 1) == doctest::Approx(0.25));
    CHECK(m.at(1, 0) == doctest::Approx(0.5));
    CHECK(seen["model"] == "text-embedding-3-small");
    CHECK(seen["input"][1] == "beta");

    HttpOptions wrong = quick_options(stub.base_url());
    wrong.embedding_dim = 5; // server replies with 3-wide rows
    HttpEmbeddingProvider mismatched(wrong);
    CHECK_THROWS_AS(mismatched.embed_tokens({"alpha"}), ProtocolError);
}
