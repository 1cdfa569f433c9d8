#include <atomic>
#include <deque>
#include <thread>

#include "doctest.h"
#include "forge/error.hpp"
#include "forge/gateway.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace forge;
using namespace forge::gateway;

namespace {

class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::deque<HttpResponse> script) : script_(std::move(script)) {}

    HttpResponse post(const std::string&, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>&, std::chrono::milliseconds) override {
        std::lock_guard lock(mutex_);
        ++calls;
        last_body = body;
        if (script_.empty()) return {500, "exhausted"};
        auto r = script_.front();
        script_.pop_front();
        return r;
    }

    int calls = 0;
    std::string last_body;

private:
    std::mutex mutex_;
    std::deque<HttpResponse> script_;
};

class SlowTransport : public Transport {
public:
    HttpResponse post(const std::string&, const std::string&, const std::vector<std::pair<std::string, std::string>>&,
                      std::chrono::milliseconds) override {
        const int now = ++active;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --active;
        return {200, R"({"output":"1. Topic"})"};
    }
    std::atomic<int> active{0};
    std::atomic<int> peak{0};
};

BackendDescriptor remote_gen() {
    BackendDescriptor b;
    b.kind = BackendKind::RemoteGeneration;
    b.endpoint = "http://127.0.0.1:1/generate";
    b.model_name = "m";
    return b;
}

GatewayOptions fast_options() {
    GatewayOptions o;
    o.initial_backoff = std::chrono::milliseconds(1);
    o.max_backoff = std::chrono::milliseconds(4);
    return o;
}

}  // namespace

TEST_CASE("transient failures are retried with backoff") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{
        {429, "slow down"}, {429, "slow down"}, {429, "slow down"}, {200, R"({"output":"1. Economy"})"}});
    Gateway gw(fast_options(), t);
    CHECK(gw.generate({"prompt"}, remote_gen()) == "1. Economy");
    CHECK(t->calls == 4);
    const auto body = nlohmann::json::parse(t->last_body);
    CHECK(body["model"] == "m");
    CHECK(body["parameters"]["temperature"] == 0.0);
}

TEST_CASE("non-transient failures are not retried") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{400, "bad"}});
    Gateway gw(fast_options(), t);
    CHECK_THROWS_AS(gw.generate({"prompt"}, remote_gen()), TransportError);
    CHECK(t->calls == 1);
}

TEST_CASE("retries give up after max_retries") {
    auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{});
    auto o = fast_options();
    o.max_retries = 2;
    Gateway gw(o, t);
    CHECK_THROWS_AS(gw.generate({"prompt"}, remote_gen()), TransportError);
    CHECK(t->calls == 3);
}

TEST_CASE("in-flight calls never exceed the bound") {
    auto t = std::make_shared<SlowTransport>();
    auto o = fast_options();
    o.max_in_flight = 3;
    Gateway gw(o, t);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 10; ++i) threads.emplace_back([&] { gw.generate({"prompt"}, remote_gen()); });
    threads.clear();
    CHECK(t->peak.load() <= 3);
    CHECK(t->peak.load() >= 1);
}

TEST_CASE("backend kind mismatches are usage errors") {
    Gateway gw;
    BackendDescriptor emb;
    emb.kind = BackendKind::MockEmbedding;
    emb.seed = 1;
    CHECK_THROWS_AS(gw.generate({"prompt"}, emb), UsageError);
    BackendDescriptor gen;
    gen.seed = 1;
    const std::vector<std::string> texts{"a"};
    CHECK_THROWS_AS(gw.embed_batch(texts, gen), UsageError);
    CHECK_THROWS_AS(gw.embed_batch({}, emb), PreconditionError);
}

TEST_CASE("remote embeddings are validated and normalized") {
    BackendDescriptor b;
    b.kind = BackendKind::RemoteEmbedding;
    b.endpoint = "http://x/embed";
    const std::vector<std::string> texts{"a", "b"};
    SUBCASE("normalized") {
        auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, R"({"vectors":[[3,4],[0,2]]})"}});
        Gateway gw(fast_options(), t);
        const auto v = gw.embed_batch(texts, b);
        CHECK(v[0].values()[0] == doctest::Approx(0.6));
        CHECK(v[1].norm() == doctest::Approx(1.0));
    }
    SUBCASE("count mismatch") {
        auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, R"({"vectors":[[3,4]]})"}});
        Gateway gw(fast_options(), t);
        CHECK_THROWS_AS(gw.embed_batch(texts, b), IntegrityError);
    }
    SUBCASE("dimension mismatch") {
        auto t = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, R"({"vectors":[[3,4],[1,2,3]]})"}});
        Gateway gw(fast_options(), t);
        CHECK_THROWS_AS(gw.embed_batch(texts, b), IntegrityError);
    }
}

TEST_CASE("real HTTP transport retries against a local server") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/generate", [&](const httplib::Request& req, httplib::Response& res) {
        if (++hits < 3) {
            res.status = 503;
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        res.set_content(nlohmann::json{{"output", "echo " + body["prompt"].get<std::string>()}}.dump(),
                        "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    auto b = remote_gen();
    b.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/generate";
    Gateway gw(fast_options());
    CHECK(gw.generate({"hello"}, b) == "echo hello");
    CHECK(hits.load() == 3);
    server.stop();
    th.join();
}

TEST_CASE("mock backends are pure functions of input and seed") {
    CHECK(mock_generate("Detect one main topic from the given transcript.\n\nfarmers tractors farmers", 1) ==
          mock_generate("Detect one main topic from the given transcript.\n\nfarmers tractors farmers", 1));
    const auto a = mock_embed("economy", 7, 32);
    CHECK(a == mock_embed("economy", 7, 32));
    CHECK_FALSE(a == mock_embed("economy", 8, 32));
    CHECK(a.norm() == doctest::Approx(1.0));
    // shared words and trigrams make near-synonyms closer than unrelated text
    const auto b = mock_embed("economy growth", 7, 32);
    const auto c = mock_embed("football stadium", 7, 32);
    double ab = 0, ac = 0;
    for (std::size_t i = 0; i < 32; ++i) {
        ab += a.values()[i] * b.values()[i];
        ac += a.values()[i] * c.values()[i];
    }
    CHECK(ab > ac);
}

TEST_CASE("numbered topic lists are parsed and repaired") {
    CHECK(parse_numbered_topics("1. Economy\n2. Immigration Policy", 2) ==
          std::vector<std::string>{"Economy", "Immigration Policy"});
    CHECK(parse_numbered_topics("Here you go:\n1) **Farm Protests**.\n2. \"EU Elections\"", 2) ==
          std::vector<std::string>{"Farm Protests", "EU Elections"});
    CHECK(parse_numbered_topics("1. French Economic Policy Reform", 1) ==
          std::vector<std::string>{"French Economic Policy"});
    CHECK(parse_numbered_topics("1. A\n2. B\n3. C", 2).size() == 2);
    try {
        parse_numbered_topics("no list here", 1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.raw() == "no list here");
    }
}

TEST_CASE("request validation") {
    CHECK_THROWS_AS(GenerationRequest{""}.validate(), PreconditionError);
    GenerationRequest r{"x"};
    r.max_tokens = 0;
    CHECK_THROWS_AS(r.validate(), PreconditionError);
    CHECK(truncate_words("a  b c d", 2) == "a b");
}
