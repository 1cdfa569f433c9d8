#include "forge/gateway.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <thread>

#include "forge/error.hpp"
#include "forge/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace forge::gateway {

using nlohmann::json;

void GenerationRequest::validate() const {
    if (text::trim(prompt).empty()) throw PreconditionError("generation request: prompt is empty");
    if (max_tokens <= 0) throw PreconditionError("generation request: max_tokens must be positive");
    if (temperature < 0.0) throw PreconditionError("generation request: temperature must be non-negative");
}

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    double ss = 0.0;
    for (double v : values_) ss += v * v;
    norm_ = std::sqrt(ss);
}

EmbeddingVector EmbeddingVector::normalized() const {
    if (norm_ == 0.0) return *this;
    std::vector<double> out(values_);
    for (double& v : out) v /= norm_;
    return EmbeddingVector(std::move(out));
}

std::string_view to_string(BackendKind kind) {
    switch (kind) {
        case BackendKind::RemoteGeneration: return "RemoteGeneration";
        case BackendKind::RemoteEmbedding: return "RemoteEmbedding";
        case BackendKind::MockGeneration: return "MockGeneration";
        case BackendKind::MockEmbedding: return "MockEmbedding";
    }
    return "?";
}

BackendKind parse_backend_kind(std::string_view s) {
    for (auto k : {BackendKind::RemoteGeneration, BackendKind::RemoteEmbedding, BackendKind::MockGeneration,
                   BackendKind::MockEmbedding})
        if (to_string(k) == s) return k;
    throw ParseError(fmt::format("unknown backend kind '{}'", s), std::string(s));
}

void BackendDescriptor::validate() const {
    if (is_remote() && (!endpoint || endpoint->empty()))
        throw ValidationError(fmt::format("backend {}: remote kinds require an endpoint", model_name));
    if (!is_remote() && !seed) throw ValidationError(fmt::format("backend {}: mock kinds require a seed", model_name));
    if (kind == BackendKind::MockEmbedding && dimension == 0)
        throw ValidationError("mock embedding dimension must be positive");
}

namespace {

class HttplibTransport final : public Transport {
public:
    HttpResponse post(const std::string& url, const std::string& body,
                      const std::vector<std::pair<std::string, std::string>>& headers,
                      std::chrono::milliseconds timeout) override {
        const auto scheme_end = url.find("://");
        const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
        const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(base);
        const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
        const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
        client.set_connection_timeout(secs.count(), usecs.count());
        client.set_read_timeout(secs.count(), usecs.count());
        client.set_write_timeout(secs.count(), usecs.count());
        httplib::Headers hdrs;
        for (const auto& [k, v] : headers) hdrs.emplace(k, v);
        auto res = client.Post(path, hdrs, body, "application/json");
        if (!res) return {0, httplib::to_string(res.error())};
        return {res->status, res->body};
    }
};

bool is_transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<Gateway::kMaxInFlightLimit>& s) : s_(s) { s_.acquire(); }
    ~SlotGuard() { s_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<Gateway::kMaxInFlightLimit>& s_;
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

Gateway::Gateway(GatewayOptions options, std::shared_ptr<Transport> transport)
    : options_(std::move(options)),
      transport_(transport ? std::move(transport) : make_http_transport()),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, kMaxInFlightLimit))) {
    if (options_.audit_path) {
        audit_.open(*options_.audit_path, std::ios::app);
        if (!audit_) throw Error("cannot open audit file " + options_.audit_path->string());
    }
}

void Gateway::audit(const BackendDescriptor& backend, std::string_view request, std::string_view response,
                    int status, int attempt) {
    if (!audit_.is_open()) return;
    json line = {{"backend", to_string(backend.kind)},
                 {"model", backend.model_name},
                 {"attempt", attempt},
                 {"status", status},
                 {"request", request},
                 {"response", response}};
    std::lock_guard lock(audit_mutex_);
    audit_ << line.dump(-1, ' ', false, json::error_handler_t::replace) << '\n';
    audit_.flush();
}

HttpResponse Gateway::post_with_retry(const BackendDescriptor& backend, const std::string& body) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!backend.api_key_env.empty()) {
        if (const char* key = std::getenv(backend.api_key_env.c_str()))
            headers.emplace_back("Authorization", std::string("Bearer ") + key);
    }
    auto backoff = options_.initial_backoff;
    HttpResponse last;
    for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, options_.max_backoff);
        }
        {
            SlotGuard slot(slots_);
            last = transport_->post(*backend.endpoint, body, headers, options_.timeout);
        }
        audit(backend, body, last.body, last.status, attempt);
        if (last.status >= 200 && last.status < 300) return last;
        if (!is_transient(last.status))
            throw TransportError(fmt::format("{}: HTTP {}: {}", backend.model_name, last.status, last.body));
        spdlog::debug("{}: transient failure (status {}), attempt {}", backend.model_name, last.status, attempt + 1);
    }
    throw TransportError(fmt::format("{}: giving up after {} attempts (last status {})", backend.model_name,
                                     options_.max_retries + 1, last.status));
}

std::string Gateway::generate(const GenerationRequest& request, const BackendDescriptor& backend) {
    if (!backend.is_generation())
        throw UsageError(fmt::format("generate: backend {} is an embedding backend", backend.model_name));
    backend.validate();
    request.validate();
    if (backend.kind == BackendKind::MockGeneration) {
        SlotGuard slot(slots_);
        auto out = mock_generate(request.prompt, *backend.seed, backend.fixed_responses);
        if (audit_.is_open()) audit(backend, request.prompt, out, 200, 0);
        return out;
    }
    const json body = {{"model", backend.model_name},
                       {"prompt", request.prompt},
                       {"parameters", {{"max_tokens", request.max_tokens}, {"temperature", request.temperature}}}};
    const auto res = post_with_retry(backend, body.dump());
    try {
        return json::parse(res.body).at("output").get<std::string>();
    } catch (const json::exception& e) {
        throw TransportError(fmt::format("{}: malformed generation response ({})", backend.model_name, e.what()));
    }
}

std::vector<EmbeddingVector> Gateway::embed_batch(std::span<const std::string> texts,
                                                  const BackendDescriptor& backend) {
    if (backend.is_generation())
        throw UsageError(fmt::format("embed_batch: backend {} is a generation backend", backend.model_name));
    backend.validate();
    if (texts.empty()) throw PreconditionError("embed_batch: no input texts");

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    if (backend.kind == BackendKind::MockEmbedding) {
        SlotGuard slot(slots_);
        for (const auto& t : texts) out.push_back(mock_embed(t, *backend.seed, backend.dimension));
        return out;
    }
    const std::size_t chunk = std::max<std::size_t>(1, options_.embed_chunk);
    for (std::size_t start = 0; start < texts.size(); start += chunk) {
        const auto part = texts.subspan(start, std::min(chunk, texts.size() - start));
        const json body = {{"model", backend.model_name}, {"inputs", std::vector<std::string>(part.begin(), part.end())}};
        const auto res = post_with_retry(backend, body.dump());
        std::vector<std::vector<double>> vectors;
        try {
            vectors = json::parse(res.body).at("vectors").get<std::vector<std::vector<double>>>();
        } catch (const json::exception& e) {
            throw TransportError(fmt::format("{}: malformed embedding response ({})", backend.model_name, e.what()));
        }
        if (vectors.size() != part.size())
            throw IntegrityError(fmt::format("{}: expected {} vectors, got {}", backend.model_name, part.size(),
                                             vectors.size()));
        for (auto& v : vectors) out.push_back(EmbeddingVector(std::move(v)).normalized());
    }
    const std::size_t dim = out.front().size();
    for (const auto& v : out)
        if (v.size() != dim)
            throw IntegrityError(fmt::format("{}: embedding dimension mismatch ({} vs {})", backend.model_name,
                                             v.size(), dim));
    return out;
}

std::string truncate_words(std::string_view text, std::size_t max_words) { return text::first_words(text, max_words); }

std::vector<std::string> parse_numbered_topics(std::string_view completion, std::size_t expected_n) {
    static const std::regex kLine(R"(^\s*(\d+)\s*[.)]\s*(.*)$)");
    std::vector<std::string> topics;
    for (std::size_t start = 0; start <= completion.size();) {
        auto end = completion.find('\n', start);
        if (end == std::string_view::npos) end = completion.size();
        const std::string line(completion.substr(start, end - start));
        start = end + 1;

        std::smatch m;
        if (!std::regex_match(line, m, kLine)) continue;
        std::string topic(text::trim(m[2].str()));
        // Strip markdown emphasis, quotes and a trailing period.
        while (!topic.empty() && (topic.front() == '*' || topic.front() == '"' || topic.front() == '\''))
            topic.erase(topic.begin());
        while (!topic.empty() &&
               (topic.back() == '*' || topic.back() == '"' || topic.back() == '\'' || topic.back() == '.'))
            topic.pop_back();
        topic = std::string(text::trim(topic));
        if (topic.empty()) continue;
        if (text::word_count(topic) > 3) {
            auto cut = truncate_words(topic, 3);
            spdlog::debug("topic over three words truncated: '{}' -> '{}'", topic, cut);
            topic = std::move(cut);
        }
        topics.push_back(std::move(topic));
        if (topics.size() == expected_n) break;
        if (end == completion.size()) break;
    }
    if (topics.empty()) throw ParseError("no numbered topics in completion", std::string(completion));
    return topics;
}

}  // namespace forge::gateway
