#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace forge::gateway {

struct GenerationRequest {
    std::string prompt;
    int max_tokens = 256;
    double temperature = 0.0;

    /// Throws PreconditionError on an empty prompt or non-positive max_tokens.
    void validate() const;
};

/// A real vector with its L2 norm cached at construction.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);

    const std::vector<double>& values() const noexcept { return values_; }
    double norm() const noexcept { return norm_; }
    std::size_t size() const noexcept { return values_.size(); }

    /// Unit-norm copy. A zero vector stays zero.
    EmbeddingVector normalized() const;

    bool operator==(const EmbeddingVector& o) const { return values_ == o.values_; }

private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

enum class BackendKind { RemoteGeneration, RemoteEmbedding, MockGeneration, MockEmbedding };

std::string_view to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view s);

struct BackendDescriptor {
    BackendKind kind = BackendKind::MockGeneration;
    std::optional<std::string> endpoint;
    std::string model_name = "mock";
    std::optional<std::uint64_t> seed;
    /// Environment variable holding the API key for remote kinds.
    std::string api_key_env;
    /// Output dimension of the mock embedding backend.
    std::size_t dimension = 64;
    /// Mock generation only: when set, every completion is drawn from this
    /// list by hashing (prompt, seed).
    std::vector<std::string> fixed_responses;

    bool is_generation() const noexcept {
        return kind == BackendKind::RemoteGeneration || kind == BackendKind::MockGeneration;
    }
    bool is_remote() const noexcept {
        return kind == BackendKind::RemoteGeneration || kind == BackendKind::RemoteEmbedding;
    }
    /// Remote kinds need an endpoint; mock kinds need a seed.
    void validate() const;
};

struct HttpResponse {
    int status = 0;  // 0 = connection failure
    std::string body;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const std::string& url, const std::string& body,
                              const std::vector<std::pair<std::string, std::string>>& headers,
                              std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<Transport> make_http_transport();

struct GatewayOptions {
    std::size_t max_in_flight = 8;
    std::chrono::milliseconds timeout{60'000};
    int max_retries = 4;
    std::chrono::milliseconds initial_backoff{200};
    std::chrono::milliseconds max_backoff{10'000};
    std::size_t embed_chunk = 64;
    std::optional<std::filesystem::path> audit_path;
};

/// Uniform entry point for generation and embedding backends.
/// Safe to share across threads; at most `max_in_flight` calls run at once.
class Gateway {
public:
    static constexpr std::size_t kMaxInFlightLimit = 1024;

    explicit Gateway(GatewayOptions options = {}, std::shared_ptr<Transport> transport = nullptr);
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Raw completion text. Mock backends are a pure function of (prompt, seed).
    std::string generate(const GenerationRequest& request, const BackendDescriptor& backend);

    /// One unit-norm vector per input, in input order.
    std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, const BackendDescriptor& backend);

    const GatewayOptions& options() const noexcept { return options_; }

private:
    HttpResponse post_with_retry(const BackendDescriptor& backend, const std::string& body);
    void audit(const BackendDescriptor& backend, std::string_view request, std::string_view response, int status,
               int attempt);

    GatewayOptions options_;
    std::shared_ptr<Transport> transport_;
    std::counting_semaphore<kMaxInFlightLimit> slots_;
    std::mutex audit_mutex_;
    std::ofstream audit_;
};

/// Deterministic stand-in for a generation model. Recognizes the topic,
/// cluster-naming and stance prompts and answers in their expected formats.
std::string mock_generate(std::string_view prompt, std::uint64_t seed,
                          const std::vector<std::string>& fixed_responses = {});

/// Seeded hash projection: every word and character trigram of the folded
/// text maps to a fixed pseudo-random direction; the sum is normalized.
EmbeddingVector mock_embed(std::string_view text, std::uint64_t seed, std::size_t dimension);

/// First `max_words` whitespace tokens of `text`, single-space joined.
std::string truncate_words(std::string_view text, std::size_t max_words);

/// Extracts "<k>. <text>" lines. Topics over three words are cut to their
/// first three; at most `expected_n` are returned. Throws ParseError carrying
/// the raw completion when nothing parses.
std::vector<std::string> parse_numbered_topics(std::string_view completion, std::size_t expected_n);

}  // namespace forge::gateway
