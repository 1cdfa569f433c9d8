#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/gateway.hpp"

namespace forge::topics {

inline constexpr std::size_t kWordsPerTopicStep = 500;
inline constexpr std::size_t kMaxUnsegmentedWords = 12000;
inline constexpr std::size_t kSegmentWords = 1000;
inline constexpr int kMaxTopicsPerPrompt = 5;

/// A short label (one to three words) extracted from one segment of a document.
struct Topic {
    std::string doc_id;
    std::size_t segment_index = 0;
    std::size_t quota_rank = 1;
    std::string text;

    /// "doc_id/segment/rank"; unique within an extraction.
    std::string key() const;

    bool operator==(const Topic&) const = default;
};

/// Canonical order: (doc_id, segment_index, quota_rank).
bool topic_order(const Topic& a, const Topic& b);

struct Segmented {
    bool operator==(const Segmented&) const = default;
};
using Quota = std::variant<int, Segmented>;

/// 1 topic up to 500 words, one more per further 500 words, capped at 5 up to
/// 12,000 words; longer documents are segmented.
Quota topic_quota(std::size_t word_count);

struct Segment {
    std::size_t start_word = 0;
    std::size_t end_word = 0;  // exclusive
    int topics_requested = 0;

    bool operator==(const Segment&) const = default;
};

struct QuotaPlan {
    std::vector<Segment> segments;
    std::size_t total_requested() const;
};

/// Consecutive 1,000-word windows with two topics each; a shorter final
/// window gets the quota its own length dictates. Requires word_count > 12,000.
QuotaPlan plan_segments(std::size_t word_count);

/// Single segment for documents up to 12,000 words, plan_segments otherwise.
QuotaPlan plan_document(std::size_t word_count);

std::string build_prompt(std::string_view segment_text, int topics_requested);

/// A gateway or parse failure while extracting one segment.
class ExtractionError : public Error {
public:
    ExtractionError(const std::string& doc_id, std::size_t segment_index, const std::string& cause);
    const std::string& doc_id() const noexcept { return doc_id_; }
    std::size_t segment_index() const noexcept { return segment_index_; }

private:
    std::string doc_id_;
    std::size_t segment_index_;
};

struct DocExtraction {
    std::vector<Topic> topics;
    std::optional<std::string> skip_reason;
};

DocExtraction extract_topics(const corpus::TranscriptDoc& doc, gateway::Gateway& gw,
                             const gateway::BackendDescriptor& backend);

struct SkippedDoc {
    std::string doc_id;
    std::string reason;
};

struct Extraction {
    std::vector<Topic> topics;  // canonical order
    std::vector<SkippedDoc> skipped;
};

/// Runs extract_topics over every video on up to `workers` threads.
Extraction extract_corpus(const corpus::Corpus& corpus, gateway::Gateway& gw,
                          const gateway::BackendDescriptor& backend, std::size_t workers);

std::string serialize_topics(std::span<const Topic> topics);
std::vector<Topic> parse_topics(std::string_view jsonl);
std::string serialize_skips(std::span<const SkippedDoc> skipped);

}  // namespace forge::topics
