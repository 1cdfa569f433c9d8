#include "forge/topics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <mutex>
#include <tuple>

#include "forge/text.hpp"
#include "forge/util/io.hpp"
#include "forge/util/parallel.hpp"
#include "json.hpp"

namespace forge::topics {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Topic::key() const { return fmt::format("{}/{}/{}", doc_id, segment_index, quota_rank); }

bool topic_order(const Topic& a, const Topic& b) {
    return std::tie(a.doc_id, a.segment_index, a.quota_rank) < std::tie(b.doc_id, b.segment_index, b.quota_rank);
}

Quota topic_quota(std::size_t word_count) {
    if (word_count > kMaxUnsegmentedWords) return Segmented{};
    if (word_count <= kWordsPerTopicStep) return 1;
    const auto steps = (word_count + kWordsPerTopicStep - 1) / kWordsPerTopicStep;
    return static_cast<int>(std::min<std::size_t>(steps, kMaxTopicsPerPrompt));
}

std::size_t QuotaPlan::total_requested() const {
    std::size_t n = 0;
    for (const auto& s : segments) n += static_cast<std::size_t>(s.topics_requested);
    return n;
}

QuotaPlan plan_segments(std::size_t word_count) {
    if (word_count <= kMaxUnsegmentedWords)
        throw UsageError(fmt::format("plan_segments: {} words does not need segmentation", word_count));
    QuotaPlan plan;
    for (std::size_t start = 0; start < word_count; start += kSegmentWords) {
        const std::size_t end = std::min(start + kSegmentWords, word_count);
        const int n = end - start == kSegmentWords ? 2 : std::get<int>(topic_quota(end - start));
        plan.segments.push_back({start, end, n});
    }
    return plan;
}

QuotaPlan plan_document(std::size_t word_count) {
    const auto q = topic_quota(word_count);
    if (std::holds_alternative<Segmented>(q)) return plan_segments(word_count);
    return QuotaPlan{{Segment{0, word_count, std::get<int>(q)}}};
}

std::string build_prompt(std::string_view segment_text, int topics_requested) {
    static constexpr std::array<std::string_view, 5> kCountWords{"one main topic", "two main topics",
                                                                 "three main topics", "four main topics",
                                                                 "five main topics"};
    if (topics_requested < 1 || topics_requested > kMaxTopicsPerPrompt)
        throw PreconditionError(fmt::format("build_prompt: topics_requested must be in 1..5, got {}", topics_requested));
    std::string prompt = fmt::format(
        "You are given a transcript of the video. Detect {} from the given transcript. "
        "All topics should be no more than 3 words and in English.\n"
        "Generate your response in the following way:",
        kCountWords[static_cast<std::size_t>(topics_requested - 1)]);
    for (int i = 1; i <= topics_requested; ++i) prompt += fmt::format("\n{}. Topic{}", i, i);
    prompt += "\n\n";
    prompt += segment_text;
    return prompt;
}

ExtractionError::ExtractionError(const std::string& doc_id, std::size_t segment_index, const std::string& cause)
    : Error(fmt::format("extract {} segment {}: {}", doc_id, segment_index, cause)),
      doc_id_(doc_id),
      segment_index_(segment_index) {}

DocExtraction extract_topics(const corpus::TranscriptDoc& doc, gateway::Gateway& gw,
                             const gateway::BackendDescriptor& backend) {
    DocExtraction out;
    if (!doc.has_transcript()) {
        out.skip_reason = "no transcript";
        return out;
    }
    const auto tokens = text::tokenize(doc.transcript_text);
    if (tokens.empty()) {
        out.skip_reason = "empty transcript";
        return out;
    }
    const auto plan = plan_document(tokens.size());
    for (std::size_t s = 0; s < plan.segments.size(); ++s) {
        const auto& seg = plan.segments[s];
        const auto begin = tokens[seg.start_word].offset;
        const auto& last = tokens[seg.end_word - 1];
        const auto segment_text = std::string_view(doc.transcript_text).substr(begin, last.offset + last.length - begin);
        try {
            gateway::GenerationRequest req{build_prompt(segment_text, seg.topics_requested), 64 * seg.topics_requested,
                                           0.0};
            const auto completion = gw.generate(req, backend);
            const auto labels = gateway::parse_numbered_topics(completion, static_cast<std::size_t>(seg.topics_requested));
            for (std::size_t r = 0; r < labels.size(); ++r) out.topics.push_back({doc.video_id, s, r + 1, labels[r]});
        } catch (const ExtractionError&) {
            throw;
        } catch (const Error& e) {
            throw ExtractionError(doc.video_id, s, e.what());
        }
    }
    return out;
}

Extraction extract_corpus(const corpus::Corpus& corpus, gateway::Gateway& gw,
                          const gateway::BackendDescriptor& backend, std::size_t workers) {
    const auto& videos = corpus.videos();
    std::vector<DocExtraction> per_doc(videos.size());
    util::parallel_for(videos.size(), workers,
                       [&](std::size_t i) { per_doc[i] = extract_topics(videos[i], gw, backend); });
    Extraction out;
    for (std::size_t i = 0; i < videos.size(); ++i) {
        auto& d = per_doc[i];
        if (d.skip_reason) out.skipped.push_back({videos[i].video_id, *d.skip_reason});
        for (auto& t : d.topics) out.topics.push_back(std::move(t));
    }
    std::sort(out.topics.begin(), out.topics.end(), topic_order);
    std::sort(out.skipped.begin(), out.skipped.end(),
              [](const SkippedDoc& a, const SkippedDoc& b) { return a.doc_id < b.doc_id; });
    return out;
}

std::string serialize_topics(std::span<const Topic> topics) {
    std::string out;
    for (const auto& t : topics) {
        ordered_json j;
        j["doc_id"] = t.doc_id;
        j["segment_index"] = t.segment_index;
        j["quota_rank"] = t.quota_rank;
        j["text"] = t.text;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<Topic> parse_topics(std::string_view jsonl) {
    std::vector<Topic> topics;
    std::size_t line_no = 0;
    for (auto line : util::split_lines(jsonl)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            topics.push_back({j.at("doc_id").get<std::string>(), j.at("segment_index").get<std::size_t>(),
                              j.at("quota_rank").get<std::size_t>(), j.at("text").get<std::string>()});
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("topics line {}: {}", line_no, e.what()), std::string(line));
        }
    }
    return topics;
}

std::string serialize_skips(std::span<const SkippedDoc> skipped) {
    std::string out;
    for (const auto& s : skipped) {
        ordered_json j;
        j["doc_id"] = s.doc_id;
        j["reason"] = s.reason;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace forge::topics
