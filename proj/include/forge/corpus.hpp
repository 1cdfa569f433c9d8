#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/text.hpp"

namespace forge::corpus {

using Date = std::chrono::year_month_day;

enum class SourceKind { NationalNews, LocalNews, Politician, Party };
enum class Orientation { Left, Center, Right, FarRight, Unlabeled };
enum class TranscriptKind { Manual, Auto, Missing };
enum class Period { PreElection, European, Legislative, OutOfWindow };

/// The three datasets channels are grouped into: national news, political
/// (politicians and parties together) and local news.
enum class Dataset { News, Political, Local };

std::string_view to_string(SourceKind v);
std::string_view to_string(Orientation v);
std::string_view to_string(TranscriptKind v);
std::string_view to_string(Period v);
std::string_view to_string(Dataset v);

SourceKind parse_source_kind(std::string_view s);
Orientation parse_orientation(std::string_view s);
TranscriptKind parse_transcript_kind(std::string_view s);
Dataset parse_dataset(std::string_view s);

Dataset dataset_of(SourceKind kind);

/// Strict ISO-8601 calendar date "YYYY-MM-DD".
Date parse_date(std::string_view s);
std::string format_date(Date d);

struct Channel {
    std::string channel_id;
    std::string name;
    SourceKind source_kind = SourceKind::NationalNews;
    Orientation orientation = Orientation::Unlabeled;
    std::uint64_t subscriber_count = 0;
    std::uint64_t video_count = 0;

    bool operator==(const Channel&) const = default;
};

struct TranscriptDoc {
    std::string video_id;
    std::string channel_id;
    std::string title;
    Date published_at{};
    std::uint64_t view_count = 0;
    std::uint64_t like_count = 0;
    std::uint64_t comment_count = 0;
    std::string transcript_text;
    TranscriptKind transcript_kind = TranscriptKind::Missing;
    std::size_t word_count = 0;

    bool has_transcript() const noexcept { return transcript_kind != TranscriptKind::Missing; }
    bool operator==(const TranscriptDoc&) const = default;
};

/// Builds a document with a consistent cached word count.
TranscriptDoc make_doc(std::string video_id, std::string channel_id, std::string title, Date published_at,
                       std::uint64_t views, std::uint64_t likes, std::uint64_t comments,
                       std::string transcript, TranscriptKind kind);

struct FilterRules {
    std::uint64_t min_videos_political = 10;
    std::uint64_t min_subs_national = 10000;
    std::uint64_t min_subs_local = 5000;
    std::uint64_t min_videos_viz = 20;
};

bool passes(const Channel& channel, const FilterRules& rules);

/// Channels and videos with referential integrity. Immutable once built.
class Corpus {
public:
    Corpus() = default;
    /// Throws IntegrityError on duplicate ids, dangling channel references,
    /// or a transcript_kind inconsistent with the transcript text.
    Corpus(std::vector<Channel> channels, std::vector<TranscriptDoc> videos);

    const std::vector<Channel>& channels() const noexcept { return channels_; }
    const std::vector<TranscriptDoc>& videos() const noexcept { return videos_; }

    const Channel* find_channel(std::string_view id) const;
    const TranscriptDoc* find_video(std::string_view id) const;
    const Channel& channel_of(const TranscriptDoc& doc) const;

    std::optional<Date> snapshot_date;

    bool operator==(const Corpus& other) const {
        return channels_ == other.channels_ && videos_ == other.videos_ && snapshot_date == other.snapshot_date;
    }

private:
    std::vector<Channel> channels_;
    std::vector<TranscriptDoc> videos_;
    std::unordered_map<std::string, std::size_t> channel_index_;
    std::unordered_map<std::string, std::size_t> video_index_;
};

/// Parses line-delimited JSON records. Blank lines are ignored.
Corpus parse_corpus(std::string_view channels_jsonl, std::string_view videos_jsonl);
Corpus ingest_corpus(const std::filesystem::path& channels_path, const std::filesystem::path& videos_path);

/// Canonical one-record-per-line serialization in schema field order.
std::string serialize_channels(const Corpus& corpus);
std::string serialize_videos(const Corpus& corpus);

Corpus apply_filters(const Corpus& corpus, const FilterRules& rules);

/// Period windows: [2023-03-01, 2024-03-01) PreElection,
/// [2024-03-01, 2024-06-08) European, [2024-06-08, 2024-07-15] Legislative.
Period assign_period(Date date);

using text::word_count;

}  // namespace forge::corpus
