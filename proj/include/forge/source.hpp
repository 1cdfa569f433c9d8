#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus.hpp"

namespace forge::corpus {

struct VideoPage {
    std::vector<std::string> video_ids;
    std::optional<std::string> next_page_token;
};

struct VideoMetadata {
    std::string video_id;
    std::string channel_id;
    std::string title;
    Date published_at{};
    std::uint64_t view_count = 0;
    std::uint64_t like_count = 0;
    std::uint64_t comment_count = 0;
};

struct TranscriptTrack {
    TranscriptKind kind = TranscriptKind::Auto;
    std::string language;
    std::string text;
};

/// Everything that would touch the network when collecting a corpus.
/// Implementations: a remote API client, or FixtureVideoSource for tests.
class VideoSource {
public:
    virtual ~VideoSource() = default;
    virtual VideoPage list_videos(const std::string& channel_id, const std::optional<std::string>& page_token) = 0;
    virtual VideoMetadata get_video(const std::string& video_id) = 0;
    virtual std::vector<TranscriptTrack> get_transcripts(const std::string& video_id) = 0;
};

/// Serves a JSON fixture:
/// {"page_size": n, "channels": {id: [video_id...]},
///  "videos": {id: {title, channel_id, published_at, view_count, like_count, comment_count,
///                  "tracks": [{kind, language, text}]}}}
class FixtureVideoSource final : public VideoSource {
public:
    explicit FixtureVideoSource(const std::filesystem::path& fixture);
    static FixtureVideoSource from_string(std::string_view json_text);

    VideoPage list_videos(const std::string& channel_id, const std::optional<std::string>& page_token) override;
    VideoMetadata get_video(const std::string& video_id) override;
    std::vector<TranscriptTrack> get_transcripts(const std::string& video_id) override;

    std::size_t list_calls() const noexcept { return list_calls_; }

private:
    FixtureVideoSource() = default;
    void load(std::string_view json_text);

    std::size_t page_size_ = 50;
    std::map<std::string, std::vector<std::string>> channel_videos_;
    std::map<std::string, VideoMetadata> metadata_;
    std::map<std::string, std::vector<TranscriptTrack>> tracks_;
    std::size_t list_calls_ = 0;
};

/// Manual tracks win over automatic ones; no track yields an empty Missing transcript.
TranscriptTrack choose_transcript(const std::vector<TranscriptTrack>& tracks);

/// Walks every page for each channel and keeps videos published in [from, to].
std::vector<TranscriptDoc> collect_videos(VideoSource& source, const std::vector<Channel>& channels, Date from,
                                          Date to);

}  // namespace forge::corpus
