#include "forge/source.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>

#include "forge/error.hpp"
#include "forge/util/io.hpp"
#include "json.hpp"

namespace forge::corpus {

using nlohmann::json;

FixtureVideoSource::FixtureVideoSource(const std::filesystem::path& fixture) { load(util::read_file(fixture)); }

FixtureVideoSource FixtureVideoSource::from_string(std::string_view json_text) {
    FixtureVideoSource s;
    s.load(json_text);
    return s;
}

void FixtureVideoSource::load(std::string_view json_text) {
    const json root = json::parse(json_text);
    page_size_ = root.value("page_size", std::size_t{50});
    if (page_size_ == 0) throw ValidationError("fixture page_size must be positive");
    for (const auto& [channel, ids] : root.at("channels").items())
        channel_videos_[channel] = ids.get<std::vector<std::string>>();
    for (const auto& [id, v] : root.at("videos").items()) {
        VideoMetadata m;
        m.video_id = id;
        m.channel_id = v.at("channel_id").get<std::string>();
        m.title = v.value("title", "");
        m.published_at = parse_date(v.at("published_at").get<std::string>());
        m.view_count = v.value("view_count", std::uint64_t{0});
        m.like_count = v.value("like_count", std::uint64_t{0});
        m.comment_count = v.value("comment_count", std::uint64_t{0});
        metadata_[id] = m;
        auto& tracks = tracks_[id];
        for (const auto& t : v.value("tracks", json::array())) {
            tracks.push_back({parse_transcript_kind(t.at("kind").get<std::string>()), t.value("language", ""),
                              t.at("text").get<std::string>()});
        }
    }
}

VideoPage FixtureVideoSource::list_videos(const std::string& channel_id, const std::optional<std::string>& page_token) {
    ++list_calls_;
    auto it = channel_videos_.find(channel_id);
    if (it == channel_videos_.end()) return {};
    std::size_t offset = 0;
    if (page_token) {
        auto [ptr, ec] = std::from_chars(page_token->data(), page_token->data() + page_token->size(), offset);
        if (ec != std::errc{} || ptr != page_token->data() + page_token->size())
            throw ValidationError("bad page token " + *page_token);
    }
    const auto& ids = it->second;
    VideoPage page;
    const std::size_t end = std::min(ids.size(), offset + page_size_);
    for (std::size_t i = offset; i < end; ++i) page.video_ids.push_back(ids[i]);
    if (end < ids.size()) page.next_page_token = std::to_string(end);
    return page;
}

VideoMetadata FixtureVideoSource::get_video(const std::string& video_id) {
    auto it = metadata_.find(video_id);
    if (it == metadata_.end()) throw TransportError("video not found: " + video_id);
    return it->second;
}

std::vector<TranscriptTrack> FixtureVideoSource::get_transcripts(const std::string& video_id) {
    auto it = tracks_.find(video_id);
    return it == tracks_.end() ? std::vector<TranscriptTrack>{} : it->second;
}

TranscriptTrack choose_transcript(const std::vector<TranscriptTrack>& tracks) {
    for (const auto& t : tracks)
        if (t.kind == TranscriptKind::Manual && !t.text.empty()) return t;
    for (const auto& t : tracks)
        if (t.kind == TranscriptKind::Auto && !t.text.empty()) return t;
    return {TranscriptKind::Missing, "", ""};
}

std::vector<TranscriptDoc> collect_videos(VideoSource& source, const std::vector<Channel>& channels, Date from,
                                          Date to) {
    std::vector<TranscriptDoc> docs;
    for (const auto& channel : channels) {
        std::optional<std::string> token;
        do {
            auto page = source.list_videos(channel.channel_id, token);
            for (const auto& id : page.video_ids) {
                const auto meta = source.get_video(id);
                if (meta.published_at < from || meta.published_at > to) continue;
                const auto track = choose_transcript(source.get_transcripts(id));
                docs.push_back(make_doc(meta.video_id, channel.channel_id, meta.title, meta.published_at,
                                        meta.view_count, meta.like_count, meta.comment_count, track.text,
                                        track.kind));
            }
            token = page.next_page_token;
        } while (token);
    }
    return docs;
}

}  // namespace forge::corpus
