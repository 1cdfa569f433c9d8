#include "forge/corpus.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <set>
#include <utility>

#include "forge/error.hpp"
#include "forge/util/io.hpp"
#include "json.hpp"

namespace forge::corpus {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
             std::string_view what) {
    for (const auto& [name, value] : table)
        if (name == s) return value;
    throw ParseError(fmt::format("unknown {} '{}'", what, s), std::string(s));
}

constexpr std::array<std::pair<std::string_view, SourceKind>, 4> kSourceKinds{{
    {"NationalNews", SourceKind::NationalNews},
    {"LocalNews", SourceKind::LocalNews},
    {"Politician", SourceKind::Politician},
    {"Party", SourceKind::Party},
}};
constexpr std::array<std::pair<std::string_view, Orientation>, 5> kOrientations{{
    {"Left", Orientation::Left},
    {"Center", Orientation::Center},
    {"Right", Orientation::Right},
    {"FarRight", Orientation::FarRight},
    {"Unlabeled", Orientation::Unlabeled},
}};
constexpr std::array<std::pair<std::string_view, TranscriptKind>, 3> kTranscriptKinds{{
    {"Manual", TranscriptKind::Manual},
    {"Auto", TranscriptKind::Auto},
    {"Missing", TranscriptKind::Missing},
}};
constexpr std::array<std::pair<std::string_view, Dataset>, 3> kDatasets{{
    {"News", Dataset::News},
    {"Political", Dataset::Political},
    {"Local", Dataset::Local},
}};

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<std::string_view, E>, N>& table) {
    for (const auto& [name, value] : table)
        if (value == v) return name;
    return "?";
}

void require_fields(const json& obj, std::initializer_list<std::string_view> fields, std::size_t line,
                    std::string_view file) {
    if (!obj.is_object()) throw ParseError(fmt::format("{} line {}: expected a JSON object", file, line));
    std::set<std::string, std::less<>> expected(fields.begin(), fields.end());
    for (const auto& [key, _] : obj.items())
        if (!expected.contains(key))
            throw ParseError(fmt::format("{} line {}: unexpected field '{}'", file, line, key));
    for (auto f : fields)
        if (!obj.contains(std::string(f)))
            throw ParseError(fmt::format("{} line {}: missing field '{}'", file, line, f));
}

std::string get_string(const json& obj, const char* key, std::size_t line, std::string_view file) {
    const auto& v = obj.at(key);
    if (!v.is_string()) throw ParseError(fmt::format("{} line {}: field '{}' must be a string", file, line, key));
    return v.get<std::string>();
}

std::uint64_t get_count(const json& obj, const char* key, std::size_t line, std::string_view file) {
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ParseError(fmt::format("{} line {}: field '{}' must be a non-negative integer", file, line, key));
    return v.get<std::uint64_t>();
}

template <typename Fn>
void for_each_record(std::string_view text, std::string_view file, Fn&& fn) {
    std::size_t line_no = 0;
    for (auto line : util::split_lines(text)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(fmt::format("{} line {}: malformed JSON ({})", file, line_no, e.what()),
                             std::string(line));
        }
        try {
            fn(obj, line_no);
        } catch (const IntegrityError&) {
            throw;
        } catch (const Error& e) {
            if (std::string_view(e.what()).starts_with(file)) throw;
            throw ParseError(fmt::format("{} line {}: {}", file, line_no, e.what()), std::string(line));
        }
    }
}

}  // namespace

std::string_view to_string(SourceKind v) { return enum_name(v, kSourceKinds); }
std::string_view to_string(Orientation v) { return enum_name(v, kOrientations); }
std::string_view to_string(TranscriptKind v) { return enum_name(v, kTranscriptKinds); }
std::string_view to_string(Dataset v) { return enum_name(v, kDatasets); }
std::string_view to_string(Period v) {
    switch (v) {
        case Period::PreElection: return "PreElection";
        case Period::European: return "European";
        case Period::Legislative: return "Legislative";
        case Period::OutOfWindow: return "OutOfWindow";
    }
    return "?";
}

SourceKind parse_source_kind(std::string_view s) { return parse_enum(s, kSourceKinds, "source_kind"); }
Orientation parse_orientation(std::string_view s) { return parse_enum(s, kOrientations, "orientation"); }
TranscriptKind parse_transcript_kind(std::string_view s) {
    return parse_enum(s, kTranscriptKinds, "transcript_kind");
}
Dataset parse_dataset(std::string_view s) { return parse_enum(s, kDatasets, "dataset"); }

Dataset dataset_of(SourceKind kind) {
    switch (kind) {
        case SourceKind::NationalNews: return Dataset::News;
        case SourceKind::LocalNews: return Dataset::Local;
        case SourceKind::Politician:
        case SourceKind::Party: return Dataset::Political;
    }
    return Dataset::News;
}

Date parse_date(std::string_view s) {
    auto bad = [&] { return ParseError(fmt::format("invalid date '{}' (expected YYYY-MM-DD)", s), std::string(s)); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto parse_num = [&](std::size_t pos, std::size_t len, auto& out) {
        auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
        if (ec != std::errc{} || ptr != s.data() + pos + len) throw bad();
    };
    parse_num(0, 4, y);
    parse_num(5, 2, m);
    parse_num(8, 2, d);
    Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!date.ok()) throw bad();
    return date;
}

std::string format_date(Date d) {
    return fmt::format("{:04d}-{:02d}-{:02d}", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                       static_cast<unsigned>(d.day()));
}

TranscriptDoc make_doc(std::string video_id, std::string channel_id, std::string title, Date published_at,
                       std::uint64_t views, std::uint64_t likes, std::uint64_t comments,
                       std::string transcript, TranscriptKind kind) {
    TranscriptDoc doc;
    doc.video_id = std::move(video_id);
    doc.channel_id = std::move(channel_id);
    doc.title = std::move(title);
    doc.published_at = published_at;
    doc.view_count = views;
    doc.like_count = likes;
    doc.comment_count = comments;
    doc.transcript_text = std::move(transcript);
    doc.transcript_kind = kind;
    doc.word_count = word_count(doc.transcript_text);
    return doc;
}

Corpus::Corpus(std::vector<Channel> channels, std::vector<TranscriptDoc> videos)
    : channels_(std::move(channels)), videos_(std::move(videos)) {
    for (std::size_t i = 0; i < channels_.size(); ++i)
        if (!channel_index_.emplace(channels_[i].channel_id, i).second)
            throw IntegrityError("duplicate channel_id " + channels_[i].channel_id);
    for (std::size_t i = 0; i < videos_.size(); ++i) {
        const auto& v = videos_[i];
        if (!channel_index_.contains(v.channel_id))
            throw IntegrityError(fmt::format("video {}: unknown channel {}", v.video_id, v.channel_id));
        if (!video_index_.emplace(v.video_id, i).second)
            throw IntegrityError("duplicate video_id " + v.video_id);
        const bool empty = v.transcript_text.empty();
        if (empty != (v.transcript_kind == TranscriptKind::Missing))
            throw IntegrityError(fmt::format("video {}: transcript_kind {} inconsistent with transcript text",
                                             v.video_id, to_string(v.transcript_kind)));
        if (v.word_count != word_count(v.transcript_text))
            throw IntegrityError(fmt::format("video {}: cached word_count is stale", v.video_id));
    }
}

const Channel* Corpus::find_channel(std::string_view id) const {
    auto it = channel_index_.find(std::string(id));
    return it == channel_index_.end() ? nullptr : &channels_[it->second];
}

const TranscriptDoc* Corpus::find_video(std::string_view id) const {
    auto it = video_index_.find(std::string(id));
    return it == video_index_.end() ? nullptr : &videos_[it->second];
}

const Channel& Corpus::channel_of(const TranscriptDoc& doc) const {
    const Channel* c = find_channel(doc.channel_id);
    if (!c) throw IntegrityError("unknown channel " + doc.channel_id);
    return *c;
}

Corpus parse_corpus(std::string_view channels_jsonl, std::string_view videos_jsonl) {
    std::vector<Channel> channels;
    for_each_record(channels_jsonl, "channels", [&](const json& obj, std::size_t line) {
        require_fields(obj, {"channel_id", "name", "source_kind", "orientation", "subscriber_count", "video_count"},
                       line, "channels");
        Channel c;
        c.channel_id = get_string(obj, "channel_id", line, "channels");
        c.name = get_string(obj, "name", line, "channels");
        c.source_kind = parse_source_kind(get_string(obj, "source_kind", line, "channels"));
        c.orientation = parse_orientation(get_string(obj, "orientation", line, "channels"));
        c.subscriber_count = get_count(obj, "subscriber_count", line, "channels");
        c.video_count = get_count(obj, "video_count", line, "channels");
        channels.push_back(std::move(c));
    });

    std::set<std::string, std::less<>> channel_ids;
    for (const auto& c : channels)
        if (!channel_ids.insert(c.channel_id).second) throw IntegrityError("duplicate channel_id " + c.channel_id);

    std::vector<TranscriptDoc> videos;
    std::set<std::string, std::less<>> video_ids;
    for_each_record(videos_jsonl, "videos", [&](const json& obj, std::size_t line) {
        require_fields(obj,
                       {"video_id", "channel_id", "title", "published_at", "view_count", "like_count",
                        "comment_count", "transcript_text", "transcript_kind"},
                       line, "videos");
        auto doc = make_doc(get_string(obj, "video_id", line, "videos"), get_string(obj, "channel_id", line, "videos"),
                            get_string(obj, "title", line, "videos"),
                            parse_date(get_string(obj, "published_at", line, "videos")),
                            get_count(obj, "view_count", line, "videos"), get_count(obj, "like_count", line, "videos"),
                            get_count(obj, "comment_count", line, "videos"),
                            get_string(obj, "transcript_text", line, "videos"),
                            parse_transcript_kind(get_string(obj, "transcript_kind", line, "videos")));
        if (!channel_ids.contains(doc.channel_id))
            throw IntegrityError(fmt::format("video {}: unknown channel {}", doc.video_id, doc.channel_id));
        if (!video_ids.insert(doc.video_id).second)
            throw IntegrityError(fmt::format("videos line {}: duplicate video_id {}", line, doc.video_id));
        if (doc.transcript_text.empty() != (doc.transcript_kind == TranscriptKind::Missing))
            throw ParseError(fmt::format("videos line {}: transcript_kind {} inconsistent with transcript text",
                                         line, to_string(doc.transcript_kind)));
        videos.push_back(std::move(doc));
    });
    return Corpus(std::move(channels), std::move(videos));
}

Corpus ingest_corpus(const std::filesystem::path& channels_path, const std::filesystem::path& videos_path) {
    return parse_corpus(util::read_file(channels_path), util::read_file(videos_path));
}

std::string serialize_channels(const Corpus& corpus) {
    std::string out;
    for (const auto& c : corpus.channels()) {
        ordered_json j;
        j["channel_id"] = c.channel_id;
        j["name"] = c.name;
        j["source_kind"] = to_string(c.source_kind);
        j["orientation"] = to_string(c.orientation);
        j["subscriber_count"] = c.subscriber_count;
        j["video_count"] = c.video_count;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string serialize_videos(const Corpus& corpus) {
    std::string out;
    for (const auto& v : corpus.videos()) {
        ordered_json j;
        j["video_id"] = v.video_id;
        j["channel_id"] = v.channel_id;
        j["title"] = v.title;
        j["published_at"] = format_date(v.published_at);
        j["view_count"] = v.view_count;
        j["like_count"] = v.like_count;
        j["comment_count"] = v.comment_count;
        j["transcript_text"] = v.transcript_text;
        j["transcript_kind"] = to_string(v.transcript_kind);
        out += j.dump();
        out += '\n';
    }
    return out;
}

bool passes(const Channel& c, const FilterRules& rules) {
    switch (c.source_kind) {
        case SourceKind::Politician:
        case SourceKind::Party: return c.video_count > rules.min_videos_political;
        case SourceKind::NationalNews: return c.subscriber_count >= rules.min_subs_national;
        case SourceKind::LocalNews: return c.subscriber_count > rules.min_subs_local;
    }
    return false;
}

Corpus apply_filters(const Corpus& corpus, const FilterRules& rules) {
    std::vector<Channel> kept;
    std::set<std::string, std::less<>> kept_ids;
    for (const auto& c : corpus.channels()) {
        if (passes(c, rules)) {
            kept.push_back(c);
            kept_ids.insert(c.channel_id);
        }
    }
    std::vector<TranscriptDoc> videos;
    for (const auto& v : corpus.videos())
        if (kept_ids.contains(v.channel_id)) videos.push_back(v);
    Corpus out(std::move(kept), std::move(videos));
    out.snapshot_date = corpus.snapshot_date;
    return out;
}

Period assign_period(Date date) {
    using namespace std::chrono;
    static constexpr Date kStart{year{2023}, March, day{1}};
    static constexpr Date kEuropean{year{2024}, March, day{1}};
    static constexpr Date kLegislative{year{2024}, June, day{8}};
    static constexpr Date kEnd{year{2024}, July, day{15}};
    if (date < kStart || date > kEnd) return Period::OutOfWindow;
    if (date < kEuropean) return Period::PreElection;
    if (date < kLegislative) return Period::European;
    return Period::Legislative;
}

}  // namespace forge::corpus
