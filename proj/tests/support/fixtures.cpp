#include "fixtures.hpp"

#include <fmt/format.h>

#include <unistd.h>

#include <fstream>
#include <stdexcept>

#include "forge/util/io.hpp"
#include "forge/util/random.hpp"

namespace fixture {

namespace fs = std::filesystem;
using forge::util::Rng;
namespace corpus = forge::corpus;

Blobs three_blobs(std::size_t n, std::size_t dim, std::uint64_t seed) {
    if (dim < 3) throw std::invalid_argument("three_blobs needs dim >= 3");
    Rng rng(seed);
    Blobs b;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t label = i % 3;
        forge::Vec v(dim, 0.0);
        v[label] = 1.0;
        // noise of norm <= 0.045 keeps every member within ~2.6 degrees of its axis
        forge::Vec noise(dim);
        double norm = 0.0;
        for (auto& x : noise) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        const double scale = 0.045 * rng.uniform() / norm;
        for (std::size_t d = 0; d < dim; ++d) v[d] += noise[d] * scale;
        b.points.push_back(forge::normalized(v));
        b.labels.push_back(label);
    }
    return b;
}

AnalyticsCorpus analytics_corpus(std::size_t n_videos, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<corpus::Channel> channels;
    const corpus::SourceKind kinds[] = {corpus::SourceKind::NationalNews, corpus::SourceKind::LocalNews,
                                        corpus::SourceKind::Politician, corpus::SourceKind::Party};
    const corpus::Orientation orients[] = {corpus::Orientation::Left, corpus::Orientation::Center,
                                           corpus::Orientation::Right, corpus::Orientation::FarRight};
    for (std::size_t c = 0; c < 16; ++c) {
        corpus::Channel ch;
        ch.channel_id = fmt::format("ch{:02}", c);
        ch.name = ch.channel_id;
        ch.source_kind = kinds[c % 4];
        ch.orientation = ch.source_kind == corpus::SourceKind::LocalNews ? corpus::Orientation::Unlabeled : orients[(c / 4) % 4];
        ch.subscriber_count = 20000;
        ch.video_count = 100;
        channels.push_back(ch);
    }
    AnalyticsCorpus out;
    for (int t = 0; t < 15; ++t) out.names[fmt::format("t{}", t)] = fmt::format("Theme {:c}", 'A' + t);

    const auto first = std::chrono::sys_days{corpus::parse_date("2023-02-20")};
    std::vector<corpus::TranscriptDoc> videos;
    for (std::size_t i = 0; i < n_videos; ++i) {
        const auto& ch = channels[rng.index(channels.size())];
        const auto date = corpus::Date{first + std::chrono::days{static_cast<int>(rng.index(520))}};
        const bool transcribed = rng.uniform() < 0.9;
        const std::uint64_t views = rng.uniform() < 0.08 ? 0 : 1 + rng.index(100000);
        const std::uint64_t likes = views ? rng.index(views / 10 + 1) : rng.index(5);
        const std::uint64_t comments = views ? rng.index(views / 50 + 1) : 0;
        auto doc = corpus::make_doc(fmt::format("v{:04}", i), ch.channel_id, "title", date, views, likes, comments,
                                    transcribed ? "some words here" : "",
                                    transcribed ? corpus::TranscriptKind::Auto : corpus::TranscriptKind::Missing);
        if (transcribed && rng.uniform() < 0.95) {
            auto& set = out.video_themes[doc.video_id];
            const std::size_t k = 1 + rng.index(4);
            // skewed theme popularity so some themes fall under min_occurrence
            while (set.size() < k) {
                const double u = rng.uniform();
                set.insert(fmt::format("t{}", static_cast<int>(15 * u * u)));
            }
        }
        videos.push_back(std::move(doc));
    }
    out.corpus = corpus::Corpus(std::move(channels), std::move(videos));
    return out;
}

namespace {

const std::vector<std::vector<std::string>> kVocab = {
    {"immigration", "border", "refugees", "asylum", "migrants", "integration"},
    {"election", "ballot", "campaign", "voters", "candidates", "polling"},
    {"economy", "inflation", "market", "prices", "growth", "budget"},
    {"ukraine", "russia", "military", "frontline", "sanctions", "weapons"},
    {"climate", "environment", "nature", "forests", "pollution", "energy"},
    {"football", "stadium", "players", "tournament", "championship", "coach"},
    {"farmers", "agriculture", "tractors", "harvest", "subsidies", "protest"},
    {"gaming", "videogames", "console", "players", "studios", "esports"},
};
const std::vector<std::string> kFiller = {"the", "and", "with", "about", "today", "there", "which", "people"};

std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

}  // namespace

Project write_project(const fs::path& dir, std::size_t n_docs, std::uint64_t seed) {
    fs::create_directories(dir);
    Rng rng(seed);
    struct Ch {
        std::string id, kind, orientation;
    };
    const std::vector<Ch> channels = {
        {"news-left", "NationalNews", "Left"},       {"news-center", "NationalNews", "Center"},
        {"news-right", "NationalNews", "Right"},     {"news-right2", "NationalNews", "Right"},
        {"pol-left", "Politician", "Left"},          {"pol-far", "Party", "FarRight"},
        {"local-a", "LocalNews", "Unlabeled"},       {"local-b", "LocalNews", "Unlabeled"},
    };
    std::string ch_lines;
    for (const auto& c : channels)
        ch_lines += fmt::format(
            R"({{"channel_id":"{}","name":"{}","source_kind":"{}","orientation":"{}","subscriber_count":50000,"video_count":400}})"
            "\n",
            c.id, c.id, c.kind, c.orientation);

    const std::vector<std::string> mentions = {"Macron", "Bardella", "Bardela", "Mélenchon", "Melenchon", "MACRON"};
    std::string v_lines;
    const auto first = std::chrono::sys_days{corpus::parse_date("2023-03-01")};
    for (std::size_t i = 0; i < n_docs; ++i) {
        const auto& ch = channels[i % channels.size()];
        const auto& themes_a = kVocab[(i * 7 + i / 3) % kVocab.size()];
        const auto& themes_b = kVocab[(i * 3 + 1) % kVocab.size()];
        std::size_t words = 80 + rng.index(900);
        if (i % 97 == 5) words = 12500 + rng.index(600);  // segmented documents
        else if (i % 13 == 0) words = 1200 + rng.index(1500);
        std::string text;
        for (std::size_t w = 0; w < words; ++w) {
            if (!text.empty()) text += ' ';
            const double u = rng.uniform();
            if (u < 0.35) text += themes_a[rng.index(themes_a.size())];
            else if (u < 0.5) text += themes_b[rng.index(themes_b.size())];
            else text += kFiller[rng.index(kFiller.size())];
            if (w % 150 == 17 && rng.uniform() < 0.5) text += " " + mentions[rng.index(mentions.size())];
        }
        const bool missing = i % 23 == 7;
        const auto date = corpus::Date{first + std::chrono::days{static_cast<int>(rng.index(500))}};
        const std::uint64_t views = i % 31 == 3 ? 0 : 100 + rng.index(50000);
        v_lines += fmt::format(
            R"({{"video_id":"vid{:04}","channel_id":"{}","title":"video {}","published_at":"{}","view_count":{},"like_count":{},"comment_count":{},"transcript_text":"{}","transcript_kind":"{}"}})"
            "\n",
            i, ch.id, i, corpus::format_date(date), views, views / (5 + rng.index(20)), views / (40 + rng.index(100)),
            missing ? "" : json_escape(text), missing ? "Missing" : (i % 2 ? "Auto" : "Manual"));
    }
    forge::util::write_file_atomic(dir / "channels.jsonl", ch_lines);
    forge::util::write_file_atomic(dir / "videos.jsonl", v_lines);
    forge::util::write_file_atomic(dir / "targets.json", R"([
  {"target_id": "macron", "display_name": "Emmanuel Macron", "aliases": ["Macron", "Emmanuel Macron"], "min_relevant_docs": 10},
  {"target_id": "bardella", "display_name": "Jordan Bardella", "aliases": ["Bardella"], "min_relevant_docs": 10},
  {"target_id": "melenchon", "display_name": "Jean-Luc Mélenchon", "aliases": ["Mélenchon"], "min_relevant_docs": 10},
  {"target_id": "ciotti", "display_name": "Eric Ciotti", "aliases": ["Ciotti"]}
]
)");
    // Gold labels for documents that certainly mention Macron are written by
    // the caller-independent rule below: every doc whose text contains "Macron".
    std::string gold = "doc_id,target_id,label\n";
    std::size_t n_gold = 0;
    const char* labels[] = {"Against", "Favor", "Neutral"};
    for (auto line : forge::util::split_lines(v_lines)) {
        if (n_gold >= 30) break;
        if (line.find("Macron") == std::string_view::npos && line.find("MACRON") == std::string_view::npos) continue;
        const auto id = std::string(line.substr(13, 7));
        gold += fmt::format("{},macron,{}\n", id, labels[n_gold % 3]);
        ++n_gold;
    }
    forge::util::write_file_atomic(dir / "gold.csv", gold);
    forge::util::write_file_atomic(dir / "config.json", fmt::format(R"({{
  "seed": {},
  "inputs": {{"channels": "channels.jsonl", "videos": "videos.jsonl", "targets": "targets.json", "gold": "gold.csv"}},
  "snapshot_date": "2024-09-15",
  "backends": {{
    "mock-gen": {{"kind": "MockGeneration"}},
    "mock-embed": {{"kind": "MockEmbedding", "dimension": 48}}
  }},
  "workers": 2,
  "cluster": {{"k": 12, "max_iter": 100}},
  "analytics": {{"min_occurrence": 3}},
  "tsne": {{"perplexity": 3, "iterations": 400}},
  "validation": {{"per_dataset": 3}}
}}
)", seed));
    return {dir, dir / "config.json"};
}

fs::path temp_dir(const std::string& tag) {
    static std::size_t counter = 0;
    const auto dir = fs::temp_directory_path() / fmt::format("forge-test-{}-{}-{}", tag, ::getpid(), counter++);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::map<std::string, std::string> snapshot_tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).generic_string()] = forge::util::read_file(e.path());
    return out;
}

}  // namespace fixture
