#include "forge/stance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <set>

#include "forge/error.hpp"
#include "forge/text.hpp"
#include "forge/util/csv.hpp"
#include "forge/util/io.hpp"
#include "forge/util/parallel.hpp"
#include "json.hpp"

namespace forge::stance {

using nlohmann::json;
using nlohmann::ordered_json;

void TargetSpec::validate() const {
    if (target_id.empty()) throw ValidationError("target without target_id");
    if (aliases.empty()) throw ValidationError(fmt::format("target {} has no aliases", target_id));
    for (const auto& a : aliases)
        if (text::word_count(a) == 0) throw ValidationError(fmt::format("target {} has an empty alias", target_id));
}

std::vector<TargetSpec> parse_targets(std::string_view json_text) {
    std::vector<TargetSpec> out;
    try {
        const auto j = json::parse(json_text);
        if (!j.is_array()) throw ParseError("targets: expected a JSON list");
        std::set<std::string> seen;
        for (const auto& t : j) {
            TargetSpec spec;
            spec.target_id = t.at("target_id").get<std::string>();
            spec.display_name = t.value("display_name", spec.target_id);
            spec.aliases = t.at("aliases").get<std::vector<std::string>>();
            if (t.contains("min_relevant_docs")) {
                const auto m = t.at("min_relevant_docs").get<std::int64_t>();
                if (m < 0) throw ValidationError(fmt::format("target {}: min_relevant_docs < 0", spec.target_id));
                spec.min_relevant_docs = static_cast<std::size_t>(m);
            }
            spec.validate();
            if (!seen.insert(spec.target_id).second)
                throw ValidationError(fmt::format("duplicate target {}", spec.target_id));
            out.push_back(std::move(spec));
        }
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("targets: {}", e.what()));
    }
    return out;
}

std::string_view to_string(Label l) {
    switch (l) {
        case Label::Against: return "Against";
        case Label::Favor: return "Favor";
        case Label::Neutral: return "Neutral";
    }
    return "?";
}

std::string_view to_string(Origin o) { return o == Origin::Gold ? "Gold" : "Predicted"; }

Label parse_label_strict(std::string_view s) {
    for (auto l : {Label::Against, Label::Favor, Label::Neutral})
        if (to_string(l) == s) return l;
    throw ParseError(fmt::format("unknown stance label '{}'", s), std::string(s));
}

Origin parse_origin(std::string_view s) {
    if (s == "Gold") return Origin::Gold;
    if (s == "Predicted") return Origin::Predicted;
    throw ParseError(fmt::format("unknown stance origin '{}'", s), std::string(s));
}

namespace {

std::optional<Label> label_word(std::string_view w) {
    static const std::map<std::string, Label, std::less<>> words = {
        {"against", Label::Against},  {"negative", Label::Against},   {"favor", Label::Favor},
        {"favour", Label::Favor},     {"favorable", Label::Favor},    {"favourable", Label::Favor},
        {"positive", Label::Favor},   {"neutral", Label::Neutral},
    };
    auto it = words.find(w);
    if (it == words.end()) return std::nullopt;
    return it->second;
}

}  // namespace

std::optional<Label> parse_stance_label(std::string_view completion) {
    const auto folded = text::fold(completion);
    if (auto whole = label_word(text::trim_non_alnum(folded))) return whole;
    std::set<Label> found;
    for (const auto& t : text::tokenize(folded))
        if (auto l = label_word(text::trim_non_alnum(std::string_view(folded).substr(t.offset, t.length))))
            found.insert(*l);
    if (found.size() == 1) return *found.begin();
    return std::nullopt;
}

// ------------------------------------------------------------- mentions

namespace {

std::size_t lcs_length(const std::u32string& a, const std::u32string& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double ratio_u32(const std::u32string& a, const std::u32string& b) {
    const std::size_t total = a.size() + b.size();
    if (total == 0) return 100.0;
    const std::size_t indel = total - 2 * lcs_length(a, b);
    return 100.0 * (1.0 - static_cast<double>(indel) / static_cast<double>(total));
}

struct FoldedToken {
    std::u32string text;
    text::TokenSpan span;
};

std::vector<FoldedToken> folded_tokens(std::string_view text) {
    std::vector<FoldedToken> out;
    for (const auto& t : text::tokenize(text)) {
        auto f = text::trim_non_alnum(text::fold(text.substr(t.offset, t.length)));
        if (f.empty()) continue;
        out.push_back({text::to_u32(f), t});
    }
    return out;
}

}  // namespace

double similarity_ratio(std::string_view a, std::string_view b) { return ratio_u32(text::to_u32(a), text::to_u32(b)); }

std::vector<MentionSpan> find_mentions(std::string_view text, const TargetSpec& target, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 100.0))
        throw UsageError(fmt::format("mention threshold {} outside [0, 100]", threshold));
    const auto tokens = folded_tokens(text);
    std::vector<MentionSpan> hits;
    for (const auto& alias : target.aliases) {
        const auto alias_tokens = folded_tokens(alias);
        if (alias_tokens.empty()) continue;
        std::u32string needle;
        for (const auto& t : alias_tokens) {
            if (!needle.empty()) needle += U' ';
            needle += t.text;
        }
        const std::size_t m = alias_tokens.size();
        for (std::size_t w = std::max<std::size_t>(1, m - 1); w <= m + 1; ++w) {
            if (w > tokens.size()) break;
            for (std::size_t i = 0; i + w <= tokens.size(); ++i) {
                std::u32string window;
                for (std::size_t k = i; k < i + w; ++k) {
                    if (k > i) window += U' ';
                    window += tokens[k].text;
                }
                // cheap length bound: ratio <= 200 * min / total
                const double bound = 200.0 * static_cast<double>(std::min(window.size(), needle.size())) /
                                     static_cast<double>(window.size() + needle.size());
                if (bound < threshold) continue;
                const double score = ratio_u32(window, needle);
                if (score < threshold) continue;
                const auto& first = tokens[i].span;
                const auto& last = tokens[i + w - 1].span;
                hits.push_back({alias, i, w, first.offset, last.offset + last.length - first.offset, score});
            }
        }
    }
    std::sort(hits.begin(), hits.end(), [](const MentionSpan& a, const MentionSpan& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.token_index != b.token_index) return a.token_index < b.token_index;
        if (a.token_count != b.token_count) return a.token_count < b.token_count;
        return a.alias < b.alias;
    });
    std::vector<MentionSpan> kept;
    for (auto& h : hits) {
        const bool overlaps = std::any_of(kept.begin(), kept.end(), [&](const MentionSpan& k) {
            return h.token_index < k.token_index + k.token_count && k.token_index < h.token_index + h.token_count;
        });
        if (!overlaps) kept.push_back(std::move(h));
    }
    std::sort(kept.begin(), kept.end(),
              [](const MentionSpan& a, const MentionSpan& b) { return a.token_index < b.token_index; });
    return kept;
}

Relevance select_relevant_docs(const corpus::Corpus& corpus, const TargetSpec& target, double threshold,
                               std::size_t workers) {
    target.validate();
    const auto& videos = corpus.videos();
    std::vector<char> hit(videos.size(), 0);
    util::parallel_for(videos.size(), workers, [&](std::size_t i) {
        if (videos[i].has_transcript())
            hit[i] = find_mentions(videos[i].transcript_text, target, threshold).empty() ? 0 : 1;
    });
    Relevance r;
    r.target_id = target.target_id;
    for (std::size_t i = 0; i < videos.size(); ++i)
        if (hit[i]) r.docs.push_back(videos[i].video_id);
    std::sort(r.docs.begin(), r.docs.end());
    r.count = r.docs.size();
    r.excluded = r.count < target.min_relevant_docs;
    return r;
}

std::string serialize_relevance(std::span<const Relevance> rows) {
    std::string out;
    for (const auto& r : rows) {
        ordered_json j;
        j["target_id"] = r.target_id;
        j["count"] = r.count;
        j["excluded"] = r.excluded;
        j["docs"] = r.docs;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<Relevance> parse_relevance(std::string_view jsonl) {
    std::vector<Relevance> out;
    for (auto line : util::split_lines(jsonl)) {
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("target_id").get<std::string>(), j.at("docs").get<std::vector<std::string>>(),
                           j.at("excluded").get<bool>(), j.at("count").get<std::size_t>()});
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("relevance: {}", e.what()), std::string(line));
        }
    }
    return out;
}

// -------------------------------------------------------- classification

std::string build_stance_prompt(std::string_view transcript, const TargetSpec& target) {
    const auto& name = target.display_name.empty() ? target.target_id : target.display_name;
    return fmt::format(
        "You are given a transcript of a video. Determine the stance the video expresses toward {}. "
        "Answer with exactly one word: Against, Favor, or Neutral.\n\nTranscript:\n{}",
        name, text::first_words(transcript, kStancePromptWords));
}

StanceRecord classify_stance(const corpus::TranscriptDoc& doc, const TargetSpec& target, gateway::Gateway& gw,
                             const gateway::BackendDescriptor& backend) {
    if (!doc.has_transcript()) throw PreconditionError(fmt::format("{} has no transcript", doc.video_id));
    gateway::GenerationRequest req;
    req.prompt = build_stance_prompt(doc.transcript_text, target);
    req.max_tokens = 8;
    std::string raw = gw.generate(req, backend);
    auto label = parse_stance_label(raw);
    if (!label) {
        req.prompt += "\n\nYour previous answer could not be read. Reply with one word only: Against, Favor, or Neutral.";
        raw = gw.generate(req, backend);
        label = parse_stance_label(raw);
    }
    if (!label)
        throw ParseError(fmt::format("stance for {} / {}: unparseable completion '{}'", doc.video_id, target.target_id,
                                     raw),
                         raw);
    return {doc.video_id, target.target_id, *label, Origin::Predicted};
}

// ------------------------------------------------------------ evaluation

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, Label> index_records(std::span<const StanceRecord> records, std::string_view what) {
    std::map<Key, Label> out;
    for (const auto& r : records)
        if (!out.emplace(Key{r.doc_id, r.target_id}, r.label).second)
            throw PreconditionError(fmt::format("{}: duplicate record for ({}, {})", what, r.doc_id, r.target_id));
    return out;
}

template <typename Credit>
double mean_credit(std::span<const StanceRecord> pred, std::span<const StanceRecord> gold, Credit credit) {
    if (gold.empty()) throw PreconditionError("evaluation needs at least one gold record");
    const auto p = index_records(pred, "predictions");
    const auto g = index_records(gold, "gold");
    if (p.size() != g.size())
        throw PreconditionError(fmt::format("misaligned sets: {} predictions vs {} gold labels", p.size(), g.size()));
    double sum = 0.0;
    for (const auto& [key, gl] : g) {
        auto it = p.find(key);
        if (it == p.end())
            throw PreconditionError(fmt::format("misaligned sets: no prediction for ({}, {})", key.first, key.second));
        sum += credit(it->second, gl);
    }
    return sum / static_cast<double>(g.size());
}

}  // namespace

double accuracy(std::span<const StanceRecord> pred, std::span<const StanceRecord> gold) {
    return mean_credit(pred, gold, [](Label p, Label g) { return p == g ? 1.0 : 0.0; });
}

double soft_accuracy(std::span<const StanceRecord> pred, std::span<const StanceRecord> gold, double credit) {
    if (!(credit >= 0.0 && credit <= 1.0)) throw UsageError(fmt::format("partial credit {} outside [0, 1]", credit));
    return mean_credit(pred, gold, [credit](Label p, Label g) {
        if (p == g) return 1.0;
        return p == Label::Neutral ? credit : 0.0;
    });
}

std::string_view to_string(Grouping g) {
    switch (g) {
        case Grouping::MediaOrientation: return "MediaOrientation";
        case Grouping::Target: return "Target";
        case Grouping::OrientationByTarget: return "OrientationByTarget";
    }
    return "?";
}

namespace {

/// Tenths of a percent summing to exactly 1000 (Hamilton apportionment).
std::array<std::int64_t, 3> apportion(const std::array<std::size_t, 3>& counts) {
    const std::size_t n = counts[0] + counts[1] + counts[2];
    std::array<std::int64_t, 3> out{};
    std::array<std::size_t, 3> rem{};
    std::int64_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        out[i] = static_cast<std::int64_t>(1000 * counts[i] / n);
        rem[i] = 1000 * counts[i] % n;
        assigned += out[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
    for (int k = 0; assigned < 1000; ++k, ++assigned) ++out[order[k]];
    return out;
}

}  // namespace

std::vector<StanceRow> stance_table(std::span<const StanceRecord> records, const corpus::Corpus& corpus,
                                    Grouping grouping, std::optional<corpus::Dataset> dataset) {
    if (!records.empty()) {
        const auto origin = records.front().origin;
        for (const auto& r : records)
            if (r.origin != origin) throw PreconditionError("stance table: gold and predicted records are mixed");
    }
    using RowKey = std::pair<std::optional<corpus::Orientation>, std::string>;
    std::map<RowKey, std::array<std::size_t, 3>> counts;
    for (const auto& r : records) {
        const auto* doc = corpus.find_video(r.doc_id);
        if (!doc) throw IntegrityError(fmt::format("stance record for unknown document {}", r.doc_id));
        const auto& ch = corpus.channel_of(*doc);
        if (dataset && corpus::dataset_of(ch.source_kind) != *dataset) continue;
        RowKey key;
        if (grouping != Grouping::Target) key.first = ch.orientation;
        if (grouping != Grouping::MediaOrientation) key.second = r.target_id;
        ++counts[key][static_cast<int>(r.label)];
    }
    std::vector<StanceRow> rows;
    for (const auto& [key, c] : counts) {
        const auto t = apportion(c);
        rows.push_back({key.first, key.second, t[0], t[1], t[2], c[0] + c[1] + c[2]});
    }
    return rows;
}

namespace {
std::string tenths(std::int64_t t) { return fmt::format("{}.{}", t / 10, t % 10); }
}  // namespace

std::string stance_csv(std::span<const StanceRow> rows, Grouping grouping) {
    std::vector<std::string> header;
    if (grouping != Grouping::Target) header.push_back("orientation");
    if (grouping != Grouping::MediaOrientation) header.push_back("target");
    for (const char* h : {"against", "favor", "neutral", "videos"}) header.push_back(h);
    std::string out = util::csv_row(header);
    for (const auto& r : rows) {
        std::vector<std::string> f;
        if (grouping != Grouping::Target) f.emplace_back(r.orientation ? corpus::to_string(*r.orientation) : "");
        if (grouping != Grouping::MediaOrientation) f.push_back(r.target_id);
        f.push_back(tenths(r.against_tenths));
        f.push_back(tenths(r.favor_tenths));
        f.push_back(tenths(r.neutral_tenths));
        f.push_back(std::to_string(r.videos));
        out += util::csv_row(f);
    }
    return out;
}

std::string stance_grid_csv(std::span<const StanceRow> rows, std::span<const TargetSpec> targets) {
    std::vector<std::string> header{"orientation"};
    for (const auto& t : targets)
        for (const char* l : {"against", "favor", "neutral"})
            header.push_back(fmt::format("{} {}", t.display_name.empty() ? t.target_id : t.display_name, l));
    std::string out = util::csv_row(header);
    std::map<corpus::Orientation, std::map<std::string, const StanceRow*>> grid;
    for (const auto& r : rows)
        if (r.orientation) grid[*r.orientation][r.target_id] = &r;
    for (const auto& [o, by_target] : grid) {
        std::vector<std::string> f{std::string(corpus::to_string(o))};
        for (const auto& t : targets) {
            auto it = by_target.find(t.target_id);
            if (it == by_target.end()) {
                f.insert(f.end(), {"", "", ""});
            } else {
                f.push_back(tenths(it->second->against_tenths));
                f.push_back(tenths(it->second->favor_tenths));
                f.push_back(tenths(it->second->neutral_tenths));
            }
        }
        out += util::csv_row(f);
    }
    return out;
}

std::string serialize_records(std::span<const StanceRecord> records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["doc_id"] = r.doc_id;
        j["target_id"] = r.target_id;
        j["label"] = to_string(r.label);
        j["origin"] = to_string(r.origin);
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<StanceRecord> parse_records(std::string_view jsonl) {
    std::vector<StanceRecord> out;
    for (auto line : util::split_lines(jsonl)) {
        if (text::trim(line).empty()) continue;
        try {
            const auto j = json::parse(line);
            out.push_back({j.at("doc_id").get<std::string>(), j.at("target_id").get<std::string>(),
                           parse_label_strict(j.at("label").get<std::string>()),
                           parse_origin(j.at("origin").get<std::string>())});
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("stance records: {}", e.what()), std::string(line));
        }
    }
    return out;
}

std::vector<StanceRecord> parse_gold_csv(std::string_view csv) {
    const auto rows = util::parse_csv(csv);
    if (rows.empty() || rows[0] != std::vector<std::string>{"doc_id", "target_id", "label"})
        throw ParseError("gold csv: header must be doc_id,target_id,label");
    std::vector<StanceRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() == 1 && r[0].empty()) continue;
        if (r.size() != 3) throw ParseError(fmt::format("gold csv line {}: expected 3 fields", i + 1));
        auto label = parse_stance_label(r[2]);
        if (!label) throw ParseError(fmt::format("gold csv line {}: bad label '{}'", i + 1, r[2]), r[2]);
        out.push_back({r[0], r[1], *label, Origin::Gold});
    }
    return out;
}

std::string gold_csv(std::span<const StanceRecord> records) {
    std::string out = util::csv_row({"doc_id", "target_id", "label"});
    for (const auto& r : records) out += util::csv_row({r.doc_id, r.target_id, std::string(to_string(r.label))});
    return out;
}

}  // namespace forge::stance
