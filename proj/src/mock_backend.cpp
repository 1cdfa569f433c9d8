#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "forge/gateway.hpp"
#include "forge/text.hpp"
#include "forge/util/hash.hpp"
#include "forge/util/io.hpp"
#include "forge/util/random.hpp"

namespace forge::gateway {

namespace {

const std::set<std::string, std::less<>>& stopwords() {
    static const std::set<std::string, std::less<>> words{
        "this", "that", "with", "from", "have", "were", "been", "they", "their", "there", "what", "when", "which",
        "will", "would", "about", "into", "than", "then", "them", "these", "those", "also", "very", "just", "more",
        "dans", "pour", "avec", "nous", "vous", "sont", "mais", "elle", "elles", "leur", "leurs", "cette", "comme",
        "plus", "tout", "tous", "sans", "sous", "chez", "donc", "alors", "aussi", "fait", "faire", "être", "etre",
        "avoir", "entre", "encore", "depuis", "quand", "notre", "votre", "bien", "tres", "très", "même", "meme"};
    return words;
}

std::string title_case(std::string word) {
    if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') word[0] = static_cast<char>(word[0] - 'a' + 'A');
    return word;
}

/// Content words of `body` ranked by frequency, ties broken by a seeded hash.
std::vector<std::string> ranked_words(std::string_view body, std::uint64_t seed) {
    std::map<std::string, std::size_t> counts;
    for (const auto& t : text::tokenize(body)) {
        auto w = text::trim_non_alnum(text::fold(body.substr(t.offset, t.length)));
        if (w.size() < 4 || stopwords().contains(w)) continue;
        ++counts[w];
    }
    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::sort(items.begin(), items.end(), [seed](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        const auto ha = util::fnv1a64(a.first, seed);
        const auto hb = util::fnv1a64(b.first, seed);
        return ha != hb ? ha < hb : a.first < b.first;
    });
    std::vector<std::string> out;
    out.reserve(items.size());
    for (auto& [w, _] : items) out.push_back(w);
    return out;
}

std::size_t requested_topics(std::string_view prompt) {
    static constexpr std::array<std::string_view, 5> kCounts{"one", "two", "three", "four", "five"};
    for (std::size_t i = 0; i < kCounts.size(); ++i)
        if (prompt.find(fmt::format("Detect {} main topic", kCounts[i])) != std::string_view::npos) return i + 1;
    return 0;
}

std::string mock_topics(std::string_view prompt, std::size_t n, std::uint64_t seed) {
    const auto split = prompt.find("\n\n");
    const auto body = split == std::string_view::npos ? std::string_view{} : prompt.substr(split + 2);
    const auto words = ranked_words(body, seed);
    const auto prompt_hash = util::fnv1a64(prompt, seed);
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string topic;
        if (i < words.size()) {
            topic = title_case(words[i]);
            if (n + i < words.size()) topic += " " + title_case(words[n + i]);
            // Occasionally answer with an over-long topic, as real models do.
            if (util::hash_combine(prompt_hash, i) % 11 == 0) {
                for (std::size_t j = 2 * n + i; j < words.size() && j < 2 * n + i + 2; ++j)
                    topic += " " + title_case(words[j]);
            }
        } else if (i == 0) {
            topic = "General Content";
        } else {
            break;
        }
        out += fmt::format("{}{}. {}", i ? "\n" : "", i + 1, topic);
    }
    return out;
}

std::string mock_cluster_name(std::string_view prompt, std::uint64_t seed) {
    const auto start = prompt.find("Topics:\n");
    std::string items;
    for (const auto line : util::split_lines(prompt.substr(start + 8))) {
        if (line.starts_with("- ")) {
            items += line.substr(2);
            items += '\n';
        }
    }
    const auto words = ranked_words(items, seed);
    if (words.empty()) return "Miscellaneous";
    if (words.size() == 1) return title_case(words[0]);
    return title_case(words[0]) + " & " + title_case(words[1]);
}

}  // namespace

std::string mock_generate(std::string_view prompt, std::uint64_t seed, const std::vector<std::string>& fixed) {
    const auto h = util::fnv1a64(prompt, seed);
    if (!fixed.empty()) return fixed[h % fixed.size()];
    if (const auto n = requested_topics(prompt); n > 0) return mock_topics(prompt, n, seed);
    if (prompt.find("Topics:\n") != std::string_view::npos) return mock_cluster_name(prompt, seed);
    if (prompt.find("Answer with exactly one word: Against, Favor, or Neutral") != std::string_view::npos) {
        static constexpr std::array<std::string_view, 3> kLabels{"Against", "Favor", "Neutral"};
        return std::string(kLabels[util::mix64(h) % 3]);
    }
    return fmt::format("mock-{:016x}", h);
}

EmbeddingVector mock_embed(std::string_view input, std::uint64_t seed, std::size_t dimension) {
    std::vector<double> acc(dimension, 0.0);
    auto add_feature = [&](std::string_view feature, double weight) {
        util::Rng rng(util::hash_combine(util::fnv1a64(feature), seed));
        for (double& a : acc) a += weight * rng.normal();
    };
    const std::string folded = text::fold(input);
    std::size_t features = 0;
    for (const auto& t : text::tokenize(folded)) {
        const auto word = text::trim_non_alnum(std::string_view(folded).substr(t.offset, t.length));
        if (word.empty()) continue;
        add_feature("w:" + word, 1.0);
        const std::string padded = "#" + word + "#";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add_feature("g:" + padded.substr(i, 3), 0.35);
        ++features;
    }
    if (features == 0) add_feature("raw:" + std::string(input), 1.0);
    return EmbeddingVector(std::move(acc)).normalized();
}

}  // namespace forge::gateway
