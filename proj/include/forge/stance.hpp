#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/gateway.hpp"

namespace forge::stance {

struct TargetSpec {
    std::string target_id;
    std::string display_name;
    std::vector<std::string> aliases;
    std::size_t min_relevant_docs = 50;

    void validate() const;  // ValidationError on empty id or aliases
};

/// JSON list of {target_id, display_name, aliases, min_relevant_docs?}.
std::vector<TargetSpec> parse_targets(std::string_view json_text);

enum class Label { Against, Favor, Neutral };
enum class Origin { Gold, Predicted };

std::string_view to_string(Label l);
std::string_view to_string(Origin o);
Label parse_label_strict(std::string_view s);  // exact names only
Origin parse_origin(std::string_view s);

/// Tolerant completion parsing: case and surrounding punctuation are ignored,
/// and Negative/Favorable/Positive synonyms are accepted.
std::optional<Label> parse_stance_label(std::string_view completion);

struct StanceRecord {
    std::string doc_id;
    std::string target_id;
    Label label = Label::Neutral;
    Origin origin = Origin::Predicted;

    bool operator==(const StanceRecord&) const = default;
};

// ------------------------------------------------------------- mentions

inline constexpr double kDefaultThreshold = 85.0;

/// Normalized InDel similarity in [0, 100] over code points:
/// 100 * (1 - (insertions + deletions) / (|a| + |b|)). Two empty strings
/// score 100.
double similarity_ratio(std::string_view a, std::string_view b);

struct MentionSpan {
    std::string alias;
    std::size_t token_index = 0;
    std::size_t token_count = 0;
    std::size_t byte_offset = 0;  // into the original transcript
    std::size_t byte_length = 0;
    double score = 0.0;
};

/// Compares each folded alias with every window of the folded transcript
/// whose token count is within one of the alias's. Windows scoring at least
/// `threshold` are kept; overlapping hits resolve to the best score, then the
/// earliest and shortest window. Returned in text order.
std::vector<MentionSpan> find_mentions(std::string_view text, const TargetSpec& target,
                                       double threshold = kDefaultThreshold);

struct Relevance {
    std::string target_id;
    std::vector<std::string> docs;  // ascending
    bool excluded = false;
    std::size_t count = 0;
};

/// Transcribed documents with at least one mention. Flags the target excluded
/// when fewer than min_relevant_docs qualify.
Relevance select_relevant_docs(const corpus::Corpus& corpus, const TargetSpec& target,
                               double threshold = kDefaultThreshold, std::size_t workers = 1);

std::string serialize_relevance(std::span<const Relevance> rows);
std::vector<Relevance> parse_relevance(std::string_view jsonl);

// -------------------------------------------------------- classification

inline constexpr std::size_t kStancePromptWords = 3000;

std::string build_stance_prompt(std::string_view transcript, const TargetSpec& target);

/// One generation call, retried once with a reminder when the completion does
/// not parse. Throws ParseError carrying the last raw completion.
StanceRecord classify_stance(const corpus::TranscriptDoc& doc, const TargetSpec& target, gateway::Gateway& gw,
                             const gateway::BackendDescriptor& backend);

// ------------------------------------------------------------ evaluation

/// Fraction of exact matches. Both lists must cover the same (doc, target)
/// keys exactly once; otherwise PreconditionError.
double accuracy(std::span<const StanceRecord> pred, std::span<const StanceRecord> gold);

/// Like accuracy, but Neutral predicted for a polar gold label earns `credit`.
double soft_accuracy(std::span<const StanceRecord> pred, std::span<const StanceRecord> gold, double credit = 0.5);

enum class Grouping { MediaOrientation, Target, OrientationByTarget };
std::string_view to_string(Grouping g);

struct StanceRow {
    std::optional<corpus::Orientation> orientation;
    std::string target_id;  // empty unless grouped by target
    std::int64_t against_tenths = 0;
    std::int64_t favor_tenths = 0;
    std::int64_t neutral_tenths = 0;
    std::size_t videos = 0;

    double against() const { return static_cast<double>(against_tenths) / 10.0; }
    double favor() const { return static_cast<double>(favor_tenths) / 10.0; }
    double neutral() const { return static_cast<double>(neutral_tenths) / 10.0; }
};

/// Percentages in tenths by largest remainder, so each row sums to exactly
/// 100.0. Empty groups are omitted. Records must share one origin; only
/// documents from `dataset` count (all datasets when nullopt).
std::vector<StanceRow> stance_table(std::span<const StanceRecord> records, const corpus::Corpus& corpus,
                                    Grouping grouping,
                                    std::optional<corpus::Dataset> dataset = corpus::Dataset::News);

/// Long form: one line per row.
std::string stance_csv(std::span<const StanceRow> rows, Grouping grouping);
/// Orientation rows by target column blocks of Against/Favor/Neutral.
std::string stance_grid_csv(std::span<const StanceRow> rows, std::span<const TargetSpec> targets);

std::string serialize_records(std::span<const StanceRecord> records);
std::vector<StanceRecord> parse_records(std::string_view jsonl);

/// CSV with header doc_id,target_id,label; records come back as Gold.
std::vector<StanceRecord> parse_gold_csv(std::string_view csv);
std::string gold_csv(std::span<const StanceRecord> records);

}  // namespace forge::stance
