#pragma once

// Brute-force reference implementations. Each is written from the defining
// formula with no shared code paths beyond basic containers.

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

double cos_sim(const Vec& a, const Vec& b);

/// Q_c from the ordered-pair definition.
double quality(const std::vector<Vec>& items, const std::vector<std::string>& labels, const std::string& cluster);

struct MedoidAnswer {
    std::size_t index;
    double mean;
};
/// Every member scored against every member (itself included).
MedoidAnswer medoid(const std::vector<std::string>& keys, const std::vector<Vec>& vectors);

double adjusted_rand_index(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

/// Trustworthiness of a 2-D layout with input distance 1 - cos.
double trustworthiness(const std::vector<Vec>& input, const std::vector<std::array<double, 2>>& layout, std::size_t k);

/// UTF-8 decoded to code points; assumes valid input.
std::u32string code_points(std::string_view utf8);

/// Edit distance with insert/delete cost 1 and substitution cost 2, over
/// code points, turned into a 0..100 similarity.
double indel_similarity(const std::u32string& a, const std::u32string& b);

struct SegmentAnswer {
    std::size_t start, end;
    int topics;
};
/// Walks the document word by word, cutting every 1000 words.
std::vector<SegmentAnswer> segments(std::size_t words);

}  // namespace oracle
