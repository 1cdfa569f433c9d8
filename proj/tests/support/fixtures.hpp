#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "forge/analytics.hpp"
#include "forge/corpus.hpp"
#include "forge/themes.hpp"
#include "forge/vector_math.hpp"

namespace fixture {

struct Blobs {
    std::vector<forge::Vec> points;
    std::vector<std::size_t> labels;
};

/// Unit vectors around three orthogonal directions; members of a blob have
/// pairwise cosine >= 0.9 and cross-blob cosine <= 0.1.
Blobs three_blobs(std::size_t n, std::size_t dim, std::uint64_t seed);

struct AnalyticsCorpus {
    forge::corpus::Corpus corpus;
    forge::themes::VideoThemes video_themes;
    forge::analytics::ThemeNames names;
};

/// Random channels across all kinds and orientations, dates across every
/// period, some untranscribed and zero-view videos, random theme sets.
AnalyticsCorpus analytics_corpus(std::size_t n_videos, std::uint64_t seed);

struct Project {
    std::filesystem::path dir;
    std::filesystem::path config;
};

/// Writes a small project (corpus files, targets, gold labels, config using
/// mock backends) under `dir`.
Project write_project(const std::filesystem::path& dir, std::size_t n_docs, std::uint64_t seed);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

/// All files under `root` keyed by relative path.
std::map<std::string, std::string> snapshot_tree(const std::filesystem::path& root);

}  // namespace fixture
