#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace forge::util {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path);

/// Called between the temp-file write and the rename that publishes it.
/// Throwing from the hook simulates a crash at that point.
using FaultHook = std::function<void(const fs::path& target)>;

/// Writes to `<path>.tmp`, flushes, then renames over `path`.
void write_file_atomic(const fs::path& path, std::string_view content, const FaultHook& hook = {});

/// Splits on '\n'; a trailing newline does not produce an empty final line.
std::vector<std::string_view> split_lines(std::string_view text);

}  // namespace forge::util
