#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge::util {

/// RFC 4180 style: fields with commas, quotes or newlines are quoted.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// Parses CSV text into rows of fields; handles quoted fields with embedded
/// commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Fixed-precision decimal formatting ("%.Nf").
std::string format_fixed(double value, int decimals);

}  // namespace forge::util
