#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace semtarget::detail {

// Minimal RFC 4180 field handling for the toolkit's CSV files.
std::vector<std::string> split_csv_line(std::string_view line);
std::string quote_csv_field(std::string_view field);

// Splits text into lines, dropping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

std::string_view trim(std::string_view s);

// Strict integer/real parsing; throws ValidationError mentioning `what`.
long long parse_int(std::string_view s, std::string_view what);
double parse_real(std::string_view s, std::string_view what);

// "%.12g" rendering used by every CSV score column.
std::string format_score(double value);
// Shortest representation that round-trips to the same double.
std::string format_exact(double value);

}  // namespace semtarget::detail
