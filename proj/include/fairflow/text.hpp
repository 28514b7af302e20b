#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fairflow {

/// Shortest decimal form that parses back to the same double; "nan", "inf",
/// "-inf" for non-finite values.
std::string format_double(double v);

/// Whole-string parse; throws std::invalid_argument naming `what` on failure.
double parse_double(std::string_view s, std::string_view what = "number");
long long parse_int(std::string_view s, std::string_view what = "integer");
unsigned long long parse_uint(std::string_view s, std::string_view what = "integer");

std::string_view trim(std::string_view s);
/// Splits on `sep` and trims each piece; an empty input gives no pieces.
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace fairflow
