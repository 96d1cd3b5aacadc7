#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace edgesched::text {

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char delim);

// Parses a double; throws ParseError naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

// Shortest round-tripping decimal form of a double.
std::string format_double(double v);

}  // namespace edgesched::text
