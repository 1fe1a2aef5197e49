#pragma once

#include <string>
#include <vector>

namespace bvi {

// Shortest-round-trip style formatting with at least `digits` significant
// digits ("%.Ng").
std::string format_g(double x, int digits = 9);

std::vector<std::string> split(const std::string& s, char delim);

// strtod with full-string validation.
double parse_double(const std::string& s, long line_no);
long parse_long(const std::string& s, long line_no);

// Parse "key=value" tokens of a `# ...` header line into pairs, preserving
// order.
std::vector<std::pair<std::string, std::string>> parse_header(
    const std::string& line, long line_no);

}  // namespace bvi
