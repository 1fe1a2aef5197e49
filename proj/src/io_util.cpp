#include "bvi/io_util.hpp"

#include <cstdio>
#include <cstdlib>

#include "bvi/errors.hpp"

namespace bvi {

std::string format_g(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, long line_no) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw ParseError("invalid number '" + s + "'", line_no);
  return v;
}

long parse_long(const std::string& s, long line_no) {
  char* end = nullptr;
  long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size())
    throw ParseError("invalid integer '" + s + "'", line_no);
  return v;
}

std::vector<std::pair<std::string, std::string>> parse_header(
    const std::string& line, long line_no) {
  if (line.empty() || line[0] != '#')
    throw ParseError("expected a '#' header line", line_no);
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t i = 1;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t sp = line.find(' ', i);
    std::string tok = line.substr(i, sp == std::string::npos ? sp : sp - i);
    std::size_t eq = tok.find('=');
    if (eq == std::string::npos)
      throw ParseError("malformed header token '" + tok + "'", line_no);
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    if (sp == std::string::npos) break;
    i = sp + 1;
  }
  return out;
}

}  // namespace bvi
