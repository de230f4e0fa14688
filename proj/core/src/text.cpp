#include "gamm/text.hpp"

#include <charconv>
#include <cmath>

#include "gamm/error.hpp"

namespace gamm {

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return s.substr(b, e - b);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view token, const std::string& context) {
  std::string_view t = trim(token);
  double value = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw DataError(context + ": expected a number, got \"" + std::string(token) + "\"");
  }
  if (!std::isfinite(value)) {
    throw DataError(context + ": non-finite value \"" + std::string(token) + "\"");
  }
  return value;
}

long long parse_index(std::string_view token, const std::string& context) {
  std::string_view t = trim(token);
  long long value = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size() || t.empty()) {
    throw DataError(context + ": expected an integer, got \"" + std::string(token) + "\"");
  }
  if (value < 0) {
    throw DataError(context + ": negative index \"" + std::string(token) + "\"");
  }
  return value;
}

}  // namespace gamm
