#include "nmx/rational.hpp"

#include <charconv>
#include <cstdio>

namespace nmx {

std::string format_cost(const Cost& c) {
  if (c.denominator() == 1) return std::to_string(c.numerator());
  return std::to_string(c.numerator()) + "/" + std::to_string(c.denominator());
}

std::string format_cost_with_decimal(const Cost& c) {
  // Exact integer part plus six rounded fractional digits; no locale involvement.
  long long num = c.numerator();
  const long long den = c.denominator();
  const bool negative = num < 0;
  if (negative) num = -num;
  long long whole = num / den;
  long long rem = num % den;
  long long frac = static_cast<long long>((static_cast<__int128>(rem) * 1000000 * 2 + den) / (2 * den));
  if (frac >= 1000000) {
    whole += 1;
    frac -= 1000000;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%lld.%06lld", negative ? "-" : "", whole, frac);
  return format_cost(c) + " (" + buf + ")";
}

namespace {

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<Cost> parse_cost(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto p = parse_int(text.substr(0, slash));
    auto q = parse_int(text.substr(slash + 1));
    if (!p || !q || *q == 0) return std::nullopt;
    return Cost(*p, *q);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view ip = text.substr(0, dot);
    std::string_view fp = text.substr(dot + 1);
    if (fp.empty() || fp.size() > 12) return std::nullopt;
    bool negative = !ip.empty() && ip.front() == '-';
    auto whole = parse_int(ip.empty() || ip == "-" ? std::string_view("0") : ip);
    auto frac = parse_int(fp);
    if (!whole || !frac || fp.front() == '-' || fp.front() == '+') return std::nullopt;
    long long scale = 1;
    for (std::size_t i = 0; i < fp.size(); ++i) scale *= 10;
    long long mag = (*whole < 0 ? -*whole : *whole) * scale + *frac;
    return Cost(negative ? -mag : mag, scale);
  }
  auto v = parse_int(text);
  if (!v) return std::nullopt;
  return Cost(*v);
}

}  // namespace nmx
