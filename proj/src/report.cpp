#include "nmx/report.hpp"

#include <cstdio>

namespace nmx {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

Report::Report(std::string command) {
  lines_.emplace_back("command", std::move(command));
  lines_.emplace_back("tie-break", kTieBreakRule);
}

Report& Report::add(std::string key, std::string value) {
  lines_.emplace_back(std::move(key), std::move(value));
  return *this;
}

std::string Report::str() const {
  std::string out = "nmx-report v1\n";
  for (const auto& [k, v] : lines_) out += k + ": " + v + '\n';
  return out;
}

}  // namespace nmx
