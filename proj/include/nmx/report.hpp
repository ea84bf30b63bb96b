#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nmx {

inline constexpr const char* kTieBreakRule = "lexmin-slot-v1";

std::uint64_t fnv1a64(std::string_view bytes);
// 16 lowercase hex digits.
std::string digest_hex(std::string_view bytes);

// Line-oriented "key: value" report with keys kept in insertion order.
class Report {
 public:
  explicit Report(std::string command);
  Report& add(std::string key, std::string value);
  Report& add(std::string key, long long value) { return add(std::move(key), std::to_string(value)); }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

}  // namespace nmx
