#pragma once

#include <boost/rational.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace nmx {

// Costs are exact rationals; all comparisons are exact.
using Cost = boost::rational<long long>;

// "p" when the denominator is 1, otherwise "p/q".
std::string format_cost(const Cost& c);
// format_cost plus a fixed six-digit decimal, e.g. "7/2 (3.500000)".
std::string format_cost_with_decimal(const Cost& c);
// Accepts "p", "p/q", or a finite decimal "12.25".
std::optional<Cost> parse_cost(std::string_view text);

}  // namespace nmx
