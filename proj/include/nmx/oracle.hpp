#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include "nmx/model.hpp"

namespace nmx {

using BigCount = boost::multiprecision::cpp_int;

// Number of distinct agent-level strategy profiles over reachable argument realizations: the
// product of |U| over every (t, agent, argument) reachable under some profile. With cell >= 0 only
// initial states in that top-subsystem cell are considered.
BigCount count_strategies(const SystemModel& model, const InfoStructure& info, int cell = -1);

struct OracleResult {
  Cost value{0};
  AgentStrategy profile;       // attains `value`
  std::size_t searched = 0;    // law assignments evaluated
};

// Exact min over agent-level profiles of the worst-case total cost (stage plus terminal) from
// top-subsystem cell `cell`. Laws are enumerated separately for each realization of the top
// subsystem's common information, which every argument key determines. Throws ResourceError when
// one such branch has more than `cap` law assignments.
OracleResult brute_force_minimax(const SystemModel& model, const InfoStructure& info, int cell,
                                 std::size_t cap = 50'000'000);

}  // namespace nmx
