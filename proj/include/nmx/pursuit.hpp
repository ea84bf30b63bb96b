#pragma once

#include <string>
#include <vector>

#include "nmx/dp.hpp"
#include "nmx/model_io.hpp"

namespace nmx {

enum class SurroundRule { Inclusive, Exclusive };

struct PursuitParams {
  int lambda = 8;  // grid points 1..lambda
  int horizon = 3;
  int penalty = 10;
  int x1 = 1;  // initial agent positions
  int x2 = 1;
  int y0 = 1;  // common initial target observation
  SurroundRule rule = SurroundRule::Inclusive;
};

// Throws ValidationError when a parameter is out of range.
void check_params(const PursuitParams& p);

// Two single-agent subsystems on a line. State (target, agent 1, agent 2) named "x0,x1,x2".
// Agent 1 sees the target up to noise {-1, 0}; agent 2 sees it exactly. Agent positions are carried
// by the initial state plus the shared action history.
ModelFile build_pursuit(const PursuitParams& p);

bool surround_indicator(int target, int a1, int a2, SurroundRule rule = SurroundRule::Inclusive);

struct PursuitRow {
  PursuitParams params;
  Cost value{0};
  Cost achieved{0};  // worst case of the extracted agent-level strategy
  std::size_t backups = 0;
  std::size_t candidates = 0;
  std::vector<int> infostates_per_t;  // top-level states visited
  std::string strategy_export;
};

PursuitRow solve_pursuit(const PursuitParams& p, SolveOptions opts = {}, bool with_export = false);

// The four initial conditions {x1, x2, y0} at lambda 8, horizon 3, penalty 10.
std::vector<PursuitParams> table1_params(SurroundRule rule = SurroundRule::Inclusive);
inline const std::vector<int> kTable1Expected{18, 4, 14, 4};

// Solves the rows on up to `jobs` threads; results are in row order.
std::vector<PursuitRow> table1(SurroundRule rule = SurroundRule::Inclusive, int jobs = 1, SolveOptions opts = {});

}  // namespace nmx
