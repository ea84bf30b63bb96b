#include "nmx/pursuit.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>

namespace nmx {

namespace {

int clip(int v, int lambda) { return std::clamp(v, 1, lambda); }

}  // namespace

void check_params(const PursuitParams& p) {
  if (p.lambda < 2) throw ValidationError("lambda must be at least 2");
  if (p.horizon < 0) throw ValidationError("horizon must be nonnegative");
  if (p.penalty < 0) throw ValidationError("penalty must be nonnegative");
  for (int v : {p.x1, p.x2, p.y0})
    if (v < 1 || v > p.lambda) throw ValidationError("positions and y0 must lie in 1..lambda");
}

bool surround_indicator(int target, int a1, int a2, SurroundRule rule) {
  const int lo = std::min(a1, a2), hi = std::max(a1, a2);
  return rule == SurroundRule::Inclusive ? lo <= target && target <= hi : lo < target && target < hi;
}

ModelFile build_pursuit(const PursuitParams& p) {
  check_params(p);
  const int L = p.lambda;
  const int T = p.horizon;
  ModelFile f;
  SystemModel& m = f.model;
  m.horizon = T;
  m.agents_per_subsystem = {1, 1};
  auto idx = [L](int x0, int x1, int x2) { return ((x0 - 1) * L + (x1 - 1)) * L + (x2 - 1); };

  std::vector<std::string> names;
  for (int x0 = 1; x0 <= L; ++x0)
    for (int x1 = 1; x1 <= L; ++x1)
      for (int x2 = 1; x2 <= L; ++x2) names.push_back(std::to_string(x0) + ',' + std::to_string(x1) + ',' + std::to_string(x2));
  const FiniteSpace states(names);
  const FiniteSpace moves({"-1", "0", "1"});
  const FiniteSpace grid = FiniteSpace::integer_range(1, L);
  for (int t = 0; t <= T; ++t) {
    m.states.push_back(states);
    m.noises.push_back({FiniteSpace({"-1", "0"}), FiniteSpace({"0"})});
    m.observations.push_back({grid, grid});
    if (t < T) {
      m.actions.push_back({moves, moves});
      m.disturbances.push_back(moves);
    }
  }
  for (int x0 = p.y0 - 1; x0 <= p.y0 + 1; ++x0)
    if (x0 >= 1 && x0 <= L) m.initial_states.push_back(idx(x0, p.x1, p.x2));

  // Joint action: agent 1 least significant.
  for (int t = 0; t < T; ++t) {
    std::vector<int> dyn(static_cast<std::size_t>(L * L * L * 9 * 3));
    for (int x0 = 1; x0 <= L; ++x0)
      for (int x1 = 1; x1 <= L; ++x1)
        for (int x2 = 1; x2 <= L; ++x2)
          for (int u2 = 0; u2 < 3; ++u2)
            for (int u1 = 0; u1 < 3; ++u1)
              for (int w = 0; w < 3; ++w) {
                const int ju = u2 * 3 + u1;
                dyn[static_cast<std::size_t>((idx(x0, x1, x2) * 9 + ju) * 3 + w)] =
                    idx(clip(x0 + w - 1, L), clip(x1 + u1 - 1, L), clip(x2 + u2 - 1, L));
              }
    m.dynamics.push_back(std::move(dyn));
  }
  for (int t = 0; t <= T; ++t) {
    std::vector<int> o1(static_cast<std::size_t>(L * L * L * 2)), o2(static_cast<std::size_t>(L * L * L));
    for (int x0 = 1; x0 <= L; ++x0)
      for (int x1 = 1; x1 <= L; ++x1)
        for (int x2 = 1; x2 <= L; ++x2) {
          const int x = idx(x0, x1, x2);
          o1[static_cast<std::size_t>(x * 2 + 0)] = clip(x0 - 1, L) - 1;
          o1[static_cast<std::size_t>(x * 2 + 1)] = x0 - 1;
          o2[static_cast<std::size_t>(x)] = x0 - 1;
        }
    m.observation.push_back({std::move(o1), std::move(o2)});
  }
  for (int x0 = 1; x0 <= L; ++x0)
    for (int x1 = 1; x1 <= L; ++x1)
      for (int x2 = 1; x2 <= L; ++x2) {
        const int dist = std::abs(x0 - x1) + std::abs(x0 - x2);
        m.terminal_cost.emplace_back(dist + (surround_indicator(x0, x1, x2, p.rule) ? 0 : p.penalty));
      }

  // Agent 1 remembers everything shared so far plus its own observations; agent 2 everything
  // except agent 1's observations. Positions follow from the initial state and the actions.
  InfoStructure& info = f.info;
  info.agents_per_subsystem = m.agents_per_subsystem;
  for (int t = 0; t <= T; ++t) {
    VarSet m1, m2;
    for (int s = 0; s < t; ++s) {
      m1.insert(m1.end(), {{s, VarKind::Y, 0}, {s, VarKind::Y, 1}, {s, VarKind::U, 0}, {s, VarKind::U, 1}});
      m2.insert(m2.end(), {{s, VarKind::Y, 1}, {s, VarKind::U, 0}, {s, VarKind::U, 1}});
    }
    info.memory.push_back({m1, m2});
  }
  default_initial_cells(m, info);
  require_valid(m, info);
  return f;
}

PursuitRow solve_pursuit(const PursuitParams& p, SolveOptions opts, bool with_export) {
  const ModelFile f = build_pursuit(p);
  const HatModel hm = build_hat_model(f.model, f.info);
  Solver solver(hm, opts);
  PursuitRow row;
  row.params = p;
  row.value = solver.solve().at(0);
  const AgentStrategy g = extract_agent_strategies(solver);
  row.achieved = evaluate_strategy(f.model, f.info, g, 0);
  row.backups = solver.stats().backups;
  row.candidates = solver.stats().candidates;
  for (const auto& level : solver.table().by_time) row.infostates_per_t.push_back(static_cast<int>(level.size()));
  if (with_export) row.strategy_export = solver.export_strategy();
  return row;
}

std::vector<PursuitParams> table1_params(SurroundRule rule) {
  std::vector<PursuitParams> out;
  for (auto [x1, x2, y0] : {std::array{8, 8, 2}, std::array{3, 6, 7}, std::array{3, 3, 4}, std::array{3, 5, 8}}) {
    PursuitParams p;
    p.x1 = x1;
    p.x2 = x2;
    p.y0 = y0;
    p.rule = rule;
    out.push_back(p);
  }
  return out;
}

std::vector<PursuitRow> table1(SurroundRule rule, int jobs, SolveOptions opts) {
  const auto params = table1_params(rule);
  std::vector<PursuitRow> rows(params.size());
  std::vector<std::exception_ptr> errors(params.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < params.size();) {
      try {
        rows[i] = solve_pursuit(params[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(params.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

}  // namespace nmx
