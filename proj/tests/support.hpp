#pragma once

// Test-side reference computations. These step the original system directly and never touch the
// hat model, information states or the oracle module.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "nmx/model_io.hpp"

namespace nmx::test {

inline std::vector<Primitives> all_primitives(const SystemModel& m, const std::vector<int>& initial) {
  std::vector<Primitives> out;
  for_each_primitive(m, initial, [&](const Primitives& p) { out.push_back(p); });
  return out;
}

// A trajectory advanced up to and including the observations at `t`.
struct Partial {
  Primitives prim;
  Trajectory traj;
  int x;
};

inline std::vector<Partial> start(const SystemModel& m, const InfoStructure& info, const std::vector<Primitives>& prims) {
  std::vector<Partial> out;
  for (const auto& p : prims) {
    Partial q{p, {}, p.x0};
    for (int n = 0; n < m.num_subsystems(); ++n) q.traj.cells.push_back(cell_of(info, n, p.x0));
    q.traj.states.push_back(p.x0);
    std::vector<int> y;
    for (int a = 0; a < m.num_agents(); ++a) y.push_back(m.observe(0, a, p.x0, p.v[0][static_cast<std::size_t>(a)]));
    q.traj.observations.push_back(y);
    out.push_back(std::move(q));
  }
  return out;
}

inline void advance(const SystemModel& m, Partial& q, int t, std::vector<int> u) {
  const int ju = m.encode_joint_action(t, u);
  q.traj.cost += m.stage(t, q.x, ju);
  q.traj.actions.push_back(std::move(u));
  q.x = m.next_state(t, q.x, ju, q.prim.w[static_cast<std::size_t>(t)]);
  q.traj.states.push_back(q.x);
  std::vector<int> y;
  for (int a = 0; a < m.num_agents(); ++a)
    y.push_back(m.observe(t + 1, a, q.x, q.prim.v[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(a)]));
  q.traj.observations.push_back(std::move(y));
}

// Odometer step, last position fastest. False after the final assignment.
inline bool next_assignment(std::vector<int>& pick, const std::vector<int>& radix) {
  for (std::size_t i = pick.size(); i-- > 0;) {
    if (++pick[i] < radix[i]) return true;
    pick[i] = 0;
  }
  return false;
}

using ArgKey = std::pair<int, std::vector<int>>;  // (agent, argument key)

inline std::vector<ArgKey> arguments_at(const SystemModel& m, const InfoStructure& info, const std::vector<Partial>& qs, int t) {
  std::set<ArgKey> seen;
  for (const auto& q : qs)
    for (int a = 0; a < m.num_agents(); ++a) seen.emplace(a, argument_key(info, m, q.traj, a, t));
  return {seen.begin(), seen.end()};
}

// min over every agent-level profile of the worst total cost, by stepping all primitives in
// lockstep and branching on the laws for the arguments reached at each time. nullopt when more
// than `budget` leaves would be visited.
inline std::optional<Cost> naive_minimax(const SystemModel& m, const InfoStructure& info, int cell, std::size_t budget) {
  const auto prims = all_primitives(m, initial_states_in_cell(info, cell));
  std::size_t leaves = 0;
  bool over = false;
  std::function<Cost(int, const std::vector<Partial>&)> rec = [&](int t, const std::vector<Partial>& qs) -> Cost {
    if (t == m.horizon) {
      ++leaves;
      Cost worst = -1000000000;
      for (const auto& q : qs) worst = std::max(worst, q.traj.cost + m.terminal_cost[static_cast<std::size_t>(q.x)]);
      return worst;
    }
    const auto args = arguments_at(m, info, qs, t);
    std::vector<int> pick(args.size(), 0);
    std::optional<Cost> best;
    while (!over) {
      std::map<ArgKey, int> law;
      for (std::size_t i = 0; i < args.size(); ++i) law[args[i]] = pick[i];
      std::vector<Partial> next = qs;
      for (auto& q : next) {
        std::vector<int> u;
        for (int a = 0; a < m.num_agents(); ++a) u.push_back(law.at({a, argument_key(info, m, q.traj, a, t)}));
        advance(m, q, t, std::move(u));
      }
      const Cost v = rec(t + 1, next);
      if (!best || v < *best) best = v;
      if (leaves > budget) over = true;
      std::vector<int> radix;
      for (const auto& [a, key] : args) radix.push_back(m.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size());
      if (!next_assignment(pick, radix)) break;
    }
    return best.value_or(0);
  };
  const Cost v = rec(0, start(m, info, prims));
  if (over) return std::nullopt;
  return v;
}

// Worst-case cost of `g` over every primitive from `cell`, by plain simulation.
inline Cost worst_case(const SystemModel& m, const InfoStructure& info, const AgentStrategy& g, int cell) {
  std::optional<Cost> worst;
  for_each_primitive(m, initial_states_in_cell(info, cell), [&](const Primitives& p) {
    const Cost c = simulate(m, info, g, p).cost;
    if (!worst || c > *worst) worst = c;
  });
  return *worst;
}

// A profile defined exactly on the arguments reachable under itself, with random actions.
inline AgentStrategy random_strategy(const SystemModel& m, const InfoStructure& info, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  AgentStrategy g = AgentStrategy::empty_for(m);
  const auto prims = all_primitives(m, m.initial_states);
  auto qs = start(m, info, prims);
  for (int t = 0; t < m.horizon; ++t) {
    for (auto& q : qs) {
      std::vector<int> u;
      for (int a = 0; a < m.num_agents(); ++a) {
        auto& law = g.laws[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
        const auto key = argument_key(info, m, q.traj, a, t);
        auto it = law.find(key);
        if (it == law.end()) {
          const int r = m.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size();
          it = law.emplace(key, static_cast<int>(rng() % static_cast<std::uint64_t>(r))).first;
        }
        u.push_back(it->second);
      }
      advance(m, q, t, std::move(u));
    }
  }
  return g;
}

// Every agent plays `action` wherever it is reached.
inline AgentStrategy constant_strategy(const SystemModel& m, const InfoStructure& info, int action) {
  AgentStrategy g = AgentStrategy::empty_for(m);
  auto qs = start(m, info, all_primitives(m, m.initial_states));
  for (int t = 0; t < m.horizon; ++t)
    for (auto& q : qs) {
      std::vector<int> u;
      for (int a = 0; a < m.num_agents(); ++a) {
        g.laws[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)][argument_key(info, m, q.traj, a, t)] = action;
        u.push_back(action);
      }
      advance(m, q, t, std::move(u));
    }
  return g;
}

}  // namespace nmx::test

namespace nmx::test {

inline FiniteSpace space(char prefix, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(std::string(1, prefix) + std::to_string(i));
  return FiniteSpace(v);
}

// Small structured model: x' = (x + ju + w) mod nx, y = (x + v) mod ny, terminal cost x, empty
// memories and one all-covering cell per subsystem. Tests then edit what they need.
inline ModelFile blank_model(int T, std::vector<int> agents, int nx, int nu = 2, int nw = 1, int nv = 1, int ny = 1) {
  ModelFile f;
  SystemModel& m = f.model;
  m.horizon = T;
  m.agents_per_subsystem = agents;
  const int A = m.num_agents();
  for (int t = 0; t <= T; ++t) {
    m.states.push_back(space('s', nx));
    m.noises.push_back(std::vector<FiniteSpace>(static_cast<std::size_t>(A), space('v', nv)));
    m.observations.push_back(std::vector<FiniteSpace>(static_cast<std::size_t>(A), space('y', ny)));
    if (t < T) {
      m.actions.push_back(std::vector<FiniteSpace>(static_cast<std::size_t>(A), space('a', nu)));
      m.disturbances.push_back(space('w', nw));
    }
  }
  for (int x = 0; x < nx; ++x) m.initial_states.push_back(x);
  for (int t = 0; t < T; ++t) {
    std::vector<int> dyn;
    const int JU = m.joint_action_count(t);
    for (int x = 0; x < nx; ++x)
      for (int ju = 0; ju < JU; ++ju)
        for (int w = 0; w < nw; ++w) dyn.push_back((x + ju + w) % nx);
    m.dynamics.push_back(dyn);
  }
  for (int t = 0; t <= T; ++t) {
    std::vector<std::vector<int>> per;
    for (int a = 0; a < A; ++a) {
      std::vector<int> o;
      for (int x = 0; x < nx; ++x)
        for (int v = 0; v < nv; ++v) o.push_back((x + v) % ny);
      per.push_back(o);
    }
    m.observation.push_back(per);
  }
  for (int x = 0; x < nx; ++x) m.terminal_cost.emplace_back(x);
  f.info.agents_per_subsystem = agents;
  f.info.memory.assign(static_cast<std::size_t>(T + 1), std::vector<VarSet>(static_cast<std::size_t>(A)));
  default_initial_cells(m, f.info);
  return f;
}

}  // namespace nmx::test
