#include <algorithm>

#include "doctest.h"
#include "nmx/dp.hpp"
#include "nmx/oracle.hpp"
#include "nmx/pursuit.hpp"
#include "nmx/random_model.hpp"
#include "support.hpp"

using namespace nmx;

namespace {

std::vector<Cost> solve_values(const ModelFile& f, SolveOptions o = {}) {
  const HatModel hm = build_hat_model(f.model, f.info);
  Solver s(hm, o);
  return s.solve();
}

// Full memory of everything the agent has seen and done.
void own_history(ModelFile& f) {
  for (int t = 0; t <= f.model.horizon; ++t)
    for (int a = 0; a < f.model.num_agents(); ++a) {
      VarSet& mem = f.info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
      mem.clear();
      for (int s = 0; s < t; ++s) mem.insert(mem.end(), {{s, VarKind::Y, a}, {s, VarKind::U, a}});
      std::sort(mem.begin(), mem.end());
    }
}

// Appends one noise value to agent `a` at time `t`, observed as `y` from every state.
ModelFile with_extra_noise(ModelFile f, int t, int a, int y) {
  auto& noise = f.model.noises[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
  const int V = noise.size();
  auto names = noise.elements();
  names.push_back("extra");
  noise = FiniteSpace(names);
  auto& obs = f.model.observation[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
  std::vector<int> grown;
  for (int x = 0; x < f.model.states[static_cast<std::size_t>(t)].size(); ++x) {
    for (int v = 0; v < V; ++v) grown.push_back(obs[static_cast<std::size_t>(x * V + v)]);
    grown.push_back(y);
  }
  obs = grown;
  return f;
}

}  // namespace

TEST_CASE("terminal value is the worst member") {
  auto f = test::blank_model(0, {1}, 3);
  f.model.terminal_cost = {Cost(2), Cost(9), Cost(4)};
  CHECK(solve_values(f) == std::vector<Cost>{Cost(9)});
  f.info.initial_cells[0] = {{0, 2}, {1}};
  CHECK(solve_values(f) == std::vector<Cost>{Cost(4), Cost(9)});
  auto g = test::blank_model(0, {1}, 1);
  g.model.terminal_cost = {Cost(7)};
  CHECK(solve_values(g) == std::vector<Cost>{Cost(7)});
}

TEST_CASE("terminal value of pursuit with no moves left") {
  PursuitParams p;
  p.lambda = 4;
  p.horizon = 0;
  p.x1 = 2;
  p.x2 = 2;
  p.y0 = 2;
  const auto f = build_pursuit(p);
  // Target 1 or 3: distance 1 + 1 plus the penalty; target 2: 0.
  Cost expect = 0;
  for (int x0 = 1; x0 <= 3; ++x0) expect = std::max(expect, Cost(2 * std::abs(x0 - 2) + (x0 == 2 ? 0 : 10)));
  CHECK(expect == Cost(12));
  CHECK(solve_values(f) == std::vector<Cost>{expect});
}

TEST_CASE("feasible observations: constant observation gives one, distinct observations give two") {
  for (int ny : {1, 2}) {
    auto f = test::blank_model(1, {1}, 2, 1, 1, 1, ny);
    f.info.memory[1][0] = {{0, VarKind::Y, 0}};
    const HatModel hm = build_hat_model(f.model, f.info);
    Solver s(hm);
    const int P = s.engine().initial(0, 0);
    const CompleteActionSpace space(hm, s.store(), 0, 0, P);
    const CompleteAction a = space.to_action(std::vector<int>(space.slots().size(), 0));
    CHECK(s.feasible_observations(0, P, MapLookup(a)).size() == static_cast<std::size_t>(ny));
  }
}

TEST_CASE("backup with a single action is the worst successor") {
  auto f = test::blank_model(1, {1}, 3, 1, 2);
  f.model.initial_states = {0};
  f.info.initial_cells = {{{0}}};
  // x' = x + w: {0, 1}.
  f.model.terminal_cost = {Cost(5), Cost(3), Cost(8)};
  CHECK(solve_values(f) == std::vector<Cost>{Cost(5)});
}

TEST_CASE("backup picks the action that avoids the penalty") {
  auto f = test::blank_model(1, {1}, 3, 2);
  f.model.initial_states = {0};
  f.info.initial_cells = {{{0}}};
  f.model.dynamics[0] = {2, 1, 0, 0, 0, 0};  // from 0: a0 -> 2, a1 -> 1
  f.model.terminal_cost = {Cost(0), Cost(1), Cost(100)};
  const HatModel hm = build_hat_model(f.model, f.info);
  Solver s(hm);
  CHECK(s.solve() == std::vector<Cost>{Cost(1)});
  const auto& e = s.table().by_time[0].at(s.initial_states()[0]);
  CHECK(e.argmin == std::vector<int>{1});
  const AgentStrategy g = extract_agent_strategies(s);
  CHECK(evaluate_strategy(f.model, f.info, g, 0) == Cost(1));
}

TEST_CASE("T = 0 has an empty strategy") {
  const auto f = test::blank_model(0, {1, 1}, 2);
  const HatModel hm = build_hat_model(f.model, f.info);
  Solver s(hm);
  CHECK(s.solve() == std::vector<Cost>{Cost(1)});
  const AgentStrategy g = extract_agent_strategies(s);
  for (const auto& per_t : g.laws)
    for (const auto& law : per_t) CHECK(law.empty());
}

TEST_CASE("single subsystem with full own history: classical minimax") {
  // One agent observing the state exactly; backward induction by hand.
  auto f = test::blank_model(2, {1}, 3, 2, 2, 1, 3);
  own_history(f);
  f.model.terminal_cost = {Cost(4), Cost(0), Cost(6)};
  std::vector<std::vector<Cost>> V(3, std::vector<Cost>(3));
  for (int x = 0; x < 3; ++x) V[2][static_cast<std::size_t>(x)] = f.model.terminal_cost[static_cast<std::size_t>(x)];
  for (int t = 1; t >= 0; --t)
    for (int x = 0; x < 3; ++x) {
      std::optional<Cost> best;
      for (int u = 0; u < 2; ++u) {
        Cost worst = 0;
        for (int w = 0; w < 2; ++w) worst = std::max(worst, V[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(f.model.next_state(t, x, u, w))]);
        if (!best || worst < *best) best = worst;
      }
      V[static_cast<std::size_t>(t)][static_cast<std::size_t>(x)] = *best;
    }
  const Cost expect = *std::max_element(V[0].begin(), V[0].end());
  CHECK(solve_values(f) == std::vector<Cost>{expect});
  CHECK(brute_force_minimax(f.model, f.info, 0).value == expect);
}

TEST_CASE("caps are resource errors") {
  PursuitParams p;
  p.lambda = 4;
  p.horizon = 2;
  p.x1 = 4;
  p.x2 = 4;
  p.y0 = 2;
  const auto f = build_pursuit(p);
  CHECK_THROWS_AS(solve_values(f, SolveOptions{5, 10'000'000}), ResourceError);
  CHECK_THROWS_AS(solve_values(f, SolveOptions{5'000'000, 10}), ResourceError);
}

TEST_CASE("random instances: DP equals two independent minimax computations and is achieved") {
  int compared = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto f = random_model(seed);
    const HatModel hm = build_hat_model(f.model, f.info);
    Solver s(hm);
    const auto values = s.solve();
    const AgentStrategy g = extract_agent_strategies(s);
    for (int c = 0; c < static_cast<int>(values.size()); ++c) {
      CHECK(evaluate_strategy(f.model, f.info, g, c) == values[static_cast<std::size_t>(c)]);
      CHECK(test::worst_case(f.model, f.info, g, c) == values[static_cast<std::size_t>(c)]);
      CHECK(brute_force_minimax(f.model, f.info, c).value == values[static_cast<std::size_t>(c)]);
      if (const auto naive = test::naive_minimax(f.model, f.info, c, 200'000)) {
        CHECK_MESSAGE(*naive == values[static_cast<std::size_t>(c)], "seed ", seed, " cell ", c);
        ++compared;
      }
    }
  }
  CHECK(compared >= 100);
}

TEST_CASE("property: value table is consistent with its own argmins") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomOptions o;
    o.max_subsystems = 3;
    const auto f = random_model(seed, o);
    const HatModel hm = build_hat_model(f.model, f.info);
    Solver s(hm);
    s.solve();
    const int top = s.top();
    for (int t = 0; t < hm.horizon(); ++t)
      for (const auto& [P, e] : s.table().by_time[static_cast<std::size_t>(t)]) {
        const CompleteActionSpace space(hm, s.store(), t, top, P);
        const SlotLookup act(space, e.argmin);
        Cost worst = -1;
        for (const auto& [z, next] : s.engine().successors(t, top, P, act)) {
          REQUIRE(s.table().by_time[static_cast<std::size_t>(t + 1)].count(next));
          worst = std::max(worst, s.table().by_time[static_cast<std::size_t>(t + 1)].at(next).value);
        }
        CHECK(worst == e.value);
      }
  }
}

TEST_CASE("property: structured and agent-level rollouts agree on every primitive") {
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    RandomOptions o;
    o.min_subsystems = 2;
    o.max_subsystems = 3;
    const auto f = random_model(seed, o);
    const HatModel hm = build_hat_model(f.model, f.info);
    Solver s(hm);
    s.solve();
    const AgentStrategy g = extract_agent_strategies(s);
    for (const auto& p : test::all_primitives(f.model, f.model.initial_states)) {
      const StructuredRollout r = structured_rollout(s, p);
      const Trajectory tr = simulate(f.model, f.info, g, p);
      CHECK(r.actions == tr.actions);
      CHECK(r.trajectory.states == tr.states);
      CHECK(r.cost == tr.cost);
      // Truth membership, checked here as well as inside the rollout.
      for (int t = 0; t <= hm.horizon(); ++t)
        for (int m = 0; m < hm.num_subsystems(); ++m) {
          std::vector<int> tuple{r.hats[static_cast<std::size_t>(t)]};
          for (int j = 0; j < m; ++j) tuple.push_back(r.infostates[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)]);
          CHECK(s.store().contains(t, m, r.infostates[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)], tuple));
        }
    }
  }
}

TEST_CASE("property: more noise never lowers the value") {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 80; ++seed) {
    const auto f = random_model(seed);
    const int t = static_cast<int>(rng() % static_cast<std::uint64_t>(f.model.horizon + 1));
    const int a = static_cast<int>(rng() % static_cast<std::uint64_t>(f.model.num_agents()));
    const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(f.model.observations[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size()));
    const auto g = with_extra_noise(f, t, a, y);
    REQUIRE(validate(g.model, g.info).empty());
    const auto before = solve_values(f);
    const auto after = solve_values(g);
    for (std::size_t c = 0; c < before.size(); ++c) CHECK(after[c] >= before[c]);
  }
}

TEST_CASE("exports are deterministic") {
  const auto f = random_model(17);
  const HatModel hm = build_hat_model(f.model, f.info);
  Solver a(hm), b(hm);
  a.solve();
  b.solve();
  CHECK(a.export_values() == b.export_values());
  CHECK(a.export_strategy() == b.export_strategy());
  CHECK(a.export_strategy().rfind("nmx-strategy v1", 0) == 0);
  CHECK(a.export_values().rfind("nmx-values v1", 0) == 0);
}
