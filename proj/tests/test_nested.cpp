#include "doctest.h"
#include "nmx/nested.hpp"
#include "nmx/pursuit.hpp"
#include "nmx/random_model.hpp"
#include "support.hpp"

using namespace nmx;

namespace {

PursuitParams small_pursuit(int x1, int x2, int y0) {
  PursuitParams p;
  p.lambda = 4;
  p.horizon = 2;
  p.x1 = x1;
  p.x2 = x2;
  p.y0 = y0;
  return p;
}

std::vector<int> positions(const std::string& name) {
  std::vector<int> out;
  std::size_t i = 0;
  while (i < name.size()) {
    const std::size_t j = name.find(',', i);
    out.push_back(std::stoi(name.substr(i, j - i)));
    if (j == std::string::npos) break;
    i = j + 1;
  }
  return out;
}

RandomOptions two_subsystems_two_states() {
  RandomOptions o;
  o.min_subsystems = 2;
  o.max_subsystems = 2;
  o.max_states = 2;
  o.max_horizon = 1;
  return o;
}

// Every primitive: hat rollout of lift(g) and simulate(g) take the same actions, pass through the
// same plant states and cost the same.
void check_rollouts(const ModelFile& f, const HatModel& hm, const AgentStrategy& g) {
  const PartialStrategy pg = lift_strategy(f.model, f.info, g);
  for (const auto& p : test::all_primitives(f.model, f.model.initial_states)) {
    const Trajectory tr = simulate(f.model, f.info, g, p);
    const HatRollout hr = hat_rollout(hm, pg, p);
    CHECK(hr.cost == tr.cost);
    CHECK(hr.actions == tr.actions);
    for (int t = 0; t <= f.model.horizon; ++t) CHECK(hm.hat(t, hr.hats[static_cast<std::size_t>(t)]).x == tr.states[static_cast<std::size_t>(t)]);
  }
}

}  // namespace

TEST_CASE("hat model of pursuit carries the state and each agent's current observation") {
  const auto f = build_pursuit(small_pursuit(4, 4, 2));
  const HatModel hm = build_hat_model(f.model, f.info);
  for (int t = 0; t <= 2; ++t) {
    CHECK(hm.private_vars(t, 0).empty());
    CHECK(hm.private_vars(t, 1).empty());
    for (int id = 0; id < hm.hat_count(t); ++id) {
      const HatState& h = hm.hat(t, id);
      const auto pos = positions(f.model.states[static_cast<std::size_t>(t)].name(h.x));
      REQUIRE(pos.size() == 3);
      const int y1 = std::stoi(f.model.observations[static_cast<std::size_t>(t)][0].name(hm.input(t, 0, h.inputs[0])[0]));
      const int y2 = std::stoi(f.model.observations[static_cast<std::size_t>(t)][1].name(hm.input(t, 1, h.inputs[1])[0]));
      CHECK(y2 == pos[0]);
      CHECK((y1 == pos[0] || y1 == std::max(1, pos[0] - 1)));
    }
  }
  // Agents never move at t = 0 in the hat space; the target starts in {1, 2, 3}.
  std::set<int> targets;
  for (int id = 0; id < hm.hat_count(0); ++id) {
    const auto pos = positions(f.model.states[0].name(hm.hat(0, id).x));
    CHECK(pos[1] == 4);
    CHECK(pos[2] == 4);
    targets.insert(pos[0]);
  }
  CHECK(targets == std::set<int>{1, 2, 3});
}

TEST_CASE("hat model refuses stage costs") {
  RandomOptions o;
  o.additive = true;
  const auto f = random_model(3, o);
  REQUIRE(f.model.has_stage_costs());
  CHECK_THROWS_AS(build_hat_model(f.model, f.info), ValidationError);
}

TEST_CASE("hat model refuses a memory that recalls a variable nobody kept") {
  auto f = test::blank_model(2, {2}, 2, 2, 1, 2, 2);
  f.info.memory[2][1] = {{0, VarKind::Y, 0}};
  REQUIRE(validate(f.model, f.info).empty());
  CHECK_THROWS_AS(build_hat_model(f.model, f.info), ConstructionError);
}

TEST_CASE("hat model cap is a resource error") {
  const auto f = build_pursuit(small_pursuit(4, 4, 2));
  CHECK_THROWS_AS(build_hat_model(f.model, f.info, 5), ResourceError);
}

TEST_CASE("random two-subsystem models: hat rollouts reproduce the original system") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto f = random_model(seed, two_subsystems_two_states());
    const HatModel hm = build_hat_model(f.model, f.info);
    for (std::uint64_t s = 0; s < 4; ++s) check_rollouts(f, hm, test::random_strategy(f.model, f.info, seed * 31 + s));
    ++checked;
  }
  CHECK(checked == 60);
}

TEST_CASE("pursuit stand-still survives lift and lower") {
  const auto f = build_pursuit(small_pursuit(3, 3, 4));
  const HatModel hm = build_hat_model(f.model, f.info);
  const AgentStrategy g = test::constant_strategy(f.model, f.info, 1);
  const AgentStrategy back = lower_strategy(f.model, f.info, lift_strategy(f.model, f.info, g));
  for (const auto& p : test::all_primitives(f.model, f.model.initial_states)) {
    const auto a = simulate(f.model, f.info, g, p);
    const auto b = simulate(f.model, f.info, back, p);
    CHECK(a.states == b.states);
    CHECK(a.actions == b.actions);
    CHECK(a.cost == b.cost);
  }
  check_rollouts(f, hm, g);
}

TEST_CASE("property: lift then lower keeps worst-case cost and rollouts") {
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    RandomOptions o;
    o.max_subsystems = 3;
    const auto f = random_model(seed, o);
    const HatModel hm = build_hat_model(f.model, f.info);
    const AgentStrategy g = test::random_strategy(f.model, f.info, seed ^ 0x5eed);
    const PartialStrategy pg = lift_strategy(f.model, f.info, g);
    const AgentStrategy back = lower_strategy(f.model, f.info, pg);
    for (int c = 0; c < static_cast<int>(f.info.initial_cells.back().size()); ++c) {
      const Cost j = test::worst_case(f.model, f.info, g, c);
      CHECK(test::worst_case(f.model, f.info, back, c) == j);
      CHECK(evaluate_partial_strategy(hm, pg, c) == j);
    }
  }
}
