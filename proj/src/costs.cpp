#include "nmx/costs.hpp"

#include <map>

namespace nmx {

ModelFile to_terminal(const SystemModel& model, const InfoStructure& info, std::size_t max_states) {
  const int T = model.horizon;
  const int A = model.num_agents();
  ModelFile out;
  SystemModel& m = out.model;
  m.horizon = T;
  m.agents_per_subsystem = model.agents_per_subsystem;
  m.actions = model.actions;
  m.disturbances = model.disturbances;
  m.noises = model.noises;
  m.observations = model.observations;

  // pairs[t]: (x, accumulated cost) in canonical order.
  std::vector<std::map<std::pair<int, Cost>, int>> pairs(static_cast<std::size_t>(T + 1));
  auto number = [](std::map<std::pair<int, Cost>, int>& p) {
    int i = 0;
    for (auto& [k, v] : p) v = i++;
  };
  for (int x = 0; x < model.states[0].size(); ++x) pairs[0].emplace(std::make_pair(x, Cost(0)), 0);
  number(pairs[0]);
  for (int t = 0; t < T; ++t) {
    auto& next = pairs[static_cast<std::size_t>(t + 1)];
    for (const auto& [xa, id] : pairs[static_cast<std::size_t>(t)])
      for (int ju = 0; ju < model.joint_action_count(t); ++ju) {
        const Cost a = xa.second + model.stage(t, xa.first, ju);
        for (int w = 0; w < model.disturbances[static_cast<std::size_t>(t)].size(); ++w)
          next.emplace(std::make_pair(model.next_state(t, xa.first, ju, w), a), 0);
      }
    if (next.size() > max_states) throw ResourceError("accumulated-cost states exceed cap", next.size());
    number(next);
  }

  for (int t = 0; t <= T; ++t) {
    std::vector<std::string> names;
    for (const auto& [xa, id] : pairs[static_cast<std::size_t>(t)])
      names.push_back(model.states[static_cast<std::size_t>(t)].name(xa.first) + "|" + format_cost(xa.second));
    m.states.emplace_back(std::move(names));
  }
  for (int x0 : model.initial_states) m.initial_states.push_back(pairs[0].at({x0, Cost(0)}));

  m.dynamics.resize(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const int JU = model.joint_action_count(t);
    const int W = model.disturbances[static_cast<std::size_t>(t)].size();
    auto& dyn = m.dynamics[static_cast<std::size_t>(t)];
    dyn.resize(pairs[static_cast<std::size_t>(t)].size() * static_cast<std::size_t>(JU * W));
    for (const auto& [xa, id] : pairs[static_cast<std::size_t>(t)])
      for (int ju = 0; ju < JU; ++ju) {
        const Cost a = xa.second + model.stage(t, xa.first, ju);
        for (int w = 0; w < W; ++w)
          dyn[static_cast<std::size_t>((id * JU + ju) * W + w)] =
              pairs[static_cast<std::size_t>(t + 1)].at({model.next_state(t, xa.first, ju, w), a});
      }
  }
  m.observation.resize(static_cast<std::size_t>(T + 1));
  for (int t = 0; t <= T; ++t) {
    m.observation[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(A));
    for (int ag = 0; ag < A; ++ag) {
      const int V = model.noises[static_cast<std::size_t>(t)][static_cast<std::size_t>(ag)].size();
      auto& obs = m.observation[static_cast<std::size_t>(t)][static_cast<std::size_t>(ag)];
      obs.resize(pairs[static_cast<std::size_t>(t)].size() * static_cast<std::size_t>(V));
      for (const auto& [xa, id] : pairs[static_cast<std::size_t>(t)])
        for (int v = 0; v < V; ++v) obs[static_cast<std::size_t>(id * V + v)] = model.observe(t, ag, xa.first, v);
    }
  }
  for (const auto& [xa, id] : pairs[static_cast<std::size_t>(T)])
    m.terminal_cost.push_back(xa.second + model.terminal_cost[static_cast<std::size_t>(xa.first)]);

  out.info = info;
  for (auto& cells : out.info.initial_cells)
    for (auto& cell : cells)
      for (int& x0 : cell) x0 = pairs[0].at({x0, Cost(0)});
  return out;
}

}  // namespace nmx
