#include "nmx/random_model.hpp"

#include <algorithm>
#include <random>

namespace nmx {

namespace {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  // Uniform in lo..hi. Plain modulo keeps sequences identical across standard libraries.
  int range(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool chance(int num, int den) { return range(0, den - 1) < num; }

 private:
  std::mt19937_64 rng_;
};

FiniteSpace named(char prefix, int size) {
  std::vector<std::string> names;
  for (int i = 0; i < size; ++i) names.push_back(std::string(1, prefix) + std::to_string(i));
  return FiniteSpace(std::move(names));
}

}  // namespace

ModelFile random_model(std::uint64_t seed, const RandomOptions& o) {
  Draw d(seed);
  ModelFile f;
  SystemModel& m = f.model;
  const int N = d.range(o.min_subsystems, o.max_subsystems);
  for (int n = 0; n < N; ++n) m.agents_per_subsystem.push_back(d.range(1, o.max_agents));
  const int T = d.range(1, o.max_horizon);
  m.horizon = T;
  const int A = m.num_agents();

  for (int t = 0; t <= T; ++t) {
    m.states.push_back(named('s', d.range(1, o.max_states)));
    std::vector<FiniteSpace> noise, obs, act;
    for (int a = 0; a < A; ++a) {
      noise.push_back(named('v', d.range(1, o.max_noises)));
      obs.push_back(named('y', d.range(1, o.max_observations)));
      if (t < T) act.push_back(named('a', d.range(1, o.max_actions)));
    }
    m.noises.push_back(std::move(noise));
    m.observations.push_back(std::move(obs));
    if (t < T) {
      m.actions.push_back(std::move(act));
      m.disturbances.push_back(named('w', d.range(1, o.max_disturbances)));
    }
  }
  for (int x = 0; x < m.states[0].size(); ++x)
    if (d.chance(2, 3)) m.initial_states.push_back(x);
  if (m.initial_states.empty()) m.initial_states.push_back(d.range(0, m.states[0].size() - 1));

  for (int t = 0; t < T; ++t) {
    const int rows = m.states[static_cast<std::size_t>(t)].size() * m.joint_action_count(t) *
                     m.disturbances[static_cast<std::size_t>(t)].size();
    std::vector<int> dyn;
    for (int i = 0; i < rows; ++i) dyn.push_back(d.range(0, m.states[static_cast<std::size_t>(t + 1)].size() - 1));
    m.dynamics.push_back(std::move(dyn));
  }
  for (int t = 0; t <= T; ++t) {
    std::vector<std::vector<int>> per_agent;
    for (int a = 0; a < A; ++a) {
      const auto& ys = m.observations[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
      const int rows = m.states[static_cast<std::size_t>(t)].size() * m.noises[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size();
      std::vector<int> tab;
      for (int i = 0; i < rows; ++i) tab.push_back(d.range(0, ys.size() - 1));
      per_agent.push_back(std::move(tab));
    }
    m.observation.push_back(std::move(per_agent));
  }
  for (int x = 0; x < m.states[static_cast<std::size_t>(T)].size(); ++x) m.terminal_cost.emplace_back(d.range(0, o.max_cost));
  if (o.additive) {
    for (int t = 0; t < T; ++t) {
      std::vector<Cost> row;
      for (int i = 0; i < m.states[static_cast<std::size_t>(t)].size() * m.joint_action_count(t); ++i)
        row.emplace_back(d.range(0, std::max(1, o.max_cost / 2)));
      m.stage_cost.push_back(std::move(row));
    }
  }

  // Who holds each variable from time s+1 on, possibly widened once to a common set later.
  InfoStructure& info = f.info;
  info.agents_per_subsystem = m.agents_per_subsystem;
  info.memory.assign(static_cast<std::size_t>(T + 1), std::vector<VarSet>(static_cast<std::size_t>(A)));
  auto common_set = [&](int j) {
    std::vector<bool> h(static_cast<std::size_t>(A), false);
    for (int n = 0; n < j; ++n)
      for (int a : m.agents_of(n)) h[static_cast<std::size_t>(a)] = true;
    return h;
  };
  auto incomplete_everywhere = [&](const std::vector<bool>& h) {
    for (int n = 0; n < N; ++n) {
      bool all = true;
      for (int a : m.agents_of(n)) all = all && h[static_cast<std::size_t>(a)];
      if (all) return false;
    }
    return true;
  };
  for (int s = 0; s < T; ++s)
    for (int kind = 0; kind < 2; ++kind)
      for (int a = 0; a < A; ++a) {
        const VarId v{s, kind == 0 ? VarKind::Y : VarKind::U, a};
        std::vector<bool> holders(static_cast<std::size_t>(A), false);
        int widen_at = -1;
        std::vector<bool> widened;
        const int status = d.range(0, 3);
        if (status == 1) {
          std::vector<bool> h(static_cast<std::size_t>(A));
          for (int b = 0; b < A; ++b) h[static_cast<std::size_t>(b)] = d.chance(1, 2);
          if (std::find(h.begin(), h.end(), true) != h.end() && incomplete_everywhere(h)) {
            holders = h;
            // Widen to subsystems 1..j once every holder lies below j.
            int lowest_j = 0;
            for (int b = 0; b < A; ++b)
              if (h[static_cast<std::size_t>(b)]) lowest_j = std::max(lowest_j, m.agent(b).n + 1);
            if (s + 2 <= T && d.chance(1, 2)) {
              widen_at = d.range(s + 2, T);
              widened = common_set(d.range(lowest_j, N));
            }
          }
        } else if (status >= 2) {
          holders = common_set(d.range(1, N));
        }
        for (int t = s + 1; t <= T; ++t) {
          const auto& h = (widen_at >= 0 && t >= widen_at) ? widened : holders;
          for (int b = 0; b < A; ++b)
            if (h[static_cast<std::size_t>(b)]) info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)].push_back(v);
        }
      }
  for (auto& row : info.memory)
    for (auto& mem : row) std::sort(mem.begin(), mem.end());

  // Initial cells: split the top subsystem's states, then refine downwards.
  info.initial_cells.assign(static_cast<std::size_t>(N), {});
  {
    std::vector<int> label;
    const int parts = std::min<int>(2, static_cast<int>(m.initial_states.size()));
    for (std::size_t i = 0; i < m.initial_states.size(); ++i) label.push_back(d.range(0, parts - 1));
    std::vector<std::vector<int>> cells(static_cast<std::size_t>(parts));
    for (std::size_t i = 0; i < m.initial_states.size(); ++i) cells[static_cast<std::size_t>(label[i])].push_back(m.initial_states[i]);
    std::erase_if(cells, [](const auto& c) { return c.empty(); });
    info.initial_cells[static_cast<std::size_t>(N - 1)] = std::move(cells);
  }
  for (int n = N - 2; n >= 0; --n) {
    std::vector<std::vector<int>> finer;
    for (const auto& cell : info.initial_cells[static_cast<std::size_t>(n + 1)]) {
      std::vector<int> left, right;
      const bool split = cell.size() > 1 && d.chance(1, 2);
      for (int x : cell) (split && d.chance(1, 2) ? right : left).push_back(x);
      if (left.empty()) std::swap(left, right);
      finer.push_back(std::move(left));
      if (!right.empty()) finer.push_back(std::move(right));
    }
    info.initial_cells[static_cast<std::size_t>(n)] = std::move(finer);
  }
  require_valid(m, info);
  return f;
}

}  // namespace nmx
