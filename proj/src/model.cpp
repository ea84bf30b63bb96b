#include "nmx/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace nmx {

FiniteSpace::FiniteSpace(std::vector<std::string> elements) : elements_(std::move(elements)) {
  for (int i = 0; i < size(); ++i) index_.emplace(elements_[static_cast<std::size_t>(i)], i);
}

FiniteSpace FiniteSpace::integer_range(int lo, int hi) {
  std::vector<std::string> e;
  for (int i = lo; i <= hi; ++i) e.push_back(std::to_string(i));
  return FiniteSpace(std::move(e));
}

std::optional<int> FiniteSpace::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// SystemModel

int SystemModel::num_agents() const {
  int total = 0;
  for (int k : agents_per_subsystem) total += k;
  return total;
}

AgentRef SystemModel::agent(int a) const {
  for (int n = 0; n < num_subsystems(); ++n) {
    if (a < agents_per_subsystem[static_cast<std::size_t>(n)]) return {n, a};
    a -= agents_per_subsystem[static_cast<std::size_t>(n)];
  }
  throw std::out_of_range("agent index out of range");
}

int SystemModel::agent_index(int n, int k) const {
  if (n < 0 || n >= num_subsystems() || k < 0 || k >= agents_per_subsystem[static_cast<std::size_t>(n)])
    throw std::out_of_range("agent (k, n) out of range");
  int a = 0;
  for (int m = 0; m < n; ++m) a += agents_per_subsystem[static_cast<std::size_t>(m)];
  return a + k;
}

std::vector<int> SystemModel::agents_of(int n) const {
  std::vector<int> out;
  for (int k = 0; k < agents_per_subsystem.at(static_cast<std::size_t>(n)); ++k) out.push_back(agent_index(n, k));
  return out;
}

int SystemModel::joint_action_count(int t) const {
  int c = 1;
  for (const auto& s : actions.at(static_cast<std::size_t>(t))) c *= s.size();
  return c;
}

std::vector<int> SystemModel::decode_joint_action(int t, int ju) const {
  const auto& sp = actions.at(static_cast<std::size_t>(t));
  std::vector<int> u(sp.size());
  for (std::size_t a = 0; a < sp.size(); ++a) {
    u[a] = ju % sp[a].size();
    ju /= sp[a].size();
  }
  return u;
}

int SystemModel::encode_joint_action(int t, std::span<const int> u) const {
  const auto& sp = actions.at(static_cast<std::size_t>(t));
  int ju = 0;
  for (std::size_t a = sp.size(); a-- > 0;) ju = ju * sp[a].size() + u[a];
  return ju;
}

int SystemModel::joint_noise_count(int t) const {
  int c = 1;
  for (const auto& s : noises.at(static_cast<std::size_t>(t))) c *= s.size();
  return c;
}

std::vector<int> SystemModel::decode_joint_noise(int t, int jv) const {
  const auto& sp = noises.at(static_cast<std::size_t>(t));
  std::vector<int> v(sp.size());
  for (std::size_t a = 0; a < sp.size(); ++a) {
    v[a] = jv % sp[a].size();
    jv /= sp[a].size();
  }
  return v;
}

int SystemModel::next_state(int t, int x, int ju, int w) const {
  const auto ut = static_cast<std::size_t>(t);
  const int JU = joint_action_count(t);
  const int W = disturbances[ut].size();
  return dynamics[ut][static_cast<std::size_t>((x * JU + ju) * W + w)];
}

int SystemModel::observe(int t, int agent, int x, int v) const {
  const auto ut = static_cast<std::size_t>(t);
  const auto ua = static_cast<std::size_t>(agent);
  return observation[ut][ua][static_cast<std::size_t>(x * noises[ut][ua].size() + v)];
}

Cost SystemModel::stage(int t, int x, int ju) const {
  if (stage_cost.empty()) return Cost(0);
  return stage_cost[static_cast<std::size_t>(t)][static_cast<std::size_t>(x * joint_action_count(t) + ju)];
}

int InfoStructure::num_agents() const {
  int total = 0;
  for (int k : agents_per_subsystem) total += k;
  return total;
}

void default_initial_cells(const SystemModel& model, InfoStructure& info) {
  info.initial_cells.resize(static_cast<std::size_t>(model.num_subsystems()));
  for (auto& cells : info.initial_cells) {
    if (cells.empty()) {
      std::vector<int> all = model.initial_states;
      std::sort(all.begin(), all.end());
      cells.push_back(std::move(all));
    }
  }
}

// ---------------------------------------------------------------------------
// Information-structure queries

namespace {

VarSet intersect(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VarSet difference(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool subset(const VarSet& a, const VarSet& b) { return std::includes(b.begin(), b.end(), a.begin(), a.end()); }

int first_agent(const InfoStructure& info, int n) {
  int a = 0;
  for (int m = 0; m < n; ++m) a += info.agents_per_subsystem[static_cast<std::size_t>(m)];
  return a;
}

void check_subsystem(const InfoStructure& info, int n, int t) {
  if (n < 0 || n >= static_cast<int>(info.agents_per_subsystem.size()))
    throw std::out_of_range("subsystem index out of range");
  if (t < 0 || t > info.horizon()) throw std::out_of_range("time index out of range");
}

}  // namespace

VarSet common_information(const InfoStructure& info, int n, int t) {
  check_subsystem(info, n, t);
  const int a0 = first_agent(info, n);
  const int K = info.agents_per_subsystem[static_cast<std::size_t>(n)];
  const auto& mem = info.memory[static_cast<std::size_t>(t)];
  if (K == 0) return {};
  VarSet c = mem[static_cast<std::size_t>(a0)];
  for (int k = 1; k < K; ++k) c = intersect(c, mem[static_cast<std::size_t>(a0 + k)]);
  return c;
}

VarSet private_information(const InfoStructure& info, int n, int k, int t) {
  check_subsystem(info, n, t);
  if (k < 0 || k >= info.agents_per_subsystem[static_cast<std::size_t>(n)])
    throw std::out_of_range("agent index out of range");
  const auto& m = info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(first_agent(info, n) + k)];
  return difference(m, common_information(info, n, t));
}

VarSet new_information(const InfoStructure& info, int n, int t) {
  check_subsystem(info, n, t);
  if (t == 0) return common_information(info, n, 0);
  return difference(common_information(info, n, t), common_information(info, n, t - 1));
}

int cell_of(const InfoStructure& info, int n, int x0) {
  const auto& cells = info.initial_cells.at(static_cast<std::size_t>(n));
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (std::find(cells[c].begin(), cells[c].end(), x0) != cells[c].end()) return static_cast<int>(c);
  return -1;
}

std::vector<int> initial_states_in_cell(const InfoStructure& info, int cell) {
  const auto& cells = info.initial_cells.back();
  return cells.at(static_cast<std::size_t>(cell));
}

std::string format_var(const SystemModel& model, const VarId& v) {
  AgentRef r = model.agent(v.agent);
  std::ostringstream os;
  os << (v.kind == VarKind::Y ? 'Y' : 'U') << '[' << r.n + 1 << ',' << r.k + 1 << "]@" << v.s;
  return os.str();
}

std::optional<VarId> parse_var(const SystemModel& model, std::string_view token) {
  // Y[n,k]@s
  if (token.size() < 7 || (token[0] != 'Y' && token[0] != 'U') || token[1] != '[') return std::nullopt;
  auto comma = token.find(',');
  auto close = token.find("]@");
  if (comma == std::string_view::npos || close == std::string_view::npos || comma > close) return std::nullopt;
  try {
    std::size_t used = 0;
    std::string ns(token.substr(2, comma - 2)), ks(token.substr(comma + 1, close - comma - 1)),
        ss(token.substr(close + 2));
    int n = std::stoi(ns, &used);
    if (used != ns.size()) return std::nullopt;
    int k = std::stoi(ks, &used);
    if (used != ks.size()) return std::nullopt;
    int s = std::stoi(ss, &used);
    if (used != ss.size() || s < 0) return std::nullopt;
    if (n < 1 || n > model.num_subsystems() || k < 1 || k > model.agents_per_subsystem[static_cast<std::size_t>(n - 1)])
      return std::nullopt;
    return VarId{s, token[0] == 'Y' ? VarKind::Y : VarKind::U, model.agent_index(n - 1, k - 1)};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Reporter {
  std::vector<Violation>& out;
  void add(std::string code, std::string msg, int n = -1, int k = -1, int t = -1) {
    out.push_back({std::move(code), std::move(msg), n, k, t});
  }
};

void check_space(Reporter& r, const FiniteSpace& s, const std::string& what, int n, int k, int t) {
  if (s.empty()) r.add("empty-space", what + " is empty", n, k, t);
  if (s.has_duplicates()) r.add("duplicate-element", what + " has duplicate elements", n, k, t);
}

void check_table(Reporter& r, const std::vector<int>& table, std::size_t expected, int codomain,
                 const std::string& what, int n, int k, int t) {
  if (table.size() != expected) {
    r.add("table-size", what + " has " + std::to_string(table.size()) + " entries, expected " +
                            std::to_string(expected), n, k, t);
    return;
  }
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i] == kMissing) {
      r.add("missing-entry", what + " entry " + std::to_string(i) + " is undefined", n, k, t);
      return;
    }
    if (table[i] < 0 || table[i] >= codomain) {
      r.add("out-of-space", what + " entry " + std::to_string(i) + " lands outside its codomain", n, k, t);
      return;
    }
  }
}

void validate_model(const SystemModel& m, Reporter& r) {
  const int T = m.horizon;
  if (T < 0) {
    r.add("horizon", "horizon must be nonnegative");
    return;
  }
  if (m.agents_per_subsystem.empty()) r.add("subsystems", "at least one subsystem is required");
  for (std::size_t n = 0; n < m.agents_per_subsystem.size(); ++n)
    if (m.agents_per_subsystem[n] < 1) r.add("subsystems", "subsystem has no agents", static_cast<int>(n));
  const auto uT = static_cast<std::size_t>(T);
  const auto A = static_cast<std::size_t>(m.num_agents());
  if (m.states.size() != uT + 1 || m.actions.size() != uT || m.disturbances.size() != uT ||
      m.noises.size() != uT + 1 || m.observations.size() != uT + 1 || m.dynamics.size() != uT ||
      m.observation.size() != uT + 1) {
    r.add("shape", "per-time space or table lists do not match the horizon");
    return;
  }
  for (std::size_t t = 0; t <= uT; ++t) {
    check_space(r, m.states[t], "state space", -1, -1, static_cast<int>(t));
    if (m.noises[t].size() != A || m.observations[t].size() != A || m.observation[t].size() != A) {
      r.add("shape", "per-agent noise/observation lists do not match agent count", -1, -1, static_cast<int>(t));
      return;
    }
    if (t < uT) {
      check_space(r, m.disturbances[t], "disturbance space", -1, -1, static_cast<int>(t));
      if (m.actions[t].size() != A) {
        r.add("shape", "per-agent action list does not match agent count", -1, -1, static_cast<int>(t));
        return;
      }
    }
    for (std::size_t a = 0; a < A; ++a) {
      AgentRef ar = m.agent(static_cast<int>(a));
      check_space(r, m.noises[t][a], "noise space", ar.n, ar.k, static_cast<int>(t));
      check_space(r, m.observations[t][a], "observation space", ar.n, ar.k, static_cast<int>(t));
      if (t < uT) check_space(r, m.actions[t][a], "action space", ar.n, ar.k, static_cast<int>(t));
    }
  }
  if (!r.out.empty()) return;
  for (std::size_t t = 0; t < uT; ++t) {
    const auto expected = static_cast<std::size_t>(m.states[t].size()) *
                          static_cast<std::size_t>(m.joint_action_count(static_cast<int>(t))) *
                          static_cast<std::size_t>(m.disturbances[t].size());
    check_table(r, m.dynamics[t], expected, m.states[t + 1].size(), "dynamics", -1, -1, static_cast<int>(t));
  }
  for (std::size_t t = 0; t <= uT; ++t)
    for (std::size_t a = 0; a < A; ++a) {
      AgentRef ar = m.agent(static_cast<int>(a));
      const auto expected = static_cast<std::size_t>(m.states[t].size()) * static_cast<std::size_t>(m.noises[t][a].size());
      check_table(r, m.observation[t][a], expected, m.observations[t][a].size(), "observation", ar.n, ar.k,
                  static_cast<int>(t));
    }
  if (m.initial_states.empty()) r.add("initial", "no feasible initial state");
  {
    std::set<int> seen;
    for (int x : m.initial_states) {
      if (x < 0 || x >= m.states[0].size()) r.add("initial", "initial state outside the time-0 state space");
      if (!seen.insert(x).second) r.add("initial", "duplicate initial state");
    }
  }
  if (m.terminal_cost.size() != static_cast<std::size_t>(m.states[uT].size())) {
    r.add("terminal-cost", "terminal cost must be defined for every terminal state");
  } else {
    for (const auto& c : m.terminal_cost)
      if (c < 0) {
        r.add("negative-cost", "terminal cost is negative");
        break;
      }
  }
  if (m.has_stage_costs()) {
    if (m.stage_cost.size() != uT) {
      r.add("stage-cost", "stage costs must be given for every t < T");
    } else {
      for (std::size_t t = 0; t < uT; ++t) {
        const auto expected = static_cast<std::size_t>(m.states[t].size()) *
                              static_cast<std::size_t>(m.joint_action_count(static_cast<int>(t)));
        if (m.stage_cost[t].size() != expected) {
          r.add("stage-cost", "stage cost table has the wrong size", -1, -1, static_cast<int>(t));
          continue;
        }
        for (const auto& c : m.stage_cost[t])
          if (c < 0) {
            r.add("negative-cost", "stage cost is negative", -1, -1, static_cast<int>(t));
            break;
          }
      }
    }
  }
}

void validate_info(const SystemModel& m, const InfoStructure& info, Reporter& r) {
  const int T = m.horizon;
  const int A = m.num_agents();
  if (info.agents_per_subsystem != m.agents_per_subsystem) {
    r.add("info-shape", "information structure subsystem layout differs from the model");
    return;
  }
  if (info.memory.size() != static_cast<std::size_t>(T + 1)) {
    r.add("info-shape", "memory must be listed for t = 0..T");
    return;
  }
  for (int t = 0; t <= T; ++t) {
    const auto& mem = info.memory[static_cast<std::size_t>(t)];
    if (mem.size() != static_cast<std::size_t>(A)) {
      r.add("info-shape", "memory list does not match agent count", -1, -1, t);
      return;
    }
    for (int a = 0; a < A; ++a) {
      AgentRef ar = m.agent(a);
      const VarSet& set = mem[static_cast<std::size_t>(a)];
      if (!std::is_sorted(set.begin(), set.end()) || std::adjacent_find(set.begin(), set.end()) != set.end())
        r.add("memory-order", "memory identifiers must be sorted and distinct", ar.n, ar.k, t);
      for (const VarId& v : set) {
        if (v.agent < 0 || v.agent >= A) {
          r.add("memory-agent", "memory identifier names an unknown agent", ar.n, ar.k, t);
        } else if (v.s > t - 1 || v.s < 0) {
          r.add("memory-time", "memory may only reference variables at s <= t-1", ar.n, ar.k, t);
        } else if (v.kind == VarKind::U && v.s >= T) {
          r.add("memory-time", "memory references an action after the last decision time", ar.n, ar.k, t);
        }
      }
      if (t > 0 && !subset(info.memory[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(a)], set))
        r.add("perfect-recall", "memory at t-1 is not contained in memory at t", ar.n, ar.k, t);
    }
  }
  if (!r.out.empty()) return;
  const int N = m.num_subsystems();
  for (int t = 0; t <= T; ++t) {
    for (int n = 0; n + 1 < N; ++n) {
      VarSet cn = common_information(info, n, t);
      for (int mm = n + 1; mm < N; ++mm) {
        if (!subset(common_information(info, mm, t), cn))
          r.add("nestedness", "C_t^" + std::to_string(mm + 1) + " is not contained in C_t^" + std::to_string(n + 1),
                mm, -1, t);
        for (int k = 0; k < m.agents_per_subsystem[static_cast<std::size_t>(mm)]; ++k) {
          VarSet l = private_information(info, mm, k, t);
          if (!intersect(l, cn).empty())
            r.add("privacy", "private information of agent (k=" + std::to_string(k + 1) + ", n=" +
                                 std::to_string(mm + 1) + ") intersects C_t^" + std::to_string(n + 1),
                  mm, k, t);
        }
      }
    }
  }
  // Initial common information: per-subsystem partitions of the feasible initial set, refining downward.
  if (info.initial_cells.size() != static_cast<std::size_t>(N)) {
    r.add("initial-cells", "initial cells must be given for every subsystem");
    return;
  }
  std::vector<int> init = m.initial_states;
  std::sort(init.begin(), init.end());
  for (int n = 0; n < N; ++n) {
    std::vector<int> all;
    for (const auto& cell : info.initial_cells[static_cast<std::size_t>(n)]) {
      if (cell.empty()) r.add("initial-cells", "empty initial cell", n);
      all.insert(all.end(), cell.begin(), cell.end());
    }
    std::sort(all.begin(), all.end());
    if (all != init)
      r.add("initial-cells", "cells of subsystem " + std::to_string(n + 1) +
                                 " do not partition the feasible initial states", n);
  }
  if (!r.out.empty()) return;
  for (int n = 0; n + 1 < N; ++n)
    for (const auto& cell : info.initial_cells[static_cast<std::size_t>(n)]) {
      const int c = cell_of(info, n + 1, cell.front());
      for (int x : cell)
        if (cell_of(info, n + 1, x) != c) {
          r.add("initial-nestedness", "a subsystem " + std::to_string(n + 1) +
                                          " initial cell straddles cells of subsystem " + std::to_string(n + 2),
                n);
          break;
        }
    }
}

}  // namespace

std::vector<Violation> validate(const SystemModel& model, const InfoStructure& info) {
  std::vector<Violation> out;
  Reporter r{out};
  validate_model(model, r);
  if (out.empty()) validate_info(model, info, r);
  return out;
}

void require_valid(const SystemModel& model, const InfoStructure& info) {
  auto report = validate(model, info);
  if (report.empty()) return;
  std::string msg = report.front().code + ": " + report.front().message;
  if (report.size() > 1) msg += " (+" + std::to_string(report.size() - 1) + " more)";
  throw ValidationError(msg);
}

// ---------------------------------------------------------------------------
// Strategies and rollouts

AgentStrategy AgentStrategy::empty_for(const SystemModel& model) {
  AgentStrategy s;
  s.laws.assign(static_cast<std::size_t>(model.horizon), std::vector<std::map<std::vector<int>, int>>(
                                                              static_cast<std::size_t>(model.num_agents())));
  return s;
}

std::optional<int> AgentStrategy::act(int t, int agent, const std::vector<int>& key) const {
  if (t < 0 || t >= static_cast<int>(laws.size())) return std::nullopt;
  const auto& law = laws[static_cast<std::size_t>(t)];
  if (agent < 0 || agent >= static_cast<int>(law.size())) return std::nullopt;
  auto it = law[static_cast<std::size_t>(agent)].find(key);
  if (it == law[static_cast<std::size_t>(agent)].end()) return std::nullopt;
  return it->second;
}

int variable_value(const Trajectory& traj, const VarId& v) {
  if (v.kind == VarKind::Y) return traj.observations.at(static_cast<std::size_t>(v.s)).at(static_cast<std::size_t>(v.agent));
  return traj.actions.at(static_cast<std::size_t>(v.s)).at(static_cast<std::size_t>(v.agent));
}

std::vector<int> argument_key(const InfoStructure& info, const SystemModel& model, const Trajectory& traj,
                              int agent, int t) {
  const AgentRef ar = model.agent(agent);
  std::vector<int> key;
  key.push_back(traj.cells.at(static_cast<std::size_t>(ar.n)));
  key.push_back(traj.observations.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(agent)));
  for (const VarId& v : info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)])
    key.push_back(variable_value(traj, v));
  return key;
}

Trajectory simulate(const SystemModel& model, const InfoStructure& info, const AgentStrategy& strategy,
                    const Primitives& prim) {
  const int T = model.horizon;
  const int A = model.num_agents();
  Trajectory traj;
  for (int n = 0; n < model.num_subsystems(); ++n) {
    int c = cell_of(info, n, prim.x0);
    if (c < 0) throw Error("initial state is not feasible");
    traj.cells.push_back(c);
  }
  int x = prim.x0;
  traj.states.push_back(x);
  for (int t = 0; t <= T; ++t) {
    std::vector<int> y(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a)
      y[static_cast<std::size_t>(a)] = model.observe(t, a, x, prim.v[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]);
    traj.observations.push_back(std::move(y));
    if (t == T) break;
    std::vector<int> u(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
      auto act = strategy.act(t, a, argument_key(info, model, traj, a, t));
      if (!act) {
        AgentRef ar = model.agent(a);
        throw StrategyError(ar.n, ar.k, t);
      }
      u[static_cast<std::size_t>(a)] = *act;
    }
    const int ju = model.encode_joint_action(t, u);
    traj.cost += model.stage(t, x, ju);
    traj.actions.push_back(std::move(u));
    x = model.next_state(t, x, ju, prim.w[static_cast<std::size_t>(t)]);
    traj.states.push_back(x);
  }
  traj.cost += model.terminal_cost[static_cast<std::size_t>(x)];
  return traj;
}

void for_each_primitive(const SystemModel& model, std::span<const int> initial,
                        const std::function<void(const Primitives&)>& fn) {
  const int T = model.horizon;
  // Odometer over (x0, w_0..w_{T-1}, jv_0..jv_T).
  std::vector<int> radix;
  radix.push_back(static_cast<int>(initial.size()));
  for (int t = 0; t < T; ++t) radix.push_back(model.disturbances[static_cast<std::size_t>(t)].size());
  for (int t = 0; t <= T; ++t) radix.push_back(model.joint_noise_count(t));
  for (int r : radix)
    if (r == 0) return;
  std::vector<int> digit(radix.size(), 0);
  Primitives p;
  p.w.resize(static_cast<std::size_t>(T));
  p.v.resize(static_cast<std::size_t>(T + 1));
  while (true) {
    p.x0 = initial[static_cast<std::size_t>(digit[0])];
    for (int t = 0; t < T; ++t) p.w[static_cast<std::size_t>(t)] = digit[static_cast<std::size_t>(1 + t)];
    for (int t = 0; t <= T; ++t)
      p.v[static_cast<std::size_t>(t)] = model.decode_joint_noise(t, digit[static_cast<std::size_t>(1 + T + t)]);
    fn(p);
    std::size_t i = 0;
    while (i < digit.size() && ++digit[i] == radix[i]) digit[i++] = 0;
    if (i == digit.size()) break;
  }
}

}  // namespace nmx
