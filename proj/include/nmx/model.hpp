#pragma once

#include <compare>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nmx/errors.hpp"
#include "nmx/rational.hpp"

namespace nmx {

// Ordered list of distinct symbolic values with canonical indices 0..size-1.
class FiniteSpace {
 public:
  FiniteSpace() = default;
  explicit FiniteSpace(std::vector<std::string> elements);
  // Tokens "lo", "lo+1", ..., "hi".
  static FiniteSpace integer_range(int lo, int hi);

  int size() const { return static_cast<int>(elements_.size()); }
  bool empty() const { return elements_.empty(); }
  const std::string& name(int i) const { return elements_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& elements() const { return elements_; }
  std::optional<int> find(std::string_view token) const;
  bool has_duplicates() const { return index_.size() != elements_.size(); }

  friend bool operator==(const FiniteSpace& a, const FiniteSpace& b) { return a.elements_ == b.elements_; }

 private:
  std::vector<std::string> elements_;
  std::unordered_map<std::string, int> index_;
};

// Table entry sentinels. A dense table holds either a valid codomain index or one of these.
inline constexpr int kMissing = -1;
inline constexpr int kOutOfSpace = -2;

// Subsystem n and agent k inside it, both 0-based.
struct AgentRef {
  int n = 0;
  int k = 0;
  friend bool operator==(const AgentRef&, const AgentRef&) = default;
};

enum class VarKind : int { Y = 0, U = 1 };

// Y_s^{a} or U_s^{a} for flat agent index a. Ordered time-major.
struct VarId {
  int s = 0;
  VarKind kind = VarKind::Y;
  int agent = 0;
  friend auto operator<=>(const VarId&, const VarId&) = default;
  friend bool operator==(const VarId&, const VarId&) = default;
};

using VarSet = std::vector<VarId>;  // sorted, duplicate-free

struct SystemModel {
  int horizon = 0;
  std::vector<int> agents_per_subsystem;

  std::vector<FiniteSpace> states;                    // t = 0..T
  std::vector<std::vector<FiniteSpace>> actions;      // [t][agent], t = 0..T-1
  std::vector<FiniteSpace> disturbances;              // t = 0..T-1
  std::vector<std::vector<FiniteSpace>> noises;       // [t][agent], t = 0..T
  std::vector<std::vector<FiniteSpace>> observations; // [t][agent], t = 0..T
  std::vector<int> initial_states;                    // feasible X_0, indices into states[0]

  // dynamics[t][(x * JU + ju) * W + w] = x'
  std::vector<std::vector<int>> dynamics;
  // observation[t][agent][x * V + v] = y
  std::vector<std::vector<std::vector<int>>> observation;
  std::vector<Cost> terminal_cost;                    // over states[T]
  // stage_cost[t][x * JU + ju]; empty outer vector means terminal-cost-only.
  std::vector<std::vector<Cost>> stage_cost;

  int num_subsystems() const { return static_cast<int>(agents_per_subsystem.size()); }
  int num_agents() const;
  AgentRef agent(int a) const;
  int agent_index(int n, int k) const;
  std::vector<int> agents_of(int n) const;
  bool has_stage_costs() const { return !stage_cost.empty(); }

  // Joint actions are mixed-radix over agents in flat order, agent 0 least significant.
  int joint_action_count(int t) const;
  std::vector<int> decode_joint_action(int t, int ju) const;
  int encode_joint_action(int t, std::span<const int> u) const;
  int joint_noise_count(int t) const;
  std::vector<int> decode_joint_noise(int t, int jv) const;

  int next_state(int t, int x, int ju, int w) const;
  int observe(int t, int agent, int x, int v) const;
  Cost stage(int t, int x, int ju) const;
};

// Per-agent memory over time plus the initial common information.
struct InfoStructure {
  std::vector<int> agents_per_subsystem;
  std::vector<std::vector<VarSet>> memory;  // [t][agent], t = 0..T
  // initial_cells[n] partitions the feasible initial states; the realized cell is C_0^n.
  std::vector<std::vector<std::vector<int>>> initial_cells;

  int num_agents() const;
  int horizon() const { return static_cast<int>(memory.size()) - 1; }
};

// Fills in one all-covering cell for every subsystem that has none.
void default_initial_cells(const SystemModel& model, InfoStructure& info);

struct Violation {
  std::string code;
  std::string message;
  int n = -1;
  int k = -1;
  int t = -1;
};

std::vector<Violation> validate(const SystemModel& model, const InfoStructure& info);
// Throws ValidationError listing the first violations when the report is nonempty.
void require_valid(const SystemModel& model, const InfoStructure& info);

VarSet common_information(const InfoStructure& info, int n, int t);
VarSet private_information(const InfoStructure& info, int n, int k, int t);
VarSet new_information(const InfoStructure& info, int n, int t);

// Index of the subsystem-n cell containing initial state x0, or -1.
int cell_of(const InfoStructure& info, int n, int x0);

std::string format_var(const SystemModel& model, const VarId& v);
std::optional<VarId> parse_var(const SystemModel& model, std::string_view token);

struct Primitives {
  int x0 = 0;
  std::vector<int> w;               // t = 0..T-1
  std::vector<std::vector<int>> v;  // [t][agent], t = 0..T
};

struct Trajectory {
  std::vector<int> states;                     // t = 0..T
  std::vector<std::vector<int>> actions;       // [t][agent], t = 0..T-1
  std::vector<std::vector<int>> observations;  // [t][agent], t = 0..T
  std::vector<int> cells;                      // realized C_0^n per subsystem
  Cost cost{0};
};

// Agent-level control laws g_t^{k,n}. The argument key is
// [C_0^n cell, y_t, values of M_t^{k,n} in VarId order].
struct AgentStrategy {
  std::vector<std::vector<std::map<std::vector<int>, int>>> laws;  // [t][agent]

  static AgentStrategy empty_for(const SystemModel& model);
  std::optional<int> act(int t, int agent, const std::vector<int>& key) const;
};

// Value of a recorded variable along a (possibly partial) trajectory.
int variable_value(const Trajectory& traj, const VarId& v);
std::vector<int> argument_key(const InfoStructure& info, const SystemModel& model, const Trajectory& traj,
                              int agent, int t);

// Deterministic rollout; throws StrategyError when the strategy is undefined at a reached history.
Trajectory simulate(const SystemModel& model, const InfoStructure& info, const AgentStrategy& strategy,
                    const Primitives& prim);

// Calls fn for every primitive realization with x0 drawn from `initial`.
void for_each_primitive(const SystemModel& model, std::span<const int> initial,
                        const std::function<void(const Primitives&)>& fn);

// Initial states in the subsystem-N cell `cell`.
std::vector<int> initial_states_in_cell(const InfoStructure& info, int cell);

}  // namespace nmx
