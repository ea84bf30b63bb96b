#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/model.hpp"

namespace nmx {

// Hash for integer vectors used as interning keys.
struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull ^ v.size();
    for (int x : v) {
      h ^= static_cast<std::size_t>(static_cast<unsigned>(x)) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Interns integer tuples to dense ids in first-seen order.
class TupleTable {
 public:
  int intern(const std::vector<int>& key);
  std::optional<int> find(const std::vector<int>& key) const;
  const std::vector<int>& at(int id) const { return items_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(items_.size()); }

 private:
  std::vector<std::vector<int>> items_;
  std::unordered_map<std::vector<int>, int, VectorHash> index_;
};

// X̂_t: the plant state plus, for every agent, an input id naming its (Y_t, L_t) realization.
struct HatState {
  int x = 0;
  std::vector<int> inputs;  // per flat agent
};

// A partial action for one agent: dense over that agent's input ids at t; kMissing where undefined.
using AgentPartialAction = std::vector<int>;
// Û_t^{1:N} flattened over agents.
using PartialActionProfile = std::vector<AgentPartialAction>;

// The equivalent system with hat-state, partial-action decisions and new-information observations.
// Only hat-states reachable from the feasible initial states under some actions are materialized.
class HatModel {
 public:
  const SystemModel& model() const { return model_; }
  const InfoStructure& info() const { return info_; }
  int horizon() const { return model_.horizon; }
  int num_subsystems() const { return model_.num_subsystems(); }
  int num_agents() const { return model_.num_agents(); }

  int hat_count(int t) const { return static_cast<int>(hats_[static_cast<std::size_t>(t)].size()); }
  const HatState& hat(int t, int id) const { return hats_[static_cast<std::size_t>(t)][static_cast<std::size_t>(id)]; }
  std::optional<int> find_hat(int t, const HatState& h) const;

  // Input tuple [y, values of L_t^{k,n} in VarId order] for an agent's input id.
  int input_count(int t, int agent) const { return inputs_[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)].size(); }
  const std::vector<int>& input(int t, int agent, int id) const {
    return inputs_[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)].at(id);
  }
  std::optional<int> find_input(int t, int agent, const std::vector<int>& tuple) const {
    return inputs_[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)].find(tuple);
  }
  const VarSet& private_vars(int t, int agent) const {
    return private_vars_[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)];
  }
  // Z_t^n identifiers, for t >= 1. At t = 0 the new information is the initial cell label.
  const VarSet& new_info_vars(int t, int n) const { return new_vars_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)]; }
  int z_count(int t, int n) const { return z_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)].size(); }
  const std::vector<int>& z_values(int t, int n, int z) const {
    return z_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)].at(z);
  }

  int joint_action_count(int t) const { return model_.joint_action_count(t); }
  int joint_noise_count(int t) const { return model_.joint_noise_count(t); }
  int disturbance_count(int t) const { return model_.disturbances[static_cast<std::size_t>(t)].size(); }

  // Realized joint action when every agent applies its partial action; kMissing if any is undefined.
  int joint_action(int t, int hat, const PartialActionProfile& u) const;

  // f̂_t on realized joint actions: next hat id given (x̂_t, u_t, w_t, v_{t+1}).
  int next(int t, int hat, int ju, int w, int jv) const {
    const auto ut = static_cast<std::size_t>(t);
    return next_[ut][static_cast<std::size_t>(((hat * joint_action_count(t) + ju) * disturbance_count(t) + w) *
                                                  joint_noise_count(t + 1) + jv)];
  }
  // ĥ_t^n on realized joint actions: id of Z_{t+1}^n.
  int observe(int t, int n, int hat, int ju) const {
    return obs_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)][static_cast<std::size_t>(hat * joint_action_count(t) + ju)];
  }
  Cost terminal_cost(int hat) const;
  int initial_cell(int n, int hat) const;
  std::vector<int> initial_hats(int n, int cell) const;
  // Hat-state id at t = 0 for a primitive realization.
  int initial_hat(int x0, const std::vector<int>& v0) const;

  std::string describe_hat(int t, int id) const;
  // Plain-text dump of the hat spaces and tables, for debugging.
  std::string debug_dump() const;

 private:
  friend HatModel build_hat_model(const SystemModel&, const InfoStructure&, std::size_t);
  SystemModel model_;
  InfoStructure info_;
  std::vector<std::vector<HatState>> hats_;
  std::vector<std::unordered_map<std::vector<int>, int, VectorHash>> hat_index_;
  std::vector<std::vector<TupleTable>> inputs_;
  std::vector<std::vector<VarSet>> private_vars_;
  std::vector<std::vector<VarSet>> new_vars_;
  std::vector<std::vector<TupleTable>> z_;
  std::vector<std::vector<int>> next_;
  std::vector<std::vector<std::vector<int>>> obs_;
};

// Builds the equivalent system. Throws ConstructionError when an identifier in some L_{t+1} or
// Z_{t+1} cannot be read from (X̂_t, U_t); ResourceError when a hat space exceeds `max_hats`.
HatModel build_hat_model(const SystemModel& model, const InfoStructure& info, std::size_t max_hats = 2'000'000);

int hat_step(const HatModel& hm, int t, int hat, const PartialActionProfile& u, int w, int jv);
int hat_observe(const HatModel& hm, int t, int n, int hat, const PartialActionProfile& u);

// ĝ_t^{k,n}: common-information key [C_0^n cell, values of C_t^n] -> (input tuple [y, L values] -> u).
struct PartialStrategy {
  std::vector<std::vector<std::map<std::vector<int>, std::map<std::vector<int>, int>>>> laws;  // [t][agent]
};

PartialStrategy lift_strategy(const SystemModel& model, const InfoStructure& info, const AgentStrategy& g);
AgentStrategy lower_strategy(const SystemModel& model, const InfoStructure& info, const PartialStrategy& g);

struct HatRollout {
  std::vector<int> hats;                  // t = 0..T
  std::vector<std::vector<int>> actions;  // [t][agent]
  std::vector<std::vector<int>> z;        // [t][n], t = 1..T stored at index t; index 0 holds cells
  Cost cost{0};
};

// Rolls the hat system forward; partial actions are chosen from realized common information.
HatRollout hat_rollout(const HatModel& hm, const PartialStrategy& g, const Primitives& prim);
// Ĵ(ĝ) restricted to initial states in subsystem-N cell `cell`.
Cost evaluate_partial_strategy(const HatModel& hm, const PartialStrategy& g, int cell);

}  // namespace nmx
