#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nmx/infostate.hpp"

namespace nmx {

struct SolveOptions {
  std::size_t max_infostates = 5'000'000;  // across all times and levels
  std::size_t max_candidates = 10'000'000; // complete actions per backup
};

struct ValueEntry {
  Cost value{0};
  std::vector<int> argmin;  // slot assignment of CompleteActionSpace(t, N-1, P); empty at T
};

// V_t over visited level-(N-1) states, keyed by state id.
struct ValueTable {
  std::vector<std::map<int, ValueEntry>> by_time;
};

struct BackupStats {
  std::size_t backups = 0;
  std::size_t candidates = 0;  // complete actions whose successors were computed
};

// Minimax dynamic program over the top subsystem's information states. The value table doubles
// as the strategy profile: its argmin at P_t gives every prescription and the top partial action.
class Solver {
 public:
  explicit Solver(const HatModel& hm, SolveOptions opts = {});
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  const HatModel& hat_model() const { return hm_; }
  InfoStateEngine& engine() { return engine_; }
  InfoStateStore& store() { return store_; }
  const InfoStateStore& store() const { return store_; }
  int top() const { return hm_.num_subsystems() - 1; }

  Cost terminal_value(int P) const;
  std::set<int> feasible_observations(int t, int P, const ActionLookup& act);
  // Minimizes over complete actions at (t, P); successor values are computed on demand.
  ValueEntry bellman_backup(int t, int P);
  // Memoized V_t(P).
  const ValueEntry& value(int t, int P);

  // Solves from every initial state of the top subsystem; returns values in cell order.
  std::vector<Cost> solve();
  const std::vector<int>& initial_states() const { return initial_; }

  const ValueTable& table() const { return table_; }
  const BackupStats& stats() const { return stats_; }

  // Deterministic text exports of the value table and of the chosen complete actions.
  std::string export_values() const;
  std::string export_strategy() const;

 private:
  void check_caps() const;
  const HatModel& hm_;
  SolveOptions opts_;
  InfoStateStore store_;
  InfoStateEngine engine_;
  ValueTable table_;
  BackupStats stats_;
  std::vector<int> initial_;
};

struct StructuredRollout {
  std::vector<int> hats;                        // t = 0..T
  std::vector<std::vector<int>> infostates;     // [t][m]
  std::vector<std::vector<int>> actions;        // [t][agent]
  Trajectory trajectory;                        // original-system view
  Cost cost{0};
};

// Rolls the system forward with agents acting on (y, l, P^{m..N-1}) through the solved prescriptions.
// Throws InternalError if a true tuple ever leaves its information state.
StructuredRollout structured_rollout(Solver& solver, const Primitives& prim);

// Agent-level control laws g(C_0, y, memory) reproducing the structured rollout on every primitive.
AgentStrategy extract_agent_strategies(Solver& solver);

// Exact worst case over all primitives whose x0 lies in top-subsystem cell `cell`.
Cost evaluate_strategy(const SystemModel& model, const InfoStructure& info, const AgentStrategy& g, int cell);

}  // namespace nmx
