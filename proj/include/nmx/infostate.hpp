#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nmx/nested.hpp"

namespace nmx {

// Interned set-valued information states. A level-n state (0-based n) is a sorted, duplicate-free
// list of member tuples of width n + 1: (hat id, P^0 id, ..., P^{n-1} id), where each P^m id names a
// level-m state at the same time. Level-0 members are bare hat ids. Ids are dense per (t, level) in
// first-seen order.
class InfoStateStore {
 public:
  explicit InfoStateStore(int horizon, int levels);

  // `flat` holds members back to back; it is sorted and deduplicated here.
  int intern(int t, int n, std::vector<int> flat);
  const std::vector<int>& flat(int t, int n, int id) const { return table(t, n).at(id); }
  int member_count(int t, int n, int id) const { return flat(t, n, id).size() / static_cast<int>(n + 1); }
  std::span<const int> member(int t, int n, int id, int i) const {
    const auto& f = flat(t, n, id);
    return std::span<const int>(f).subspan(static_cast<std::size_t>(i * (n + 1)), static_cast<std::size_t>(n + 1));
  }
  bool contains(int t, int n, int id, std::span<const int> tuple) const;
  int count(int t, int n) const { return table(t, n).size(); }
  int horizon() const { return horizon_; }
  int levels() const { return levels_; }

 private:
  const TupleTable& table(int t, int n) const { return tables_[static_cast<std::size_t>(t * levels_ + n)]; }
  int horizon_;
  int levels_;
  std::vector<TupleTable> tables_;
};

// Supplies partial actions to the information-state recursion. For subsystem m below the top level
// the key is (P^m, ..., P^{top-1}); for m at or above the top level the key is empty.
class ActionLookup {
 public:
  virtual ~ActionLookup() = default;
  // Action of flat agent `agent` (in subsystem m) at hat input id `input`, or kMissing.
  virtual int act(int m, std::span<const int> key, int agent, int input) const = 0;
};

// Explicit complete action θ^n together with higher partial actions. Entry key: [m, agent, input, key...].
struct CompleteAction {
  std::map<std::vector<int>, int> entries;
};

class MapLookup final : public ActionLookup {
 public:
  explicit MapLookup(const CompleteAction& a) : a_(a) {}
  int act(int m, std::span<const int> key, int agent, int input) const override;

 private:
  const CompleteAction& a_;
};

// The finite set of complete actions available at level-n state P: one choice point ("slot") per
// (m, key, agent, input) that can occur, with the agent's action space as domain. Slots for
// m < n come first (by level, then first appearance in member order), then level n, then higher
// subsystems when `with_higher` is set. Assignments are enumerated lexicographically, slot 0 most
// significant.
class CompleteActionSpace {
 public:
  struct Slot {
    int m;
    std::vector<int> key;
    int agent;
    int input;
  };

  CompleteActionSpace(const HatModel& hm, const InfoStateStore& store, int t, int n, int P, bool with_higher = false);

  const std::vector<Slot>& slots() const { return slots_; }
  const std::vector<int>& radix() const { return radix_; }
  int slot_of(int m, std::span<const int> key, int agent, int input) const;
  // Number of assignments, saturating at `limit` + 1.
  std::size_t size(std::size_t limit) const;
  CompleteAction to_action(const std::vector<int>& assignment) const;
  // Inverse of to_action; throws InternalError when `a` leaves a slot unassigned.
  std::vector<int> from_action(const CompleteAction& a) const;

 private:
  std::vector<Slot> slots_;
  std::vector<int> radix_;
  std::unordered_map<std::vector<int>, int, VectorHash> index_;  // [m, agent, input, key...]
};

// ActionLookup over a slot assignment of a CompleteActionSpace.
class SlotLookup final : public ActionLookup {
 public:
  SlotLookup(const CompleteActionSpace& space, const std::vector<int>& assignment) : space_(space), a_(assignment) {}
  int act(int m, std::span<const int> key, int agent, int input) const override;

 private:
  const CompleteActionSpace& space_;
  const std::vector<int>& a_;
};

// One step of a level-n history: the complete action used, then the realized new information id.
struct HistoryStep {
  CompleteAction action;
  int z = 0;
};

struct History {
  int n = 0;
  int cell = 0;  // level-n initial cell
  std::vector<HistoryStep> steps;
};

struct DefinitionalResult {
  bool consistent = true;
  int id = -1;  // valid when consistent
  std::string diagnostic;
};

class InfoStateEngine {
 public:
  InfoStateEngine(const HatModel& hm, InfoStateStore& store) : hm_(hm), store_(store) {}

  const HatModel& hat_model() const { return hm_; }
  InfoStateStore& store() { return store_; }
  const InfoStateStore& store() const { return store_; }

  // Level-n state at t = 0 for level-n cell `cell`.
  int initial(int n, int cell);
  // One state per level-n cell, in cell order.
  std::vector<int> initial_infostates(int n);

  // All successor states of level-n state P keyed by new-information id z.
  std::map<int, int> successors(int t, int n, int P, const ActionLookup& act);
  // Successors of a level-m state nested under levels m..top-1 given by `suffix` (suffix[0] is the
  // state itself); `act` answers with keys relative to level `top`.
  std::map<int, int> nested_successors(int t, int m, std::span<const int> suffix, int top, const ActionLookup& act);
  // Throws InfeasibleObservation when z cannot occur.
  int evolve(int t, int n, int P, const ActionLookup& act, int z);

  // Direct computation from a history by enumerating paths; does not use the recursion.
  DefinitionalResult definitional(const History& h);

  // States reachable at each t = 0..T under some complete action; throws ResourceError over `cap`.
  std::vector<std::vector<int>> reachable(int n, std::size_t cap, bool with_higher = false);

  // Canonical nested JSON text of a state.
  std::string to_json(int t, int n, int P) const;

 private:
  using Cache = std::unordered_map<std::vector<int>, std::map<int, int>, VectorHash>;
  // suffix: ids of levels n..top-1 (suffix[0] == P), empty when n == top.
  const std::map<int, int>& successors_impl(int t, int n, int P, std::span<const int> suffix, int top,
                                            const ActionLookup& act, Cache& cache);
  const HatModel& hm_;
  InfoStateStore& store_;
};

}  // namespace nmx
