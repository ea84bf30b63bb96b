#pragma once

// Exhaustive walk over level-n histories comparing the recursive update with the direct
// path-enumeration construction.

#include <functional>
#include <string>

#include "nmx/infostate.hpp"
#include "support.hpp"

namespace nmx::test {

struct HistoryCheck {
  std::size_t histories = 0;
  std::size_t infeasible_checked = 0;
  std::size_t mismatches = 0;
  bool complete = true;  // false when the history budget ran out
  std::string first_mismatch;
};

inline HistoryCheck check_histories(const HatModel& hm, int n, std::size_t budget) {
  InfoStateStore store(hm.horizon(), hm.num_subsystems());
  InfoStateEngine engine(hm, store);
  HistoryCheck out;
  auto fail = [&](const std::string& what) {
    if (out.mismatches++ == 0) out.first_mismatch = what;
  };
  std::function<void(int, int, History&)> walk = [&](int t, int P, History& h) {
    if (++out.histories > budget) {
      out.complete = false;
      return;
    }
    const DefinitionalResult d = engine.definitional(h);
    if (!d.consistent || d.id != P)
      fail("t=" + std::to_string(t) + " n=" + std::to_string(n) + " recursion " + engine.to_json(t, n, P) +
           " definition " + (d.consistent ? engine.to_json(t, n, d.id) : d.diagnostic));
    if (t == hm.horizon() || !out.complete) return;
    const CompleteActionSpace space(hm, store, t, n, P, true);
    std::vector<int> pick(space.slots().size(), 0);
    do {
      const CompleteAction a = space.to_action(pick);
      const MapLookup act(a);
      const std::map<int, int> succ = engine.successors(t, n, P, act);
      for (const auto& [z, next] : succ) {
        if (engine.evolve(t, n, P, act, z) != next) fail("evolve disagrees with successors");
        h.steps.push_back({a, z});
        walk(t + 1, next, h);
        h.steps.pop_back();
        if (!out.complete) return;
      }
      for (int z = 0; z < hm.z_count(t + 1, n); ++z) {
        if (succ.count(z)) continue;
        ++out.infeasible_checked;
        bool threw = false;
        try {
          engine.evolve(t, n, P, act, z);
        } catch (const InfeasibleObservation&) {
          threw = true;
        }
        h.steps.push_back({a, z});
        const DefinitionalResult bad = engine.definitional(h);
        h.steps.pop_back();
        if (!threw || bad.consistent) fail("infeasible z=" + std::to_string(z) + " accepted");
        break;
      }
    } while (next_assignment(pick, space.radix()));
  };
  for (int cell = 0; cell < static_cast<int>(hm.info().initial_cells[static_cast<std::size_t>(n)].size()); ++cell) {
    History h{n, cell, {}};
    walk(0, engine.initial(n, cell), h);
  }
  return out;
}

}  // namespace nmx::test
