#include "nmx/dp.hpp"

#include <sstream>

namespace nmx {

Solver::Solver(const HatModel& hm, SolveOptions opts)
    : hm_(hm), opts_(opts), store_(hm.horizon(), hm.num_subsystems()), engine_(hm, store_) {
  table_.by_time.resize(static_cast<std::size_t>(hm.horizon() + 1));
}

void Solver::check_caps() const {
  std::size_t total = 0;
  for (int t = 0; t <= hm_.horizon(); ++t)
    for (int n = 0; n < hm_.num_subsystems(); ++n) total += static_cast<std::size_t>(store_.count(t, n));
  if (total > opts_.max_infostates) throw ResourceError("information states exceed cap", total);
}

Cost Solver::terminal_value(int P) const {
  const int T = hm_.horizon();
  const int n = top();
  const int cnt = store_.member_count(T, n, P);
  if (cnt == 0) throw InternalError("empty information state");
  Cost best = hm_.terminal_cost(store_.member(T, n, P, 0)[0]);
  for (int i = 1; i < cnt; ++i) best = std::max(best, hm_.terminal_cost(store_.member(T, n, P, i)[0]));
  return best;
}

std::set<int> Solver::feasible_observations(int t, int P, const ActionLookup& act) {
  std::set<int> out;
  for (const auto& [z, Q] : engine_.successors(t, top(), P, act)) out.insert(z);
  return out;
}

ValueEntry Solver::bellman_backup(int t, int P) {
  const int n = top();
  CompleteActionSpace space(hm_, store_, t, n, P);
  const std::size_t count = space.size(opts_.max_candidates);
  if (count > opts_.max_candidates) throw ResourceError("complete actions per backup exceed cap", count);
  ++stats_.backups;
  ValueEntry best;
  bool have = false;
  std::vector<int> a(space.slots().size(), 0);
  for (;;) {
    SlotLookup look(space, a);
    const auto succ = engine_.successors(t, n, P, look);
    ++stats_.candidates;
    check_caps();
    Cost running{0};
    bool first = true, pruned = false;
    for (const auto& [z, Q] : succ) {
      const Cost v = value(t + 1, Q).value;
      if (first || v > running) running = v;
      first = false;
      if (have && running >= best.value) {
        pruned = true;
        break;
      }
    }
    if (!pruned && (!have || running < best.value)) {
      best.value = running;
      best.argmin = a;
      have = true;
      if (best.value == Cost(0)) break;  // costs are nonnegative
    }
    std::size_t i = a.size();
    while (i > 0 && ++a[i - 1] == space.radix()[i - 1]) a[--i] = 0;
    if (i == 0) break;
  }
  if (!have) throw InternalError("no complete action available");
  return best;
}

const ValueEntry& Solver::value(int t, int P) {
  auto& row = table_.by_time[static_cast<std::size_t>(t)];
  if (auto it = row.find(P); it != row.end()) return it->second;
  ValueEntry e;
  if (t == hm_.horizon())
    e.value = terminal_value(P);
  else
    e = bellman_backup(t, P);
  return row.emplace(P, std::move(e)).first->second;
}

std::vector<Cost> Solver::solve() {
  initial_ = engine_.initial_infostates(top());
  std::vector<Cost> out;
  for (int P : initial_) out.push_back(value(0, P).value);
  return out;
}

namespace {

std::string slot_text(const HatModel& hm, int t, const CompleteActionSpace::Slot& s, int u) {
  const SystemModel& m = hm.model();
  const AgentRef r = m.agent(s.agent);
  std::ostringstream os;
  os << "m=" << s.m + 1 << " key=[";
  for (std::size_t i = 0; i < s.key.size(); ++i) os << (i ? "," : "") << s.key[i];
  os << "] agent=(" << r.n + 1 << ',' << r.k + 1 << ") input=[";
  const auto& in = hm.input(t, s.agent, s.input);
  for (std::size_t i = 0; i < in.size(); ++i) os << (i ? "," : "") << in[i];
  os << "] -> " << m.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(s.agent)].name(u);
  return os.str();
}

}  // namespace

std::string Solver::export_values() const {
  std::ostringstream os;
  os << "nmx-values v1\n";
  for (int t = 0; t <= hm_.horizon(); ++t)
    for (const auto& [P, e] : table_.by_time[static_cast<std::size_t>(t)])
      os << "t=" << t << " P=" << P << " value=" << format_cost(e.value) << " state=" << engine_.to_json(t, top(), P) << '\n';
  return os.str();
}

std::string Solver::export_strategy() const {
  std::ostringstream os;
  os << "nmx-strategy v1\n";
  for (int t = 0; t < hm_.horizon(); ++t)
    for (const auto& [P, e] : table_.by_time[static_cast<std::size_t>(t)]) {
      os << "t=" << t << " P=" << P << " state=" << engine_.to_json(t, top(), P) << '\n';
      CompleteActionSpace space(hm_, store_, t, top(), P);
      for (std::size_t i = 0; i < space.slots().size(); ++i)
        os << "  " << slot_text(hm_, t, space.slots()[i], e.argmin[i]) << '\n';
    }
  return os.str();
}

// ---------------------------------------------------------------------------

StructuredRollout structured_rollout(Solver& solver, const Primitives& prim) {
  const HatModel& hm = solver.hat_model();
  const SystemModel& model = hm.model();
  const int T = hm.horizon();
  const int N = hm.num_subsystems();
  const int A = hm.num_agents();
  const int top = N - 1;
  InfoStateEngine& eng = solver.engine();
  const InfoStateStore& store = solver.store();

  StructuredRollout out;
  Trajectory& traj = out.trajectory;
  int h = hm.initial_hat(prim.x0, prim.v[0]);
  std::vector<int> P(static_cast<std::size_t>(N));
  for (int m = 0; m < N; ++m) {
    P[static_cast<std::size_t>(m)] = eng.initial(m, hm.initial_cell(m, h));
    traj.cells.push_back(hm.initial_cell(m, h));
  }
  auto check_truth = [&](int t) {
    std::vector<int> tuple{h};
    for (int m = 0; m < N; ++m) {
      if (!store.contains(t, m, P[static_cast<std::size_t>(m)], tuple))
        throw InternalError("true state left the level-" + std::to_string(m + 1) + " information state at t=" + std::to_string(t));
      tuple.push_back(P[static_cast<std::size_t>(m)]);
    }
  };
  auto record = [&](int t) {
    out.hats.push_back(h);
    out.infostates.push_back(P);
    traj.states.push_back(hm.hat(t, h).x);
    std::vector<int> y;
    for (int a = 0; a < A; ++a) y.push_back(hm.input(t, a, hm.hat(t, h).inputs[static_cast<std::size_t>(a)])[0]);
    traj.observations.push_back(std::move(y));
  };
  for (int t = 0;; ++t) {
    check_truth(t);
    record(t);
    if (t == T) break;
    const ValueEntry& e = solver.value(t, P[static_cast<std::size_t>(top)]);
    CompleteActionSpace space(hm, store, t, top, P[static_cast<std::size_t>(top)]);
    SlotLookup look(space, e.argmin);
    std::vector<int> u(static_cast<std::size_t>(A));
    const HatState& hs = hm.hat(t, h);
    for (int a = 0; a < A; ++a) {
      const int m = model.agent(a).n;
      std::span<const int> key = m < top ? std::span<const int>(P).subspan(static_cast<std::size_t>(m), static_cast<std::size_t>(top - m))
                                         : std::span<const int>{};
      const int ua = look.act(m, key, a, hs.inputs[static_cast<std::size_t>(a)]);
      if (ua < 0) throw InternalError("solved prescription undefined on the realized path");
      u[static_cast<std::size_t>(a)] = ua;
    }
    const int ju = model.encode_joint_action(t, u);
    std::vector<int> nextP(static_cast<std::size_t>(N));
    for (int m = 0; m < N; ++m) {
      const int z = hm.observe(t, m, h, ju);
      std::map<int, int> succ;
      if (m < top) {
        std::vector<int> suffix(P.begin() + m, P.end() - 1);
        succ = eng.nested_successors(t, m, suffix, top, look);
      } else {
        succ = eng.successors(t, top, P[static_cast<std::size_t>(top)], look);
      }
      auto it = succ.find(z);
      if (it == succ.end()) throw InternalError("realized observation missing from successors");
      nextP[static_cast<std::size_t>(m)] = it->second;
    }
    out.actions.push_back(u);
    traj.actions.push_back(u);
    int jv = 0;
    const auto& noise = model.noises[static_cast<std::size_t>(t + 1)];
    for (std::size_t a = noise.size(); a-- > 0;) jv = jv * noise[a].size() + prim.v[static_cast<std::size_t>(t + 1)][a];
    h = hm.next(t, h, ju, prim.w[static_cast<std::size_t>(t)], jv);
    P = std::move(nextP);
  }
  out.cost = hm.terminal_cost(h);
  traj.cost = out.cost;
  return out;
}

AgentStrategy extract_agent_strategies(Solver& solver) {
  const HatModel& hm = solver.hat_model();
  const SystemModel& model = hm.model();
  const InfoStructure& info = hm.info();
  AgentStrategy g = AgentStrategy::empty_for(model);
  const auto& cells = info.initial_cells.back();
  for (const auto& cell : cells)
    for_each_primitive(model, cell, [&](const Primitives& p) {
      const StructuredRollout r = structured_rollout(solver, p);
      Trajectory partial;
      partial.cells = r.trajectory.cells;
      for (int t = 0; t < model.horizon; ++t) {
        partial.observations.push_back(r.trajectory.observations[static_cast<std::size_t>(t)]);
        for (int a = 0; a < model.num_agents(); ++a) {
          const int u = r.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
          auto [it, inserted] = g.laws[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].try_emplace(
              argument_key(info, model, partial, a, t), u);
          if (!inserted && it->second != u)
            throw InternalError("structured strategy is not a function of the agent's information");
        }
        partial.actions.push_back(r.actions[static_cast<std::size_t>(t)]);
      }
    });
  return g;
}

Cost evaluate_strategy(const SystemModel& model, const InfoStructure& info, const AgentStrategy& g, int cell) {
  Cost worst{0};
  bool any = false;
  for_each_primitive(model, initial_states_in_cell(info, cell), [&](const Primitives& p) {
    const Cost c = simulate(model, info, g, p).cost;
    if (!any || c > worst) worst = c;
    any = true;
  });
  return worst;
}

}  // namespace nmx
