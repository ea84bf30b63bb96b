#include "nmx/oracle.hpp"

#include <map>
#include <set>

namespace nmx {

namespace {

// A full history record: [x_t, cells per subsystem, then per s <= t: y_s for every agent, u_s for
// every agent (s < t)]. Everything a strategy or the future can depend on.
using Record = std::vector<int>;
// Histories sharing one realization of the top subsystem's common information, with the worst
// accumulated cost reaching each record.
using Group = std::map<Record, Cost>;

class Oracle {
 public:
  Oracle(const SystemModel& model, const InfoStructure& info, std::size_t cap)
      : m_(model), info_(info), T_(model.horizon), A_(model.num_agents()), N_(model.num_subsystems()), cap_(cap) {}

  Group root(std::span<const int> initial) const {
    Group g;
    for (int x0 : initial)
      for (int jv = 0; jv < m_.joint_noise_count(0); ++jv) {
        const auto v = m_.decode_joint_noise(0, jv);
        Record r{x0};
        for (int n = 0; n < N_; ++n) r.push_back(cell_of(info_, n, x0));
        for (int a = 0; a < A_; ++a) r.push_back(m_.observe(0, a, x0, v[static_cast<std::size_t>(a)]));
        g.emplace(std::move(r), Cost(0));
      }
    return g;
  }

  Cost value(int t, const Group& g) { return node(t, g).value; }

  void reconstruct(int t, const Group& g, AgentStrategy& out) {
    const Node& nd = node(t, g);
    if (t == T_) return;
    for (std::size_t i = 0; i < nd.slots.size(); ++i)
      out.laws[static_cast<std::size_t>(t)][static_cast<std::size_t>(nd.slots[i].first)][nd.slots[i].second] = nd.assign[i];
    const Slots s = slots(t, g);
    for (const auto& [z, child] : expand(t, g, s, nd.assign)) reconstruct(t + 1, child, out);
  }

  std::size_t searched() const { return searched_; }

 private:
  struct Node {
    Cost value{0};
    std::vector<std::pair<int, std::vector<int>>> slots;  // (agent, argument key)
    std::vector<int> assign;
  };
  struct Slots {
    std::vector<std::pair<int, std::vector<int>>> list;
    std::vector<int> radix;
    std::vector<std::vector<int>> of_history;  // [history][agent] -> slot
  };

  int y_at(int s, int a) const { return 1 + N_ + s * 2 * A_ + a; }
  int u_at(int s, int a) const { return 1 + N_ + s * 2 * A_ + A_ + a; }

  int var_value(const Record& r, const VarId& v) const {
    return r[static_cast<std::size_t>(v.kind == VarKind::Y ? y_at(v.s, v.agent) : u_at(v.s, v.agent))];
  }

  std::vector<int> key(const Record& r, int t, int a) const {
    std::vector<int> k{r[static_cast<std::size_t>(1 + m_.agent(a).n)], r[static_cast<std::size_t>(y_at(t, a))]};
    for (const VarId& v : info_.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]) k.push_back(var_value(r, v));
    return k;
  }

  Slots slots(int t, const Group& g) const {
    Slots s;
    std::map<std::pair<int, std::vector<int>>, int> index;
    for (const auto& [r, c] : g) {
      std::vector<int> per(static_cast<std::size_t>(A_));
      for (int a = 0; a < A_; ++a) {
        auto k = std::make_pair(a, key(r, t, a));
        auto [it, inserted] = index.try_emplace(k, static_cast<int>(s.list.size()));
        if (inserted) {
          s.list.push_back(k);
          s.radix.push_back(m_.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size());
        }
        per[static_cast<std::size_t>(a)] = it->second;
      }
      s.of_history.push_back(std::move(per));
    }
    return s;
  }

  int joint_action(int t, const Slots& s, std::size_t h, const std::vector<int>& assign) const {
    std::vector<int> u(static_cast<std::size_t>(A_));
    for (int a = 0; a < A_; ++a) u[static_cast<std::size_t>(a)] = assign[static_cast<std::size_t>(s.of_history[h][static_cast<std::size_t>(a)])];
    return m_.encode_joint_action(t, u);
  }

  // Successor groups keyed by the top subsystem's new information.
  std::map<std::vector<int>, Group> expand(int t, const Group& g, const Slots& s, const std::vector<int>& assign) const {
    std::map<std::vector<int>, Group> out;
    const VarSet z_vars = new_information(info_, N_ - 1, t + 1);
    std::size_t h = 0;
    for (const auto& [r, c] : g) {
      const int ju = joint_action(t, s, h, assign);
      const auto u = m_.decode_joint_action(t, ju);
      const Cost c2 = c + m_.stage(t, r[0], ju);
      for (int w = 0; w < m_.disturbances[static_cast<std::size_t>(t)].size(); ++w) {
        const int xn = m_.next_state(t, r[0], ju, w);
        for (int jv = 0; jv < m_.joint_noise_count(t + 1); ++jv) {
          const auto v = m_.decode_joint_noise(t + 1, jv);
          Record nr = r;
          nr[0] = xn;
          nr.insert(nr.end(), u.begin(), u.end());
          for (int a = 0; a < A_; ++a) nr.push_back(m_.observe(t + 1, a, xn, v[static_cast<std::size_t>(a)]));
          std::vector<int> z;
          for (const VarId& var : z_vars) z.push_back(var_value(nr, var));
          auto [it, inserted] = out[z].try_emplace(std::move(nr), c2);
          if (!inserted && it->second < c2) it->second = c2;
        }
      }
      ++h;
    }
    return out;
  }

  void check_cap(const Slots& s) const {
    std::size_t total = 1;
    for (int r : s.radix) {
      if (total > (cap_ + 1) / static_cast<std::size_t>(r)) throw ResourceError("strategy candidates in one branch exceed cap", cap_ + 1);
      total *= static_cast<std::size_t>(r);
    }
    if (total > cap_) throw ResourceError("strategy candidates in one branch exceed cap", total);
  }

  const Node& node(int t, const Group& g) {
    auto mk = std::make_pair(t, g);
    if (auto it = memo_.find(mk); it != memo_.end()) return it->second;
    Node nd;
    if (t == T_) {
      bool first = true;
      for (const auto& [r, c] : g) {
        const Cost v = c + m_.terminal_cost[static_cast<std::size_t>(r[0])];
        if (first || v > nd.value) nd.value = v;
        first = false;
      }
    } else {
      const Slots s = slots(t, g);
      check_cap(s);
      nd.slots = s.list;
      if (t == T_ - 1)
        last_step(t, g, s, nd);
      else
        search(t, g, s, nd);
    }
    return memo_.emplace(std::move(mk), std::move(nd)).first->second;
  }

  void search(int t, const Group& g, const Slots& s, Node& nd) {
    bool have = false;
    std::vector<int> a(s.list.size(), 0);
    for (;;) {
      ++searched_;
      Cost running{0};
      bool first = true, pruned = false;
      for (const auto& [z, child] : expand(t, g, s, a)) {
        const Cost v = value(t + 1, child);
        if (first || v > running) running = v;
        first = false;
        if (have && running >= nd.value) {
          pruned = true;
          break;
        }
      }
      if (!pruned && (!have || running < nd.value)) {
        nd.value = running;
        nd.assign = a;
        have = true;
        if (nd.value == Cost(0)) return;
      }
      std::size_t i = a.size();
      while (i > 0 && ++a[i - 1] == s.radix[i - 1]) a[--i] = 0;
      if (i == 0) return;
    }
  }

  // Final decision: each history's cost depends only on its own agents' choices, so assign slots
  // depth-first and score a history as soon as its last slot is fixed.
  void last_step(int t, const Group& g, const Slots& s, Node& nd) {
    const std::size_t S = s.list.size();
    std::vector<std::vector<std::size_t>> ready(S);
    std::vector<const std::pair<const Record, Cost>*> hist;
    for (const auto& e : g) hist.push_back(&e);
    for (std::size_t h = 0; h < hist.size(); ++h) {
      int last = 0;
      for (int sl : s.of_history[h]) last = std::max(last, sl);
      ready[static_cast<std::size_t>(last)].push_back(h);
    }
    std::vector<int> a(S, 0);
    bool have = false;
    auto contrib = [&](std::size_t h) {
      const auto& [r, c] = *hist[h];
      const int ju = joint_action(t, s, h, a);
      Cost worst{0};
      for (int w = 0; w < m_.disturbances[static_cast<std::size_t>(t)].size(); ++w) {
        const Cost v = m_.terminal_cost[static_cast<std::size_t>(m_.next_state(t, r[0], ju, w))];
        if (w == 0 || v > worst) worst = v;
      }
      return c + m_.stage(t, r[0], ju) + worst;
    };
    std::function<bool(std::size_t, Cost)> dfs = [&](std::size_t d, Cost running) -> bool {
      if (d == S) {
        ++searched_;
        if (!have || running < nd.value) {
          nd.value = running;
          nd.assign = a;
          have = true;
        }
        return nd.value == Cost(0);
      }
      for (int val = 0; val < s.radix[d]; ++val) {
        a[d] = val;
        Cost r = running;
        for (std::size_t h : ready[d]) r = std::max(r, contrib(h));
        if (have && r >= nd.value) continue;
        if (dfs(d + 1, r)) return true;
      }
      return false;
    };
    dfs(0, Cost(0));
  }

  const SystemModel& m_;
  const InfoStructure& info_;
  int T_, A_, N_;
  std::size_t cap_;
  std::map<std::pair<int, Group>, Node> memo_;
  std::size_t searched_ = 0;
};

}  // namespace

BigCount count_strategies(const SystemModel& model, const InfoStructure& info, int cell) {
  const int T = model.horizon;
  const int A = model.num_agents();
  const int N = model.num_subsystems();
  auto y_at = [&](int s, int a) { return static_cast<std::size_t>(1 + N + s * 2 * A + a); };
  auto u_at = [&](int s, int a) { return static_cast<std::size_t>(1 + N + s * 2 * A + A + a); };
  std::vector<int> initial = cell >= 0 ? initial_states_in_cell(info, cell) : model.initial_states;
  std::set<Record> cur;
  for (int x0 : initial)
    for (int jv = 0; jv < model.joint_noise_count(0); ++jv) {
      const auto v = model.decode_joint_noise(0, jv);
      Record r{x0};
      for (int n = 0; n < N; ++n) r.push_back(cell_of(info, n, x0));
      for (int a = 0; a < A; ++a) r.push_back(model.observe(0, a, x0, v[static_cast<std::size_t>(a)]));
      cur.insert(std::move(r));
    }
  BigCount total = 1;
  for (int t = 0; t < T; ++t) {
    for (int a = 0; a < A; ++a) {
      std::set<std::vector<int>> keys;
      for (const Record& r : cur) {
        std::vector<int> k{r[static_cast<std::size_t>(1 + model.agent(a).n)], r[y_at(t, a)]};
        for (const VarId& v : info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)])
          k.push_back(r[v.kind == VarKind::Y ? y_at(v.s, v.agent) : u_at(v.s, v.agent)]);
        keys.insert(std::move(k));
      }
      total *= boost::multiprecision::pow(BigCount(model.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].size()),
                                          static_cast<unsigned>(keys.size()));
    }
    std::set<Record> next;
    for (const Record& r : cur)
      for (int ju = 0; ju < model.joint_action_count(t); ++ju) {
        const auto u = model.decode_joint_action(t, ju);
        for (int w = 0; w < model.disturbances[static_cast<std::size_t>(t)].size(); ++w) {
          const int xn = model.next_state(t, r[0], ju, w);
          for (int jv = 0; jv < model.joint_noise_count(t + 1); ++jv) {
            const auto v = model.decode_joint_noise(t + 1, jv);
            Record nr = r;
            nr[0] = xn;
            nr.insert(nr.end(), u.begin(), u.end());
            for (int a = 0; a < A; ++a) nr.push_back(model.observe(t + 1, a, xn, v[static_cast<std::size_t>(a)]));
            next.insert(std::move(nr));
          }
        }
      }
    cur = std::move(next);
  }
  return total;
}

OracleResult brute_force_minimax(const SystemModel& model, const InfoStructure& info, int cell, std::size_t cap) {
  Oracle o(model, info, cap);
  const Group g = o.root(initial_states_in_cell(info, cell));
  OracleResult res;
  res.value = o.value(0, g);
  res.profile = AgentStrategy::empty_for(model);
  o.reconstruct(0, g, res.profile);
  res.searched = o.searched();
  return res;
}

}  // namespace nmx
