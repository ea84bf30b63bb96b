#include "nmx/nested.hpp"

#include <algorithm>
#include <sstream>

namespace nmx {

int TupleTable::intern(const std::vector<int>& key) {
  auto [it, inserted] = index_.try_emplace(key, static_cast<int>(items_.size()));
  if (inserted) items_.push_back(key);
  return it->second;
}

std::optional<int> TupleTable::find(const std::vector<int>& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<int> hat_key(const HatState& h) {
  std::vector<int> k;
  k.reserve(h.inputs.size() + 1);
  k.push_back(h.x);
  k.insert(k.end(), h.inputs.begin(), h.inputs.end());
  return k;
}

int encode_joint_noise(const SystemModel& m, int t, std::span<const int> v) {
  const auto& sp = m.noises[static_cast<std::size_t>(t)];
  int jv = 0;
  for (std::size_t a = sp.size(); a-- > 0;) jv = jv * sp[a].size() + v[a];
  return jv;
}

}  // namespace

std::optional<int> HatModel::find_hat(int t, const HatState& h) const {
  const auto& idx = hat_index_[static_cast<std::size_t>(t)];
  auto it = idx.find(hat_key(h));
  if (it == idx.end()) return std::nullopt;
  return it->second;
}

int HatModel::joint_action(int t, int hat_id, const PartialActionProfile& u) const {
  const HatState& h = hat(t, hat_id);
  const auto& sp = model_.actions[static_cast<std::size_t>(t)];
  int ju = 0;
  for (std::size_t a = sp.size(); a-- > 0;) {
    const auto& pa = u.at(a);
    const auto in = static_cast<std::size_t>(h.inputs[a]);
    if (in >= pa.size() || pa[in] < 0 || pa[in] >= sp[a].size()) return kMissing;
    ju = ju * sp[a].size() + pa[in];
  }
  return ju;
}

Cost HatModel::terminal_cost(int hat_id) const {
  return model_.terminal_cost[static_cast<std::size_t>(hat(horizon(), hat_id).x)];
}

int HatModel::initial_cell(int n, int hat_id) const { return cell_of(info_, n, hat(0, hat_id).x); }

std::vector<int> HatModel::initial_hats(int n, int cell) const {
  std::vector<int> out;
  for (int h = 0; h < hat_count(0); ++h)
    if (initial_cell(n, h) == cell) out.push_back(h);
  return out;
}

int HatModel::initial_hat(int x0, const std::vector<int>& v0) const {
  HatState h;
  h.x = x0;
  for (int a = 0; a < num_agents(); ++a) {
    auto in = find_input(0, a, {model_.observe(0, a, x0, v0[static_cast<std::size_t>(a)])});
    if (!in) throw Error("initial observation not in the hat model");
    h.inputs.push_back(*in);
  }
  auto id = find_hat(0, h);
  if (!id) throw Error("initial state is not feasible");
  return *id;
}

std::string HatModel::describe_hat(int t, int id) const {
  const HatState& h = hat(t, id);
  std::ostringstream os;
  os << "x=" << model_.states[static_cast<std::size_t>(t)].name(h.x);
  for (int a = 0; a < num_agents(); ++a) {
    AgentRef r = model_.agent(a);
    const auto& in = input(t, a, h.inputs[static_cast<std::size_t>(a)]);
    os << " y" << r.n + 1 << '.' << r.k + 1 << '=' << model_.observations[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)].name(in[0]);
    if (in.size() > 1) {
      os << " l" << r.n + 1 << '.' << r.k + 1 << "=[";
      for (std::size_t i = 1; i < in.size(); ++i) os << (i > 1 ? "," : "") << in[i];
      os << ']';
    }
  }
  return os.str();
}

std::string HatModel::debug_dump() const {
  std::ostringstream os;
  os << "hat-model horizon " << horizon() << '\n';
  for (int t = 0; t <= horizon(); ++t) {
    os << "t " << t << " hats " << hat_count(t) << '\n';
    for (int h = 0; h < hat_count(t); ++h) os << "  hat " << h << ": " << describe_hat(t, h) << '\n';
    if (t >= 1)
      for (int n = 0; n < num_subsystems(); ++n) {
        os << "  Z^" << n + 1 << ":";
        for (const VarId& v : new_info_vars(t, n)) os << ' ' << format_var(model_, v);
        os << " (" << z_count(t, n) << " realizations)\n";
      }
  }
  return os.str();
}

HatModel build_hat_model(const SystemModel& model, const InfoStructure& info, std::size_t max_hats) {
  require_valid(model, info);
  if (model.has_stage_costs())
    throw ValidationError("hat model needs a terminal-cost problem; transform additive costs first");
  HatModel hm;
  hm.model_ = model;
  hm.info_ = info;
  const int T = model.horizon;
  const int A = model.num_agents();
  const int N = model.num_subsystems();
  const auto uT = static_cast<std::size_t>(T);
  const auto uA = static_cast<std::size_t>(A);
  hm.hats_.assign(uT + 1, {});
  hm.hat_index_.assign(uT + 1, {});
  hm.inputs_.assign(uT + 1, std::vector<TupleTable>(uA));
  hm.z_.assign(uT + 1, std::vector<TupleTable>(static_cast<std::size_t>(N)));
  hm.private_vars_.assign(uT + 1, std::vector<VarSet>(uA));
  hm.new_vars_.assign(uT + 1, std::vector<VarSet>(static_cast<std::size_t>(N)));
  for (int t = 0; t <= T; ++t) {
    for (int a = 0; a < A; ++a) {
      AgentRef r = model.agent(a);
      hm.private_vars_[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] = private_information(info, r.n, r.k, t);
    }
    if (t >= 1)
      for (int n = 0; n < N; ++n) hm.new_vars_[static_cast<std::size_t>(t)][static_cast<std::size_t>(n)] = new_information(info, n, t);
  }
  auto add_hat = [&](int t, HatState h) {
    const auto ut = static_cast<std::size_t>(t);
    auto [it, inserted] = hm.hat_index_[ut].try_emplace(hat_key(h), static_cast<int>(hm.hats_[ut].size()));
    if (inserted) {
      hm.hats_[ut].push_back(std::move(h));
      if (hm.hats_[ut].size() > max_hats) throw ResourceError("hat-state space exceeds cap", hm.hats_[ut].size());
    }
    return it->second;
  };

  for (int a = 0; a < A; ++a)
    if (!hm.private_vars_[0][static_cast<std::size_t>(a)].empty()) throw ConstructionError("memory at t = 0 must be empty");
  for (int x0 : model.initial_states)
    for (int jv = 0; jv < model.joint_noise_count(0); ++jv) {
      auto v = model.decode_joint_noise(0, jv);
      HatState h;
      h.x = x0;
      for (int a = 0; a < A; ++a)
        h.inputs.push_back(hm.inputs_[0][static_cast<std::size_t>(a)].intern({model.observe(0, a, x0, v[static_cast<std::size_t>(a)])}));
      add_hat(0, std::move(h));
    }

  hm.next_.assign(uT, {});
  hm.obs_.assign(uT, std::vector<std::vector<int>>(static_cast<std::size_t>(N)));
  for (int t = 0; t < T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    // Where each private identifier at t lives inside the hat state: (agent, position in input tuple).
    std::map<VarId, std::pair<int, int>> where;
    for (int a = 0; a < A; ++a) {
      const VarSet& pv = hm.private_vars_[ut][static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < pv.size(); ++i) where.try_emplace(pv[i], a, static_cast<int>(i) + 1);
    }
    const int H = hm.hat_count(t);
    const int JU = model.joint_action_count(t);
    const int W = model.disturbances[ut].size();
    const int JV = model.joint_noise_count(t + 1);
    hm.next_[ut].assign(static_cast<std::size_t>(H) * static_cast<std::size_t>(JU * W * JV), kMissing);
    for (int n = 0; n < N; ++n) hm.obs_[ut][static_cast<std::size_t>(n)].assign(static_cast<std::size_t>(H * JU), kMissing);
    for (int h = 0; h < H; ++h) {
      const HatState cur = hm.hats_[ut][static_cast<std::size_t>(h)];
      for (int ju = 0; ju < JU; ++ju) {
        const auto u = model.decode_joint_action(t, ju);
        auto value = [&](const VarId& v) -> int {
          if (v.s == t) {
            if (v.kind == VarKind::U) return u[static_cast<std::size_t>(v.agent)];
            return hm.input(t, v.agent, cur.inputs[static_cast<std::size_t>(v.agent)])[0];
          }
          auto it = where.find(v);
          if (v.s > t || it == where.end())
            throw ConstructionError("identifier " + format_var(model, v) + " needed at t=" + std::to_string(t + 1) +
                                    " is not carried by the hat state at t=" + std::to_string(t));
          return hm.input(t, it->second.first, cur.inputs[static_cast<std::size_t>(it->second.first)])[static_cast<std::size_t>(it->second.second)];
        };
        for (int n = 0; n < N; ++n) {
          std::vector<int> zv;
          for (const VarId& v : hm.new_vars_[ut + 1][static_cast<std::size_t>(n)]) zv.push_back(value(v));
          hm.obs_[ut][static_cast<std::size_t>(n)][static_cast<std::size_t>(h * JU + ju)] =
              hm.z_[ut + 1][static_cast<std::size_t>(n)].intern(zv);
        }
        std::vector<std::vector<int>> priv(uA);
        for (int a = 0; a < A; ++a) {
          priv[static_cast<std::size_t>(a)].push_back(0);  // slot for y_{t+1}
          for (const VarId& v : hm.private_vars_[ut + 1][static_cast<std::size_t>(a)]) priv[static_cast<std::size_t>(a)].push_back(value(v));
        }
        for (int w = 0; w < W; ++w) {
          const int xn = model.next_state(t, cur.x, ju, w);
          for (int jv = 0; jv < JV; ++jv) {
            const auto v = model.decode_joint_noise(t + 1, jv);
            HatState nh;
            nh.x = xn;
            for (int a = 0; a < A; ++a) {
              auto& tuple = priv[static_cast<std::size_t>(a)];
              tuple[0] = model.observe(t + 1, a, xn, v[static_cast<std::size_t>(a)]);
              nh.inputs.push_back(hm.inputs_[ut + 1][static_cast<std::size_t>(a)].intern(tuple));
            }
            hm.next_[ut][static_cast<std::size_t>(((h * JU + ju) * W + w) * JV + jv)] = add_hat(t + 1, std::move(nh));
          }
        }
      }
    }
  }
  return hm;
}

int hat_step(const HatModel& hm, int t, int hat, const PartialActionProfile& u, int w, int jv) {
  if (t < 0 || t >= hm.horizon() || hat < 0 || hat >= hm.hat_count(t)) throw std::out_of_range("hat_step: bad time or hat");
  if (w < 0 || w >= hm.disturbance_count(t) || jv < 0 || jv >= hm.joint_noise_count(t + 1))
    throw std::out_of_range("hat_step: primitive outside its space");
  const int ju = hm.joint_action(t, hat, u);
  if (ju < 0) throw std::out_of_range("hat_step: partial action undefined at the hat state's input");
  return hm.next(t, hat, ju, w, jv);
}

int hat_observe(const HatModel& hm, int t, int n, int hat, const PartialActionProfile& u) {
  if (t < 0 || t >= hm.horizon() || hat < 0 || hat >= hm.hat_count(t) || n < 0 || n >= hm.num_subsystems())
    throw std::out_of_range("hat_observe: bad index");
  const int ju = hm.joint_action(t, hat, u);
  if (ju < 0) throw std::out_of_range("hat_observe: partial action undefined at the hat state's input");
  return hm.observe(t, n, hat, ju);
}

// ---------------------------------------------------------------------------
// Lifting and lowering

PartialStrategy lift_strategy(const SystemModel& model, const InfoStructure& info, const AgentStrategy& g) {
  PartialStrategy out;
  out.laws.resize(g.laws.size());
  for (std::size_t t = 0; t < g.laws.size(); ++t) {
    out.laws[t].resize(g.laws[t].size());
    for (std::size_t a = 0; a < g.laws[t].size(); ++a) {
      const AgentRef r = model.agent(static_cast<int>(a));
      const VarSet common = common_information(info, r.n, static_cast<int>(t));
      const VarSet& mem = info.memory[t][a];
      for (const auto& [key, u] : g.laws[t][a]) {
        std::vector<int> c{key[0]}, l{key[1]};
        for (std::size_t i = 0; i < mem.size(); ++i) {
          if (std::binary_search(common.begin(), common.end(), mem[i]))
            c.push_back(key[i + 2]);
          else
            l.push_back(key[i + 2]);
        }
        out.laws[t][a][c][l] = u;
      }
    }
  }
  return out;
}

AgentStrategy lower_strategy(const SystemModel& model, const InfoStructure& info, const PartialStrategy& g) {
  AgentStrategy out;
  out.laws.resize(g.laws.size());
  for (std::size_t t = 0; t < g.laws.size(); ++t) {
    out.laws[t].resize(g.laws[t].size());
    for (std::size_t a = 0; a < g.laws[t].size(); ++a) {
      const AgentRef r = model.agent(static_cast<int>(a));
      const VarSet common = common_information(info, r.n, static_cast<int>(t));
      const VarSet& mem = info.memory[t][a];
      for (const auto& [c, table] : g.laws[t][a])
        for (const auto& [l, u] : table) {
          std::vector<int> key{c[0], l[0]};
          std::size_t ci = 1, li = 1;
          for (const VarId& v : mem)
            key.push_back(std::binary_search(common.begin(), common.end(), v) ? c[ci++] : l[li++]);
          out.laws[t][a][key] = u;
        }
    }
  }
  return out;
}

HatRollout hat_rollout(const HatModel& hm, const PartialStrategy& g, const Primitives& prim) {
  const SystemModel& m = hm.model();
  const InfoStructure& info = hm.info();
  const int T = hm.horizon();
  const int A = hm.num_agents();
  const int N = hm.num_subsystems();
  HatRollout out;
  int h = hm.initial_hat(prim.x0, prim.v[0]);
  out.hats.push_back(h);
  std::vector<std::map<VarId, int>> known(static_cast<std::size_t>(N));
  std::vector<int> cells;
  for (int n = 0; n < N; ++n) cells.push_back(hm.initial_cell(n, h));
  out.z.push_back(cells);
  for (int t = 0; t < T; ++t) {
    std::vector<int> u(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) {
      const AgentRef r = m.agent(a);
      std::vector<int> c{cells[static_cast<std::size_t>(r.n)]};
      for (const VarId& v : common_information(info, r.n, t)) c.push_back(known[static_cast<std::size_t>(r.n)].at(v));
      const auto& l = hm.input(t, a, hm.hat(t, h).inputs[static_cast<std::size_t>(a)]);
      const auto& per_agent = g.laws.at(static_cast<std::size_t>(t)).at(static_cast<std::size_t>(a));
      auto ci = per_agent.find(c);
      if (ci == per_agent.end()) throw StrategyError(r.n, r.k, t);
      auto li = ci->second.find(l);
      if (li == ci->second.end()) throw StrategyError(r.n, r.k, t);
      u[static_cast<std::size_t>(a)] = li->second;
    }
    const int ju = m.encode_joint_action(t, u);
    std::vector<int> zt;
    for (int n = 0; n < N; ++n) {
      const int z = hm.observe(t, n, h, ju);
      zt.push_back(z);
      const auto& vals = hm.z_values(t + 1, n, z);
      const auto& vars = hm.new_info_vars(t + 1, n);
      for (std::size_t i = 0; i < vars.size(); ++i) known[static_cast<std::size_t>(n)][vars[i]] = vals[i];
    }
    out.z.push_back(std::move(zt));
    out.actions.push_back(u);
    h = hm.next(t, h, ju, prim.w[static_cast<std::size_t>(t)], encode_joint_noise(m, t + 1, prim.v[static_cast<std::size_t>(t + 1)]));
    out.hats.push_back(h);
  }
  out.cost = hm.terminal_cost(h);
  return out;
}

Cost evaluate_partial_strategy(const HatModel& hm, const PartialStrategy& g, int cell) {
  const auto initial = initial_states_in_cell(hm.info(), cell);
  Cost worst(0);
  bool any = false;
  for_each_primitive(hm.model(), initial, [&](const Primitives& p) {
    Cost c = hat_rollout(hm, g, p).cost;
    if (!any || c > worst) worst = c;
    any = true;
  });
  return worst;
}

}  // namespace nmx
