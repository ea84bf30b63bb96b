#include "nmx/infostate.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace nmx {

InfoStateStore::InfoStateStore(int horizon, int levels)
    : horizon_(horizon), levels_(levels), tables_(static_cast<std::size_t>((horizon + 1) * levels)) {}

int InfoStateStore::intern(int t, int n, std::vector<int> flat) {
  const std::size_t w = static_cast<std::size_t>(n + 1);
  std::vector<std::vector<int>> members;
  members.reserve(flat.size() / w);
  for (std::size_t i = 0; i < flat.size(); i += w) members.emplace_back(flat.begin() + static_cast<long>(i), flat.begin() + static_cast<long>(i + w));
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  if (members.empty()) throw InternalError("empty information state");
  flat.clear();
  for (const auto& m : members) flat.insert(flat.end(), m.begin(), m.end());
  return tables_[static_cast<std::size_t>(t * levels_ + n)].intern(flat);
}

bool InfoStateStore::contains(int t, int n, int id, std::span<const int> tuple) const {
  const int cnt = member_count(t, n, id);
  int lo = 0, hi = cnt;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    auto m = member(t, n, id, mid);
    if (std::lexicographical_compare(m.begin(), m.end(), tuple.begin(), tuple.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo < cnt && std::ranges::equal(member(t, n, id, lo), tuple);
}

namespace {

std::vector<int> lookup_key(int m, int agent, int input, std::span<const int> key) {
  std::vector<int> k{m, agent, input};
  k.insert(k.end(), key.begin(), key.end());
  return k;
}

}  // namespace

int MapLookup::act(int m, std::span<const int> key, int agent, int input) const {
  auto it = a_.entries.find(lookup_key(m, agent, input, key));
  return it == a_.entries.end() ? kMissing : it->second;
}

// ---------------------------------------------------------------------------

CompleteActionSpace::CompleteActionSpace(const HatModel& hm, const InfoStateStore& store, int t, int n, int P,
                                         bool with_higher) {
  const SystemModel& model = hm.model();
  const int N = model.num_subsystems();
  const int cnt = store.member_count(t, n, P);
  auto add = [&](int m, std::span<const int> key, int agent, int input) {
    auto k = lookup_key(m, agent, input, key);
    if (index_.try_emplace(k, static_cast<int>(slots_.size())).second) {
      slots_.push_back(Slot{m, std::vector<int>(key.begin(), key.end()), agent, input});
      radix_.push_back(model.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(agent)].size());
    }
  };
  const int last = with_higher ? N - 1 : n;
  for (int m = 0; m <= last; ++m) {
    const auto agents = model.agents_of(m);
    for (int i = 0; i < cnt; ++i) {
      auto mem = store.member(t, n, P, i);
      const HatState& h = hm.hat(t, mem[0]);
      std::span<const int> key = m < n ? mem.subspan(static_cast<std::size_t>(1 + m)) : std::span<const int>{};
      for (int a : agents) add(m, key, a, h.inputs[static_cast<std::size_t>(a)]);
    }
  }
}

int CompleteActionSpace::slot_of(int m, std::span<const int> key, int agent, int input) const {
  auto it = index_.find(lookup_key(m, agent, input, key));
  return it == index_.end() ? -1 : it->second;
}

std::size_t CompleteActionSpace::size(std::size_t limit) const {
  std::size_t total = 1;
  for (int r : radix_) {
    if (r == 0) return 0;
    if (total > (limit + 1) / static_cast<std::size_t>(r)) return limit + 1;
    total *= static_cast<std::size_t>(r);
  }
  return std::min(total, limit + 1);
}

CompleteAction CompleteActionSpace::to_action(const std::vector<int>& assignment) const {
  CompleteAction out;
  for (std::size_t i = 0; i < slots_.size(); ++i)
    out.entries[lookup_key(slots_[i].m, slots_[i].agent, slots_[i].input, slots_[i].key)] = assignment.at(i);
  return out;
}

std::vector<int> CompleteActionSpace::from_action(const CompleteAction& a) const {
  std::vector<int> out;
  for (const Slot& s : slots_) {
    auto it = a.entries.find(lookup_key(s.m, s.agent, s.input, s.key));
    if (it == a.entries.end()) throw InternalError("complete action leaves a choice point unassigned");
    out.push_back(it->second);
  }
  return out;
}

int SlotLookup::act(int m, std::span<const int> key, int agent, int input) const {
  const int s = space_.slot_of(m, key, agent, input);
  return s < 0 ? kMissing : a_[static_cast<std::size_t>(s)];
}

// ---------------------------------------------------------------------------

int InfoStateEngine::initial(int n, int cell) {
  std::vector<int> flat;
  for (int h : hm_.initial_hats(n, cell)) {
    flat.push_back(h);
    for (int m = 0; m < n; ++m) flat.push_back(initial(m, hm_.initial_cell(m, h)));
  }
  if (flat.empty()) throw ValidationError("inconsistent initial common information");
  return store_.intern(0, n, std::move(flat));
}

std::vector<int> InfoStateEngine::initial_infostates(int n) {
  std::vector<int> out;
  const auto cells = hm_.info().initial_cells.at(static_cast<std::size_t>(n)).size();
  for (std::size_t c = 0; c < cells; ++c) out.push_back(initial(n, static_cast<int>(c)));
  return out;
}

const std::map<int, int>& InfoStateEngine::successors_impl(int t, int n, int P, std::span<const int> suffix, int top,
                                                           const ActionLookup& act, Cache& cache) {
  std::vector<int> ck{n, P};
  ck.insert(ck.end(), suffix.begin(), suffix.end());
  if (auto it = cache.find(ck); it != cache.end()) return it->second;

  const SystemModel& model = hm_.model();
  const int A = model.num_agents();
  const int W = hm_.disturbance_count(t);
  const int JV = hm_.joint_noise_count(t + 1);
  const int cnt = store_.member_count(t, n, P);
  std::map<int, std::vector<int>> buckets;
  std::vector<int> F(static_cast<std::size_t>(top));
  std::vector<int> u(static_cast<std::size_t>(A));
  std::vector<int> nested(static_cast<std::size_t>(n));
  for (int i = 0; i < cnt; ++i) {
    // Copy: interning below may reallocate the store.
    const std::vector<int> mem(store_.member(t, n, P, i).begin(), store_.member(t, n, P, i).end());
    const int h = mem[0];
    std::copy(mem.begin() + 1, mem.end(), F.begin());
    std::copy(suffix.begin(), suffix.end(), F.begin() + n);
    const HatState& hs = hm_.hat(t, h);
    for (int a = 0; a < A; ++a) {
      const int m = model.agent(a).n;
      std::span<const int> key = m < top ? std::span<const int>(F).subspan(static_cast<std::size_t>(m)) : std::span<const int>{};
      const int ua = act.act(m, key, a, hs.inputs[static_cast<std::size_t>(a)]);
      if (ua < 0) throw InternalError("complete action undefined at a member of the information state");
      u[static_cast<std::size_t>(a)] = ua;
    }
    const int ju = model.encode_joint_action(t, u);
    const int z = hm_.observe(t, n, h, ju);
    for (int m = 0; m < n; ++m) {
      const std::vector<int> sub(F.begin() + m, F.end());
      const auto& succ = successors_impl(t, m, sub[0], sub, top, act, cache);
      auto it = succ.find(hm_.observe(t, m, h, ju));
      if (it == succ.end()) throw InternalError("nested information state lost the true observation");
      nested[static_cast<std::size_t>(m)] = it->second;
    }
    auto& flat = buckets[z];
    for (int w = 0; w < W; ++w)
      for (int jv = 0; jv < JV; ++jv) {
        flat.push_back(hm_.next(t, h, ju, w, jv));
        flat.insert(flat.end(), nested.begin(), nested.end());
      }
  }
  std::map<int, int> out;
  for (auto& [z, flat] : buckets) out.emplace(z, store_.intern(t + 1, n, std::move(flat)));
  return cache.emplace(std::move(ck), std::move(out)).first->second;
}

std::map<int, int> InfoStateEngine::successors(int t, int n, int P, const ActionLookup& act) {
  Cache cache;
  return successors_impl(t, n, P, {}, n, act, cache);
}

std::map<int, int> InfoStateEngine::nested_successors(int t, int m, std::span<const int> suffix, int top,
                                                      const ActionLookup& act) {
  Cache cache;
  return successors_impl(t, m, suffix[0], suffix, top, act, cache);
}

int InfoStateEngine::evolve(int t, int n, int P, const ActionLookup& act, int z) {
  auto succ = successors(t, n, P, act);
  auto it = succ.find(z);
  if (it == succ.end()) throw InfeasibleObservation("infeasible observation for this information state and action");
  return it->second;
}

// ---------------------------------------------------------------------------

DefinitionalResult InfoStateEngine::definitional(const History& hist) {
  const SystemModel& model = hm_.model();
  const int n = hist.n;
  const int A = model.num_agents();
  DefinitionalResult res;
  // Path: [hat, history id of level 0, ..., history id of level n-1]. History ids are interned per
  // (time, level) from [cell] at t = 0 and [previous id, z] afterwards.
  std::vector<std::vector<TupleTable>> hist_ids(hist.steps.size() + 1, std::vector<TupleTable>(static_cast<std::size_t>(n)));
  std::set<std::vector<int>> paths;
  for (int h : hm_.initial_hats(n, hist.cell)) {
    std::vector<int> p{h};
    for (int m = 0; m < n; ++m) p.push_back(hist_ids[0][static_cast<std::size_t>(m)].intern({hm_.initial_cell(m, h)}));
    paths.insert(std::move(p));
  }
  if (paths.empty()) {
    res.consistent = false;
    res.diagnostic = "no initial state in the given cell";
    return res;
  }
  for (std::size_t s = 0;; ++s) {
    const int t = static_cast<int>(s);
    std::vector<std::vector<int>> pv(paths.begin(), paths.end());
    // nested[i][m]: level-m state of path i, grouping paths by their level-m history.
    std::vector<std::vector<int>> nested(pv.size(), std::vector<int>(static_cast<std::size_t>(n)));
    for (int m = 0; m < n; ++m) {
      std::map<int, std::vector<int>> groups;
      for (std::size_t i = 0; i < pv.size(); ++i) {
        auto& flat = groups[pv[i][static_cast<std::size_t>(1 + m)]];
        flat.push_back(pv[i][0]);
        flat.insert(flat.end(), nested[i].begin(), nested[i].begin() + m);
      }
      std::map<int, int> ids;
      for (auto& [g, flat] : groups) ids[g] = store_.intern(t, m, std::move(flat));
      for (std::size_t i = 0; i < pv.size(); ++i) nested[i][static_cast<std::size_t>(m)] = ids[pv[i][static_cast<std::size_t>(1 + m)]];
    }
    if (s == hist.steps.size()) {
      std::vector<int> flat;
      for (std::size_t i = 0; i < pv.size(); ++i) {
        flat.push_back(pv[i][0]);
        flat.insert(flat.end(), nested[i].begin(), nested[i].end());
      }
      res.id = store_.intern(t, n, std::move(flat));
      return res;
    }
    const HistoryStep& step = hist.steps[s];
    MapLookup act(step.action);
    std::set<std::vector<int>> next;
    std::vector<int> u(static_cast<std::size_t>(A));
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const int h = pv[i][0];
      const HatState& hs = hm_.hat(t, h);
      for (int a = 0; a < A; ++a) {
        const int m = model.agent(a).n;
        std::span<const int> key =
            m < n ? std::span<const int>(nested[i]).subspan(static_cast<std::size_t>(m)) : std::span<const int>{};
        const int ua = act.act(m, key, a, hs.inputs[static_cast<std::size_t>(a)]);
        if (ua < 0) {
          res.consistent = false;
          res.diagnostic = "action undefined at t=" + std::to_string(t) + " for agent " + std::to_string(a);
          return res;
        }
        u[static_cast<std::size_t>(a)] = ua;
      }
      const int ju = model.encode_joint_action(t, u);
      if (hm_.observe(t, n, h, ju) != step.z) continue;
      std::vector<int> p(static_cast<std::size_t>(n + 1));
      for (int m = 0; m < n; ++m)
        p[static_cast<std::size_t>(1 + m)] =
            hist_ids[s + 1][static_cast<std::size_t>(m)].intern({pv[i][static_cast<std::size_t>(1 + m)], hm_.observe(t, m, h, ju)});
      for (int w = 0; w < hm_.disturbance_count(t); ++w)
        for (int jv = 0; jv < hm_.joint_noise_count(t + 1); ++jv) {
          p[0] = hm_.next(t, h, ju, w, jv);
          next.insert(p);
        }
    }
    if (next.empty()) {
      res.consistent = false;
      res.diagnostic = "observation at t=" + std::to_string(t + 1) + " cannot occur";
      return res;
    }
    paths = std::move(next);
  }
}

// ---------------------------------------------------------------------------

std::vector<std::vector<int>> InfoStateEngine::reachable(int n, std::size_t cap, bool with_higher) {
  const int T = hm_.horizon();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(T + 1));
  std::size_t total = 0;
  std::set<int> cur;
  for (int P : initial_infostates(n)) cur.insert(P);
  for (int t = 0;; ++t) {
    out[static_cast<std::size_t>(t)].assign(cur.begin(), cur.end());
    total += cur.size();
    if (total > cap) throw ResourceError("reachable information states exceed cap", total);
    if (t == T) break;
    std::set<int> next;
    for (int P : cur) {
      CompleteActionSpace space(hm_, store_, t, n, P, with_higher);
      if (space.size(cap) > cap) throw ResourceError("complete actions per state exceed cap", space.size(cap));
      std::vector<int> a(space.slots().size(), 0);
      for (;;) {
        SlotLookup look(space, a);
        for (const auto& [z, Q] : successors(t, n, P, look)) next.insert(Q);
        std::size_t i = a.size();
        while (i > 0 && ++a[i - 1] == space.radix()[i - 1]) a[--i] = 0;
        if (i == 0) break;
      }
    }
    cur = std::move(next);
  }
  return out;
}

namespace {

nlohmann::json state_json(const InfoStateStore& store, int t, int n, int P) {
  nlohmann::json arr = nlohmann::json::array();
  for (int i = 0; i < store.member_count(t, n, P); ++i) {
    auto m = store.member(t, n, P, i);
    if (n == 0) {
      arr.push_back(m[0]);
      continue;
    }
    nlohmann::json tup = nlohmann::json::array();
    tup.push_back(m[0]);
    for (int k = 0; k < n; ++k) tup.push_back(state_json(store, t, k, m[static_cast<std::size_t>(1 + k)]));
    arr.push_back(std::move(tup));
  }
  return arr;
}

}  // namespace

std::string InfoStateEngine::to_json(int t, int n, int P) const { return state_json(store_, t, n, P).dump(); }

}  // namespace nmx
