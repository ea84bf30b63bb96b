#include "nmx/model_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace nmx {

namespace {

constexpr std::string_view kHeader = "nmx-model v1";

struct Token {
  std::string_view text;
  int column;
};

struct Line {
  int number;
  std::vector<Token> tokens;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == '#') break;
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r' && line[j] != '#') ++j;
    out.push_back({line.substr(i, j - i), static_cast<int>(i) + 1});
    i = j;
  }
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) {
    int number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      ++number;
      auto toks = tokenize(text.substr(start, end - start));
      if (!toks.empty()) lines_.push_back({number, std::move(toks)});
      last_line_ = number;
      if (end == text.size()) break;
      start = end + 1;
    }
  }

  ModelFile run() {
    if (lines_.empty()) throw ParseError(1, 1, "empty model file");
    const Line& head = lines_.front();
    if (head.tokens.size() != 2 || head.tokens[0].text != "nmx-model" || head.tokens[1].text != "v1")
      throw ParseError(head.number, 1, "expected header '" + std::string(kHeader) + "'");
    declarations();
    allocate();
    tables();
    finish();
    return std::move(out_);
  }

 private:
  [[noreturn]] void fail(const Line& l, std::size_t tok, const std::string& msg) const {
    int col = tok < l.tokens.size() ? l.tokens[tok].column : (l.tokens.empty() ? 1 : l.tokens.back().column);
    throw ParseError(l.number, col, msg);
  }

  int integer(const Line& l, std::size_t tok) const {
    if (tok >= l.tokens.size()) fail(l, tok, "missing integer");
    std::string s(l.tokens[tok].text);
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) fail(l, tok, "invalid integer '" + s + "'");
      return v;
    } catch (const std::logic_error&) {
      fail(l, tok, "invalid integer '" + s + "'");
    }
  }

  int time_index(const Line& l, std::size_t tok, int max_t) const {
    int t = integer(l, tok);
    if (t < 0 || t > max_t) fail(l, tok, "time index out of range");
    return t;
  }

  int agent_index(const Line& l, std::size_t tok) const {
    int n = integer(l, tok);
    int k = integer(l, tok + 1);
    const auto& m = out_.model;
    if (n < 1 || n > m.num_subsystems()) fail(l, tok, "subsystem index out of range");
    if (k < 1 || k > m.agents_per_subsystem[static_cast<std::size_t>(n - 1)]) fail(l, tok + 1, "agent index out of range");
    return m.agent_index(n - 1, k - 1);
  }

  FiniteSpace space_from(const Line& l, std::size_t first) const {
    std::vector<std::string> e;
    std::set<std::string_view> seen;
    for (std::size_t i = first; i < l.tokens.size(); ++i) {
      if (!seen.insert(l.tokens[i].text).second) fail(l, i, "duplicate element '" + std::string(l.tokens[i].text) + "'");
      if (l.tokens[i].text == "->") fail(l, i, "'->' is reserved");
      e.emplace_back(l.tokens[i].text);
    }
    return FiniteSpace(std::move(e));
  }

  int element(const Line& l, std::size_t tok, const FiniteSpace& s, const char* what) const {
    if (tok >= l.tokens.size()) fail(l, tok, std::string("missing ") + what);
    auto i = s.find(l.tokens[tok].text);
    if (!i) fail(l, tok, std::string("unknown ") + what + " '" + std::string(l.tokens[tok].text) + "'");
    return *i;
  }

  // Output side: unknown values become kOutOfSpace for the validator to report.
  int output_element(const Line& l, std::size_t tok, const FiniteSpace& s) const {
    if (tok >= l.tokens.size()) fail(l, tok, "missing output");
    auto i = s.find(l.tokens[tok].text);
    return i ? *i : kOutOfSpace;
  }

  void expect_arrow(const Line& l, std::size_t tok) const {
    if (tok >= l.tokens.size() || l.tokens[tok].text != "->") fail(l, tok, "expected '->'");
  }

  void expect_count(const Line& l, std::size_t n) const {
    if (l.tokens.size() != n) fail(l, std::min(n, l.tokens.size()), "expected " + std::to_string(n) + " fields");
  }

  void declarations() {
    auto& m = out_.model;
    bool have_horizon = false, have_subsystems = false;
    for (std::size_t li = 1; li < lines_.size(); ++li) {
      const Line& l = lines_[li];
      std::string_view kw = l.tokens[0].text;
      if (kw == "horizon") {
        expect_count(l, 2);
        m.horizon = integer(l, 1);
        if (m.horizon < 0) fail(l, 1, "horizon must be nonnegative");
        have_horizon = true;
      } else if (kw == "subsystems") {
        if (l.tokens.size() < 2) fail(l, 1, "expected agent counts");
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          int k = integer(l, i);
          if (k < 1) fail(l, i, "subsystem needs at least one agent");
          m.agents_per_subsystem.push_back(k);
        }
        have_subsystems = true;
      }
    }
    if (!have_horizon) throw ParseError(last_line_, 1, "missing 'horizon'");
    if (!have_subsystems) throw ParseError(last_line_, 1, "missing 'subsystems'");
    const auto T = static_cast<std::size_t>(m.horizon);
    const auto A = static_cast<std::size_t>(m.num_agents());
    m.states.assign(T + 1, {});
    m.actions.assign(T, std::vector<FiniteSpace>(A));
    m.disturbances.assign(T, {});
    m.noises.assign(T + 1, std::vector<FiniteSpace>(A));
    m.observations.assign(T + 1, std::vector<FiniteSpace>(A));
    std::set<std::vector<int>> declared;
    for (std::size_t li = 1; li < lines_.size(); ++li) {
      const Line& l = lines_[li];
      std::string_view kw = l.tokens[0].text;
      auto once = [&](std::vector<int> key) {
        if (!declared.insert(std::move(key)).second) fail(l, 0, "space declared twice");
      };
      if (kw == "state") {
        int t = time_index(l, 1, m.horizon);
        once({0, t});
        m.states[static_cast<std::size_t>(t)] = space_from(l, 2);
      } else if (kw == "action") {
        if (m.horizon == 0) fail(l, 0, "no decision times when horizon is 0");
        int t = time_index(l, 1, m.horizon - 1);
        int a = agent_index(l, 2);
        once({1, t, a});
        m.actions[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] = space_from(l, 4);
      } else if (kw == "disturbance") {
        if (m.horizon == 0) fail(l, 0, "no disturbances when horizon is 0");
        int t = time_index(l, 1, m.horizon - 1);
        once({2, t});
        m.disturbances[static_cast<std::size_t>(t)] = space_from(l, 2);
      } else if (kw == "noise") {
        int t = time_index(l, 1, m.horizon);
        int a = agent_index(l, 2);
        once({3, t, a});
        m.noises[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] = space_from(l, 4);
      } else if (kw == "yspace") {
        int t = time_index(l, 1, m.horizon);
        int a = agent_index(l, 2);
        once({4, t, a});
        m.observations[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] = space_from(l, 4);
      }
    }
  }

  void allocate() {
    auto& m = out_.model;
    const auto T = static_cast<std::size_t>(m.horizon);
    const auto A = static_cast<std::size_t>(m.num_agents());
    m.dynamics.assign(T, {});
    for (std::size_t t = 0; t < T; ++t)
      m.dynamics[t].assign(static_cast<std::size_t>(m.states[t].size()) *
                               static_cast<std::size_t>(m.joint_action_count(static_cast<int>(t))) *
                               static_cast<std::size_t>(m.disturbances[t].size()),
                           kMissing);
    m.observation.assign(T + 1, std::vector<std::vector<int>>(A));
    for (std::size_t t = 0; t <= T; ++t)
      for (std::size_t a = 0; a < A; ++a)
        m.observation[t][a].assign(static_cast<std::size_t>(m.states[t].size()) * static_cast<std::size_t>(m.noises[t][a].size()),
                                   kMissing);
    m.terminal_cost.assign(static_cast<std::size_t>(m.states[T].size()), Cost(0));
    terminal_seen_.assign(m.terminal_cost.size(), false);
    out_.info.agents_per_subsystem = m.agents_per_subsystem;
    out_.info.memory.assign(T + 1, std::vector<VarSet>(A));
    out_.info.initial_cells.assign(static_cast<std::size_t>(m.num_subsystems()), {});
  }

  Cost cost(const Line& l, std::size_t tok) const {
    if (tok >= l.tokens.size()) fail(l, tok, "missing cost");
    auto c = parse_cost(l.tokens[tok].text);
    if (!c) fail(l, tok, "invalid cost '" + std::string(l.tokens[tok].text) + "'");
    return *c;
  }

  void tables() {
    auto& m = out_.model;
    auto& info = out_.info;
    const int A = m.num_agents();
    std::set<std::vector<int>> memory_seen;
    std::vector<std::vector<bool>> stage_seen;
    for (std::size_t li = 1; li < lines_.size(); ++li) {
      const Line& l = lines_[li];
      std::string_view kw = l.tokens[0].text;
      if (kw == "horizon" || kw == "subsystems" || kw == "state" || kw == "action" || kw == "disturbance" ||
          kw == "noise" || kw == "yspace") {
        continue;
      } else if (kw == "initial") {
        if (!m.initial_states.empty()) fail(l, 0, "'initial' given twice");
        std::set<int> seen;
        for (std::size_t i = 1; i < l.tokens.size(); ++i) {
          int x = element(l, i, m.states[0], "state");
          if (!seen.insert(x).second) fail(l, i, "duplicate initial state");
          m.initial_states.push_back(x);
        }
      } else if (kw == "dynamics") {
        if (m.horizon == 0) fail(l, 0, "no dynamics when horizon is 0");
        int t = time_index(l, 1, m.horizon - 1);
        const auto ut = static_cast<std::size_t>(t);
        expect_count(l, static_cast<std::size_t>(A) + 6);
        int x = element(l, 2, m.states[ut], "state");
        std::vector<int> u(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a)
          u[static_cast<std::size_t>(a)] = element(l, static_cast<std::size_t>(3 + a), m.actions[ut][static_cast<std::size_t>(a)], "action");
        int w = element(l, static_cast<std::size_t>(3 + A), m.disturbances[ut], "disturbance");
        expect_arrow(l, static_cast<std::size_t>(4 + A));
        int xn = output_element(l, static_cast<std::size_t>(5 + A), m.states[ut + 1]);
        const int ju = m.encode_joint_action(t, u);
        auto& slot = m.dynamics[ut][static_cast<std::size_t>((x * m.joint_action_count(t) + ju) * m.disturbances[ut].size() + w)];
        if (slot != kMissing) fail(l, 0, "duplicate dynamics row");
        slot = xn;
      } else if (kw == "observe") {
        expect_count(l, 8);
        int t = time_index(l, 1, m.horizon);
        const auto ut = static_cast<std::size_t>(t);
        int a = agent_index(l, 2);
        const auto ua = static_cast<std::size_t>(a);
        int x = element(l, 4, m.states[ut], "state");
        int v = element(l, 5, m.noises[ut][ua], "noise");
        expect_arrow(l, 6);
        int y = output_element(l, 7, m.observations[ut][ua]);
        auto& slot = m.observation[ut][ua][static_cast<std::size_t>(x * m.noises[ut][ua].size() + v)];
        if (slot != kMissing) fail(l, 0, "duplicate observation row");
        slot = y;
      } else if (kw == "terminal") {
        expect_count(l, 3);
        int x = element(l, 1, m.states[static_cast<std::size_t>(m.horizon)], "state");
        if (terminal_seen_[static_cast<std::size_t>(x)]) fail(l, 0, "duplicate terminal cost row");
        terminal_seen_[static_cast<std::size_t>(x)] = true;
        m.terminal_cost[static_cast<std::size_t>(x)] = cost(l, 2);
      } else if (kw == "stage") {
        if (m.horizon == 0) fail(l, 0, "no stage costs when horizon is 0");
        if (m.stage_cost.empty()) {
          m.stage_cost.resize(static_cast<std::size_t>(m.horizon));
          stage_seen.resize(static_cast<std::size_t>(m.horizon));
          for (int t = 0; t < m.horizon; ++t) {
            const auto n = static_cast<std::size_t>(m.states[static_cast<std::size_t>(t)].size() * m.joint_action_count(t));
            m.stage_cost[static_cast<std::size_t>(t)].assign(n, Cost(0));
            stage_seen[static_cast<std::size_t>(t)].assign(n, false);
          }
        }
        int t = time_index(l, 1, m.horizon - 1);
        const auto ut = static_cast<std::size_t>(t);
        expect_count(l, static_cast<std::size_t>(A) + 4);
        int x = element(l, 2, m.states[ut], "state");
        std::vector<int> u(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a)
          u[static_cast<std::size_t>(a)] = element(l, static_cast<std::size_t>(3 + a), m.actions[ut][static_cast<std::size_t>(a)], "action");
        const auto idx = static_cast<std::size_t>(x * m.joint_action_count(t) + m.encode_joint_action(t, u));
        if (stage_seen[ut][idx]) fail(l, 0, "duplicate stage cost row");
        stage_seen[ut][idx] = true;
        m.stage_cost[ut][idx] = cost(l, static_cast<std::size_t>(3 + A));
      } else if (kw == "memory") {
        int t = time_index(l, 1, m.horizon);
        int a = agent_index(l, 2);
        if (!memory_seen.insert({t, a}).second) fail(l, 0, "memory listed twice");
        VarSet set;
        for (std::size_t i = 4; i < l.tokens.size(); ++i) {
          auto v = parse_var(m, l.tokens[i].text);
          if (!v) fail(l, i, "invalid variable identifier '" + std::string(l.tokens[i].text) + "'");
          set.push_back(*v);
        }
        std::sort(set.begin(), set.end());
        if (std::adjacent_find(set.begin(), set.end()) != set.end()) fail(l, 4, "duplicate identifier in memory");
        info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)] = std::move(set);
      } else if (kw == "cell") {
        int n = integer(l, 1);
        if (n < 1 || n > m.num_subsystems()) fail(l, 1, "subsystem index out of range");
        std::vector<int> cell;
        for (std::size_t i = 2; i < l.tokens.size(); ++i) cell.push_back(element(l, i, m.states[0], "state"));
        std::sort(cell.begin(), cell.end());
        info.initial_cells[static_cast<std::size_t>(n - 1)].push_back(std::move(cell));
      } else {
        fail(l, 0, "unknown keyword '" + std::string(kw) + "'");
      }
    }
    for (const auto& per_t : stage_seen)
      for (bool seen : per_t)
        if (!seen) throw ParseError(last_line_, 1, "stage cost table is incomplete");
  }

  void finish() {
    for (std::size_t x = 0; x < terminal_seen_.size(); ++x)
      if (!terminal_seen_[x]) throw ParseError(last_line_, 1, "terminal cost missing for some terminal state");
    default_initial_cells(out_.model, out_.info);
  }

  std::vector<Line> lines_;
  int last_line_ = 1;
  ModelFile out_;
  std::vector<bool> terminal_seen_;
};

void write_space(std::ostream& os, const FiniteSpace& s) {
  for (const auto& e : s.elements()) os << ' ' << e;
  os << '\n';
}

}  // namespace

ModelFile parse_model(std::string_view text) { return Parser(text).run(); }

ModelFile read_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

std::string serialize_model(const SystemModel& m, const InfoStructure& info) {
  std::ostringstream os;
  const int T = m.horizon;
  const int A = m.num_agents();
  auto agent_label = [&](int a) {
    AgentRef r = m.agent(a);
    return std::to_string(r.n + 1) + " " + std::to_string(r.k + 1);
  };
  os << kHeader << '\n';
  os << "horizon " << T << '\n';
  os << "subsystems";
  for (int k : m.agents_per_subsystem) os << ' ' << k;
  os << '\n';
  for (int t = 0; t <= T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    os << "state " << t;
    write_space(os, m.states[ut]);
    if (t < T) {
      os << "disturbance " << t;
      write_space(os, m.disturbances[ut]);
    }
    for (int a = 0; a < A; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      if (t < T) {
        os << "action " << t << ' ' << agent_label(a);
        write_space(os, m.actions[ut][ua]);
      }
      os << "noise " << t << ' ' << agent_label(a);
      write_space(os, m.noises[ut][ua]);
      os << "yspace " << t << ' ' << agent_label(a);
      write_space(os, m.observations[ut][ua]);
    }
  }
  os << "initial";
  for (int x : m.initial_states) os << ' ' << m.states[0].name(x);
  os << '\n';
  auto out_name = [](const FiniteSpace& s, int v) { return v >= 0 && v < s.size() ? s.name(v) : std::string("?"); };
  for (int t = 0; t < T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const int JU = m.joint_action_count(t);
    const int W = m.disturbances[ut].size();
    for (int x = 0; x < m.states[ut].size(); ++x)
      for (int ju = 0; ju < JU; ++ju) {
        auto u = m.decode_joint_action(t, ju);
        for (int w = 0; w < W; ++w) {
          int xn = m.dynamics[ut][static_cast<std::size_t>((x * JU + ju) * W + w)];
          if (xn == kMissing) continue;
          os << "dynamics " << t << ' ' << m.states[ut].name(x);
          for (int a = 0; a < A; ++a) os << ' ' << m.actions[ut][static_cast<std::size_t>(a)].name(u[static_cast<std::size_t>(a)]);
          os << ' ' << m.disturbances[ut].name(w) << " -> " << out_name(m.states[ut + 1], xn) << '\n';
        }
      }
  }
  for (int t = 0; t <= T; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    for (int a = 0; a < A; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const int V = m.noises[ut][ua].size();
      for (int x = 0; x < m.states[ut].size(); ++x)
        for (int v = 0; v < V; ++v) {
          int y = m.observation[ut][ua][static_cast<std::size_t>(x * V + v)];
          if (y == kMissing) continue;
          os << "observe " << t << ' ' << agent_label(a) << ' ' << m.states[ut].name(x) << ' '
             << m.noises[ut][ua].name(v) << " -> " << out_name(m.observations[ut][ua], y) << '\n';
        }
    }
  }
  for (int x = 0; x < m.states[static_cast<std::size_t>(T)].size(); ++x)
    os << "terminal " << m.states[static_cast<std::size_t>(T)].name(x) << ' '
       << format_cost(m.terminal_cost[static_cast<std::size_t>(x)]) << '\n';
  if (m.has_stage_costs()) {
    for (int t = 0; t < T; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      const int JU = m.joint_action_count(t);
      for (int x = 0; x < m.states[ut].size(); ++x)
        for (int ju = 0; ju < JU; ++ju) {
          auto u = m.decode_joint_action(t, ju);
          os << "stage " << t << ' ' << m.states[ut].name(x);
          for (int a = 0; a < A; ++a) os << ' ' << m.actions[ut][static_cast<std::size_t>(a)].name(u[static_cast<std::size_t>(a)]);
          os << ' ' << format_cost(m.stage_cost[ut][static_cast<std::size_t>(x * JU + ju)]) << '\n';
        }
    }
  }
  for (int t = 0; t <= T; ++t)
    for (int a = 0; a < A; ++a) {
      const auto& set = info.memory[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
      if (set.empty()) continue;
      os << "memory " << t << ' ' << agent_label(a);
      for (const VarId& v : set) os << ' ' << format_var(m, v);
      os << '\n';
    }
  for (std::size_t n = 0; n < info.initial_cells.size(); ++n)
    for (const auto& cell : info.initial_cells[n]) {
      os << "cell " << n + 1;
      for (int x : cell) os << ' ' << m.states[0].name(x);
      os << '\n';
    }
  return os.str();
}

}  // namespace nmx
