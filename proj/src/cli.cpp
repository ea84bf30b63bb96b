#include "nmx/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "nmx/costs.hpp"
#include "nmx/dp.hpp"
#include "nmx/oracle.hpp"
#include "nmx/pursuit.hpp"
#include "nmx/random_model.hpp"
#include "nmx/report.hpp"

namespace nmx {

namespace {

std::size_t env_cap(const char* name, std::size_t fallback) {
  const char* v = std::getenv(name);
  if (!v || !*v) return fallback;
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v, &end, 10);
  return (end && *end == '\0') ? static_cast<std::size_t>(n) : fallback;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

struct Instance {
  ModelFile file;
  std::string label;
  std::string digest;
};

// Exactly one source: a model path, a random seed, or pursuit parameters.
struct Source {
  std::string path;
  long long seed = -1;
  bool additive = false;
  std::vector<int> pursuit;  // lambda horizon penalty x1 x2 y0

  void attach(CLI::App* cmd) {
    cmd->add_option("model", path, "model file in the nmx-model v1 format");
    cmd->add_option("--seed", seed, "use the random instance with this seed");
    cmd->add_flag("--additive", additive, "draw stage costs for --seed instances");
    cmd->add_option("--pursuit", pursuit, "pursuit instance: lambda horizon penalty x1 x2 y0")->expected(6);
  }

  Instance load() const {
    const int given = !path.empty() + (seed >= 0) + !pursuit.empty();
    if (given != 1) throw CLI::ValidationError("exactly one of a model path, --seed or --pursuit is required");
    Instance in;
    if (!path.empty()) {
      std::ifstream f(path, std::ios::binary);
      if (!f) throw Error("cannot open " + path);
      std::stringstream ss;
      ss << f.rdbuf();
      in.file = parse_model(ss.str());
      in.label = "file " + path;
      in.digest = digest_hex(ss.str());
    } else if (seed >= 0) {
      RandomOptions o;
      o.additive = additive;
      in.file = random_model(static_cast<std::uint64_t>(seed), o);
      in.label = "random v" + std::to_string(kRandomModelVersion) + " seed " + std::to_string(seed) + (additive ? " additive" : "");
      in.digest = digest_hex(in.label);
    } else {
      PursuitParams p;
      p.lambda = pursuit[0];
      p.horizon = pursuit[1];
      p.penalty = pursuit[2];
      p.x1 = pursuit[3];
      p.x2 = pursuit[4];
      p.y0 = pursuit[5];
      in.file = build_pursuit(p);
      in.label = "pursuit " + join(pursuit);
      in.digest = digest_hex(in.label);
    }
    require_valid(in.file.model, in.file.info);
    return in;
  }
};

struct Caps {
  std::size_t max_infostates = env_cap("NMX_MAX_INFOSTATES", SolveOptions{}.max_infostates);
  std::size_t max_candidates = env_cap("NMX_MAX_CANDIDATES", SolveOptions{}.max_candidates);

  void attach(CLI::App* cmd) {
    cmd->add_option("--max-infostates", max_infostates, "cap on interned information states (env NMX_MAX_INFOSTATES)");
    cmd->add_option("--max-candidates", max_candidates, "cap on complete actions per backup (env NMX_MAX_CANDIDATES)");
  }
  SolveOptions options() const { return SolveOptions{max_infostates, max_candidates}; }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
}

// Terminal-cost form of the instance; additive costs are folded into the state first.
ModelFile terminal_form(const ModelFile& f) { return f.model.has_stage_costs() ? to_terminal(f.model, f.info) : f; }

std::string strategy_text(const SystemModel& m, const AgentStrategy& g) {
  std::ostringstream os;
  for (std::size_t t = 0; t < g.laws.size(); ++t)
    for (std::size_t a = 0; a < g.laws[t].size(); ++a) {
      const AgentRef r = m.agent(static_cast<int>(a));
      for (const auto& [key, u] : g.laws[t][a]) {
        os << "t=" << t << " agent=(" << r.n + 1 << ',' << r.k + 1 << ") cell=" << key[0]
           << " y=" << m.observations[t][a].name(key[1]) << " memory=[";
        for (std::size_t i = 2; i < key.size(); ++i) os << (i > 2 ? "," : "") << key[i];
        os << "] -> " << m.actions[t][a].name(u) << '\n';
      }
    }
  return os.str();
}

struct Solved {
  std::vector<Cost> values;
  std::vector<Cost> achieved;
  std::vector<int> top_states;
  std::vector<int> hats;
  BackupStats stats;
  std::string strategy;
  std::string value_table;
  AgentStrategy agent;
};

Solved solve_instance(const ModelFile& f, const SolveOptions& opts, bool exports) {
  const ModelFile work = terminal_form(f);
  const HatModel hm = build_hat_model(work.model, work.info);
  Solver s(hm, opts);
  Solved out;
  out.values = s.solve();
  out.agent = extract_agent_strategies(s);
  for (std::size_t c = 0; c < out.values.size(); ++c)
    out.achieved.push_back(evaluate_strategy(work.model, work.info, out.agent, static_cast<int>(c)));
  for (const auto& row : s.table().by_time) out.top_states.push_back(static_cast<int>(row.size()));
  for (int t = 0; t <= hm.horizon(); ++t) out.hats.push_back(hm.hat_count(t));
  out.stats = s.stats();
  if (exports) {
    out.strategy = s.export_strategy();
    out.value_table = s.export_values();
  }
  return out;
}

void add_instance(Report& r, const Instance& in) {
  r.add("instance", in.label);
  r.add("digest", in.digest);
  r.add("agents-per-subsystem", join(in.file.model.agents_per_subsystem));
  r.add("horizon", in.file.model.horizon);
  r.add("cost-form", in.file.model.has_stage_costs() ? "additive" : "terminal");
}

void add_solved(Report& r, const Solved& s) {
  r.add("hat-states", join(s.hats));
  r.add("top-states-visited", join(s.top_states));
  r.add("backups", static_cast<long long>(s.stats.backups));
  r.add("candidates", static_cast<long long>(s.stats.candidates));
  for (std::size_t c = 0; c < s.values.size(); ++c) {
    r.add("value[" + std::to_string(c) + "]", format_cost_with_decimal(s.values[c]));
    r.add("achieved[" + std::to_string(c) + "]", format_cost_with_decimal(s.achieved[c]));
  }
}

// ---------------------------------------------------------------------------

int cmd_solve(const Source& src, const Caps& caps, const std::string& strategy_out, const std::string& values_out,
              std::ostream& out) {
  const Instance in = src.load();
  const Solved s = solve_instance(in.file, caps.options(), !strategy_out.empty() || !values_out.empty());
  Report r("solve");
  add_instance(r, in);
  add_solved(r, s);
  out << r.str();
  if (!strategy_out.empty()) write_file(strategy_out, s.strategy);
  if (!values_out.empty()) write_file(values_out, s.value_table);
  return kExitOk;
}

struct VerifyOutcome {
  bool pass = true;
  std::vector<Cost> dp, oracle;
  std::vector<std::size_t> searched;
  std::string count;
  std::string witness;
};

VerifyOutcome verify_instance(const ModelFile& f, const SolveOptions& opts, std::size_t cap, bool corrupt) {
  VerifyOutcome v;
  const Solved s = solve_instance(f, opts, false);
  v.dp = s.values;
  if (corrupt && !v.dp.empty()) v.dp[0] += 1;
  v.count = count_strategies(f.model, f.info).str();
  for (std::size_t c = 0; c < v.dp.size(); ++c) {
    const OracleResult o = brute_force_minimax(f.model, f.info, static_cast<int>(c), cap);
    v.oracle.push_back(o.value);
    v.searched.push_back(o.searched);
    if (o.value != v.dp[c] || s.achieved[c] != v.dp[c]) {
      if (v.pass) v.witness = strategy_text(f.model, o.profile);
      v.pass = false;
    }
  }
  return v;
}

int cmd_verify(const Source& src, const Caps& caps, std::size_t cap, long long count, bool corrupt, std::ostream& out) {
  Report r("verify");
  bool all = true;
  if (count > 0) {
    if (src.seed < 0 || !src.path.empty() || !src.pursuit.empty()) throw CLI::ValidationError("--count needs --seed");
    r.add("generator", "random v" + std::to_string(kRandomModelVersion) + (src.additive ? " additive" : ""));
    r.add("seeds", std::to_string(src.seed) + ".." + std::to_string(src.seed + count - 1));
    long long passed = 0;
    for (long long i = 0; i < count; ++i) {
      Source one = src;
      one.seed = src.seed + i;
      const Instance in = one.load();
      const VerifyOutcome v = verify_instance(in.file, caps.options(), cap, corrupt && i == 0);
      std::string line = v.pass ? "PASS" : "FAIL";
      for (std::size_t c = 0; c < v.dp.size(); ++c)
        line += " dp=" + format_cost(v.dp[c]) + " oracle=" + format_cost(v.oracle[c]);
      r.add("seed " + std::to_string(one.seed), line);
      passed += v.pass;
      all = all && v.pass;
    }
    r.add("passed", std::to_string(passed) + "/" + std::to_string(count));
  } else {
    const Instance in = src.load();
    add_instance(r, in);
    const VerifyOutcome v = verify_instance(in.file, caps.options(), cap, corrupt);
    r.add("strategy-count", v.count);
    for (std::size_t c = 0; c < v.dp.size(); ++c) {
      r.add("dp[" + std::to_string(c) + "]", format_cost_with_decimal(v.dp[c]));
      r.add("oracle[" + std::to_string(c) + "]", format_cost_with_decimal(v.oracle[c]));
      r.add("oracle-searched[" + std::to_string(c) + "]", static_cast<long long>(v.searched[c]));
    }
    all = v.pass;
    if (!v.pass) {
      std::string w = v.witness;
      for (char& ch : w)
        if (ch == '\n') ch = ';';
      r.add("witness", w);
    }
  }
  r.add("result", all ? "PASS" : "FAIL");
  out << r.str();
  return all ? kExitOk : kExitVerifyFail;
}

std::string row_label(const PursuitParams& p) {
  return "{" + std::to_string(p.x1) + "," + std::to_string(p.x2) + "," + std::to_string(p.y0) + "}";
}

std::string row_text(const PursuitRow& row) {
  return "value=" + format_cost(row.value) + " achieved=" + format_cost(row.achieved) +
         " backups=" + std::to_string(row.backups) + " candidates=" + std::to_string(row.candidates) +
         " states=" + join(row.infostates_per_t);
}

int cmd_pursuit(const PursuitParams& p, bool table, int jobs, const Caps& caps, const std::string& strategy_out,
                std::ostream& out) {
  Report r("pursuit");
  if (table) {
    r.add("table", "lambda 8 horizon 3 penalty 10");
    const auto rows = table1(SurroundRule::Inclusive, jobs, caps.options());
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool ok = rows[i].value == Cost(kTable1Expected[i]) && rows[i].achieved == rows[i].value;
      r.add("row " + row_label(rows[i].params), row_text(rows[i]) + " expected=" + std::to_string(kTable1Expected[i]) +
                                                    (ok ? " match" : " MISMATCH"));
      if (!ok) bad.push_back(i);
    }
    if (!bad.empty()) {
      const auto alt = table1(SurroundRule::Exclusive, jobs, caps.options());
      for (std::size_t i = 0; i < alt.size(); ++i)
        r.add("exclusive-rule row " + row_label(alt[i].params),
              row_text(alt[i]) + " expected=" + std::to_string(kTable1Expected[i]) +
                  (alt[i].value == Cost(kTable1Expected[i]) ? " match" : " MISMATCH"));
    }
    r.add("result", bad.empty() ? "PASS" : "FAIL");
    out << r.str();
    return bad.empty() ? kExitOk : kExitVerifyFail;
  }
  const PursuitRow row = solve_pursuit(p, caps.options(), !strategy_out.empty());
  r.add("params", "lambda " + std::to_string(p.lambda) + " horizon " + std::to_string(p.horizon) + " penalty " +
                      std::to_string(p.penalty) + " start " + row_label(p) + " rule " +
                      (p.rule == SurroundRule::Inclusive ? "inclusive" : "exclusive"));
  r.add("row", row_text(row));
  out << r.str();
  if (!strategy_out.empty()) write_file(strategy_out, row.strategy_export);
  return kExitOk;
}

int cmd_export(const Source& src, const std::string& what, const Caps& caps, std::ostream& out) {
  const Instance in = src.load();
  if (what == "model") {
    out << serialize_model(in.file.model, in.file.info);
    return kExitOk;
  }
  const ModelFile work = terminal_form(in.file);
  const HatModel hm = build_hat_model(work.model, work.info);
  if (what == "hat") {
    out << hm.debug_dump();
    return kExitOk;
  }
  Solver s(hm, caps.options());
  if (what == "infostates") {
    const int top = hm.num_subsystems() - 1;
    const auto levels = s.engine().reachable(top, caps.max_infostates);
    out << "nmx-infostates v1\n";
    for (std::size_t t = 0; t < levels.size(); ++t)
      for (int P : levels[t]) out << "t=" << t << " P=" << P << ' ' << s.engine().to_json(static_cast<int>(t), top, P) << '\n';
    return kExitOk;
  }
  s.solve();
  out << (what == "values" ? s.export_values() : s.export_strategy());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact minimax solver for decentralized control with nested subsystems"};
  app.name("nmx");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Source solve_src, verify_src, export_src;
  Caps solve_caps, verify_caps, pursuit_caps, export_caps;
  std::string strategy_out, values_out, pursuit_strategy_out, what = "model";
  std::size_t oracle_cap = env_cap("NMX_ORACLE_CAP", 50'000'000);
  long long count = 0;
  bool corrupt = false, table = false;
  int jobs = 1;
  PursuitParams pp;
  std::string rule = "inclusive";

  auto* solve = app.add_subcommand("solve", "solve an instance with the information-state DP");
  solve_src.attach(solve);
  solve_caps.attach(solve);
  solve->add_option("--strategy-out", strategy_out, "write the solved complete actions here");
  solve->add_option("--values-out", values_out, "write the value table here");

  auto* verify = app.add_subcommand("verify", "compare the DP against brute-force strategy enumeration");
  verify_src.attach(verify);
  verify_caps.attach(verify);
  verify->add_option("--oracle-cap", oracle_cap, "cap on law assignments per branch (env NMX_ORACLE_CAP)");
  verify->add_option("--count", count, "with --seed: verify this many consecutive seeds");
  verify->add_flag("--corrupt-value", corrupt, "test hook: perturb the DP value")->group("");

  auto* pursuit = app.add_subcommand("pursuit", "two-agent target surrounding on a line");
  pursuit->add_option("--lambda", pp.lambda, "grid points");
  pursuit->add_option("--horizon,--t", pp.horizon, "horizon T");
  pursuit->add_option("--penalty", pp.penalty, "penalty D for failing to surround");
  pursuit->add_option("--x1", pp.x1, "initial position of agent 1");
  pursuit->add_option("--x2", pp.x2, "initial position of agent 2");
  pursuit->add_option("--y0", pp.y0, "common initial observation of the target");
  pursuit->add_option("--rule", rule, "surround rule")->check(CLI::IsMember({"inclusive", "exclusive"}));
  pursuit->add_flag("--table1", table, "solve the four reference rows at lambda 8, T 3, D 10");
  pursuit->add_option("--jobs", jobs, "rows solved in parallel with --table1")->check(CLI::PositiveNumber);
  pursuit->add_option("--strategy-out", pursuit_strategy_out, "write the solved complete actions here");
  pursuit_caps.attach(pursuit);

  auto* exp = app.add_subcommand("export", "print the model, hat model, information states, strategy or values");
  export_src.attach(exp);
  export_caps.attach(exp);
  exp->add_option("--what", what, "what to export")
      ->check(CLI::IsMember({"model", "hat", "infostates", "strategy", "values"}));

  std::vector<std::string> argv_store{"nmx"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  const auto start = std::chrono::steady_clock::now();
  int code = kExitOk;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
    if (solve->parsed())
      code = cmd_solve(solve_src, solve_caps, strategy_out, values_out, out);
    else if (verify->parsed())
      code = cmd_verify(verify_src, verify_caps, oracle_cap, count, corrupt, out);
    else if (pursuit->parsed()) {
      pp.rule = rule == "exclusive" ? SurroundRule::Exclusive : SurroundRule::Inclusive;
      if (!table) {
        try {
          check_params(pp);
        } catch (const ValidationError& e) {
          err << "nmx: usage error: " << e.what() << '\n';
          return kExitUsage;
        }
      }
      code = cmd_pursuit(pp, table, jobs, pursuit_caps, pursuit_strategy_out, out);
    } else if (exp->parsed())
      code = cmd_export(export_src, what, export_caps, out);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  } catch (const ParseError& e) {
    err << "nmx: parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const ValidationError& e) {
    err << "nmx: invalid model: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ConstructionError& e) {
    err << "nmx: invalid model: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ResourceError& e) {
    err << "nmx: resource cap exceeded: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    err << "nmx: error: " << e.what() << '\n';
    return kExitOther;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  err << "wall-time: " << std::fixed << std::setprecision(3) << secs << "s\n";
  return code;
}

}  // namespace nmx
