#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nmx/cli.hpp"
#include "nmx/pursuit.hpp"
#include "nmx/random_model.hpp"
#include "support.hpp"

using namespace nmx;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "nmx-cli-test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Value of report key `key`, or empty.
std::string field(const std::string& report, const std::string& key) {
  const auto at = report.find("\n" + key + ": ");
  if (at == std::string::npos) return {};
  const auto start = at + key.size() + 3;
  return report.substr(start, report.find('\n', start) - start);
}

}  // namespace

TEST_CASE("solve a model file") {
  const auto f = random_model(5);
  const std::string path = write("m5.nmx", serialize_model(f.model, f.info));
  const Run r = run({"solve", path});
  CHECK(r.code == kExitOk);
  CHECK(r.out.rfind("nmx-report v1\ncommand: solve\ntie-break: lexmin-slot-v1\n", 0) == 0);
  CHECK_FALSE(field(r.out, "value[0]").empty());
  CHECK(field(r.out, "value[0]") == field(r.out, "achieved[0]"));
  CHECK(r.err.find("wall-time") != std::string::npos);
  CHECK(r.out.find("wall-time") == std::string::npos);
}

TEST_CASE("exit codes: usage, parse, validation, resource") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"frobnicate"}).code == kExitUsage);
  CHECK(run({"pursuit", "--y0", "0"}).code == kExitUsage);
  CHECK(run({"solve", write("bad.nmx", "nmx-model v1\nhorizon x\n")}).code == kExitParse);
  auto f = test::blank_model(1, {1}, 2);
  std::string text = serialize_model(f.model, f.info);
  const std::string from = "dynamics 0 s0 a0 w0 -> s0";
  text.replace(text.find(from), from.size(), "dynamics 0 s0 a0 w0 -> s7");
  const Run invalid = run({"solve", write("oos.nmx", text)});
  CHECK(invalid.code == kExitValidation);
  CHECK(invalid.err.find("out-of-space") != std::string::npos);
  CHECK(run({"solve", "--pursuit", "4", "2", "10", "4", "4", "2", "--max-infostates", "3"}).code == kExitResource);
  CHECK(run({"verify", "--pursuit", "4", "2", "10", "4", "4", "2", "--oracle-cap", "10"}).code == kExitResource);
  CHECK(run({"solve", "/nonexistent/model.nmx"}).code == kExitOther);
}

TEST_CASE("verify: random seeds pass, corrupted value fails with a witness") {
  const Run ok = run({"verify", "--seed", "100", "--count", "20"});
  CHECK(ok.code == kExitOk);
  CHECK(field(ok.out, "passed") == "20/20");
  const Run bad = run({"verify", "--seed", "3", "--corrupt-value"});
  CHECK(bad.code == kExitVerifyFail);
  CHECK(field(bad.out, "result") == "FAIL");
  CHECK_FALSE(field(bad.out, "witness").empty());
}

TEST_CASE("verify: reduced pursuit row passes") {
  const Run r = run({"verify", "--pursuit", "4", "2", "10", "3", "3", "4"});
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "dp[0]") == field(r.out, "oracle[0]"));
}

TEST_CASE("pursuit row matches verify and the re-solved exported model") {
  const Run p = run({"pursuit", "--lambda", "4", "--t", "2", "--x1", "4", "--x2", "4", "--y0", "2"});
  REQUIRE(p.code == kExitOk);
  const std::string row = field(p.out, "row");
  const std::string value = row.substr(6, row.find(' ') - 6);
  const Run v = run({"verify", "--pursuit", "4", "2", "10", "4", "4", "2"});
  CHECK(field(v.out, "oracle[0]").rfind(value + " ", 0) == 0);
  const Run e = run({"export", "--pursuit", "4", "2", "10", "4", "4", "2", "--what", "model"});
  REQUIRE(e.code == kExitOk);
  const Run s = run({"solve", write("pursuit.nmx", e.out)});
  CHECK(field(s.out, "value[0]").rfind(value + " ", 0) == 0);
}

TEST_CASE("solve writes deterministic exports") {
  const auto f = random_model(21);
  const std::string path = write("m21.nmx", serialize_model(f.model, f.info));
  const auto s1 = scratch("s1.txt").string(), v1 = scratch("v1.txt").string();
  const auto s2 = scratch("s2.txt").string(), v2 = scratch("v2.txt").string();
  const Run a = run({"solve", path, "--strategy-out", s1, "--values-out", v1});
  const Run b = run({"solve", path, "--strategy-out", s2, "--values-out", v2});
  CHECK(a.out == b.out);
  CHECK(slurp(s1) == slurp(s2));
  CHECK(slurp(v1) == slurp(v2));
  CHECK(slurp(s1).rfind("nmx-strategy v1", 0) == 0);
}

TEST_CASE("export kinds") {
  for (const char* what : {"model", "hat", "infostates", "strategy", "values"}) {
    const Run r = run({"export", "--seed", "9", "--what", what});
    CHECK(r.code == kExitOk);
    CHECK_FALSE(r.out.empty());
  }
  CHECK(run({"export", "--seed", "9", "--what", "nonsense"}).code == kExitUsage);
  CHECK(run({"export", "--seed", "9", "--pursuit", "4", "2", "10", "4", "4", "2"}).code == kExitUsage);
}

TEST_CASE("additive model files are folded before solving") {
  RandomOptions o;
  o.additive = true;
  const auto f = random_model(4, o);
  const Run r = run({"solve", write("add.nmx", serialize_model(f.model, f.info))});
  CHECK(r.code == kExitOk);
  CHECK(field(r.out, "cost-form") == "additive");
  const Run v = run({"verify", "--seed", "4", "--additive"});
  CHECK(v.code == kExitOk);
}
