#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct CliRun {
  int code = -1;
  std::string out;
};

// stderr is discarded unless `merge` is set
CliRun run(const std::string& args, bool merge = false) {
  const std::string cmd = std::string(EPISCOPE_CLI) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (p == nullptr) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string task(const std::string& name) { return std::string(EPISCOPE_TASKS_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "episcope-cli-test";
  fs::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool have_solver() {
  return std::system("command -v z3 > /dev/null 2>&1") == 0 ||
         std::getenv("EPISCOPE_SOLVER") != nullptr;
}

#define REQUIRE_SOLVER() \
  if (!have_solver()) GTEST_SKIP() << "no SMT solver on PATH"

const char* const kDc3[] = {"dc3_beta1.epi", "dc3_beta2.epi", "dc3_beta3.epi", "dc3_gamma.epi"};

TEST(Cli, Help) {
  const CliRun r = run("--help");
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"verify", "translate", "oracle", "bench"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos);
  }
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Verify, ValidQuery) {
  REQUIRE_SOLVER();
  const CliRun r = run("verify " + task("dc3_beta2.epi"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "beta2: VALID\n");
}

TEST(Verify, InvalidQueryJson) {
  REQUIRE_SOLVER();
  const CliRun r = run("verify --json " + task("dc3_beta3.epi"));
  EXPECT_EQ(r.code, 1);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["engine"], "smt");
  EXPECT_EQ(j["exit_code"], 1);
  ASSERT_EQ(j["queries"].size(), 1u);
  const json& q = j["queries"][0];
  EXPECT_EQ(q["name"], "beta3");
  EXPECT_EQ(q["status"], "Invalid");
  ASSERT_TRUE(q["model"].is_object());
  EXPECT_EQ(q["model"].size(), 7u);
  // beta3 fails exactly when a0 cannot know p1: p1 is false in the countermodel
  // or the coins hide it, and the model must satisfy "at most one paid"
  int paid = 0;
  for (const char* p : {"p0", "p1", "p2"}) paid += q["model"][p].get<bool>() ? 1 : 0;
  EXPECT_LE(paid, 1);
  EXPECT_EQ(q["model_sound"], true);
}

TEST(Verify, CherylModel) {
  REQUIRE_SOLVER();
  const CliRun r = run("verify " + task("cheryl.epi"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "query: MODEL m_a=7 d_b=16\n");
}

TEST(Verify, SelectsQueriesAndKeepsArtifacts) {
  REQUIRE_SOLVER();
  const std::string f = write_file("two.epi",
                                   "agents a\nvar x : Bool obs {a}\n"
                                   "check valid yes: x | !x\ncheck valid no: x\n");
  const CliRun both = run("verify " + f);
  EXPECT_EQ(both.code, 1);
  EXPECT_NE(both.out.find("yes: VALID"), std::string::npos);
  EXPECT_NE(both.out.find("no: INVALID  countermodel x=false"), std::string::npos);
  const CliRun one = run("verify --query yes --keep-artifacts " + f);
  EXPECT_EQ(one.code, 0);
  EXPECT_EQ(one.out, "yes: VALID\n");
  EXPECT_TRUE(fs::exists(scratch("two.yes.smt2")));
  EXPECT_EQ(run("verify --query missing " + f).code, 2);
}

TEST(Verify, ParallelJobsMatchSequential) {
  REQUIRE_SOLVER();
  const std::string f = write_file(
      "many.epi",
      "agents a, b\nvar x : Bool obs {a}\nvar y : Bool obs {b}\n"
      "check valid q1: K[a] x | K[a] !x\ncheck valid q2: K[a] y | K[a] !y\n"
      "check valid q3: K[b] (x | !x)\ncheck valid q4: [prog x := y] K[a] (x <=> y)\n");
  // after x := y every state of the updated model has x = y, so q4 holds
  const CliRun seq = run("verify " + f);
  const CliRun par = run("verify --jobs 4 " + f);
  EXPECT_EQ(seq.out, par.out);
  EXPECT_EQ(seq.code, par.code);
  EXPECT_EQ(seq.out, "q1: VALID\nq2: INVALID  countermodel x=false y=false\nq3: VALID\nq4: VALID\n");
}

TEST(Verify, InputErrors) {
  const CliRun missing = run("verify /nonexistent/task.epi", true);
  EXPECT_EQ(missing.code, 2);
  const std::string bad = write_file("bad.epi", "agents a\ncheck valid K[b] x\n");
  const CliRun r = run("verify " + bad, true);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find(":2:"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("undeclared agent b"), std::string::npos) << r.out;
}

TEST(Verify, SolverProblemsExitThree) {
  const CliRun r = run("verify --solver-path /nonexistent/z3 " + task("dc3_beta2.epi"));
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.out.find("beta2: ERROR"), std::string::npos) << r.out;
}

TEST(Oracle, AgreesWithVerifyOnBundledTasks) {
  REQUIRE_SOLVER();
  for (const char* name : {"dc3_beta1.epi", "dc3_beta2.epi", "dc3_beta3.epi", "dc3_gamma.epi",
                           "cheryl.epi"}) {
    const json s = json::parse(run("verify --json " + task(name)).out);
    const json o = json::parse(run("oracle --json " + task(name)).out);
    EXPECT_EQ(s["exit_code"], o["exit_code"]) << name;
    ASSERT_EQ(s["queries"].size(), o["queries"].size());
    for (std::size_t i = 0; i < s["queries"].size(); ++i) {
      EXPECT_EQ(s["queries"][i]["status"], o["queries"][i]["status"]) << name;
    }
  }
}

TEST(Oracle, CherylUniqueModel) {
  const CliRun r = run("oracle --json --bound 5..19 " + task("cheryl.epi"));
  EXPECT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["engine"], "oracle");
  const json& q = j["queries"][0];
  EXPECT_EQ(q["status"], "PuzzleModel");
  ASSERT_EQ(q["models"].size(), 1u);
  EXPECT_EQ(q["models"][0]["m_a"], 7);
  EXPECT_EQ(q["models"][0]["d_b"], 16);
}

TEST(Oracle, MissingBoundIsAnInputError) {
  const std::string f = write_file("nobound.epi", "agents a\nvar m : Int obs {a}\ncheck valid Kv[a] m\n");
  const CliRun r = run("oracle " + f, true);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("--bound"), std::string::npos) << r.out;
  const CliRun ok = run("oracle --bound 0..3 " + f);
  EXPECT_EQ(ok.code, 0);
  EXPECT_EQ(run("oracle --bound 3..0 " + f).code, 2);
  EXPECT_EQ(run("oracle --bound x " + f).code, 2);
}

TEST(Oracle, StateCapExitsFour) {
  const CliRun r = run("oracle --max-states 5 " + task("cheryl.epi"), true);
  EXPECT_EQ(r.code, 4);
  EXPECT_NE(r.out.find("cap"), std::string::npos);
}

TEST(Translate, PrintsFirstOrderGoalAndTime) {
  const CliRun r = run("translate --time " + task("dc3_beta3.epi"));
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# beta3 (validity goal, ", 0), 0u) << r.out;
  EXPECT_NE(r.out.find("# translation: "), std::string::npos);
  EXPECT_NE(r.out.find("forall"), std::string::npos);
  EXPECT_EQ(r.out.find("K["), std::string::npos);
  EXPECT_EQ(r.out.find("[prog"), std::string::npos);
  EXPECT_EQ(r.out.find("<ann"), std::string::npos);
}

TEST(Translate, WritesDeterministicScripts) {
  const fs::path a = scratch("a.smt2");
  const fs::path b = scratch("b.smt2");
  ASSERT_EQ(run("translate --quiet --smt2 " + a.string() + " " + task("cheryl.epi")).code, 0);
  ASSERT_EQ(run("translate --quiet --smt2 " + b.string() + " " + task("cheryl.epi")).code, 0);
  const std::string sa = slurp(a);
  EXPECT_FALSE(sa.empty());
  EXPECT_EQ(sa, slurp(b));
  EXPECT_NE(sa.find("(check-sat)"), std::string::npos);
  EXPECT_NE(sa.find("(declare-const m_a Int)"), std::string::npos);
}

TEST(Translate, ParseErrorExitsTwo) {
  const std::string f = write_file("lex.epi", "agents a\nvar x : Bool obs {a}\ncheck valid x $ x\n");
  const CliRun r = run("translate " + f, true);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find(":3:"), std::string::npos) << r.out;
}

TEST(Bench, CsvHeaderAndRows) {
  REQUIRE_SOLVER();
  const fs::path csv = scratch("bench.csv");
  const fs::path dir = scratch("bench-tasks");
  const CliRun r = run("bench dc --n-list 3,4 --query beta2,b3 --out " + csv.string() +
                    " --write-tasks " + dir.string());
  EXPECT_EQ(r.code, 0);
  std::istringstream in(slurp(csv));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "benchmark,n,query,translation_s,solver_s,verdict");
  std::vector<std::string> verdicts;
  while (std::getline(in, line)) {
    EXPECT_EQ(line.rfind("dc,", 0), 0u);
    verdicts.push_back(line.substr(line.rfind(',') + 1));
  }
  EXPECT_EQ(verdicts, (std::vector<std::string>{"VALID", "INVALID", "VALID", "INVALID"}));
  EXPECT_TRUE(fs::exists(dir / "dc4_beta3.epi"));
  // a written task round-trips through the verifier
  EXPECT_EQ(run("verify " + (dir / "dc3_beta2.epi").string()).out, "beta2: VALID\n");
}

TEST(Bench, BadArgumentsExitTwo) {
  EXPECT_EQ(run("bench nothing").code, 2);
  EXPECT_EQ(run("bench dc --n-list 3,x").code, 2);
  EXPECT_EQ(run("bench dc --query beta9").code, 2);
  const CliRun small = run("bench dc --n-list 2 --query beta1");
  EXPECT_EQ(small.code, 2);
  EXPECT_NE(small.out.find("dc,2,beta1,0,0,ERROR"), std::string::npos) << small.out;
}

TEST(Json, ReportsMatchSchema) {
  if (std::system("python3 -c 'import jsonschema' > /dev/null 2>&1") != 0) {
    GTEST_SKIP() << "python3 jsonschema unavailable";
  }
  std::vector<fs::path> reports;
  std::size_t i = 0;
  for (const std::string& args :
       {std::string("oracle --json ") + task("cheryl.epi"),
        std::string("oracle --json ") + task("dc3_beta3.epi"),
        std::string("verify --json ") + task("dc3_beta3.epi"),
        std::string("verify --json ") + task("dc3_beta2.epi"),
        std::string("verify --json --solver-path /nonexistent ") + task("dc3_beta2.epi")}) {
    if (args.rfind("verify", 0) == 0 && !have_solver()) continue;
    const fs::path p = scratch("report" + std::to_string(i++) + ".json");
    std::ofstream(p) << run(args).out;
    reports.push_back(p);
  }
  std::string cmd = std::string("python3 ") + EPISCOPE_SOURCE_DIR + "/tools/check_report.py " +
                    EPISCOPE_SOURCE_DIR + "/docs/report-schema.json";
  for (const fs::path& p : reports) cmd += " " + p.string();
  EXPECT_EQ(std::system(cmd.c_str()), 0);
}

}  // namespace
