// episcope: verify, translate, oracle and bench commands.
//
// Exit codes: 0 all queries hold (validity) or have a model (sat);
// 1 some query is not valid or has no model; 2 input error (parse, sort,
// scoping, missing bound); 3 solver error, unknown or timeout;
// 4 the explicit-state oracle exceeded its state cap.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "episcope/benchmarks.hpp"
#include "episcope/oracle.hpp"
#include "episcope/parser.hpp"
#include "episcope/smt.hpp"
#include "episcope/translate.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace episcope;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitCap = 4;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

VerificationTask load(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return parse_task(text);
  } catch (const ParseError& e) {
    throw InputError(path + ":" + e.what());
  }
}

std::vector<Query> selected(const VerificationTask& task,
                            const std::vector<std::string>& names) {
  if (names.empty()) return task.queries;
  std::vector<Query> out;
  for (const std::string& n : names) {
    auto it = std::find_if(task.queries.begin(), task.queries.end(),
                           [&](const Query& q) { return q.name == n; });
    if (it == task.queries.end()) throw InputError("no query named " + n);
    out.push_back(*it);
  }
  return out;
}

IntRange parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw InputError("expected lo..hi, got " + text);
  try {
    std::size_t used = 0;
    const std::string lo = text.substr(0, dots);
    const std::string hi = text.substr(dots + 2);
    IntRange r{std::stoll(lo, &used), 0};
    if (used != lo.size()) throw InputError("bad range " + text);
    r.hi = std::stoll(hi, &used);
    if (used != hi.size()) throw InputError("bad range " + text);
    if (r.hi < r.lo) throw InputError("empty range " + text);
    return r;
  } catch (const std::logic_error&) {
    throw InputError("bad range " + text);
  }
}

std::string status_id(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid: return "Valid";
    case VerdictStatus::Invalid: return "Invalid";
    case VerdictStatus::PuzzleModel: return "PuzzleModel";
    case VerdictStatus::NoModel: return "NoModel";
    case VerdictStatus::Unknown: return "Unknown";
    case VerdictStatus::Timeout: return "Timeout";
    case VerdictStatus::SolverError: return "SolverError";
  }
  return "SolverError";
}

int exit_for(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid:
    case VerdictStatus::PuzzleModel:
      return kExitOk;
    case VerdictStatus::Invalid:
    case VerdictStatus::NoModel:
      return kExitFailed;
    default:
      return kExitSolver;
  }
}

int worse(int a, int b) {
  auto rank = [](int c) { return c == kExitFailed ? 1 : c == kExitOk ? 0 : c; };
  return rank(a) >= rank(b) ? a : b;
}

json state_json(const State& s, const std::vector<Var>& vars) {
  json out = json::object();
  for (const Var& v : vars) {
    auto it = s.find(v.name);
    if (it == s.end()) continue;
    if (v.sort == Sort::Bool) {
      out[v.name] = it->second != 0;
    } else {
      out[v.name] = it->second;
    }
  }
  return out;
}

std::string line_for(const std::string& name, VerdictStatus status,
                     const std::vector<State>& models, const std::vector<Var>& vars,
                     const std::string& message) {
  std::string line = name + ": " + std::string(status_name(status));
  if (status == VerdictStatus::Invalid && !models.empty()) {
    line += "  countermodel " + render_state(models.front(), vars);
  } else if (status == VerdictStatus::PuzzleModel) {
    for (std::size_t i = 0; i < models.size(); ++i) {
      line += (i == 0 ? " " : " | ") + render_state(models[i], vars);
    }
  }
  if (!message.empty()) line += "  (" + message + ")";
  return line;
}

struct SolverFlags {
  std::string solver = "z3";
  std::string solver_path;
  double timeout = 600.0;
  std::string logic;
  bool simplify = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--solver", solver, "z3, cvc5 or generic")
        ->check(CLI::IsMember({"z3", "cvc5", "generic"}));
    cmd->add_option("--solver-path", solver_path,
                    "solver executable (default: $EPISCOPE_SOLVER, then the solver name)");
    cmd->add_option("--timeout", timeout, "seconds per query")->check(CLI::PositiveNumber);
    cmd->add_option("--logic", logic, "SMT-LIB logic (default ALL)");
    cmd->add_flag("--simplify", simplify, "simplify the goal before emission");
  }

  SolverConfig config() const {
    SolverConfig cfg;
    cfg.kind = solver == "cvc5"      ? SolverKind::Cvc5
               : solver == "generic" ? SolverKind::Generic
                                     : SolverKind::Z3;
    cfg.executable = solver_path;
    cfg.timeout_s = timeout;
    if (!logic.empty()) cfg.logic = logic;
    return cfg;
  }
};

std::string artifact_path(const std::string& file, const std::string& query) {
  fs::path p(file);
  return (p.parent_path() / (p.stem().string() + "." + query + ".smt2")).string();
}

// -- verify -----------------------------------------------------------------

int cmd_verify(const std::string& file, const SolverFlags& flags,
               const std::vector<std::string>& names, bool as_json,
               bool keep_artifacts, unsigned jobs) {
  const VerificationTask task = load(file);
  const std::vector<Query> queries = selected(task, names);
  const SolverConfig base = flags.config();

  std::vector<QueryResult> results(queries.size());
  std::vector<std::string> errors(queries.size());
  auto run = [&](std::size_t i) {
    SolverConfig cfg = base;
    if (keep_artifacts) {
      cfg.keep_artifacts = true;
      cfg.artifact_path = artifact_path(file, queries[i].name);
    }
    try {
      results[i] = verify_query(task, queries[i], cfg, flags.simplify);
    } catch (const Error& e) {
      results[i].name = queries[i].name;
      results[i].mode = queries[i].mode;
      results[i].verdict.status = VerdictStatus::SolverError;
      results[i].verdict.message = e.what();
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, queries.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next++) < queries.size();) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  int code = kExitOk;
  json report;
  report["file"] = file;
  report["engine"] = "smt";
  report["solver"] = resolve_executable(base);
  report["queries"] = json::array();
  for (const QueryResult& r : results) {
    code = worse(code, exit_for(r.verdict.status));
    std::vector<State> models;
    if (r.verdict.model) models.push_back(*r.verdict.model);
    if (!as_json) {
      std::cout << line_for(r.name, r.verdict.status, models, task.vars,
                            r.verdict.message)
                << "\n";
    }
    json q;
    q["name"] = r.name;
    q["mode"] = r.mode == QueryMode::Valid ? "valid" : "sat";
    q["status"] = status_id(r.verdict.status);
    q["model"] = r.verdict.model ? state_json(*r.verdict.model, task.vars) : json();
    q["model_sound"] = r.model_sound ? json(*r.model_sound) : json();
    q["translation_s"] = r.translation_s;
    q["solver_s"] = r.verdict.wall_time;
    q["goal_size"] = r.verdict.goal_size;
    q["script_bytes"] = r.script_bytes;
    q["message"] = r.verdict.message;
    report["queries"].push_back(std::move(q));
  }
  report["exit_code"] = code;
  if (as_json) std::cout << report.dump(2) << "\n";
  return code;
}

// -- translate --------------------------------------------------------------

int cmd_translate(const std::string& file, const std::vector<std::string>& names,
                  const std::string& smt2_out, bool timing, bool quiet,
                  bool simplify_goal, const std::string& logic) {
  const VerificationTask task = load(file);
  const std::vector<Query> queries = selected(task, names);
  for (const Query& q : queries) {
    const auto t0 = std::chrono::steady_clock::now();
    Formula goal = query_goal(task, q);
    if (simplify_goal) goal = simplify(goal);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* kind = q.mode == QueryMode::Valid ? "validity" : "satisfiability";
    std::cout << "# " << q.name << " (" << kind << " goal, " << tree_size(goal)
              << " nodes)\n";
    if (!quiet) std::cout << render(goal) << "\n";
    if (timing) std::cout << "# translation: " << seconds << " s\n";
    if (!smt2_out.empty()) {
      EmitOptions options;
      if (!logic.empty()) options.logic = logic;
      std::string path = smt2_out;
      if (queries.size() > 1) {
        fs::path p(smt2_out);
        path = (p.parent_path() / (p.stem().string() + "." + q.name +
                                   p.extension().string()))
                   .string();
      }
      std::ofstream out(path, std::ios::binary);
      if (!out) throw InputError("cannot write " + path);
      out << emit_smtlib(goal, task, options);
      std::cout << "# wrote " << path << "\n";
    }
  }
  return kExitOk;
}

// -- oracle -----------------------------------------------------------------

int cmd_oracle(const std::string& file, const std::string& bound,
               std::size_t cap, const std::vector<std::string>& names, bool as_json) {
  VerificationTask task = load(file);
  if (!bound.empty()) task.bound.int_range = parse_range(bound);
  const std::vector<Query> queries = selected(task, names);
  Oracle oracle = Oracle::for_task(task, cap);
  const EpiModel w = oracle.denotation(task);

  int code = kExitOk;
  json report;
  report["file"] = file;
  report["engine"] = "oracle";
  report["states"] = w.size();
  report["queries"] = json::array();
  for (const Query& q : queries) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<char> ext = oracle.extension(w, q.alpha);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::vector<State> models;
    VerdictStatus status;
    if (q.mode == QueryMode::Valid) {
      for (std::size_t i = 0; i < ext.size() && models.empty(); ++i) {
        if (!ext[i]) models.push_back(w.states()[i]);
      }
      status = models.empty() ? VerdictStatus::Valid : VerdictStatus::Invalid;
    } else {
      for (std::size_t i = 0; i < ext.size(); ++i) {
        if (ext[i]) models.push_back(w.states()[i]);
      }
      status = models.empty() ? VerdictStatus::NoModel : VerdictStatus::PuzzleModel;
    }
    code = worse(code, exit_for(status));
    if (!as_json) std::cout << line_for(q.name, status, models, task.vars, "") << "\n";
    json j;
    j["name"] = q.name;
    j["mode"] = q.mode == QueryMode::Valid ? "valid" : "sat";
    j["status"] = status_id(status);
    j["model"] = models.empty() ? json() : state_json(models.front(), task.vars);
    j["models"] = json::array();
    for (const State& s : models) j["models"].push_back(state_json(s, task.vars));
    j["eval_s"] = seconds;
    report["queries"].push_back(std::move(j));
  }
  report["exit_code"] = code;
  if (as_json) std::cout << report.dump(2) << "\n";
  return code;
}

// -- bench ------------------------------------------------------------------

std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const unsigned long long n = std::stoull(item, &used);
      if (used != item.size()) throw InputError("bad n " + item);
      out.push_back(static_cast<std::size_t>(n));
    } catch (const std::logic_error&) {
      throw InputError("bad n " + item);
    }
  }
  if (out.empty()) throw InputError("empty --n-list");
  return out;
}

std::vector<DcQuery> parse_queries(const std::string& text) {
  std::vector<DcQuery> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    auto q = parse_dc_query(item);
    if (!q) throw InputError("unknown query " + item + " (beta1, beta2, beta3, gamma)");
    out.push_back(*q);
  }
  return out;
}

std::string csv_row(const std::string& bench, const std::string& n,
                    const std::string& query, const QueryResult& r) {
  std::ostringstream os;
  os << bench << ',' << n << ',' << query << ',' << r.translation_s << ','
     << r.verdict.wall_time << ',' << status_name(r.verdict.status);
  return os.str();
}

int cmd_bench(const std::string& which, const std::string& n_list,
              const std::string& query_list, const SolverFlags& flags,
              const std::string& out_path, const std::string& task_dir) {
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) throw InputError("cannot write " + out_path);
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "benchmark,n,query,translation_s,solver_s,verdict\n" << std::flush;
  const SolverConfig cfg = flags.config();

  auto run_row = [&](const std::string& bench, const std::string& n, const std::string& query,
                     const std::string& stem, const std::function<VerificationTask()>& make) {
    QueryResult r;
    r.name = query;
    int row_code = kExitOk;
    try {
      const VerificationTask task = make();
      if (!task_dir.empty()) {
        fs::create_directories(task_dir);
        std::ofstream(fs::path(task_dir) / (stem + ".epi"), std::ios::binary)
            << render_task(task);
      }
      r = verify_query(task, task.queries.front(), cfg, flags.simplify);
      out << csv_row(bench, n, query, r) << "\n" << std::flush;
      if (exit_for(r.verdict.status) == kExitSolver) row_code = kExitSolver;
    } catch (const Error& e) {
      std::cerr << stem << ": " << e.what() << "\n";
      r.verdict.status = VerdictStatus::SolverError;
      out << csv_row(bench, n, query, r) << "\n" << std::flush;
      row_code = dynamic_cast<const SolverError*>(&e) ? kExitSolver : kExitInput;
    }
    return row_code;
  };

  int code = kExitOk;
  if (which == "cheryl") {
    code = worse(code, run_row("cheryl", "", "query", "cheryl", [] { return gen_cheryl(); }));
    return code;
  }
  const auto ns = parse_n_list(n_list);
  const auto qs = parse_queries(query_list);
  for (std::size_t n : ns) {
    for (DcQuery q : qs) {
      const std::string stem = "dc" + std::to_string(n) + "_" + std::string(dc_query_name(q));
      code = worse(code, run_row("dc", std::to_string(n), std::string(dc_query_name(q)), stem,
                                 [n, q] { return gen_dc(n, q); }));
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification of program-epistemic properties via first-order SMT goals"};
  app.require_subcommand(1);

  std::string file;
  std::vector<std::string> names;
  bool as_json = false;

  auto* verify = app.add_subcommand("verify", "decide every query with an SMT solver");
  SolverFlags verify_flags;
  bool keep = false;
  unsigned jobs = 1;
  verify->add_option("file", file, "task file")->required();
  verify->add_option("--query", names, "only these queries");
  verify->add_flag("--json", as_json, "machine-readable report");
  verify->add_flag("--keep-artifacts", keep, "write FILE.QUERY.smt2 beside the task file");
  verify->add_option("--jobs", jobs, "queries decided in parallel")->check(CLI::PositiveNumber);
  verify_flags.add(verify);

  auto* translate = app.add_subcommand("translate", "print the first-order goals");
  std::string smt2;
  std::string logic;
  bool timing = false;
  bool quiet = false;
  bool simplify_goal = false;
  translate->add_option("file", file, "task file")->required();
  translate->add_option("--query", names, "only these queries");
  translate->add_option("--smt2", smt2, "write SMT-LIB to this path");
  translate->add_option("--logic", logic, "SMT-LIB logic (default ALL)");
  translate->add_flag("--time", timing, "report the translation wall time");
  translate->add_flag("--quiet", quiet, "do not print the goal");
  translate->add_flag("--simplify", simplify_goal, "simplify the goal");

  auto* oracle = app.add_subcommand("oracle", "decide every query by state enumeration");
  std::string bound;
  std::size_t cap = kDefaultStateCap;
  oracle->add_option("file", file, "task file")->required();
  oracle->add_option("--query", names, "only these queries");
  oracle->add_option("--bound", bound, "default Int range lo..hi");
  oracle->add_option("--max-states", cap, "state cap");
  oracle->add_flag("--json", as_json, "machine-readable report");

  auto* bench = app.add_subcommand("bench", "time generated case studies, CSV on stdout");
  std::string which;
  std::string n_list = "10,50,100,200";
  std::string query_list = "beta1,beta2,beta3,gamma";
  std::string out_path;
  std::string task_dir;
  SolverFlags bench_flags;
  bench->add_option("benchmark", which, "dc or cheryl")
      ->required()
      ->check(CLI::IsMember({"dc", "cheryl"}));
  bench->add_option("--n-list", n_list, "comma-separated cryptographer counts");
  bench->add_option("--query", query_list, "comma-separated: beta1,beta2,beta3,gamma");
  bench->add_option("--out", out_path, "CSV file (default stdout)");
  bench->add_option("--write-tasks", task_dir, "also write each task as .epi here");
  bench_flags.add(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*verify) return cmd_verify(file, verify_flags, names, as_json, keep, jobs);
    if (*translate) {
      return cmd_translate(file, names, smt2, timing, quiet, simplify_goal, logic);
    }
    if (*oracle) return cmd_oracle(file, bound, cap, names, as_json);
    if (*bench) {
      return cmd_bench(which, n_list, query_list, bench_flags, out_path, task_dir);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const StateCapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCap;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
