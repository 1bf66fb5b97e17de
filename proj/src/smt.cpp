#include "episcope/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <set>
#include <unordered_set>

#include "episcope/translate.hpp"

extern char** environ;

namespace episcope {

std::string_view status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Valid: return "VALID";
    case VerdictStatus::Invalid: return "INVALID";
    case VerdictStatus::PuzzleModel: return "MODEL";
    case VerdictStatus::NoModel: return "NO MODEL";
    case VerdictStatus::Unknown: return "UNKNOWN";
    case VerdictStatus::Timeout: return "TIMEOUT";
    case VerdictStatus::SolverError: return "ERROR";
  }
  return "ERROR";
}

std::string resolve_executable(const SolverConfig& cfg) {
  if (!cfg.executable.empty()) return cfg.executable;
  if (const char* env = std::getenv("EPISCOPE_SOLVER"); env && *env) return env;
  return cfg.kind == SolverKind::Cvc5 ? "cvc5" : "z3";
}

// ---------------------------------------------------------------------------
// Emission

namespace {

constexpr std::string_view kTagSort = "__Tag";
constexpr std::string_view kTagLeft = "__tag_l";
constexpr std::string_view kTagRight = "__tag_r";

std::string symbol(const std::string& name) {
  static const std::unordered_set<std::string> kReserved = {
      "and", "or", "not", "xor", "true", "false", "forall", "exists", "let",
      "par", "as", "ite", "distinct", "mod", "div", "abs", "match", "Int",
      "Bool", "Real", "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING",
      "assert", "check-sat", "declare-fun", "declare-const", "define-fun",
      "push", "pop", "exit", "to_real", "to_int", "is_int"};
  if (kReserved.contains(name)) return "|" + name + "|";
  return name;
}

std::string_view smt_sort(Sort s) {
  switch (s) {
    case Sort::Bool: return "Bool";
    case Sort::Int: return "Int";
    case Sort::ChoiceTag: return kTagSort;
  }
  return "Int";
}

void int_literal(std::int64_t v, std::string& out) {
  if (v >= 0) {
    out += std::to_string(v);
    return;
  }
  std::uint64_t mag = std::uint64_t{0} - static_cast<std::uint64_t>(v);
  out += "(- ";
  out += std::to_string(mag);
  out += ')';
}

struct Emitter {
  std::size_t threshold = 64;
  bool uses_tag = false;
  std::unordered_map<const FormulaNode*, std::size_t> refs;
  std::unordered_map<const FormulaNode*, std::size_t> sizes;
  std::unordered_map<const FormulaNode*, VarSet> shared_fv;
  std::unordered_map<const FormulaNode*, std::string> macro_call;
  std::string defs;
  std::size_t next_macro = 0;

  static std::size_t sat_add(std::size_t a, std::size_t b) {
    return a > std::numeric_limits<std::size_t>::max() - b
               ? std::numeric_limits<std::size_t>::max()
               : a + b;
  }

  static std::size_t term_size(const Term& t) {
    std::size_t n = 1;
    if (t.arity() >= 1) n += term_size(t.lhs());
    if (t.arity() == 2) n += term_size(t.rhs());
    return n;
  }

  static void children(const Formula& f, std::vector<const Formula*>& out) {
    switch (f.kind()) {
      case FormulaKind::Not:
      case FormulaKind::Forall:
        out.push_back(&f.body());
        break;
      case FormulaKind::And:
        for (const Formula& g : f.operands()) out.push_back(&g);
        break;
      default:
        break;
    }
  }

  void check_fo(const Formula& f) const {
    switch (f.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
      case FormulaKind::Holds:
      case FormulaKind::Not:
      case FormulaKind::And:
      case FormulaKind::Forall:
        return;
      default:
        throw FragmentError("SMT-LIB emission expects a first-order goal");
    }
  }

  std::size_t count(const Formula& f) {
    if (auto it = sizes.find(f.id()); it != sizes.end()) return it->second;
    check_fo(f);
    std::size_t n = 1;
    if (f.is_atom()) {
      n = sat_add(n, term_size(f.lhs_term()));
      if (f.kind() != FormulaKind::Holds) n = sat_add(n, term_size(f.rhs_term()));
    }
    std::vector<const Formula*> kids;
    children(f, kids);
    for (const Formula* c : kids) {
      ++refs[c->id()];
      n = sat_add(n, count(*c));
    }
    sizes.emplace(f.id(), n);
    return n;
  }

  bool shared(const Formula& f) const {
    auto r = refs.find(f.id());
    return r != refs.end() && r->second >= 2 && sizes.at(f.id()) >= threshold;
  }

  static void term_vars(const Term& t, VarSet& out) {
    if (t.op() == TermOp::Var) {
      out.insert(t.variable());
      return;
    }
    if (t.arity() >= 1) term_vars(t.lhs(), out);
    if (t.arity() == 2) term_vars(t.rhs(), out);
  }

  VarSet fv(const Formula& f) {
    if (auto it = shared_fv.find(f.id()); it != shared_fv.end()) return it->second;
    VarSet out;
    switch (f.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
        term_vars(f.lhs_term(), out);
        term_vars(f.rhs_term(), out);
        break;
      case FormulaKind::Holds:
        term_vars(f.lhs_term(), out);
        break;
      case FormulaKind::Not:
        out = fv(f.body());
        break;
      case FormulaKind::And:
        for (const Formula& g : f.operands()) {
          VarSet sub = fv(g);
          out.merge(sub);
        }
        break;
      case FormulaKind::Forall: {
        out = fv(f.body());
        const std::string& name = f.bound_var().name;
        for (auto it = out.begin(); it != out.end();) {
          it = it->name == name ? out.erase(it) : std::next(it);
        }
        break;
      }
      default:
        break;
    }
    if (shared(f)) shared_fv.emplace(f.id(), out);
    return out;
  }

  void term(const Term& t, std::string& out) {
    switch (t.op()) {
      case TermOp::IntConst:
        int_literal(t.value(), out);
        return;
      case TermOp::BoolConst:
        out += t.value() != 0 ? "true" : "false";
        return;
      case TermOp::TagConst:
        uses_tag = true;
        out += t.value() == 0 ? kTagLeft : kTagRight;
        return;
      case TermOp::Var:
        if (t.variable().sort == Sort::ChoiceTag) uses_tag = true;
        out += symbol(t.variable().name);
        return;
      case TermOp::Neg:
        out += "(- ";
        term(t.lhs(), out);
        out += ')';
        return;
      case TermOp::Not:
        out += "(not ";
        term(t.lhs(), out);
        out += ')';
        return;
      default:
        break;
    }
    std::string_view op;
    switch (t.op()) {
      case TermOp::Add: op = "+"; break;
      case TermOp::Sub: op = "-"; break;
      case TermOp::Mul: op = "*"; break;
      case TermOp::Mod: op = "mod"; break;
      case TermOp::And: op = "and"; break;
      case TermOp::Or: op = "or"; break;
      case TermOp::Xor: op = "xor"; break;
      default: op = "?"; break;
    }
    out += '(';
    out += op;
    out += ' ';
    term(t.lhs(), out);
    out += ' ';
    term(t.rhs(), out);
    out += ')';
  }

  void formula(const Formula& f, std::string& out) {
    if (shared(f)) {
      auto it = macro_call.find(f.id());
      if (it == macro_call.end()) {
        define(f);
        it = macro_call.find(f.id());
      }
      out += it->second;
      return;
    }
    body(f, out);
  }

  void define(const Formula& f) {
    const std::string name = "__d" + std::to_string(next_macro++);
    const VarSet params = fv(f);
    std::string text;
    body(f, text);
    std::string def = "(define-fun " + name + " (";
    std::string call = params.empty() ? name : "(" + name;
    bool first = true;
    for (const Var& v : params) {
      if (v.sort == Sort::ChoiceTag) uses_tag = true;
      if (!first) def += ' ';
      first = false;
      def += "(" + symbol(v.name) + " " + std::string(smt_sort(v.sort)) + ")";
      call += " " + symbol(v.name);
    }
    if (!params.empty()) call += ")";
    def += ") Bool\n  " + text + ")\n";
    defs += def;
    macro_call.emplace(f.id(), std::move(call));
  }

  void body(const Formula& f, std::string& out) {
    switch (f.kind()) {
      case FormulaKind::Eq:
        out += "(= ";
        term(f.lhs_term(), out);
        out += ' ';
        term(f.rhs_term(), out);
        out += ')';
        return;
      case FormulaKind::Lt:
        out += "(< ";
        term(f.lhs_term(), out);
        out += ' ';
        term(f.rhs_term(), out);
        out += ')';
        return;
      case FormulaKind::Holds:
        term(f.lhs_term(), out);
        return;
      case FormulaKind::Not:
        out += "(not ";
        formula(f.body(), out);
        out += ')';
        return;
      case FormulaKind::And:
        out += "(and";
        for (const Formula& g : f.operands()) {
          out += ' ';
          formula(g, out);
        }
        out += ')';
        return;
      case FormulaKind::Forall: {
        out += "(forall (";
        std::set<std::string> names;
        const Formula* cur = &f;
        bool first = true;
        while (cur->kind() == FormulaKind::Forall &&
               !names.contains(cur->bound_var().name) &&
               (cur == &f || !shared(*cur))) {
          const Var& v = cur->bound_var();
          if (v.sort == Sort::ChoiceTag) uses_tag = true;
          names.insert(v.name);
          if (!first) out += ' ';
          first = false;
          out += "(" + symbol(v.name) + " " + std::string(smt_sort(v.sort)) + ")";
          cur = &cur->body();
        }
        out += ") ";
        formula(*cur, out);
        out += ')';
        return;
      }
      default:
        throw FragmentError("SMT-LIB emission expects a first-order goal");
    }
  }
};

}  // namespace

std::string emit_smtlib(const Formula& goal, const VerificationTask& task,
                        const EmitOptions& options) {
  Emitter e;
  e.threshold = options.share_threshold;
  e.count(goal);
  for (const Formula& f : options.extra) e.count(f);

  std::string assertion;
  e.formula(goal, assertion);
  std::vector<std::string> extra;
  for (const Formula& f : options.extra) {
    std::string text;
    e.formula(f, text);
    extra.push_back(std::move(text));
  }

  std::vector<Var> decls = task.vars;
  std::set<std::string> declared;
  for (const Var& v : decls) declared.insert(v.name);
  VarSet goal_fv = e.fv(goal);
  for (const Formula& f : options.extra) goal_fv.merge(e.fv(f));
  for (const Var& v : goal_fv) {
    if (declared.insert(v.name).second) decls.push_back(v);
  }
  for (const Var& v : decls) {
    if (v.sort == Sort::ChoiceTag) e.uses_tag = true;
  }

  std::string out;
  out += "(set-option :produce-models true)\n";
  out += "(set-logic " + options.logic.value_or("ALL") + ")\n";
  if (e.uses_tag) {
    out += "(declare-datatype " + std::string(kTagSort) + " ((" +
           std::string(kTagLeft) + ") (" + std::string(kTagRight) + ")))\n";
  }
  for (const Var& v : decls) {
    out += "(declare-const " + symbol(v.name) + " " +
           std::string(smt_sort(v.sort)) + ")\n";
  }
  out += e.defs;
  out += "(assert " + assertion + ")\n";
  for (const std::string& text : extra) out += "(assert " + text + ")\n";
  out += "(check-sat)\n";
  if (options.get_model) out += "(get-model)\n";
  return out;
}

// ---------------------------------------------------------------------------
// Process

namespace {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_s) {
  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0) throw SolverError("pipe failed");
  if (pipe(err_pipe) != 0) {
    close(out_pipe[0]);
    close(out_pipe[1]);
    throw SolverError("pipe failed");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 0, "/dev/null", O_RDONLY, 0);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], 1);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], 2);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  posix_spawn_file_actions_addclose(&actions, err_pipe[0]);

  std::vector<char*> args;
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(out_pipe[1]);
  close(err_pipe[1]);
  if (rc != 0) {
    close(out_pipe[0]);
    close(err_pipe[0]);
    throw SolverError("cannot start solver '" + argv[0] + "': " + std::strerror(rc));
  }

  ProcessResult result;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(timeout_s);
  pollfd fds[2] = {{out_pipe[0], POLLIN, 0}, {err_pipe[0], POLLIN, 0}};
  int open_fds = 2;
  char buf[65536];
  while (open_fds > 0) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      result.timed_out = true;
      break;
    }
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int ready = poll(fds, 2, static_cast<int>(std::min<long long>(left + 1, 1000)));
    if (ready < 0) {
      if (errno == EINTR) continue;
      break;
    }
    for (int i = 0; i < 2; ++i) {
      if (fds[i].fd < 0 || (fds[i].revents & (POLLIN | POLLHUP | POLLERR)) == 0) {
        continue;
      }
      const ssize_t n = read(fds[i].fd, buf, sizeof buf);
      if (n > 0) {
        (i == 0 ? result.out : result.err).append(buf, static_cast<std::size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EINTR && errno != EAGAIN)) {
        close(fds[i].fd);
        fds[i].fd = -1;
        --open_fds;
      }
    }
  }
  if (result.timed_out) kill(pid, SIGKILL);
  for (auto& fd : fds) {
    if (fd.fd >= 0) close(fd.fd);
  }
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

class TempFile {
 public:
  explicit TempFile(const std::string& contents) {
    std::string pattern =
        (std::filesystem::temp_directory_path() / "episcope-XXXXXX.smt2").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    const int fd = mkstemps(buf.data(), 5);
    if (fd < 0) throw SolverError("cannot create a temporary file");
    path_ = buf.data();
    std::size_t done = 0;
    while (done < contents.size()) {
      const ssize_t n = write(fd, contents.data() + done, contents.size() - done);
      if (n <= 0) {
        close(fd);
        throw SolverError("cannot write the temporary file");
      }
      done += static_cast<std::size_t>(n);
    }
    close(fd);
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// -- S-expressions ----------------------------------------------------------

struct Sexp {
  std::string atom;
  std::vector<Sexp> list;
  bool is_list = false;
};

class SexpReader {
 public:
  explicit SexpReader(std::string_view text) : text_(text) {}

  std::vector<Sexp> all() {
    std::vector<Sexp> out;
    for (;;) {
      skip();
      if (pos_ >= text_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  void skip() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  Sexp read() {
    skip();
    if (pos_ >= text_.size()) throw SolverError("unexpected end of solver output");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Sexp s;
      s.is_list = true;
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw SolverError("unbalanced solver output");
        if (text_[pos_] == ')') {
          ++pos_;
          return s;
        }
        s.list.push_back(read());
      }
    }
    if (c == ')') throw SolverError("unbalanced solver output");
    Sexp s;
    if (c == '|') {
      const std::size_t end = text_.find('|', pos_ + 1);
      if (end == std::string_view::npos) throw SolverError("unterminated symbol");
      s.atom = std::string(text_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return s;
    }
    if (c == '"') {
      std::size_t end = pos_ + 1;
      while (end < text_.size()) {
        if (text_[end] == '"') {
          if (end + 1 < text_.size() && text_[end + 1] == '"') {
            end += 2;
            continue;
          }
          break;
        }
        ++end;
      }
      s.atom = std::string(text_.substr(pos_, end + 1 - pos_));
      pos_ = std::min(end + 1, text_.size());
      return s;
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    s.atom = std::string(text_.substr(start, pos_ - start));
    return s;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::optional<Value> sexp_value(const Sexp& s) {
  if (!s.is_list) {
    if (s.atom == "true") return 1;
    if (s.atom == "false") return 0;
    if (s.atom == kTagLeft) return 0;
    if (s.atom == kTagRight) return 1;
    Value v = 0;
    const char* begin = s.atom.data();
    const char* end = begin + s.atom.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec == std::errc() && ptr == end) return v;
    return std::nullopt;
  }
  if (s.list.size() == 2 && !s.list[0].is_list && s.list[0].atom == "-") {
    if (auto inner = sexp_value(s.list[1])) {
      return static_cast<Value>(std::uint64_t{0} - static_cast<std::uint64_t>(*inner));
    }
  }
  return std::nullopt;
}

void collect_defs(const Sexp& s, std::map<std::string, Value>& out) {
  if (!s.is_list) return;
  if (s.list.size() == 5 && !s.list[0].is_list && s.list[0].atom == "define-fun" &&
      !s.list[1].is_list && s.list[2].is_list && s.list[2].list.empty()) {
    if (auto v = sexp_value(s.list[4])) out[s.list[1].atom] = *v;
    return;
  }
  for (const Sexp& c : s.list) collect_defs(c, out);
}

std::string first_line(const std::string& text) {
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
      line.pop_back();
    }
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) {
      line.erase(line.begin());
    }
    if (!line.empty()) return line;
    start = end + 1;
  }
  return "";
}

}  // namespace

Verdict run_solver(const std::string& script, const SolverConfig& cfg,
                   GoalMode mode, const VerificationTask& task) {
  if (cfg.timeout_s <= 0) throw SolverError("the solver timeout must be positive");
  if (cfg.keep_artifacts && !cfg.artifact_path.empty()) {
    std::ofstream out(cfg.artifact_path, std::ios::binary);
    out << script;
  }
  TempFile file(script);
  const std::string exe = resolve_executable(cfg);
  std::vector<std::string> argv{exe};
  switch (cfg.kind) {
    case SolverKind::Z3:
      argv.push_back("-smt2");
      break;
    case SolverKind::Cvc5:
      argv.push_back("--lang=smt2");
      break;
    case SolverKind::Generic:
      break;
  }
  argv.push_back(file.path());

  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  ProcessResult pr;
  try {
    pr = run_process(argv, cfg.timeout_s);
  } catch (const SolverError& e) {
    v.status = VerdictStatus::SolverError;
    v.message = e.what();
    return v;
  }
  v.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.raw_output = pr.out;
  if (!pr.err.empty()) v.raw_output += pr.err;
  if (pr.timed_out) {
    v.status = VerdictStatus::Timeout;
    v.message = "no answer within " + std::to_string(cfg.timeout_s) + " s";
    return v;
  }
  const std::string status = first_line(pr.out);
  if (status == "unsat") {
    v.status = mode == GoalMode::Validity ? VerdictStatus::Valid
                                          : VerdictStatus::NoModel;
    return v;
  }
  if (status == "unknown") {
    v.status = VerdictStatus::Unknown;
    return v;
  }
  if (status != "sat") {
    v.status = VerdictStatus::SolverError;
    v.message = "unexpected solver output (exit code " +
                std::to_string(pr.exit_code) + ")";
    return v;
  }
  if (pr.exit_code != 0) {
    v.status = VerdictStatus::SolverError;
    v.message = "solver exited with code " + std::to_string(pr.exit_code) +
                " after reporting sat";
    return v;
  }
  std::map<std::string, Value> defs;
  try {
    SexpReader reader(std::string_view(pr.out).substr(pr.out.find("sat") + 3));
    for (const Sexp& s : reader.all()) collect_defs(s, defs);
  } catch (const SolverError& e) {
    v.status = VerdictStatus::SolverError;
    v.message = std::string("cannot parse the model: ") + e.what();
    return v;
  }
  State model;
  for (const Var& var : task.vars) {
    auto it = defs.find(var.name);
    model[var.name] = it == defs.end() ? 0 : it->second;
  }
  v.model = std::move(model);
  v.status = mode == GoalMode::Validity ? VerdictStatus::Invalid
                                        : VerdictStatus::PuzzleModel;
  return v;
}

// ---------------------------------------------------------------------------
// Models

namespace {

void term_constants(const Term& t, std::vector<Value>& out) {
  if (t.op() == TermOp::IntConst) out.push_back(t.value());
  if (t.arity() >= 1) term_constants(t.lhs(), out);
  if (t.arity() == 2) term_constants(t.rhs(), out);
}

void formula_constants(const Formula& f, std::vector<Value>& out,
                       std::unordered_set<const FormulaNode*>& seen) {
  if (!seen.insert(f.id()).second) return;
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
      term_constants(f.lhs_term(), out);
      term_constants(f.rhs_term(), out);
      return;
    case FormulaKind::Holds:
      term_constants(f.lhs_term(), out);
      return;
    case FormulaKind::Not:
    case FormulaKind::Forall:
      formula_constants(f.body(), out, seen);
      return;
    case FormulaKind::And:
      for (const Formula& g : f.operands()) formula_constants(g, out, seen);
      return;
    default:
      return;
  }
}

}  // namespace

DomainBound soundness_bound(const VerificationTask& task, const Formula& goal,
                            const State& model) {
  std::vector<Value> values;
  std::unordered_set<const FormulaNode*> seen;
  formula_constants(goal, values, seen);
  DomainBound b = task.bound;
  for (const Var& v : task.vars) {
    if (v.sort != Sort::Int) continue;
    auto it = model.find(v.name);
    if (it == model.end()) continue;
    values.push_back(it->second);
    if (auto r = b.per_var.find(v.name); r != b.per_var.end()) {
      r->second.lo = std::min(r->second.lo, it->second);
      r->second.hi = std::max(r->second.hi, it->second);
    }
  }
  if (b.int_range) {
    values.push_back(b.int_range->lo);
    values.push_back(b.int_range->hi);
  }
  if (values.empty()) values.push_back(0);
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  IntRange r{*lo, *hi};
  if (r.lo > std::numeric_limits<Value>::min()) --r.lo;
  if (r.hi < std::numeric_limits<Value>::max()) ++r.hi;
  b.int_range = r;
  return b;
}

bool model_satisfies(const VerificationTask& task, const Formula& goal,
                     const State& model) {
  return eval_fo(model, goal, soundness_bound(task, goal, model));
}

std::vector<State> enumerate_models(const Formula& goal,
                                    const VerificationTask& task,
                                    const SolverConfig& cfg, std::size_t limit) {
  std::vector<State> found;
  EmitOptions options;
  options.logic = cfg.logic;
  while (found.size() < limit) {
    const std::string script = emit_smtlib(goal, task, options);
    Verdict v = run_solver(script, cfg, GoalMode::Satisfiability, task);
    if (v.status == VerdictStatus::NoModel) break;
    if (v.status != VerdictStatus::PuzzleModel || !v.model) {
      throw SolverError("model enumeration stopped: " +
                        std::string(status_name(v.status)) +
                        (v.message.empty() ? "" : " (" + v.message + ")"));
    }
    std::vector<Formula> same;
    for (const Var& var : task.vars) {
      const Value value = v.model->at(var.name);
      Term c = var.sort == Sort::Bool ? Term::boolean(value != 0)
                                      : Term::integer(value);
      same.push_back(Formula::eq(Term::var(var), c));
    }
    options.extra.push_back(Formula::negate(Formula::conj(std::move(same))));
    found.push_back(std::move(*v.model));
  }
  return found;
}

QueryResult verify_query(const VerificationTask& task, const Query& query,
                         const SolverConfig& cfg, bool simplify_goal) {
  QueryResult r;
  r.name = query.name;
  r.mode = query.mode;
  const auto t0 = std::chrono::steady_clock::now();
  Formula goal = query_goal(task, query);
  if (simplify_goal) goal = simplify(goal);
  EmitOptions options;
  options.logic = cfg.logic;
  const std::string script = emit_smtlib(goal, task, options);
  r.translation_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.script_bytes = script.size();
  const GoalMode mode = query.mode == QueryMode::Valid ? GoalMode::Validity
                                                       : GoalMode::Satisfiability;
  r.verdict = run_solver(script, cfg, mode, task);
  r.verdict.goal_size = tree_size(goal);
  if (r.verdict.model) {
    constexpr std::size_t kCheckBudget = 50'000'000;
    r.model_sound = eval_fo_bounded(*r.verdict.model, goal,
                                    soundness_bound(task, goal, *r.verdict.model),
                                    kCheckBudget);
  }
  return r;
}

}  // namespace episcope
