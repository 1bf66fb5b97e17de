#include "episcope/oracle.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>

namespace episcope {

// ---------------------------------------------------------------------------
// Domains and first-order evaluation

std::vector<Value> domain_of(const Var& v, const DomainBound& bound) {
  if (v.sort != Sort::Int) return {0, 1};
  const IntRange* r = nullptr;
  if (auto it = bound.per_var.find(v.name); it != bound.per_var.end()) {
    r = &it->second;
  } else if (bound.int_range) {
    r = &*bound.int_range;
  }
  if (r == nullptr) {
    throw WellFormednessError("Int variable " + v.name +
                              " has no range; declare one with 'range' or "
                              "give a default with 'bound' / --bound");
  }
  std::vector<Value> out;
  out.reserve(r->size());
  for (Value x = r->lo;; ++x) {
    out.push_back(x);
    if (x == r->hi) break;
  }
  return out;
}

namespace {

Value wrap(std::uint64_t x) { return static_cast<Value>(x); }

Value euclid_mod(Value a, Value b) {
  if (b == 0) return a;
  if (b == -1) return 0;
  Value r = a % b;
  if (r < 0) r = b > 0 ? r + b : r - b;
  return r;
}

}  // namespace

Value eval_term(const Term& t, const State& s) {
  switch (t.op()) {
    case TermOp::IntConst:
    case TermOp::BoolConst:
    case TermOp::TagConst:
      return t.value();
    case TermOp::Var: {
      auto it = s.find(t.variable().name);
      if (it == s.end()) {
        throw WellFormednessError("variable " + t.variable().name +
                                  " is not in the domain of the state");
      }
      return it->second;
    }
    case TermOp::Neg:
      return wrap(std::uint64_t{0} - static_cast<std::uint64_t>(eval_term(t.lhs(), s)));
    case TermOp::Not:
      return eval_term(t.lhs(), s) == 0 ? 1 : 0;
    default:
      break;
  }
  const Value a = eval_term(t.lhs(), s);
  const Value b = eval_term(t.rhs(), s);
  const auto ua = static_cast<std::uint64_t>(a);
  const auto ub = static_cast<std::uint64_t>(b);
  switch (t.op()) {
    case TermOp::Add: return wrap(ua + ub);
    case TermOp::Sub: return wrap(ua - ub);
    case TermOp::Mul: return wrap(ua * ub);
    case TermOp::Mod: return euclid_mod(a, b);
    case TermOp::And: return (a != 0 && b != 0) ? 1 : 0;
    case TermOp::Or: return (a != 0 || b != 0) ? 1 : 0;
    case TermOp::Xor: return ((a != 0) != (b != 0)) ? 1 : 0;
    default: return 0;
  }
}

namespace {

bool eval_atom(const Formula& f, const State& s) {
  switch (f.kind()) {
    case FormulaKind::Eq:
      return eval_term(f.lhs_term(), s) == eval_term(f.rhs_term(), s);
    case FormulaKind::Lt:
      return eval_term(f.lhs_term(), s) < eval_term(f.rhs_term(), s);
    case FormulaKind::Holds:
      return eval_term(f.lhs_term(), s) != 0;
    default:
      throw FragmentError("not an atom");
  }
}

struct FoEval {
  const DomainBound& bound;
  std::size_t budget;

  bool run(const Formula& f, State& env) {
    if (budget == 0) throw BudgetExhausted{};
    --budget;
    switch (f.kind()) {
      case FormulaKind::Eq:
      case FormulaKind::Lt:
      case FormulaKind::Holds:
        return eval_atom(f, env);
      case FormulaKind::Not:
        return !run(f.body(), env);
      case FormulaKind::And:
        for (const Formula& g : f.operands()) {
          if (!run(g, env)) return false;
        }
        return true;
      case FormulaKind::Forall: {
        const Var& x = f.bound_var();
        std::optional<Value> saved;
        if (auto it = env.find(x.name); it != env.end()) saved = it->second;
        bool result = true;
        for (Value d : domain_of(x, bound)) {
          env[x.name] = d;
          if (!run(f.body(), env)) {
            result = false;
            break;
          }
        }
        if (saved) {
          env[x.name] = *saved;
        } else {
          env.erase(x.name);
        }
        return result;
      }
      default:
        throw FragmentError("eval_fo expects a first-order formula");
    }
  }

  struct BudgetExhausted {};
};

}  // namespace

bool eval_fo(const State& s, const Formula& phi, const DomainBound& bound) {
  State env = s;
  FoEval e{bound, std::numeric_limits<std::size_t>::max()};
  return e.run(phi, env);
}

std::optional<bool> eval_fo_bounded(const State& s, const Formula& phi,
                                    const DomainBound& bound,
                                    std::size_t max_steps) {
  State env = s;
  FoEval e{bound, max_steps};
  try {
    return e.run(phi, env);
  } catch (const FoEval::BudgetExhausted&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Models

EpiModel::EpiModel() : data_(std::make_shared<const ModelData>()) {}

EpiModel::EpiModel(std::vector<Var> vars, std::vector<State> states) {
  auto data = std::make_shared<ModelData>();
  for (Var& v : vars) {
    std::string name = v.name;
    data->vars.emplace(std::move(name), std::move(v));
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  for (const State& s : states) {
    for (const auto& [name, value] : s) {
      if (!data->vars.contains(name)) {
        throw WellFormednessError("state mentions undeclared variable " + name);
      }
    }
  }
  data->states = std::move(states);
  data_ = std::move(data);
}

const std::vector<State>& EpiModel::states() const& { return data_->states; }
std::vector<State> EpiModel::states() const&& { return data_->states; }
std::size_t EpiModel::size() const { return data_->states.size(); }
const std::map<std::string, Var>& EpiModel::vars() const { return data_->vars; }

std::set<std::string> EpiModel::dom() const {
  std::set<std::string> out;
  for (const auto& [name, v] : data_->vars) out.insert(name);
  return out;
}

std::size_t EpiModel::index_of(const State& s) const {
  const auto& st = data_->states;
  auto it = std::lower_bound(st.begin(), st.end(), s);
  if (it == st.end() || *it != s) return st.size();
  return static_cast<std::size_t>(it - st.begin());
}

bool EpiModel::contains(const State& s) const { return index_of(s) < size(); }

bool EpiModel::indistinguishable(const Agent& a, const State& s,
                                 const State& t) const {
  auto observed = [&](const std::string& name) {
    auto it = data_->vars.find(name);
    return it != data_->vars.end() && it->second.observed_by(a);
  };
  for (const auto& [name, value] : s) {
    if (!observed(name)) continue;
    auto it = t.find(name);
    if (it == t.end() || it->second != value) return false;
  }
  for (const auto& [name, value] : t) {
    if (observed(name) && !s.contains(name)) return false;
  }
  return true;
}

bool operator==(const EpiModel& a, const EpiModel& b) {
  return a.data_ == b.data_ || a.data_->states == b.data_->states;
}

// ---------------------------------------------------------------------------
// Oracle

struct PlanNode {
  ProgramKind kind;
  std::optional<Formula> test;
  Var var;  // assignment target or declared variable
  std::optional<Term> rhs;
  Var fresh;  // memory variable of an assignment, tag of a choice
  std::shared_ptr<const PlanNode> first;
  std::shared_ptr<const PlanNode> second;
};

struct Oracle::Image {
  std::shared_ptr<const PlanNode> node;
  EpiModel context;
  std::vector<std::vector<State>> per_state;
  EpiModel post;
};

struct Oracle::Cache {
  using Key = std::pair<const void*, const void*>;

  struct ExtEntry {
    EpiModel model;
    Formula formula;
    std::vector<char> values;
  };
  struct DerivedModel {
    EpiModel source;
    std::optional<Formula> formula;
    EpiModel result;
  };
  struct BoxEntry {
    EpiModel model;
    Formula formula;
    std::shared_ptr<const PlanNode> plan;
  };
  struct ForwardEntry {
    std::shared_ptr<const PlanNode> node;
    EpiModel source;
    EpiModel result;
  };

  std::map<Key, ExtEntry> ext;
  std::map<Key, DerivedModel> sub;
  std::map<std::pair<const void*, std::string>, DerivedModel> extended;
  std::map<Key, BoxEntry> box;
  std::map<Key, Image> images;
  std::map<Key, ForwardEntry> forward;
  std::map<Key, std::pair<EpiModel, Formula>> prepared;
  std::map<Key, Formula> expanded;

  using PlanKey = std::tuple<const void*, const void*, std::set<std::string>>;
  struct PlanEntry {
    EpiModel model;
    Program program;
    std::shared_ptr<const PlanNode> plan;
  };
  std::map<PlanKey, PlanEntry> plans;
};

Oracle::Oracle(AgentSet agents, DomainBound bound, std::size_t max_states)
    : agents_(std::move(agents)),
      bound_(std::move(bound)),
      max_states_(max_states),
      cache_(std::make_unique<Cache>()) {}

Oracle::~Oracle() = default;
Oracle::Oracle(Oracle&&) noexcept = default;
Oracle& Oracle::operator=(Oracle&&) noexcept = default;

Oracle Oracle::for_task(const VerificationTask& task, std::size_t max_states) {
  return Oracle(AgentSet(task.agents.begin(), task.agents.end()), task.bound,
                max_states);
}

void Oracle::clear_cache() { cache_ = std::make_unique<Cache>(); }

void Oracle::check_cap(std::size_t n) const {
  if (n > max_states_) throw StateCapExceeded(n, max_states_);
}

EpiModel Oracle::make_model(std::map<std::string, Var> vars,
                            std::vector<State> states) const {
  check_cap(states.size());
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  auto data = std::make_shared<ModelData>();
  for (const State& s : states) {
    for (const auto& [name, value] : s) {
      if (data->vars.contains(name)) continue;
      auto it = vars.find(name);
      if (it == vars.end()) {
        throw WellFormednessError("internal: unregistered variable " + name);
      }
      data->vars.emplace(name, it->second);
    }
  }
  data->states = std::move(states);
  return EpiModel(std::shared_ptr<const ModelData>(std::move(data)));
}

EpiModel Oracle::universe(const std::vector<Var>& vars) const {
  std::size_t count = 1;
  std::vector<std::vector<Value>> domains;
  for (const Var& v : vars) {
    domains.push_back(domain_of(v, bound_));
    const std::size_t d = domains.back().size();
    if (count > std::numeric_limits<std::size_t>::max() / d) {
      throw StateCapExceeded(std::numeric_limits<std::size_t>::max(),
                             max_states_);
    }
    count *= d;
  }
  check_cap(count);
  std::vector<State> states{State{}};
  for (std::size_t i = 0; i < vars.size(); ++i) {
    std::vector<State> next;
    next.reserve(states.size() * domains[i].size());
    for (const State& s : states) {
      for (Value d : domains[i]) {
        State t = s;
        t.emplace(vars[i].name, d);
        next.push_back(std::move(t));
      }
    }
    states = std::move(next);
  }
  std::map<std::string, Var> registry;
  for (const Var& v : vars) registry.emplace(v.name, v);
  return make_model(std::move(registry), std::move(states));
}

EpiModel Oracle::restrict_fo(const EpiModel& w, const Formula& phi) const {
  std::vector<State> kept;
  for (const State& s : w.states()) {
    if (eval_fo(s, phi, bound_)) kept.push_back(s);
  }
  return make_model(w.vars(), std::move(kept));
}

EpiModel Oracle::denotation(const VerificationTask& task) const {
  return restrict_fo(universe(task.vars), task.phi);
}

EpiModel Oracle::submodel(const EpiModel& w, const std::vector<char>& keep) const {
  std::vector<State> kept;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (keep[i]) kept.push_back(w.states()[i]);
  }
  return make_model(w.vars(), std::move(kept));
}

EpiModel Oracle::extend(const EpiModel& w, const Var& x) const {
  if (w.vars().contains(x.name)) {
    throw WellFormednessError("variable " + x.name +
                              " is already in the domain of the model");
  }
  const std::vector<Value> domain = domain_of(x, bound_);
  if (!w.empty() && domain.size() > max_states_ / w.size()) {
    throw StateCapExceeded(w.size() * domain.size(), max_states_);
  }
  std::vector<State> states;
  states.reserve(w.size() * domain.size());
  for (const State& s : w.states()) {
    for (Value d : domain) {
      State t = s;
      t.emplace(x.name, d);
      states.push_back(std::move(t));
    }
  }
  std::map<std::string, Var> registry = w.vars();
  registry.emplace(x.name, x);
  return make_model(std::move(registry), std::move(states));
}

namespace {

std::string var_key(const Var& v) {
  std::string key = v.name;
  key += '|';
  key += sort_name(v.sort);
  for (const Agent& a : v.observers) {
    key += '|';
    key += a;
  }
  return key;
}

void collect_test_names(const Program& p, std::set<std::string>& out) {
  switch (p.kind()) {
    case ProgramKind::Test: {
      std::set<std::string> names = all_names(p.test_formula());
      out.insert(names.begin(), names.end());
      return;
    }
    case ProgramKind::Assign:
      return;
    case ProgramKind::New:
      collect_test_names(p.first(), out);
      return;
    case ProgramKind::Seq:
    case ProgramKind::Choice:
      collect_test_names(p.first(), out);
      collect_test_names(p.second(), out);
      return;
  }
}

struct Planner {
  const AgentSet& agents;
  NameSupply names;
  std::set<std::string> taken;

  std::shared_ptr<const PlanNode> run(const Program& p) {
    auto node = std::make_shared<PlanNode>();
    node->kind = p.kind();
    switch (p.kind()) {
      case ProgramKind::Test:
        node->test = expand_sugar(p.test_formula(), names);
        break;
      case ProgramKind::Assign:
        node->var = p.variable();
        node->rhs = p.rhs();
        node->fresh = names.fresh("k", p.variable().observers, p.variable().sort);
        taken.insert(node->fresh.name);
        break;
      case ProgramKind::New: {
        const Var& k = p.variable();
        if (taken.contains(k.name)) {
          Var renamed = names.fresh(k.name, k.observers, k.sort);
          Program body = substitute(p.first(), k, Term::var(renamed), names);
          node->var = renamed;
          taken.insert(renamed.name);
          node->first = run(body);
        } else {
          node->var = k;
          taken.insert(k.name);
          node->first = run(p.first());
        }
        break;
      }
      case ProgramKind::Seq:
        node->first = run(p.first());
        node->second = run(p.second());
        break;
      case ProgramKind::Choice:
        node->fresh = names.fresh("c", agents, Sort::ChoiceTag);
        taken.insert(node->fresh.name);
        node->first = run(p.first());
        node->second = run(p.second());
        break;
    }
    return node;
  }
};

}  // namespace

std::shared_ptr<const PlanNode> Oracle::plan(
    const EpiModel& w, const Program& p,
    const std::set<std::string>& avoid) const {
  std::set<std::string> taken = w.dom();
  taken.insert(avoid.begin(), avoid.end());
  collect_test_names(p, taken);
  std::set<std::string> reserved = taken;
  std::set<std::string> prog_names = all_names(p);
  reserved.insert(prog_names.begin(), prog_names.end());
  Planner planner{agents_, NameSupply(std::move(reserved)), std::move(taken)};
  return planner.run(p);
}

const Oracle::Image& Oracle::rel_image(const PlanNode& node, const EpiModel& w) {
  const Cache::Key key{&node, w.id()};
  if (auto it = cache_->images.find(key); it != cache_->images.end()) {
    return it->second;
  }
  std::vector<std::vector<State>> per_state(w.size());
  std::map<std::string, Var> registry = w.vars();
  const auto& states = w.states();
  switch (node.kind) {
    case ProgramKind::Test: {
      const std::vector<char>& truth = ext(w, *node.test);
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (truth[i]) per_state[i].push_back(states[i]);
      }
      break;
    }
    case ProgramKind::Assign: {
      registry.emplace(node.fresh.name, node.fresh);
      for (std::size_t i = 0; i < w.size(); ++i) {
        const State& s = states[i];
        auto it = s.find(node.var.name);
        if (it == s.end()) {
          throw WellFormednessError("assignment to " + node.var.name +
                                    ", which is not in the domain");
        }
        State t = s;
        t[node.fresh.name] = it->second;
        t[node.var.name] = eval_term(*node.rhs, s);
        per_state[i].push_back(std::move(t));
      }
      break;
    }
    case ProgramKind::New: {
      EpiModel wider = extend(w, node.var);
      const Image& inner = rel_image(*node.first, wider);
      registry.insert(inner.post.vars().begin(), inner.post.vars().end());
      const std::vector<Value> domain = domain_of(node.var, bound_);
      for (std::size_t i = 0; i < w.size(); ++i) {
        for (Value d : domain) {
          State t = states[i];
          t.emplace(node.var.name, d);
          const auto& out = inner.per_state[wider.index_of(t)];
          per_state[i].insert(per_state[i].end(), out.begin(), out.end());
        }
      }
      break;
    }
    case ProgramKind::Seq: {
      const Image& a = rel_image(*node.first, w);
      const Image& b = rel_image(*node.second, a.post);
      registry.insert(b.post.vars().begin(), b.post.vars().end());
      for (std::size_t i = 0; i < w.size(); ++i) {
        for (const State& mid : a.per_state[i]) {
          const auto& out = b.per_state[a.post.index_of(mid)];
          per_state[i].insert(per_state[i].end(), out.begin(), out.end());
        }
      }
      break;
    }
    case ProgramKind::Choice: {
      const Image& a = rel_image(*node.first, w);
      const Image& b = rel_image(*node.second, w);
      registry.insert(a.post.vars().begin(), a.post.vars().end());
      registry.insert(b.post.vars().begin(), b.post.vars().end());
      registry.emplace(node.fresh.name, node.fresh);
      for (std::size_t i = 0; i < w.size(); ++i) {
        for (const State& s : a.per_state[i]) {
          State t = s;
          t[node.fresh.name] = static_cast<Value>(ChoiceTag::Left);
          per_state[i].push_back(std::move(t));
        }
        for (const State& s : b.per_state[i]) {
          State t = s;
          t[node.fresh.name] = static_cast<Value>(ChoiceTag::Right);
          per_state[i].push_back(std::move(t));
        }
      }
      break;
    }
  }
  std::vector<State> all;
  for (auto& out : per_state) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    all.insert(all.end(), out.begin(), out.end());
  }
  EpiModel post = make_model(std::move(registry), std::move(all));
  auto [it, inserted] = cache_->images.emplace(
      key, Image{nullptr, w, std::move(per_state), std::move(post)});
  return it->second;
}

EpiModel Oracle::forward(const PlanNode& node, const EpiModel& w) {
  const Cache::Key key{&node, w.id()};
  if (auto it = cache_->forward.find(key); it != cache_->forward.end()) {
    return it->second.result;
  }
  EpiModel result;
  switch (node.kind) {
    case ProgramKind::Test:
      result = submodel(w, ext(w, *node.test));
      break;
    case ProgramKind::Assign: {
      std::map<std::string, Var> registry = w.vars();
      registry.emplace(node.fresh.name, node.fresh);
      std::vector<State> states;
      states.reserve(w.size());
      for (const State& s : w.states()) {
        auto it = s.find(node.var.name);
        if (it == s.end()) {
          throw WellFormednessError("assignment to " + node.var.name +
                                    ", which is not in the domain");
        }
        State t = s;
        t[node.fresh.name] = it->second;
        t[node.var.name] = eval_term(*node.rhs, s);
        states.push_back(std::move(t));
      }
      result = make_model(std::move(registry), std::move(states));
      break;
    }
    case ProgramKind::New:
      result = forward(*node.first, extend(w, node.var));
      break;
    case ProgramKind::Seq:
      result = forward(*node.second, forward(*node.first, w));
      break;
    case ProgramKind::Choice: {
      EpiModel a = forward(*node.first, w);
      EpiModel b = forward(*node.second, w);
      std::map<std::string, Var> registry = a.vars();
      registry.insert(b.vars().begin(), b.vars().end());
      registry.emplace(node.fresh.name, node.fresh);
      std::vector<State> states;
      for (const State& s : a.states()) {
        State t = s;
        t[node.fresh.name] = static_cast<Value>(ChoiceTag::Left);
        states.push_back(std::move(t));
      }
      for (const State& s : b.states()) {
        State t = s;
        t[node.fresh.name] = static_cast<Value>(ChoiceTag::Right);
        states.push_back(std::move(t));
      }
      result = make_model(std::move(registry), std::move(states));
      break;
    }
  }
  cache_->forward.emplace(key, Cache::ForwardEntry{nullptr, w, result});
  return result;
}

const std::vector<char>& Oracle::ext(const EpiModel& w, const Formula& f) {
  const Cache::Key key{w.id(), f.id()};
  if (auto it = cache_->ext.find(key); it != cache_->ext.end()) {
    return it->second.values;
  }
  const auto& states = w.states();
  const std::size_t n = w.size();
  std::vector<char> out(n, 1);
  switch (f.kind()) {
    case FormulaKind::Eq:
    case FormulaKind::Lt:
    case FormulaKind::Holds:
      for (std::size_t i = 0; i < n; ++i) out[i] = eval_atom(f, states[i]);
      break;
    case FormulaKind::KnowsValue:
      throw FragmentError("internal: Kv reached the evaluator unexpanded");
    case FormulaKind::Not: {
      const std::vector<char>& a = ext(w, f.body());
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case FormulaKind::And:
      for (const Formula& g : f.operands()) {
        const std::vector<char>& a = ext(w, g);
        for (std::size_t i = 0; i < n; ++i) out[i] = out[i] && a[i];
      }
      break;
    case FormulaKind::Knows: {
      const std::vector<char>& a = ext(w, f.body());
      std::set<std::string> observed;
      for (const auto& [name, v] : w.vars()) {
        if (v.observed_by(f.agent())) observed.insert(name);
      }
      using View = std::vector<std::pair<std::string, Value>>;
      std::map<View, char> group;
      std::vector<View> views(n);
      for (std::size_t i = 0; i < n; ++i) {
        for (const auto& [name, value] : states[i]) {
          if (observed.contains(name)) views[i].emplace_back(name, value);
        }
        auto [it, inserted] = group.emplace(views[i], 1);
        it->second = it->second && a[i];
      }
      for (std::size_t i = 0; i < n; ++i) out[i] = group.at(views[i]);
      break;
    }
    case FormulaKind::Announce:
    case FormulaKind::Diamond: {
      const std::vector<char>& b = ext(w, f.announced());
      const Cache::Key sub_key{w.id(), f.announced().id()};
      auto sit = cache_->sub.find(sub_key);
      if (sit == cache_->sub.end()) {
        sit = cache_->sub
                  .emplace(sub_key, Cache::DerivedModel{w, f.announced(),
                                                        submodel(w, b)})
                  .first;
      }
      const EpiModel sub = sit->second.result;
      const std::vector<char>& a = ext(sub, f.body());
      const bool box = f.kind() == FormulaKind::Announce;
      std::size_t j = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (b[i]) {
          out[i] = a[j++];
        } else {
          out[i] = box;
        }
      }
      break;
    }
    case FormulaKind::Forall: {
      const Var& x = f.bound_var();
      const std::pair<const void*, std::string> ext_key{w.id(), var_key(x)};
      auto eit = cache_->extended.find(ext_key);
      if (eit == cache_->extended.end()) {
        eit = cache_->extended
                  .emplace(ext_key, Cache::DerivedModel{w, std::nullopt,
                                                        extend(w, x)})
                  .first;
      }
      const EpiModel wider = eit->second.result;
      const std::vector<char>& a = ext(wider, f.body());
      const std::vector<Value> domain = domain_of(x, bound_);
      for (std::size_t i = 0; i < n; ++i) {
        State t = states[i];
        for (Value d : domain) {
          t[x.name] = d;
          if (!a[wider.index_of(t)]) {
            out[i] = 0;
            break;
          }
        }
      }
      break;
    }
    case FormulaKind::Box: {
      const Cache::Key box_key{w.id(), f.id()};
      auto bit = cache_->box.find(box_key);
      if (bit == cache_->box.end()) {
        bit = cache_->box
                  .emplace(box_key,
                           Cache::BoxEntry{w, f, plan(w, f.program(),
                                                      all_names(f.body()))})
                  .first;
      }
      const std::shared_ptr<const PlanNode> root = bit->second.plan;
      const Image& image = rel_image(*root, w);
      const std::vector<char>& a = ext(image.post, f.body());
      for (std::size_t i = 0; i < n; ++i) {
        for (const State& t : image.per_state[i]) {
          if (!a[image.post.index_of(t)]) {
            out[i] = 0;
            break;
          }
        }
      }
      break;
    }
  }
  auto [it, inserted] =
      cache_->ext.emplace(key, Cache::ExtEntry{w, f, std::move(out)});
  return it->second.values;
}

Formula Oracle::prepare(const EpiModel& w, const Formula& alpha) const {
  const Cache::Key key{w.id(), alpha.id()};
  if (auto it = cache_->expanded.find(key); it != cache_->expanded.end()) {
    return it->second;
  }
  NameSupply names(w.dom());
  Formula expanded = expand_sugar(alpha, names);
  // The entry keeps alpha alive so its address is not reused.
  cache_->prepared.emplace(key, std::make_pair(w, alpha));
  cache_->expanded.emplace(key, expanded);
  return expanded;
}

bool Oracle::eval(const EpiModel& w, const State& s, const Formula& alpha) {
  const std::size_t i = w.index_of(s);
  if (i == w.size()) {
    throw WellFormednessError("the state is not in the model");
  }
  return ext(w, prepare(w, alpha))[i];
}

std::vector<char> Oracle::extension(const EpiModel& w, const Formula& alpha) {
  return ext(w, prepare(w, alpha));
}

bool Oracle::valid(const EpiModel& w, const Formula& alpha) {
  const std::vector<char>& values = ext(w, prepare(w, alpha));
  return std::all_of(values.begin(), values.end(), [](char c) { return c != 0; });
}

std::shared_ptr<const PlanNode> Oracle::cached_plan(
    const EpiModel& w, const Program& p, const std::set<std::string>& avoid) {
  Cache::PlanKey key{w.id(), p.id(), avoid};
  if (auto it = cache_->plans.find(key); it != cache_->plans.end()) {
    return it->second.plan;
  }
  auto root = plan(w, p, avoid);
  cache_->plans.emplace(std::move(key), Cache::PlanEntry{w, p, root});
  return root;
}

std::vector<State> Oracle::rel_sem(const EpiModel& w, const Program& p,
                                   const State& s,
                                   const std::set<std::string>& avoid) {
  const std::size_t i = w.index_of(s);
  if (i == w.size()) {
    throw WellFormednessError("the state is not in the model");
  }
  return rel_image(*cached_plan(w, p, avoid), w).per_state[i];
}

EpiModel Oracle::rel_post(const EpiModel& w, const Program& p,
                          const std::set<std::string>& avoid) {
  return rel_image(*cached_plan(w, p, avoid), w).post;
}

EpiModel Oracle::model_sem(const EpiModel& w, const Program& p,
                           const std::set<std::string>& avoid) {
  return forward(*cached_plan(w, p, avoid), w);
}

std::vector<State> solve_puzzle(const VerificationTask& task,
                                const Formula& alpha, std::size_t max_states) {
  Oracle oracle = Oracle::for_task(task, max_states);
  EpiModel w = oracle.denotation(task);
  std::vector<char> truth = oracle.extension(w, alpha);
  std::vector<State> out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (truth[i]) out.push_back(w.states()[i]);
  }
  return out;
}

std::string render_state(const State& s, const std::vector<Var>& vars) {
  std::string out;
  for (const Var& v : vars) {
    auto it = s.find(v.name);
    if (it == s.end()) continue;
    if (!out.empty()) out += ' ';
    out += v.name;
    out += '=';
    if (v.sort == Sort::Bool) {
      out += it->second != 0 ? "true" : "false";
    } else {
      out += std::to_string(it->second);
    }
  }
  return out;
}

}  // namespace episcope
