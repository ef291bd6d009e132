#pragma once

#include "mmv/syntax.hpp"
#include "mmv/typing.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mmv {

struct SortError : std::runtime_error {
  SortError(const std::string& msg, std::string p)
      : std::runtime_error(p.empty() ? msg : msg + " in " + p), path(std::move(p)) {}
  std::string path;
};

// ---------------------------------------------------------------- terms

enum class TermKind { Var, Lit, Transfer, Pair, Cons, Plus, Mul, Measure, Mangled };

class Term {
 public:
  Term() = default;

  static Term var(std::string x) { return make(TermKind::Var, std::move(x), {}, {}, {}); }
  static Term lit(Value v) { return make(TermKind::Lit, "", std::move(v), {}, {}); }
  static Term integer(long long i) { return lit(Value::integer(i)); }
  // Constructors over literals fold into a single literal.
  static Term transfer(Term v, Term i, Term a) {
    if (v.is_lit() && i.is_lit() && a.is_lit() && i.value().is(ValueKind::Int) && a.value().is(ValueKind::Address))
      return lit(Value::transfer(v.value(), i.value().as_int(), a.value().text()));
    return make(TermKind::Transfer, "", {}, {}, {std::move(v), std::move(i), std::move(a)});
  }
  static Term pair(Term a, Term b) {
    if (a.is_lit() && b.is_lit()) return lit(Value::pair(a.value(), b.value()));
    return make(TermKind::Pair, "", {}, {}, {std::move(a), std::move(b)});
  }
  static Term cons(Term h, Term t) {
    if (h.is_lit() && t.is_lit() && (t.value().is(ValueKind::Nil) || t.value().is(ValueKind::Cons)))
      return lit(Value::cons(h.value(), t.value()));
    return make(TermKind::Cons, "", {}, {}, {std::move(h), std::move(t)});
  }
  static Term plus(Term a, Term b) { return make(TermKind::Plus, "", {}, {}, {std::move(a), std::move(b)}); }
  static Term mul(Term a, Term b) { return make(TermKind::Mul, "", {}, {}, {std::move(a), std::move(b)}); }
  static Term measure(std::string f, Term a) { return make(TermKind::Measure, std::move(f), {}, {}, {std::move(a)}); }
  // pack (any T), sha256 (bytes), size (bytes); inst may be left empty until elaboration
  static Term mangled(std::string f, Type inst, Term a) {
    return make(TermKind::Mangled, std::move(f), {}, std::move(inst), {std::move(a)});
  }

  bool valid() const { return n_ != nullptr; }
  TermKind kind() const { return n_->kind; }
  bool is(TermKind k) const { return n_ && n_->kind == k; }
  bool is_lit() const { return is(TermKind::Lit); }
  const std::string& name() const { return n_->name; }
  const Value& value() const { return n_->value; }
  const Type& inst() const { return n_->inst; }
  const std::vector<Term>& args() const { return n_->args; }
  const Term& arg(size_t k) const { return n_->args.at(k); }

  Term with_args(std::vector<Term> a) const {
    switch (kind()) {
      case TermKind::Transfer: return transfer(a[0], a[1], a[2]);
      case TermKind::Pair: return pair(a[0], a[1]);
      case TermKind::Cons: return cons(a[0], a[1]);
      default: return make(kind(), name(), value(), inst(), std::move(a));
    }
  }
  Term with_inst(Type t) const { return make(kind(), name(), value(), std::move(t), args()); }

  friend bool operator==(const Term& x, const Term& y) {
    if (x.n_ == y.n_) return true;
    if (!x.n_ || !y.n_) return false;
    const auto& a = *x.n_;
    const auto& b = *y.n_;
    if (a.kind != b.kind || a.name != b.name || a.args != b.args) return false;
    if (a.value.valid() != b.value.valid() || (a.value.valid() && a.value != b.value)) return false;
    return a.inst.valid() == b.inst.valid() && (!a.inst.valid() || a.inst == b.inst);
  }
  friend bool operator!=(const Term& x, const Term& y) { return !(x == y); }

 private:
  struct Node {
    TermKind kind;
    std::string name;
    Value value;
    Type inst;
    std::vector<Term> args;
  };
  static Term make(TermKind k, std::string name, Value v, Type inst, std::vector<Term> args) {
    Term t;
    t.n_ = std::make_shared<const Node>(Node{k, std::move(name), std::move(v), std::move(inst), std::move(args)});
    return t;
  }
  std::shared_ptr<const Node> n_;
};

// ---------------------------------------------------------------- formulas

enum class FormulaKind { True, False, Eq, Le, Call, CallErr, Not, And, Or, Implies, Exists, Forall };

class Formula {
 public:
  Formula() = default;

  static Formula top() { return make(FormulaKind::True, {}, {}, "", {}); }
  static Formula bottom() { return make(FormulaKind::False, {}, {}, "", {}); }
  static Formula eq(Term a, Term b) { return make(FormulaKind::Eq, {std::move(a), std::move(b)}, {}, "", {}); }
  static Formula neq(Term a, Term b) { return negate(eq(std::move(a), std::move(b))); }
  static Formula le(Term a, Term b) { return make(FormulaKind::Le, {std::move(a), std::move(b)}, {}, "", {}); }
  static Formula call(Term f, Term a, Term r) {
    return make(FormulaKind::Call, {std::move(f), std::move(a), std::move(r)}, {}, "", {});
  }
  static Formula call_err(Term f, Term a, Term e) {
    return make(FormulaKind::CallErr, {std::move(f), std::move(a), std::move(e)}, {}, "", {});
  }
  static Formula negate(Formula a) { return make(FormulaKind::Not, {}, {std::move(a)}, "", {}); }
  static Formula conj(Formula a, Formula b) { return make(FormulaKind::And, {}, {std::move(a), std::move(b)}, "", {}); }
  static Formula disj(Formula a, Formula b) { return make(FormulaKind::Or, {}, {std::move(a), std::move(b)}, "", {}); }
  static Formula implies(Formula a, Formula b) {
    return make(FormulaKind::Implies, {}, {std::move(a), std::move(b)}, "", {});
  }
  static Formula exists(std::string x, Type t, Formula body) {
    return make(FormulaKind::Exists, {}, {std::move(body)}, std::move(x), std::move(t));
  }
  static Formula forall(std::string x, Type t, Formula body) {
    return make(FormulaKind::Forall, {}, {std::move(body)}, std::move(x), std::move(t));
  }
  static Formula exists_all(const std::vector<Binding>& xs, Formula body) {
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = exists(it->name, it->type, std::move(body));
    return body;
  }
  static Formula forall_all(const std::vector<Binding>& xs, Formula body) {
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = forall(it->name, it->type, std::move(body));
    return body;
  }
  static Formula conj_all(const std::vector<Formula>& fs) {
    if (fs.empty()) return top();
    Formula r = fs[0];
    for (size_t k = 1; k < fs.size(); ++k) r = conj(r, fs[k]);
    return r;
  }

  bool valid() const { return n_ != nullptr; }
  FormulaKind kind() const { return n_->kind; }
  bool is(FormulaKind k) const { return n_ && n_->kind == k; }
  const std::vector<Term>& terms() const { return n_->terms; }
  const Term& term(size_t k) const { return n_->terms.at(k); }
  const std::vector<Formula>& kids() const { return n_->kids; }
  const Formula& kid(size_t k = 0) const { return n_->kids.at(k); }
  const std::string& var() const { return n_->var; }
  const Type& var_type() const { return n_->type; }
  bool is_quantifier() const { return is(FormulaKind::Exists) || is(FormulaKind::Forall); }

  Formula rebuild(std::vector<Term> ts, std::vector<Formula> ks) const {
    return make(kind(), std::move(ts), std::move(ks), var(), var_type());
  }
  Formula rebind(std::string x, Formula body) const {
    return make(kind(), {}, {std::move(body)}, std::move(x), var_type());
  }

  friend bool operator==(const Formula& x, const Formula& y) {
    if (x.n_ == y.n_) return true;
    if (!x.n_ || !y.n_) return false;
    const auto& a = *x.n_;
    const auto& b = *y.n_;
    if (a.kind != b.kind || a.var != b.var || a.terms != b.terms || a.kids != b.kids) return false;
    return a.type.valid() == b.type.valid() && (!a.type.valid() || a.type == b.type);
  }
  friend bool operator!=(const Formula& x, const Formula& y) { return !(x == y); }

 private:
  struct Node {
    FormulaKind kind;
    std::vector<Term> terms;
    std::vector<Formula> kids;
    std::string var;
    Type type;
  };
  static Formula make(FormulaKind k, std::vector<Term> ts, std::vector<Formula> ks, std::string x, Type t) {
    Formula f;
    f.n_ = std::make_shared<const Node>(Node{k, std::move(ts), std::move(ks), std::move(x), std::move(t)});
    return f;
  }
  std::shared_ptr<const Node> n_;
};

// ---------------------------------------------------------------- environments

class TypeEnv {
 public:
  TypeEnv() = default;
  TypeEnv(std::initializer_list<Binding> bs) {
    for (const auto& b : bs) add(b.name, b.type);
  }

  void add(const std::string& x, const Type& t) {
    if (contains(x)) throw StructuralError("duplicate variable " + x + " in environment");
    items_.push_back({x, t});
  }
  TypeEnv extended(const std::string& x, const Type& t) const {
    TypeEnv e = *this;
    e.add(x, t);
    return e;
  }
  TypeEnv concat(const TypeEnv& o) const {
    TypeEnv e = *this;
    for (const auto& b : o.items_) e.add(b.name, b.type);
    return e;
  }
  bool contains(const std::string& x) const { return lookup(x) != nullptr; }
  const Type* lookup(const std::string& x) const {
    for (const auto& b : items_)
      if (b.name == x) return &b.type;
    return nullptr;
  }
  const std::vector<Binding>& items() const { return items_; }
  size_t size() const { return items_.size(); }

  friend bool operator==(const TypeEnv& a, const TypeEnv& b) { return a.items_ == b.items_; }

 private:
  std::vector<Binding> items_;
};

inline TypeEnv binding_env(const BindingStack& ups) {
  TypeEnv e;
  for (const auto& b : ups) e.add(b.name, b.type);
  return e;
}

using ValueAssignment = std::map<std::string, Value>;

inline bool assignment_typed(const ValueAssignment& sigma, const TypeEnv& gamma) {
  for (const auto& b : gamma.items()) {
    auto it = sigma.find(b.name);
    if (it == sigma.end() || !value_has_type(it->second, b.type)) return false;
  }
  return true;
}

struct RefinementStackType {
  BindingStack binders;
  Formula pred;
};

inline TypeStack erase(const RefinementStackType& phi) { return erase(phi.binders); }

struct MeasureDef {
  std::string name;
  Type elem;    // argument sort is list elem
  Type result;
  std::string head_var, tail_var;
  Term nil_rhs;
  Term cons_rhs;

  friend bool operator==(const MeasureDef& a, const MeasureDef& b) {
    return a.name == b.name && a.elem == b.elem && a.result == b.result && a.head_var == b.head_var &&
           a.tail_var == b.tail_var && a.nil_rhs == b.nil_rhs && a.cons_rhs == b.cons_rhs;
  }
};

using Measures = std::vector<MeasureDef>;

inline const MeasureDef* find_measure(const Measures& ms, const std::string& name) {
  for (const auto& m : ms)
    if (m.name == name) return &m;
  return nullptr;
}

inline bool is_builtin_function(const std::string& f) { return f == "pack" || f == "sha256" || f == "size"; }

// ---------------------------------------------------------------- free variables and names

inline void term_vars(const Term& t, std::set<std::string>& out) {
  if (t.is(TermKind::Var)) out.insert(t.name());
  for (const auto& a : t.args()) term_vars(a, out);
}

inline void free_vars_into(const Formula& f, std::set<std::string>& out) {
  for (const auto& t : f.terms()) term_vars(t, out);
  if (f.is_quantifier()) {
    std::set<std::string> inner;
    free_vars_into(f.kid(), inner);
    inner.erase(f.var());
    out.insert(inner.begin(), inner.end());
    return;
  }
  for (const auto& k : f.kids()) free_vars_into(k, out);
}

// Free and bound variable names.
inline void all_names(const Formula& f, std::set<std::string>& out) {
  for (const auto& t : f.terms()) term_vars(t, out);
  if (f.is_quantifier()) out.insert(f.var());
  for (const auto& k : f.kids()) all_names(k, out);
}

inline std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  free_vars_into(f, out);
  return out;
}

inline std::set<std::string> free_vars(const Term& t) {
  std::set<std::string> out;
  term_vars(t, out);
  return out;
}

inline std::string name_base(const std::string& x) {
  auto p = x.find('#');
  return p == std::string::npos ? x : x.substr(0, p);
}

// Smallest base#k not in used.
inline std::string fresh_avoiding(const std::string& x, const std::set<std::string>& used) {
  std::string base = name_base(x);
  for (unsigned k = 0;; ++k) {
    std::string c = base + "#" + std::to_string(k);
    if (!used.count(c)) return c;
  }
}

// ---------------------------------------------------------------- substitution

using TermSubst = std::map<std::string, Term>;

inline Term substitute(const Term& t, const TermSubst& s) {
  if (t.is(TermKind::Var)) {
    auto it = s.find(t.name());
    return it == s.end() ? t : it->second;
  }
  if (t.args().empty()) return t;
  std::vector<Term> as;
  as.reserve(t.args().size());
  for (const auto& a : t.args()) as.push_back(substitute(a, s));
  return t.with_args(std::move(as));
}

// Capture-avoiding: a binder that would capture a substituted variable is renamed.
inline Formula substitute(const Formula& f, const TermSubst& s) {
  if (s.empty()) return f;
  if (f.is_quantifier()) {
    TermSubst inner = s;
    inner.erase(f.var());
    if (inner.empty()) return f;
    std::set<std::string> range_vars;
    std::set<std::string> body_free = free_vars(f.kid());
    bool relevant = false;
    for (const auto& [x, t] : inner) {
      if (body_free.count(x)) relevant = true;
      term_vars(t, range_vars);
    }
    if (!relevant) return f;
    std::string y = f.var();
    if (range_vars.count(y)) {
      std::set<std::string> used = range_vars;
      used.insert(body_free.begin(), body_free.end());
      for (const auto& [x, t] : inner) used.insert(x);
      used.insert(y);
      std::string z = fresh_avoiding(y, used);
      inner[y] = Term::var(z);
      y = z;
    }
    return f.rebind(y, substitute(f.kid(), inner));
  }
  std::vector<Term> ts;
  for (const auto& t : f.terms()) ts.push_back(substitute(t, s));
  std::vector<Formula> ks;
  for (const auto& k : f.kids()) ks.push_back(substitute(k, s));
  return f.rebuild(std::move(ts), std::move(ks));
}

inline Formula subst_value(const Formula& f, const std::string& x, const Value& v) {
  return substitute(f, TermSubst{{x, Term::lit(v)}});
}

inline Formula rename_vars(const Formula& f, const std::map<std::string, std::string>& m) {
  TermSubst s;
  for (const auto& [a, b] : m)
    if (a != b) s.emplace(a, Term::var(b));
  return substitute(f, s);
}

// ---------------------------------------------------------------- sorting

namespace detail {

inline std::optional<Type> infer_value_type(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return Type::int_();
    case ValueKind::Address: return Type::address();
    case ValueKind::Bytes: return Type::bytes();
    case ValueKind::Transfer: return Type::operation();
    case ValueKind::Pair: {
      auto a = infer_value_type(v.fst());
      auto b = infer_value_type(v.snd());
      if (!a || !b) return std::nullopt;
      return Type::pair(*a, *b);
    }
    case ValueKind::Cons: {
      for (const auto& x : v.list_items())
        if (auto t = infer_value_type(x)) {
          if (value_has_type(v, Type::list(*t))) return Type::list(*t);
          return std::nullopt;
        }
      return std::nullopt;
    }
    case ValueKind::Nil:
    case ValueKind::Code: return std::nullopt;
  }
  return std::nullopt;
}

class Sorter {
 public:
  Sorter(const TypeEnv& env, const Measures& ms) : ms_(ms) {
    for (const auto& b : env.items()) scope_.push_back(b);
  }

  std::optional<Type> try_infer(const Term& t) {
    try {
      return infer(t);
    } catch (const SortError&) {
      return std::nullopt;
    }
  }

  Type infer(const Term& t) {
    switch (t.kind()) {
      case TermKind::Var: {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
          if (it->name == t.name()) return it->type;
        throw SortError("unbound variable " + t.name(), path_);
      }
      case TermKind::Lit: {
        if (auto ty = infer_value_type(t.value())) return *ty;
        throw SortError("cannot infer the sort of literal " + to_string(t.value()), path_);
      }
      case TermKind::Transfer:
        infer(t.arg(0));
        check(t.arg(1), Type::int_());
        check(t.arg(2), Type::address());
        return Type::operation();
      case TermKind::Pair: return Type::pair(infer(t.arg(0)), infer(t.arg(1)));
      case TermKind::Cons: {
        if (auto h = try_infer(t.arg(0))) {
          check(t.arg(1), Type::list(*h));
          return Type::list(*h);
        }
        Type l = infer(t.arg(1));
        if (!l.is(TypeKind::List)) throw SortError("cons tail is not a list", path_);
        check(t.arg(0), l.elem());
        return l;
      }
      case TermKind::Plus:
      case TermKind::Mul: {
        Type a = infer(t.arg(0));
        Type b = infer(t.arg(1));
        if (!is_integer_type(a) || !is_integer_type(b))
          throw SortError("arithmetic over non-integers " + to_string(a) + ", " + to_string(b), path_);
        return a.is(TypeKind::Nat) && b.is(TypeKind::Nat) ? Type::nat() : Type::int_();
      }
      case TermKind::Measure: {
        const MeasureDef* m = find_measure(ms_, t.name());
        if (!m) throw SortError("unknown measure " + t.name(), path_);
        check(t.arg(0), Type::list(m->elem));
        return m->result;
      }
      case TermKind::Mangled: {
        if (t.name() == "pack") {
          Type a = t.inst().valid() ? t.inst() : infer(t.arg(0));
          check(t.arg(0), a);
          return Type::bytes();
        }
        if (t.name() == "sha256") {
          check(t.arg(0), Type::bytes());
          return Type::bytes();
        }
        if (t.name() == "size") {
          check(t.arg(0), Type::bytes());
          return Type::nat();
        }
        throw SortError("unknown function " + t.name(), path_);
      }
    }
    throw SortError("bad term", path_);
  }

  // Nat and Int are interchangeable for equality and literals.
  void check(const Term& t, const Type& expected) {
    if (t.is(TermKind::Lit)) {
      if (!value_has_type(t.value(), carrier(expected)))
        throw SortError("literal " + to_string(t.value()) + " is not of sort " + to_string(expected), path_);
      return;
    }
    if (t.is(TermKind::Pair) && expected.is(TypeKind::Pair)) {
      check(t.arg(0), expected.fst());
      check(t.arg(1), expected.snd());
      return;
    }
    if (t.is(TermKind::Cons) && expected.is(TypeKind::List)) {
      check(t.arg(0), expected.elem());
      check(t.arg(1), expected);
      return;
    }
    Type got = infer(t);
    if (carrier(got) != carrier(expected))
      throw SortError("expected sort " + to_string(expected) + " but found " + to_string(got), path_);
  }

  // Sort shared by both sides of an equation.
  Type common(const Term& a, const Term& b) {
    if (auto ta = try_infer(a)) {
      check(b, *ta);
      return *ta;
    }
    if (auto tb = try_infer(b)) {
      check(a, *tb);
      return *tb;
    }
    throw SortError("cannot determine the sort of an equation", path_);
  }

  Term elaborate(const Term& t) {
    if (t.is(TermKind::Mangled) && t.name() == "pack" && !t.inst().valid()) {
      Type a = infer(t.arg(0));
      return t.with_inst(a).with_args({elaborate(t.arg(0))});
    }
    if (t.args().empty()) return t;
    std::vector<Term> as;
    for (const auto& a : t.args()) as.push_back(elaborate(a));
    return t.with_args(std::move(as));
  }

  Formula formula(const Formula& f, const std::string& where) {
    std::string saved = path_;
    path_ = path_.empty() ? where : path_ + "." + where;
    Formula out = formula_inner(f);
    path_ = saved;
    return out;
  }

 private:
  Formula formula_inner(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::True:
      case FormulaKind::False: return f;
      case FormulaKind::Eq: {
        common(f.term(0), f.term(1));
        return f.rebuild({elaborate(f.term(0)), elaborate(f.term(1))}, {});
      }
      case FormulaKind::Le: {
        Type a = infer(f.term(0));
        Type b = infer(f.term(1));
        if (!is_integer_type(a) || !is_integer_type(b)) throw SortError("comparison over non-integers", path_);
        return f.rebuild({elaborate(f.term(0)), elaborate(f.term(1))}, {});
      }
      case FormulaKind::Call:
      case FormulaKind::CallErr: {
        const Term& fn = f.term(0);
        Type arrow;
        if (auto t = try_infer(fn)) {
          arrow = *t;
          if (!arrow.is(TypeKind::Arrow)) throw SortError("call on a non-function of sort " + to_string(arrow), path_);
          check(f.term(1), arrow.fst());
          if (f.is(FormulaKind::Call))
            check(f.term(2), arrow.snd());
          else
            infer(f.term(2));
        } else {
          Type a = infer(f.term(1));
          if (!f.is(FormulaKind::Call)) throw SortError("cannot determine the sort of call_err's function", path_);
          Type r = infer(f.term(2));
          check(fn, Type::arrow(a, r));
        }
        return f.rebuild({elaborate(f.term(0)), elaborate(f.term(1)), elaborate(f.term(2))}, {});
      }
      case FormulaKind::Not: return f.rebuild({}, {formula(f.kid(0), "not")});
      case FormulaKind::And:
      case FormulaKind::Or:
      case FormulaKind::Implies:
        return f.rebuild({}, {formula(f.kid(0), "lhs"), formula(f.kid(1), "rhs")});
      case FormulaKind::Exists:
      case FormulaKind::Forall: {
        scope_.push_back({f.var(), f.var_type()});
        Formula body = formula(f.kid(), f.var());
        scope_.pop_back();
        return f.rebind(f.var(), body);
      }
    }
    return f;
  }

  const Measures& ms_;
  std::vector<Binding> scope_;
  std::string path_;
};

}  // namespace detail

inline Type sort_of_term(const TypeEnv& gamma, const Term& t, const Measures& ms = {}) {
  return detail::Sorter(gamma, ms).infer(t);
}

inline void check_term(const TypeEnv& gamma, const Term& t, const Type& expected, const Measures& ms = {}) {
  detail::Sorter(gamma, ms).check(t, expected);
}

// Checks well-sortedness and fills in instantiation sorts of pack.
inline Formula elaborate_formula(const TypeEnv& gamma, const Formula& f, const Measures& ms = {}) {
  return detail::Sorter(gamma, ms).formula(f, "");
}

inline void wf_formula(const TypeEnv& gamma, const Formula& f, const Measures& ms = {}) {
  elaborate_formula(gamma, f, ms);
}

inline bool has_quantifier(const Formula& f) {
  if (f.is_quantifier()) return true;
  for (const auto& k : f.kids())
    if (has_quantifier(k)) return true;
  return false;
}

// ---------------------------------------------------------------- printing

inline std::string term_value_string(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Int: return v.as_int().str();
    case ValueKind::Address: return "\"" + v.text() + "\"";
    case ValueKind::Bytes: return bytes_hex(v.text());
    case ValueKind::Transfer:
      return "Transfer(" + term_value_string(v.arg()) + ", " + v.amount().str() + ", \"" + v.text() + "\")";
    case ValueKind::Pair: return "(" + term_value_string(v.fst()) + ", " + term_value_string(v.snd()) + ")";
    case ValueKind::Nil: return "[]";
    case ValueKind::Cons: {
      std::string out = "[";
      auto xs = v.list_items();
      for (size_t k = 0; k < xs.size(); ++k) out += (k ? "; " : "") + term_value_string(xs[k]);
      return out + "]";
    }
    case ValueKind::Code: return to_string(v.body());
  }
  return "?";
}

namespace detail {

// precedence: 1 cons, 2 plus, 3 mul, 4 application, 5 atom
inline int term_prec(const Term& t) {
  switch (t.kind()) {
    case TermKind::Cons: return 1;
    case TermKind::Plus: return 2;
    case TermKind::Mul: return 3;
    case TermKind::Measure:
    case TermKind::Mangled: return 4;
    case TermKind::Lit:
      if (t.value().is(ValueKind::Int) && t.value().as_int() < 0) return 4;
      return 5;
    default: return 5;
  }
}

inline std::string term_str(const Term& t, int min_prec);

inline std::string term_at(const Term& t, int min_prec) {
  std::string s = term_str(t, min_prec);
  return term_prec(t) < min_prec ? "(" + s + ")" : s;
}

inline std::string term_str(const Term& t, int) {
  switch (t.kind()) {
    case TermKind::Var: return t.name();
    case TermKind::Lit: return term_value_string(t.value());
    case TermKind::Transfer:
      return "Transfer(" + term_at(t.arg(0), 0) + ", " + term_at(t.arg(1), 0) + ", " + term_at(t.arg(2), 0) + ")";
    case TermKind::Pair: return "(" + term_at(t.arg(0), 0) + ", " + term_at(t.arg(1), 0) + ")";
    case TermKind::Cons: return term_at(t.arg(0), 2) + " :: " + term_at(t.arg(1), 1);
    case TermKind::Plus: return term_at(t.arg(0), 2) + " + " + term_at(t.arg(1), 3);
    case TermKind::Mul: return term_at(t.arg(0), 3) + " * " + term_at(t.arg(1), 4);
    case TermKind::Measure:
    case TermKind::Mangled: return t.name() + " " + term_at(t.arg(0), 5);
  }
  return "?";
}

inline bool formula_atomic(const Formula& f) {
  switch (f.kind()) {
    case FormulaKind::True:
    case FormulaKind::False:
    case FormulaKind::Eq:
    case FormulaKind::Le:
    case FormulaKind::Call:
    case FormulaKind::CallErr: return true;
    default: return false;
  }
}

}  // namespace detail

inline std::string to_string(const Term& t) { return detail::term_str(t, 0); }

inline std::string to_string(const Formula& f) {
  auto sub = [](const Formula& k) {
    std::string s = to_string(k);
    return detail::formula_atomic(k) || k.is(FormulaKind::Not) ? s : "(" + s + ")";
  };
  switch (f.kind()) {
    case FormulaKind::True: return "True";
    case FormulaKind::False: return "False";
    case FormulaKind::Eq: return to_string(f.term(0)) + " = " + to_string(f.term(1));
    case FormulaKind::Le: return to_string(f.term(0)) + " <= " + to_string(f.term(1));
    case FormulaKind::Call:
      return "call(" + to_string(f.term(0)) + ", " + to_string(f.term(1)) + ") = " + to_string(f.term(2));
    case FormulaKind::CallErr:
      return "call_err(" + to_string(f.term(0)) + ", " + to_string(f.term(1)) + ") = " + to_string(f.term(2));
    case FormulaKind::Not: return "not " + sub(f.kid());
    case FormulaKind::And: return sub(f.kid(0)) + " && " + sub(f.kid(1));
    case FormulaKind::Or: return sub(f.kid(0)) + " || " + sub(f.kid(1));
    case FormulaKind::Implies: return sub(f.kid(0)) + " => " + sub(f.kid(1));
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      return std::string(f.is(FormulaKind::Exists) ? "exists " : "forall ") + f.var() + ":" + type_atom(f.var_type()) +
             ". " + to_string(f.kid());
  }
  return "?";
}

inline std::string to_string(const RefinementStackType& phi) {
  std::string out = "{ ";
  for (size_t k = 0; k < phi.binders.size(); ++k)
    out += (k ? " :. " : "") + phi.binders[k].name + ":" + type_atom(phi.binders[k].type);
  return out + " | " + to_string(phi.pred) + " }";
}

// s-expression rendering for VC dumps
inline std::string to_sexpr(const Term& t) {
  auto args = [&](const char* head) {
    std::string s = std::string("(") + head;
    for (const auto& a : t.args()) s += " " + to_sexpr(a);
    return s + ")";
  };
  switch (t.kind()) {
    case TermKind::Var: return t.name();
    case TermKind::Lit: return "(lit " + term_value_string(t.value()) + ")";
    case TermKind::Transfer: return args("transfer");
    case TermKind::Pair: return args("pair");
    case TermKind::Cons: return args("cons");
    case TermKind::Plus: return args("+");
    case TermKind::Mul: return args("*");
    case TermKind::Measure: return args(("measure " + t.name()).c_str());
    case TermKind::Mangled: return args(t.name().c_str());
  }
  return "?";
}

inline std::string to_sexpr(const Formula& f) {
  auto terms = [&](const char* head) {
    std::string s = std::string("(") + head;
    for (const auto& t : f.terms()) s += " " + to_sexpr(t);
    return s + ")";
  };
  auto kids = [&](const char* head) {
    std::string s = std::string("(") + head;
    for (const auto& k : f.kids()) s += " " + to_sexpr(k);
    return s + ")";
  };
  switch (f.kind()) {
    case FormulaKind::True: return "true";
    case FormulaKind::False: return "false";
    case FormulaKind::Eq: return terms("=");
    case FormulaKind::Le: return terms("<=");
    case FormulaKind::Call: return terms("call");
    case FormulaKind::CallErr: return terms("call_err");
    case FormulaKind::Not: return kids("not");
    case FormulaKind::And: return kids("and");
    case FormulaKind::Or: return kids("or");
    case FormulaKind::Implies: return kids("=>");
    case FormulaKind::Exists:
    case FormulaKind::Forall:
      return std::string("(") + (f.is(FormulaKind::Exists) ? "exists" : "forall") + " ((" + f.var() + " " +
             type_atom(f.var_type()) + ")) " + to_sexpr(f.kid()) + ")";
  }
  return "?";
}

}  // namespace mmv
