#pragma once

#include "mmv/interpreter.hpp"
#include "mmv/logic.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace mmv {

enum class Verdict3 { True, False, Unknown };

inline const char* to_string(Verdict3 v) {
  switch (v) {
    case Verdict3::True: return "True";
    case Verdict3::False: return "False";
    case Verdict3::Unknown: return "Unknown";
  }
  return "?";
}

inline Verdict3 not3(Verdict3 v) {
  if (v == Verdict3::True) return Verdict3::False;
  if (v == Verdict3::False) return Verdict3::True;
  return v;
}

inline Verdict3 and3(Verdict3 a, Verdict3 b) {
  if (a == Verdict3::False || b == Verdict3::False) return Verdict3::False;
  if (a == Verdict3::True && b == Verdict3::True) return Verdict3::True;
  return Verdict3::Unknown;
}

inline Verdict3 or3(Verdict3 a, Verdict3 b) { return not3(and3(not3(a), not3(b))); }

struct Budget {
  int int_bound = 5;
  int list_len = 3;
  std::vector<Value> code_pool;
  std::int64_t fuel = 10000;
  std::vector<std::string> addresses{"tz1a", "tz1b", "tz1c", "tz1d"};
  std::size_t max_candidates = 200000;  // per quantifier block
  std::size_t max_enumeration = 20000;  // per sort
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void collect_literals(const Value& v, std::vector<Value>& codes, std::set<std::string>& addrs,
                             std::set<std::string>& bytes) {
  switch (v.kind()) {
    case ValueKind::Code:
      if (std::find(codes.begin(), codes.end(), v) == codes.end()) codes.push_back(v);
      break;
    case ValueKind::Address: addrs.insert(v.text()); break;
    case ValueKind::Bytes: bytes.insert(v.text()); break;
    case ValueKind::Transfer:
      addrs.insert(v.text());
      collect_literals(v.arg(), codes, addrs, bytes);
      break;
    case ValueKind::Pair:
    case ValueKind::Cons:
      collect_literals(v.fst(), codes, addrs, bytes);
      collect_literals(v.snd(), codes, addrs, bytes);
      break;
    default: break;
  }
}

inline void collect_literals(const Term& t, std::vector<Value>& codes, std::set<std::string>& addrs,
                             std::set<std::string>& bytes) {
  if (t.is_lit()) collect_literals(t.value(), codes, addrs, bytes);
  for (const auto& a : t.args()) collect_literals(a, codes, addrs, bytes);
}

inline void collect_literals(const Formula& f, std::vector<Value>& codes, std::set<std::string>& addrs,
                             std::set<std::string>& bytes) {
  for (const auto& t : f.terms()) collect_literals(t, codes, addrs, bytes);
  for (const auto& k : f.kids()) collect_literals(k, codes, addrs, bytes);
}

namespace detail {

class Evaluator {
 public:
  Evaluator(const Measures& ms, const Budget& b) : ms_(ms), b_(b) {
    codes_ = b.code_pool;
    addrs_.insert(b.addresses.begin(), b.addresses.end());
  }

  void absorb(const ValueAssignment& s) {
    for (const auto& [x, v] : s) collect_literals(v, codes_, addrs_, bytes_);
  }
  void absorb(const Formula& f) { collect_literals(f, codes_, addrs_, bytes_); }
  void absorb(const Value& v) { collect_literals(v, codes_, addrs_, bytes_); }

  Value term(const Term& t, const ValueAssignment& s) {
    switch (t.kind()) {
      case TermKind::Var: {
        auto it = s.find(t.name());
        if (it == s.end()) throw EvalError("unassigned variable " + t.name());
        return it->second;
      }
      case TermKind::Lit: return t.value();
      case TermKind::Transfer: {
        Value i = term(t.arg(1), s);
        Value a = term(t.arg(2), s);
        if (!i.is(ValueKind::Int) || !a.is(ValueKind::Address)) throw EvalError("ill-sorted Transfer");
        return Value::transfer(term(t.arg(0), s), i.as_int(), a.text());
      }
      case TermKind::Pair: return Value::pair(term(t.arg(0), s), term(t.arg(1), s));
      case TermKind::Cons: {
        Value tl = term(t.arg(1), s);
        if (!tl.is(ValueKind::Nil) && !tl.is(ValueKind::Cons)) throw EvalError("ill-sorted cons");
        return Value::cons(term(t.arg(0), s), tl);
      }
      case TermKind::Plus:
      case TermKind::Mul: {
        Value a = term(t.arg(0), s);
        Value b = term(t.arg(1), s);
        if (!a.is(ValueKind::Int) || !b.is(ValueKind::Int)) throw EvalError("arithmetic over non-integers");
        return Value::integer(t.is(TermKind::Plus) ? Int(a.as_int() + b.as_int()) : Int(a.as_int() * b.as_int()));
      }
      case TermKind::Measure: {
        const MeasureDef* m = find_measure(ms_, t.name());
        if (!m) throw EvalError("unknown measure " + t.name());
        return measure(*m, term(t.arg(0), s));
      }
      case TermKind::Mangled: {
        Value a = term(t.arg(0), s);
        if (t.name() == "pack") return model_pack(a);
        if (!a.is(ValueKind::Bytes)) throw EvalError(t.name() + " expects bytes");
        if (t.name() == "sha256") return model_sha256(a);
        if (t.name() == "size") return Value::integer(Int(a.text().size()));
        throw EvalError("unknown function " + t.name());
      }
    }
    throw EvalError("bad term");
  }

  Value measure(const MeasureDef& m, const Value& l) {
    if (l.is(ValueKind::Nil)) return term(m.nil_rhs, {});
    if (!l.is(ValueKind::Cons)) throw EvalError("measure " + m.name + " applied to a non-list");
    return term(m.cons_rhs, {{m.head_var, l.head()}, {m.tail_var, l.tail()}});
  }

  Verdict3 formula(const Formula& f, ValueAssignment& s) {
    switch (f.kind()) {
      case FormulaKind::True: return Verdict3::True;
      case FormulaKind::False: return Verdict3::False;
      case FormulaKind::Eq: return term(f.term(0), s) == term(f.term(1), s) ? Verdict3::True : Verdict3::False;
      case FormulaKind::Le: {
        Value a = term(f.term(0), s);
        Value b = term(f.term(1), s);
        if (!a.is(ValueKind::Int) || !b.is(ValueKind::Int)) throw EvalError("comparison over non-integers");
        return a.as_int() <= b.as_int() ? Verdict3::True : Verdict3::False;
      }
      case FormulaKind::Call:
      case FormulaKind::CallErr: return call(f, s);
      case FormulaKind::Not: return not3(formula(f.kid(), s));
      case FormulaKind::And: {
        Verdict3 a = formula(f.kid(0), s);
        if (a == Verdict3::False) return a;
        return and3(a, formula(f.kid(1), s));
      }
      case FormulaKind::Or: {
        Verdict3 a = formula(f.kid(0), s);
        if (a == Verdict3::True) return a;
        return or3(a, formula(f.kid(1), s));
      }
      case FormulaKind::Implies: {
        Verdict3 a = formula(f.kid(0), s);
        if (a == Verdict3::False) return Verdict3::True;
        return or3(not3(a), formula(f.kid(1), s));
      }
      case FormulaKind::Exists: return exists(f, s, nullptr);
      case FormulaKind::Forall:
        return not3(exists(Formula::exists(f.var(), f.var_type(), Formula::negate(f.kid())), s, nullptr));
    }
    throw EvalError("bad formula");
  }

  // Searches the existential block rooted at f; on True, *witness receives the bindings.
  Verdict3 exists(const Formula& f, ValueAssignment& s, ValueAssignment* witness) {
    Block b;
    flatten(f, b, s);
    return search_block(b, s, witness);
  }

  Verdict3 exists_vars(const std::vector<Binding>& vars, const Formula& body, ValueAssignment& s,
                       ValueAssignment* witness) {
    return exists(Formula::exists_all(vars, body), s, witness);
  }

  std::vector<Value> enumerate(const Type& t) {
    std::string key = to_string(t);
    auto it = enum_cache_.find(key);
    if (it != enum_cache_.end()) return it->second;
    std::vector<Value> out;
    const size_t cap = b_.max_enumeration;
    switch (t.kind()) {
      case TypeKind::Int:
        out.push_back(Value::integer(0));
        for (int k = 1; k <= b_.int_bound; ++k) {
          out.push_back(Value::integer(k));
          out.push_back(Value::integer(-k));
        }
        break;
      case TypeKind::Nat:
        for (int k = 0; k <= b_.int_bound; ++k) out.push_back(Value::integer(k));
        break;
      case TypeKind::Bytes: {
        std::set<std::string> bs = bytes_;
        bs.insert("");
        bs.insert(std::string(1, '\0'));
        bs.insert(std::string(1, '\1'));
        for (const auto& x : bs) out.push_back(Value::bytes(x));
        break;
      }
      case TypeKind::Address:
        for (const auto& a : addrs_) out.push_back(Value::address(a));
        break;
      case TypeKind::Operation: {
        auto ints = enumerate(Type::int_());
        for (const auto& v : ints)
          for (const auto& i : ints)
            for (const auto& a : addrs_) {
              if (out.size() >= cap) break;
              out.push_back(Value::transfer(v, i.as_int(), a));
            }
        break;
      }
      case TypeKind::Pair: {
        auto xs = enumerate(t.fst());
        auto ys = enumerate(t.snd());
        for (const auto& x : xs)
          for (const auto& y : ys) {
            if (out.size() >= cap) break;
            out.push_back(Value::pair(x, y));
          }
        break;
      }
      case TypeKind::List: {
        auto es = enumerate(t.elem());
        std::vector<Value> layer{Value::nil()};
        out.push_back(Value::nil());
        for (int len = 1; len <= b_.list_len && out.size() < cap; ++len) {
          std::vector<Value> next;
          for (const auto& e : es)
            for (const auto& l : layer) {
              if (out.size() + next.size() >= cap) break;
              next.push_back(Value::cons(e, l));
            }
          out.insert(out.end(), next.begin(), next.end());
          layer = std::move(next);
        }
        break;
      }
      case TypeKind::Arrow:
        for (const auto& c : codes_)
          if (value_has_type(c, t)) out.push_back(c);
        break;
    }
    enum_cache_[key] = out;
    return out;
  }

 private:
  struct Block {
    std::vector<Binding> vars;
    std::vector<Formula> conj;
    std::vector<std::set<std::string>> fv;
  };

  Verdict3 call(const Formula& f, ValueAssignment& s) {
    Value fn = term(f.term(0), s);
    Value arg = term(f.term(1), s);
    Value res = term(f.term(2), s);
    if (!fn.is(ValueKind::Code)) throw EvalError("call on a non-code value");
    RunOutcome o = try_exec_seq(Stack({arg}), fn.body(), b_.fuel);
    switch (o.kind) {
      case RunOutcome::Kind::Stuck: return Verdict3::False;
      case RunOutcome::Kind::OutOfFuel: return Verdict3::Unknown;
      case RunOutcome::Kind::Ok:
        if (!f.is(FormulaKind::Call)) return Verdict3::False;
        return o.stack.size() == 1 && o.stack.at(0) == res ? Verdict3::True : Verdict3::False;
      case RunOutcome::Kind::Failed:
        if (!f.is(FormulaKind::CallErr)) return Verdict3::False;
        return o.value == res ? Verdict3::True : Verdict3::False;
    }
    return Verdict3::Unknown;
  }

  void flatten(const Formula& f, Block& b, const ValueAssignment& s) {
    switch (f.kind()) {
      case FormulaKind::True: return;
      case FormulaKind::And:
        flatten(f.kid(0), b, s);
        flatten(f.kid(1), b, s);
        return;
      case FormulaKind::Exists: {
        std::string x = f.var();
        Formula body = f.kid();
        auto taken = [&](const std::string& n) {
          if (s.count(n)) return true;
          for (const auto& v : b.vars)
            if (v.name == n) return true;
          return false;
        };
        if (taken(x)) {
          std::set<std::string> used = free_vars(body);
          for (const auto& [k, v] : s) used.insert(k);
          for (const auto& v : b.vars) used.insert(v.name);
          std::string y = fresh_avoiding(x, used);
          while (taken(y)) {
            used.insert(y);
            y = fresh_avoiding(x, used);
          }
          body = rename_vars(body, {{x, y}});
          x = y;
        }
        b.vars.push_back({x, f.var_type()});
        flatten(body, b, s);
        return;
      }
      case FormulaKind::Not: {
        const Formula& g = f.kid();
        switch (g.kind()) {
          case FormulaKind::True: break;
          case FormulaKind::False: return;
          case FormulaKind::Not: flatten(g.kid(), b, s); return;
          case FormulaKind::Or:
            flatten(Formula::negate(g.kid(0)), b, s);
            flatten(Formula::negate(g.kid(1)), b, s);
            return;
          case FormulaKind::Implies:
            flatten(g.kid(0), b, s);
            flatten(Formula::negate(g.kid(1)), b, s);
            return;
          case FormulaKind::Forall:
            flatten(Formula::exists(g.var(), g.var_type(), Formula::negate(g.kid())), b, s);
            return;
          default: break;
        }
        break;
      }
      default: break;
    }
    b.conj.push_back(f);
    b.fv.push_back(free_vars(f));
  }

  enum class Match { Ok, Contra, Stuck };

  bool is_block_var(const Block& b, const std::string& x, Type* ty) const {
    for (const auto& v : b.vars)
      if (v.name == x) {
        if (ty) *ty = v.type;
        return true;
      }
    return false;
  }

  bool ground(const std::set<std::string>& fv, const ValueAssignment& s) const {
    for (const auto& x : fv)
      if (!s.count(x)) return false;
    return true;
  }

  Match match(const Term& p, const Value& v, const Block& b, ValueAssignment& s, std::vector<std::string>& bound) {
    if (ground(free_vars(p), s)) return term(p, s) == v ? Match::Ok : Match::Contra;
    switch (p.kind()) {
      case TermKind::Var: {
        Type ty;
        if (!is_block_var(b, p.name(), &ty)) return Match::Stuck;
        if (!value_has_type(v, ty)) return Match::Contra;
        s[p.name()] = v;
        bound.push_back(p.name());
        return Match::Ok;
      }
      case TermKind::Pair:
        if (!v.is(ValueKind::Pair)) return Match::Contra;
        return both(match(p.arg(0), v.fst(), b, s, bound), [&] { return match(p.arg(1), v.snd(), b, s, bound); });
      case TermKind::Cons:
        if (!v.is(ValueKind::Cons)) return Match::Contra;
        return both(match(p.arg(0), v.head(), b, s, bound), [&] { return match(p.arg(1), v.tail(), b, s, bound); });
      case TermKind::Transfer:
        if (!v.is(ValueKind::Transfer)) return Match::Contra;
        return both(match(p.arg(0), v.arg(), b, s, bound), [&] {
          return both(match(p.arg(1), Value::integer(v.amount()), b, s, bound),
                      [&] { return match(p.arg(2), Value::address(v.text()), b, s, bound); });
        });
      default: return Match::Stuck;
    }
  }

  template <class F>
  static Match both(Match first, F second) {
    if (first != Match::Ok) return first;
    return second();
  }

  // Binds block variables determined by equations; Contra means the block is unsatisfiable here.
  Match propagate(const Block& b, ValueAssignment& s, std::vector<std::string>& bound) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t k = 0; k < b.conj.size(); ++k) {
        const Formula& c = b.conj[k];
        if (!c.is(FormulaKind::Eq) || ground(b.fv[k], s)) continue;
        for (int side = 0; side < 2; ++side) {
          const Term& known = c.term(size_t(side));
          const Term& pat = c.term(size_t(1 - side));
          if (!ground(free_vars(known), s)) continue;
          std::vector<std::string> local;
          Match m = match(pat, term(known, s), b, s, local);
          if (m == Match::Stuck || m == Match::Contra) {
            for (const auto& x : local) s.erase(x);
            if (m == Match::Contra) return Match::Contra;
            continue;
          }
          bound.insert(bound.end(), local.begin(), local.end());
          if (!local.empty()) changed = true;
          break;
        }
      }
    }
    return Match::Ok;
  }

  Verdict3 search_block(const Block& b, ValueAssignment& s, ValueAssignment* witness) {
    std::vector<std::string> bound;
    auto undo = [&] {
      for (const auto& x : bound) s.erase(x);
    };
    if (propagate(b, s, bound) == Match::Contra) {
      undo();
      return Verdict3::False;
    }
    Verdict3 acc = Verdict3::True;
    for (size_t k = 0; k < b.conj.size(); ++k) {
      if (!ground(b.fv[k], s)) continue;
      Verdict3 v = formula(b.conj[k], s);
      if (v == Verdict3::False) {
        undo();
        return v;
      }
      acc = and3(acc, v);
    }
    const Binding* next = nullptr;
    bool occurs = false;
    for (const auto& v : b.vars) {
      if (s.count(v.name)) continue;
      bool occ = false;
      for (size_t k = 0; k < b.conj.size() && !occ; ++k) occ = b.fv[k].count(v.name) > 0;
      if (!next || (occ && !occurs)) {
        next = &v;
        occurs = occ;
      }
      if (occurs) break;
    }
    if (!next) {
      if (acc == Verdict3::True && witness)
        for (const auto& v : b.vars) (*witness)[v.name] = s.at(v.name);
      undo();
      return acc;
    }
    if (acc == Verdict3::Unknown) {
      undo();
      return acc;
    }
    auto cands = enumerate(next->type);
    if (!occurs) {
      // any inhabitant will do; sorts are nonempty even when the budget has no candidate
      if (cands.empty()) {
        undo();
        return Verdict3::Unknown;
      }
      s[next->name] = cands.front();
      Verdict3 r = search_block(b, s, witness);
      s.erase(next->name);
      undo();
      return r;
    }
    for (const auto& c : cands) {
      if (++steps_ > b_.max_candidates) break;
      s[next->name] = c;
      Verdict3 r = search_block(b, s, witness);
      s.erase(next->name);
      if (r == Verdict3::True) {
        undo();
        return r;
      }
    }
    undo();
    return Verdict3::Unknown;
  }

  const Measures& ms_;
  const Budget& b_;
  std::vector<Value> codes_;
  std::set<std::string> addrs_;
  std::set<std::string> bytes_;
  std::map<std::string, std::vector<Value>> enum_cache_;
  std::size_t steps_ = 0;
};

}  // namespace detail

inline Value eval_term(const ValueAssignment& sigma, const TypeEnv&, const Term& t, const Measures& ms = {}) {
  Budget b;
  return detail::Evaluator(ms, b).term(t, sigma);
}

inline Verdict3 eval_formula(const ValueAssignment& sigma, const TypeEnv&, const Formula& phi, const Budget& budget = {},
                             const Measures& ms = {}) {
  detail::Evaluator ev(ms, budget);
  ev.absorb(sigma);
  ev.absorb(phi);
  ValueAssignment s = sigma;
  return ev.formula(phi, s);
}

inline Verdict3 stack_models(const ValueAssignment& sigma, const TypeEnv& gamma, const Stack& s,
                             const RefinementStackType& phi, const Budget& budget = {}, const Measures& ms = {}) {
  if (s.size() != phi.binders.size()) return Verdict3::False;
  ValueAssignment sg = sigma;
  TypeEnv g = gamma;
  for (size_t k = 0; k < s.size(); ++k) {
    const auto& b = phi.binders[k];
    if (!value_has_type(s.at(k), b.type)) return Verdict3::False;
    sg[b.name] = s.at(k);
    if (!g.contains(b.name)) g.add(b.name, b.type);
  }
  return eval_formula(sg, g, phi.pred, budget, ms);
}

inline std::optional<Value> random_value(const Type& t, const Budget& b, std::mt19937_64& rng,
                                         const std::vector<Value>& codes = {}) {
  auto uniform = [&](long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); };
  switch (t.kind()) {
    case TypeKind::Int: return Value::integer(uniform(-b.int_bound, b.int_bound));
    case TypeKind::Nat: return Value::integer(uniform(0, b.int_bound));
    case TypeKind::Bytes: {
      std::string s(size_t(uniform(0, 3)), '\0');
      for (auto& c : s) c = char(uniform(0, 255));
      return Value::bytes(s);
    }
    case TypeKind::Address: return Value::address(b.addresses.at(size_t(uniform(0, long(b.addresses.size()) - 1))));
    case TypeKind::Operation: {
      auto a = random_value(Type::address(), b, rng);
      return Value::transfer(Value::integer(uniform(-b.int_bound, b.int_bound)), Int(uniform(-b.int_bound, b.int_bound)),
                             a->text());
    }
    case TypeKind::Pair: {
      auto x = random_value(t.fst(), b, rng, codes);
      auto y = random_value(t.snd(), b, rng, codes);
      if (!x || !y) return std::nullopt;
      return Value::pair(*x, *y);
    }
    case TypeKind::List: {
      std::vector<Value> xs;
      long long n = uniform(0, b.list_len);
      for (long long k = 0; k < n; ++k) {
        auto x = random_value(t.elem(), b, rng, codes);
        if (!x) return std::nullopt;
        xs.push_back(*x);
      }
      return Value::list(xs);
    }
    case TypeKind::Arrow: {
      std::vector<Value> ok;
      for (const auto& c : codes)
        if (value_has_type(c, t)) ok.push_back(c);
      if (ok.empty()) return std::nullopt;
      return ok[size_t(uniform(0, long(ok.size()) - 1))];
    }
  }
  return std::nullopt;
}

struct Sample {
  ValueAssignment sigma;
  Stack stack;
};

// Rejection sampling: random stacks, with Γ solved from the predicate where equations pin it down.
inline std::vector<Sample> sample_stack(const TypeEnv& gamma, const RefinementStackType& phi, const Budget& budget,
                                        std::size_t attempts, std::uint64_t seed, const Measures& ms = {},
                                        std::size_t max_samples = SIZE_MAX) {
  std::vector<Sample> out;
  std::mt19937_64 rng(seed);
  std::vector<Value> codes = budget.code_pool;
  {
    std::set<std::string> a, by;
    collect_literals(phi.pred, codes, a, by);
  }
  for (std::size_t n = 0; n < attempts && out.size() < max_samples; ++n) {
    std::vector<Value> items;
    bool ok = true;
    for (const auto& b : phi.binders) {
      auto v = random_value(b.type, budget, rng, codes);
      if (!v) {
        ok = false;
        break;
      }
      items.push_back(*v);
    }
    if (!ok) continue;
    Stack s(items);
    ValueAssignment base;
    for (size_t k = 0; k < items.size(); ++k) base[phi.binders[k].name] = items[k];
    detail::Evaluator ev(ms, budget);
    ev.absorb(base);
    ev.absorb(phi.pred);
    ValueAssignment witness;
    Verdict3 found = ev.exists_vars(gamma.items(), phi.pred, base, &witness);
    if (found != Verdict3::True) continue;
    ValueAssignment sigma;
    for (const auto& b : gamma.items()) sigma[b.name] = witness.at(b.name);
    if (stack_models(sigma, gamma, s, phi, budget, ms) == Verdict3::True) out.push_back({sigma, s});
  }
  return out;
}

}  // namespace mmv
