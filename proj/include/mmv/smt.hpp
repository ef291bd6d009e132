#pragma once

#include "mmv/verifier.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <csignal>
#include <cerrno>
#include <cstring>
#include <fcntl.h>
#include <map>
#include <mutex>
#include <poll.h>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

namespace mmv {

struct EncodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- mangling

inline std::string type_code(const Type& t) {
  switch (t.kind()) {
    case TypeKind::Int: return "int";
    case TypeKind::Nat: return "nat";
    case TypeKind::Bytes: return "bytes";
    case TypeKind::Address: return "address";
    case TypeKind::Operation: return "operation";
    case TypeKind::Pair: return "pair!" + type_code(t.fst()) + "!" + type_code(t.snd());
    case TypeKind::List: return "list!" + type_code(t.elem());
    case TypeKind::Arrow: return "lambda!" + type_code(t.fst()) + "!" + type_code(t.snd());
  }
  return "?";
}

inline std::string mangle(const std::string& base, const Type& inst) {
  if (inst.is(TypeKind::Arrow)) return base + "!" + type_code(inst.fst()) + "!to!" + type_code(inst.snd());
  return base + "!" + type_code(inst);
}

namespace detail {

inline Type decode_type(const std::vector<std::string>& toks, size_t& k) {
  if (k >= toks.size()) throw EncodeError("truncated mangled type");
  const std::string& w = toks[k++];
  if (w == "int") return Type::int_();
  if (w == "nat") return Type::nat();
  if (w == "bytes") return Type::bytes();
  if (w == "address") return Type::address();
  if (w == "operation") return Type::operation();
  if (w == "list") return Type::list(decode_type(toks, k));
  if (w == "pair" || w == "lambda") {
    Type a = decode_type(toks, k);
    Type b = decode_type(toks, k);
    return w == "pair" ? Type::pair(a, b) : Type::arrow(a, b);
  }
  throw EncodeError("bad mangled type component " + w);
}

}  // namespace detail

inline std::pair<std::string, Type> demangle(const std::string& sym) {
  std::vector<std::string> toks;
  std::stringstream ss(sym);
  for (std::string w; std::getline(ss, w, '!');) toks.push_back(w);
  if (toks.size() < 2) throw EncodeError("not a mangled symbol: " + sym);
  size_t k = 1;
  Type t = detail::decode_type(toks, k);
  if (k < toks.size() && toks[k] == "to") {
    ++k;
    t = Type::arrow(t, detail::decode_type(toks, k));
  }
  if (k != toks.size()) throw EncodeError("trailing components in " + sym);
  return {toks[0], t};
}

// ---------------------------------------------------------------- sorts

inline std::string smt_sort(const Type& t) {
  switch (t.kind()) {
    case TypeKind::Int:
    case TypeKind::Nat: return "Int";
    case TypeKind::Bytes:
    case TypeKind::Address: return "String";
    case TypeKind::Operation: return "Operation";
    case TypeKind::Pair:
    case TypeKind::List: return "S!" + type_code(carrier(t));
    case TypeKind::Arrow: return "Code";
  }
  return "?";
}

inline bool trivial_predicate(const Type& t) {
  switch (t.kind()) {
    case TypeKind::Nat: return false;
    case TypeKind::Pair: return trivial_predicate(t.fst()) && trivial_predicate(t.snd());
    case TypeKind::List: return trivial_predicate(t.elem());
    default: return true;
  }
}

// P_T(x) as SMT text; "true" when T carries no refinement.
inline std::string sort_predicate(const Type& t, const std::string& x) {
  if (trivial_predicate(t)) return "true";
  switch (t.kind()) {
    case TypeKind::Nat: return "(>= " + x + " 0)";
    case TypeKind::Pair: {
      std::string c = type_code(carrier(t));
      std::string a = sort_predicate(t.fst(), "(fst!" + c + " " + x + ")");
      std::string b = sort_predicate(t.snd(), "(snd!" + c + " " + x + ")");
      if (a == "true") return b;
      if (b == "true") return a;
      return "(and " + a + " " + b + ")";
    }
    case TypeKind::List: return "(P!" + type_code(t) + " " + x + ")";
    default: return "true";
  }
}

inline std::string smt_string_literal(const std::string& s) {
  static const char* hex = "0123456789abcdef";
  std::string out = "\"";
  for (unsigned char c : s) {
    if (c == '"') out += "\"\"";
    else if (c >= 0x20 && c < 0x7f && c != '\\') out += char(c);
    else {
      out += "\\u{";
      out += hex[c >> 4];
      out += hex[c & 15];
      out += "}";
    }
  }
  return out + "\"";
}

inline std::string smt_symbol(const std::string& x) { return "|" + x + "|"; }

inline std::string smt_int(const Int& i) { return i < 0 ? "(- " + Int(-i).str() + ")" : i.str(); }

// ---------------------------------------------------------------- skolemization

namespace detail {

// Gives every binder in f a name not in used.
inline Formula uniquify(const Formula& f, std::set<std::string>& used) {
  if (f.is_quantifier()) {
    std::string y = fresh_avoiding(f.var(), used);
    used.insert(y);
    Formula body = rename_vars(f.kid(), {{f.var(), y}});
    return f.rebind(y, uniquify(body, used));
  }
  if (f.kids().empty()) return f;
  std::vector<Formula> ks;
  for (const auto& k : f.kids()) ks.push_back(uniquify(k, used));
  return f.rebuild(f.terms(), std::move(ks));
}

inline Formula skolemize(const Formula& f, bool pos, std::vector<Binding>& consts, std::set<std::string>& used) {
  switch (f.kind()) {
    case FormulaKind::Exists:
    case FormulaKind::Forall: {
      bool strong = f.is(FormulaKind::Exists) == pos;
      if (!strong) return uniquify(f, used);
      std::string c = fresh_avoiding(f.var(), used);
      used.insert(c);
      consts.push_back({c, f.var_type()});
      return skolemize(rename_vars(f.kid(), {{f.var(), c}}), pos, consts, used);
    }
    case FormulaKind::Not: return Formula::negate(skolemize(f.kid(), !pos, consts, used));
    case FormulaKind::And:
    case FormulaKind::Or:
      return f.rebuild({}, {skolemize(f.kid(0), pos, consts, used), skolemize(f.kid(1), pos, consts, used)});
    case FormulaKind::Implies:
      return f.rebuild({}, {skolemize(f.kid(0), !pos, consts, used), skolemize(f.kid(1), pos, consts, used)});
    default: return f;
  }
}

}  // namespace detail

struct Skolemized {
  std::vector<Binding> constants;  // VC binders followed by skolem constants
  Formula hyp, neg_goal;
};

// Positive existentials and negative universals outside native quantifiers become constants.
inline Skolemized skolemize_vc(const VerificationCondition& vc) {
  std::set<std::string> used;
  for (const auto& b : vc.binders) used.insert(b.name);
  all_names(vc.hyp, used);
  all_names(vc.goal, used);
  Skolemized out;
  out.constants = vc.binders;
  out.hyp = detail::skolemize(vc.hyp, true, out.constants, used);
  out.neg_goal = detail::skolemize(Formula::negate(vc.goal), true, out.constants, used);
  return out;
}

// ---------------------------------------------------------------- encoding

struct SmtOptions {
  int measure_depth = 2;
};

namespace detail {

class Encoder {
 public:
  Encoder(const Measures& ms) : ms_(ms) {}

  void declare_const(const Binding& b) {
    scope_[b.name].push_back(b.type);
    use_sort(b.type);
    consts_.push_back(b);
  }

  std::optional<Type> infer(const Term& t) const {
    switch (t.kind()) {
      case TermKind::Var: {
        auto it = scope_.find(t.name());
        if (it == scope_.end() || it->second.empty()) throw EncodeError("unbound variable " + t.name());
        return it->second.back();
      }
      case TermKind::Lit: return infer_value_type(t.value());
      case TermKind::Transfer: return Type::operation();
      case TermKind::Pair: {
        auto a = infer(t.arg(0));
        auto b = infer(t.arg(1));
        if (!a || !b) return std::nullopt;
        return Type::pair(*a, *b);
      }
      case TermKind::Cons: {
        if (auto h = infer(t.arg(0))) return Type::list(*h);
        return infer(t.arg(1));
      }
      case TermKind::Plus:
      case TermKind::Mul: return Type::int_();
      case TermKind::Measure: {
        const MeasureDef* m = find_measure(ms_, t.name());
        if (!m) throw EncodeError("unknown measure " + t.name());
        return m->result;
      }
      case TermKind::Mangled:
        if (t.name() == "size") return Type::nat();
        return Type::bytes();
    }
    return std::nullopt;
  }

  std::string term(const Term& t, const Type& ty) {
    Type c = carrier(ty);
    switch (t.kind()) {
      case TermKind::Var: return smt_symbol(t.name());
      case TermKind::Lit: return value(t.value(), c);
      case TermKind::Transfer: {
        Type at = infer(t.arg(0)).value_or(Type::int_());
        return "(" + transfer_ctor(at) + " " + term(t.arg(0), at) + " " + term(t.arg(1), Type::int_()) + " " +
               term(t.arg(2), Type::address()) + ")";
      }
      case TermKind::Pair:
        if (!c.is(TypeKind::Pair)) throw EncodeError("pair term at sort " + to_string(c));
        use_sort(c);
        return "(mk!" + type_code(c) + " " + term(t.arg(0), c.fst()) + " " + term(t.arg(1), c.snd()) + ")";
      case TermKind::Cons:
        if (!c.is(TypeKind::List)) throw EncodeError("cons term at sort " + to_string(c));
        use_sort(c);
        return "(cons!" + type_code(c) + " " + term(t.arg(0), c.elem()) + " " + term(t.arg(1), c) + ")";
      case TermKind::Plus:
      case TermKind::Mul:
        return std::string("(") + (t.is(TermKind::Plus) ? "+" : "*") + " " + term(t.arg(0), Type::int_()) + " " +
               term(t.arg(1), Type::int_()) + ")";
      case TermKind::Measure: {
        const MeasureDef* m = find_measure(ms_, t.name());
        if (!m) throw EncodeError("unknown measure " + t.name());
        use_measure(*m);
        return "(measure!" + m->name + " " + term(t.arg(0), Type::list(m->elem)) + ")";
      }
      case TermKind::Mangled: {
        if (t.name() == "size") return "(str.len " + term(t.arg(0), Type::bytes()) + ")";
        if (t.name() == "sha256") {
          uses_sha_ = true;
          return "(sha256 " + term(t.arg(0), Type::bytes()) + ")";
        }
        Type inst = t.inst().valid() ? t.inst() : infer(t.arg(0)).value_or(Type::int_());
        use_sort(inst);
        std::string f = mangle("pack", inst);
        add_fun(f, "(declare-fun " + f + " (" + smt_sort(inst) + ") String)");
        return "(" + f + " " + term(t.arg(0), inst) + ")";
      }
    }
    throw EncodeError("unsupported term");
  }

  std::string value(const Value& v, const Type& c) {
    switch (v.kind()) {
      case ValueKind::Int: return smt_int(v.as_int());
      case ValueKind::Address:
      case ValueKind::Bytes: return smt_string_literal(v.text());
      case ValueKind::Transfer: {
        Type at = carrier(infer_value_type(v.arg()).value_or(Type::int_()));
        return "(" + transfer_ctor(at) + " " + value(v.arg(), at) + " " + smt_int(v.amount()) + " " +
               smt_string_literal(v.text()) + ")";
      }
      case ValueKind::Pair:
        if (!c.is(TypeKind::Pair)) throw EncodeError("pair literal at sort " + to_string(c));
        use_sort(c);
        return "(mk!" + type_code(c) + " " + value(v.fst(), c.fst()) + " " + value(v.snd(), c.snd()) + ")";
      case ValueKind::Nil:
        if (!c.is(TypeKind::List)) throw EncodeError("list literal at sort " + to_string(c));
        use_sort(c);
        return "nil!" + type_code(c);
      case ValueKind::Cons:
        if (!c.is(TypeKind::List)) throw EncodeError("list literal at sort " + to_string(c));
        use_sort(c);
        return "(cons!" + type_code(c) + " " + value(v.head(), c.elem()) + " " + value(v.tail(), c) + ")";
      case ValueKind::Code: {
        for (size_t k = 0; k < codes_.size(); ++k)
          if (codes_[k] == v) return "code!" + std::to_string(k);
        codes_.push_back(v);
        uses_code_ = true;
        return "code!" + std::to_string(codes_.size() - 1);
      }
    }
    throw EncodeError("unsupported value");
  }

  std::string formula(const Formula& f) {
    switch (f.kind()) {
      case FormulaKind::True: return "true";
      case FormulaKind::False: return "false";
      case FormulaKind::Eq: {
        const Term& a = f.term(0);
        const Term& b = f.term(1);
        std::optional<Type> t = infer(a);
        if (!t) t = infer(b);
        if (!t) {
          if (a.is_lit() && b.is_lit()) return a.value() == b.value() ? "true" : "false";
          throw EncodeError("cannot determine the sort of " + to_string(f));
        }
        return "(= " + term(a, *t) + " " + term(b, *t) + ")";
      }
      case FormulaKind::Le: return "(<= " + term(f.term(0), Type::int_()) + " " + term(f.term(1), Type::int_()) + ")";
      case FormulaKind::Call:
      case FormulaKind::CallErr: return call(f);
      case FormulaKind::Not: return "(not " + formula(f.kid()) + ")";
      case FormulaKind::And: return "(and " + formula(f.kid(0)) + " " + formula(f.kid(1)) + ")";
      case FormulaKind::Or: return "(or " + formula(f.kid(0)) + " " + formula(f.kid(1)) + ")";
      case FormulaKind::Implies: return "(=> " + formula(f.kid(0)) + " " + formula(f.kid(1)) + ")";
      case FormulaKind::Exists:
      case FormulaKind::Forall: {
        bool ex = f.is(FormulaKind::Exists);
        std::string x = smt_symbol(f.var());
        use_sort(f.var_type());
        scope_[f.var()].push_back(f.var_type());
        std::string body = formula(f.kid());
        scope_[f.var()].pop_back();
        std::string guard = sort_predicate(f.var_type(), x);
        std::string inner = guard == "true" ? body : "(" + std::string(ex ? "and " : "=> ") + guard + " " + body + ")";
        return "(" + std::string(ex ? "exists" : "forall") + " ((" + x + " " + smt_sort(f.var_type()) + ")) " + inner +
               ")";
      }
    }
    throw EncodeError("unsupported formula");
  }

  // Measure instances at closed cons occurrences, round by round.
  std::vector<Formula> measure_instances(const std::vector<Formula>& roots, int depth) {
    std::vector<Formula> out;
    if (ms_.empty()) return out;
    std::set<std::string> done;
    std::vector<Formula> frontier = roots;
    for (int round = 0; round < depth && !frontier.empty(); ++round) {
      std::vector<std::pair<Term, Type>> occ;
      for (const auto& f : frontier) cons_occurrences(f, {}, occ);
      std::vector<Formula> next;
      for (const auto& [c, lt] : occ) {
        Term h, tl;
        if (c.is(TermKind::Cons)) {
          h = c.arg(0);
          tl = c.arg(1);
        } else {
          h = Term::lit(c.value().head());
          tl = Term::lit(c.value().tail());
        }
        for (const auto& m : ms_) {
          if (carrier(Type::list(m.elem)) != carrier(lt)) continue;
          std::string key = m.name + " " + to_sexpr(c);
          if (!done.insert(key).second) continue;
          Term rhs = substitute(m.cons_rhs, TermSubst{{m.head_var, h}, {m.tail_var, tl}});
          Formula eq = Formula::eq(Term::measure(m.name, Term::cons(h, tl)), rhs);
          out.push_back(eq);
          next.push_back(eq);
        }
      }
      frontier = std::move(next);
    }
    return out;
  }

  void measure_apps(const Formula& f, std::set<std::string> bound, std::vector<Term>& out) const {
    if (f.is_quantifier()) bound.insert(f.var());
    std::function<void(const Term&)> walk = [&](const Term& t) {
      if (t.is(TermKind::Measure) && closed(t, bound)) {
        for (const auto& o : out)
          if (o == t) return;
        out.push_back(t);
      }
      for (const auto& a : t.args()) walk(a);
    };
    for (const auto& t : f.terms()) walk(t);
    for (const auto& k : f.kids()) measure_apps(k, bound, out);
  }

  std::string header() {
    std::ostringstream o;
    o << "(set-logic ALL)\n(set-option :produce-models true)\n";
    if (uses_code_ || !sorts_code_.empty()) o << "(declare-sort Code 0)\n";
    // datatypes: Operation, pairs and lists, declared together
    std::vector<std::string> names, bodies;
    if (uses_operation_) {
      names.push_back("Operation");
      std::string b = "(";
      for (const auto& at : transfer_args_) {
        std::string k = "transfer!" + type_code(at);
        b += "(" + k + " (" + k + "!arg " + smt_sort(at) + ") (" + k + "!amount Int) (" + k + "!dest String)) ";
      }
      b += "(op!other (op!other!id Int)))";
      bodies.push_back(b);
    }
    for (const auto& t : dt_order_) {
      std::string c = type_code(t);
      names.push_back("S!" + c);
      if (t.is(TypeKind::Pair))
        bodies.push_back("((mk!" + c + " (fst!" + c + " " + smt_sort(t.fst()) + ") (snd!" + c + " " + smt_sort(t.snd()) +
                         ")))");
      else
        bodies.push_back("((nil!" + c + ") (cons!" + c + " (hd!" + c + " " + smt_sort(t.elem()) + ") (tl!" + c + " S!" + c +
                         ")))");
    }
    if (!names.empty()) {
      o << "(declare-datatypes (";
      for (size_t k = 0; k < names.size(); ++k) o << (k ? " " : "") << "(" << names[k] << " 0)";
      o << ") (";
      for (size_t k = 0; k < bodies.size(); ++k) o << (k ? " " : "") << bodies[k];
      o << "))\n";
    }
    for (const auto& d : list_preds_) o << d << "\n";
    for (const auto& d : funs_) o << d << "\n";
    if (uses_sha_) o << "(declare-fun sha256 (String) String)\n";
    return o.str();
  }

  const std::vector<Binding>& constants() const { return consts_; }
  size_t code_count() const { return codes_.size(); }
  bool uses_sha() const { return uses_sha_; }
  const std::vector<std::string>& codomain_axioms() const { return codomain_; }

  void use_sort(const Type& t) {
    switch (t.kind()) {
      case TypeKind::Operation: uses_operation_ = true; break;
      case TypeKind::Arrow:
        sorts_code_.insert("Code");
        use_sort(t.fst());
        use_sort(t.snd());
        break;
      case TypeKind::Pair:
      case TypeKind::List: {
        Type c = carrier(t);
        if (t.is(TypeKind::Pair)) {
          use_sort(t.fst());
          use_sort(t.snd());
        } else {
          use_sort(t.elem());
        }
        if (std::find(dt_order_.begin(), dt_order_.end(), c) == dt_order_.end()) dt_order_.push_back(c);
        if (t.is(TypeKind::List) && !trivial_predicate(t)) use_list_pred(t);
        break;
      }
      default: break;
    }
  }

 private:

  bool closed(const Term& t, const std::set<std::string>& bound) const {
    for (const auto& x : free_vars(t))
      if (bound.count(x)) return false;
    return true;
  }

  void cons_occurrences(const Formula& f, std::set<std::string> bound, std::vector<std::pair<Term, Type>>& out) {
    if (f.is_quantifier()) {
      bound.insert(f.var());
      scope_[f.var()].push_back(f.var_type());
    }
    std::function<void(const Term&)> walk = [&](const Term& t) {
      bool is_cons = t.is(TermKind::Cons) || (t.is_lit() && t.value().is(ValueKind::Cons));
      if (is_cons && closed(t, bound))
        if (auto lt = infer(t)) out.push_back({t, *lt});
      if (!t.is_lit())
        for (const auto& a : t.args()) walk(a);
    };
    for (const auto& t : f.terms()) walk(t);
    for (const auto& k : f.kids()) cons_occurrences(k, bound, out);
    if (f.is_quantifier()) scope_[f.var()].pop_back();
  }

  std::string transfer_ctor(const Type& at) {
    Type c = carrier(at);
    use_sort(c);
    uses_operation_ = true;
    if (std::find(transfer_args_.begin(), transfer_args_.end(), c) == transfer_args_.end()) transfer_args_.push_back(c);
    return "transfer!" + type_code(c);
  }

  void use_list_pred(const Type& t) {
    std::string c = type_code(t);
    for (const auto& d : list_pred_names_)
      if (d == c) return;
    list_pred_names_.push_back(c);
    std::string lc = type_code(carrier(t));
    std::string elem = sort_predicate(t.elem(), "(hd!" + lc + " l)");
    list_preds_.push_back("(define-fun-rec P!" + c + " ((l S!" + lc + ")) Bool (or ((_ is nil!" + lc + ") l) (and " +
                          elem + " (P!" + c + " (tl!" + lc + " l)))))");
  }

  void add_fun(const std::string& name, const std::string& decl) {
    if (fun_names_.insert(name).second) funs_.push_back(decl);
  }

  void use_measure(const MeasureDef& m) {
    Type lt = Type::list(m.elem);
    use_sort(lt);
    use_sort(m.result);
    add_fun("measure!" + m.name,
            "(declare-fun measure!" + m.name + " (" + smt_sort(lt) + ") " + smt_sort(m.result) + ")");
  }

  std::string call(const Formula& f) {
    bool err = f.is(FormulaKind::CallErr);
    std::optional<Type> ft;
    if (!f.term(0).is_lit()) ft = infer(f.term(0));
    Type et;
    if (ft) {
      if (!ft->is(TypeKind::Arrow)) throw EncodeError("call on a non-function");
    } else {
      auto a = infer(f.term(1));
      auto r = infer(f.term(2));
      if (!a || (!r && !err)) throw EncodeError("cannot determine the sort of " + to_string(f));
      if (err) throw EncodeError("call_err needs a typed function in " + to_string(f));
      ft = Type::arrow(*a, *r);
    }
    const Type& A = ft->fst();
    const Type& B = ft->snd();
    use_sort(*ft);
    std::string args = "(" + smt_sort(A) + "0)";
    std::string fn = term(f.term(0), *ft), a = term(f.term(1), A);
    std::string outcome = mangle("outcome", *ft);
    add_fun(outcome, "(declare-fun " + outcome + " (Code " + smt_sort(A) + ") Int)");
    if (!err) {
      std::string c = mangle("call", *ft);
      if (add_fun_new(c, "(declare-fun " + c + " (Code " + smt_sort(A) + ") " + smt_sort(B) + ")") &&
          !trivial_predicate(B))
        codomain_.push_back("(forall ((f Code) (a " + smt_sort(A) + ")) " + sort_predicate(B, "(" + c + " f a)") + ")");
      return "(and (= (" + outcome + " " + fn + " " + a + ") 1) (= (" + c + " " + fn + " " + a + ") " +
             term(f.term(2), B) + "))";
    }
    et = infer(f.term(2)).value_or(Type::int_());
    use_sort(et);
    std::string c = mangle("call_err", *ft) + "!raises!" + type_code(et);
    if (add_fun_new(c, "(declare-fun " + c + " (Code " + smt_sort(A) + ") " + smt_sort(et) + ")") &&
        !trivial_predicate(et))
      codomain_.push_back("(forall ((f Code) (a " + smt_sort(A) + ")) " + sort_predicate(et, "(" + c + " f a)") + ")");
    return "(and (= (" + outcome + " " + fn + " " + a + ") 2) (= (" + c + " " + fn + " " + a + ") " +
           term(f.term(2), et) + "))";
  }

  bool add_fun_new(const std::string& name, const std::string& decl) {
    if (!fun_names_.insert(name).second) return false;
    funs_.push_back(decl);
    return true;
  }

  const Measures& ms_;
  std::map<std::string, std::vector<Type>> scope_;
  std::vector<Binding> consts_;
  std::vector<Value> codes_;
  std::vector<Type> dt_order_;
  std::vector<Type> transfer_args_;
  std::vector<std::string> list_pred_names_, list_preds_;
  std::set<std::string> fun_names_;
  std::vector<std::string> funs_, codomain_;
  std::set<std::string> sorts_code_;
  bool uses_operation_ = false, uses_code_ = false, uses_sha_ = false;
};

}  // namespace detail

// Nil axioms plus instances at closed cons occurrences of the skolemized VC.
inline std::vector<Formula> instantiate_measure_axioms(const VerificationCondition& vc, const Measures& ms,
                                                       int depth) {
  Skolemized sk = skolemize_vc(vc);
  detail::Encoder enc(ms);
  for (const auto& b : sk.constants) enc.declare_const(b);
  std::vector<Formula> out;
  for (const auto& m : ms) out.push_back(Formula::eq(Term::measure(m.name, Term::lit(Value::nil())), m.nil_rhs));
  for (auto& f : enc.measure_instances({sk.hyp, sk.neg_goal}, depth)) out.push_back(std::move(f));
  return out;
}

// SMT-LIB script whose satisfiability is that of the VC's negation.
inline std::string encode_vc(const VerificationCondition& vc, const Measures& ms = {}, const SmtOptions& opt = {}) {
  Skolemized sk = skolemize_vc(vc);
  detail::Encoder enc(ms);
  for (const auto& b : sk.constants) enc.declare_const(b);
  std::string hyp = enc.formula(sk.hyp);
  std::string goal = enc.formula(sk.neg_goal);

  std::vector<std::string> axioms;
  if (!ms.empty()) {
    for (const auto& m : ms) {
      Formula nil_ax = Formula::eq(Term::measure(m.name, Term::lit(Value::nil())), m.nil_rhs);
      axioms.push_back(enc.formula(nil_ax));
    }
    std::vector<Formula> inst = enc.measure_instances({sk.hyp, sk.neg_goal}, opt.measure_depth);
    for (const auto& f : inst) axioms.push_back(enc.formula(f));
    // co-domain facts at measure occurrences
    std::vector<Term> apps;
    for (const auto& f : inst) enc.measure_apps(f, {}, apps);
    enc.measure_apps(sk.hyp, {}, apps);
    enc.measure_apps(sk.neg_goal, {}, apps);
    for (const auto& m : ms) {
      Term nil_app = Term::measure(m.name, Term::lit(Value::nil()));
      if (std::find(apps.begin(), apps.end(), nil_app) == apps.end()) apps.push_back(nil_app);
    }
    for (const auto& t : apps) {
      const MeasureDef* m = find_measure(ms, t.name());
      if (!trivial_predicate(m->result)) axioms.push_back(sort_predicate(m->result, enc.term(t, m->result)));
    }
  }

  std::ostringstream o;
  std::string head = enc.header();
  o << head;
  for (const auto& b : enc.constants()) o << "(declare-const " << smt_symbol(b.name) << " " << smt_sort(b.type) << ")\n";
  for (size_t k = 0; k < enc.code_count(); ++k) o << "(declare-const code!" << k << " Code)\n";
  if (enc.code_count() > 1) {
    o << "(assert (distinct";
    for (size_t k = 0; k < enc.code_count(); ++k) o << " code!" << k;
    o << "))\n";
  }
  for (const auto& b : enc.constants()) {
    std::string g = sort_predicate(b.type, smt_symbol(b.name));
    if (g != "true") o << "(assert " << g << ")\n";
  }
  for (const auto& a : enc.codomain_axioms()) o << "(assert " << a << ")\n";
  if (enc.uses_sha()) o << "(assert (forall ((b String)) (= (str.len (sha256 b)) 32)))\n";
  for (const auto& a : axioms) o << "(assert " << a << ")\n";
  o << "(assert " << hyp << ")\n";
  o << "(assert " << goal << ")\n";
  o << "(check-sat)\n";
  return o.str();
}

// ---------------------------------------------------------------- discharge

enum class SolverVerdict { Verified, Refuted, Unknown };

inline const char* to_string(SolverVerdict v) {
  switch (v) {
    case SolverVerdict::Verified: return "Verified";
    case SolverVerdict::Refuted: return "Refuted";
    case SolverVerdict::Unknown: return "Unknown";
  }
  return "?";
}

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  std::string command = "z3 -in";
  double timeout_s = 10;
};

struct DischargeResult {
  SolverVerdict verdict = SolverVerdict::Unknown;
  std::string model;
  double time_ms = 0;
};

namespace detail {

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// Runs the solver on the script; returns std::nullopt on timeout.
inline std::optional<std::string> run_solver(const std::string& command, const std::string& input, double timeout_s) {
  std::vector<std::string> argv_s = split_words(command);
  if (argv_s.empty()) throw SolverError("empty solver command");
  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (pipe(in_pipe) || pipe(out_pipe) || pipe2(err_pipe, O_CLOEXEC)) throw SolverError("pipe: " + std::string(strerror(errno)));
  pid_t pid = fork();
  if (pid < 0) throw SolverError("fork: " + std::string(strerror(errno)));
  if (pid == 0) {
    dup2(in_pipe[0], 0);
    dup2(out_pipe[1], 1);
    int devnull = open("/dev/null", O_WRONLY);
    if (devnull >= 0) dup2(devnull, 2);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[0]);
    std::vector<char*> argv;
    for (auto& a : argv_s) argv.push_back(a.data());
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    int e = errno;
    ssize_t ignored = write(err_pipe[1], &e, sizeof e);
    (void)ignored;
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_pipe[1]);
  int child_errno = 0;
  ssize_t n = read(err_pipe[0], &child_errno, sizeof child_errno);
  close(err_pipe[0]);
  if (n == sizeof child_errno) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    waitpid(pid, nullptr, 0);
    throw SolverError("cannot start solver '" + argv_s[0] + "': " + strerror(child_errno));
  }
  auto old = std::signal(SIGPIPE, SIG_IGN);
  size_t off = 0;
  while (off < input.size()) {
    ssize_t w = write(in_pipe[1], input.data() + off, input.size() - off);
    if (w <= 0) break;
    off += size_t(w);
  }
  close(in_pipe[1]);
  std::signal(SIGPIPE, old);
  std::string out;
  auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
  bool timed_out = false;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
    if (left <= 0) {
      timed_out = true;
      break;
    }
    pollfd p{out_pipe[0], POLLIN, 0};
    int r = poll(&p, 1, int(std::min<long long>(left, 1000)));
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) break;
    if (r == 0) continue;
    ssize_t got = read(out_pipe[0], buf, sizeof buf);
    if (got <= 0) break;
    out.append(buf, size_t(got));
  }
  close(out_pipe[0]);
  if (timed_out) kill(pid, SIGKILL);
  waitpid(pid, nullptr, 0);
  if (timed_out) return std::nullopt;
  return out;
}

}  // namespace detail

// Memoizing solver front end; safe to share between threads.
class Discharger {
 public:
  explicit Discharger(SolverConfig cfg = {}) : cfg_(std::move(cfg)) {}

  const SolverConfig& config() const { return cfg_; }

  DischargeResult discharge(const std::string& script) {
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = memo_.find(script);
      if (it != memo_.end()) return it->second;
    }
    auto t0 = std::chrono::steady_clock::now();
    DischargeResult r;
    if (cfg_.timeout_s > 0) {
      auto out = detail::run_solver(cfg_.command, script + "(get-model)\n", cfg_.timeout_s);
      if (out) {
        std::istringstream in(*out);
        std::string line;
        while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {}
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line == "unsat") r.verdict = SolverVerdict::Verified;
        else if (line == "sat") {
          r.verdict = SolverVerdict::Refuted;
          std::ostringstream rest;
          rest << in.rdbuf();
          r.model = rest.str();
        } else if (line == "unknown") r.verdict = SolverVerdict::Unknown;
        else throw SolverError("malformed solver output: " + out->substr(0, 200));
      }
    }
    r.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard<std::mutex> lk(mu_);
    memo_.emplace(script, r);
    return r;
  }

  DischargeResult discharge(const VerificationCondition& vc, const Measures& ms = {}, const SmtOptions& opt = {}) {
    return discharge(encode_vc(vc, ms, opt));
  }

  size_t cache_size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return memo_.size();
  }

 private:
  SolverConfig cfg_;
  mutable std::mutex mu_;
  std::map<std::string, DischargeResult> memo_;
};

inline DischargeResult discharge(const VerificationCondition& vc, const Measures& ms, const SolverConfig& cfg) {
  return Discharger(cfg).discharge(vc, ms);
}

}  // namespace mmv
