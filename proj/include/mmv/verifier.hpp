#pragma once

#include "mmv/contract.hpp"
#include "mmv/typing.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mmv {

struct VerifyError : std::runtime_error {
  VerifyError(const std::string& msg, Span s = {})
      : std::runtime_error(s.line ? to_string(s) + ": " + msg : msg), span(s) {}
  Span span;
};

enum class VcOrigin { ContractPost, ContractExc, LoopInvEntry, LoopInvPreserve, LambdaPre, LambdaPost, LambdaExc, Assert };

inline const char* to_string(VcOrigin o) {
  switch (o) {
    case VcOrigin::ContractPost: return "ContractPost";
    case VcOrigin::ContractExc: return "ContractExc";
    case VcOrigin::LoopInvEntry: return "LoopInvEntry";
    case VcOrigin::LoopInvPreserve: return "LoopInvPreserve";
    case VcOrigin::LambdaPre: return "LambdaPre";
    case VcOrigin::LambdaPost: return "LambdaPost";
    case VcOrigin::LambdaExc: return "LambdaExc";
    case VcOrigin::Assert: return "Assert";
  }
  return "?";
}

// forall binders. hyp => goal
struct VerificationCondition {
  int id = 0;
  std::vector<Binding> binders;
  Formula hyp = Formula::top();
  Formula goal = Formula::top();
  VcOrigin origin = VcOrigin::Assert;
  Span span;

  Formula as_formula() const { return Formula::forall_all(binders, Formula::implies(hyp, goal)); }
};

inline std::string to_sexpr(const VerificationCondition& vc) {
  std::string out = "(vc :id " + std::to_string(vc.id) + " :origin " + to_string(vc.origin) + " :span \"" +
                    to_string(vc.span) + "\" :binders (";
  for (size_t k = 0; k < vc.binders.size(); ++k)
    out += (k ? " (" : "(") + vc.binders[k].name + " " + type_atom(vc.binders[k].type) + ")";
  return out + ") :hyp " + to_sexpr(vc.hyp) + " :goal " + to_sexpr(vc.goal) + ")";
}

enum class AssumeMode { Replace, Conjoin };

struct CheckOptions {
  AssumeMode assume = AssumeMode::Replace;
};

struct TraceEntry {
  InstrId node;
  bool diverged;
  RefinementStackType phi;
};

struct CheckResult {
  std::vector<VerificationCondition> vcs;
  std::vector<TraceEntry> trace;
  TypeTrace simple_trace;
  bool assume_tainted = false;
  TypeEnv gamma;  // contract-level Γ
  Type err_type;
  RefinementStackType pre, post, exc;  // contract spec over Γ
};

inline const std::string kErrVar = "err#";

// An annotation after pattern desugaring: pattern variables stay separate so that goals can hoist them.
struct Desugared {
  BindingStack binders;
  std::vector<Binding> pvars;
  Formula defs = Formula::top();
  Formula body = Formula::top();

  Formula closed() const {
    return Formula::exists_all(pvars, defs.is(FormulaKind::True) ? body : Formula::conj(defs, body));
  }
  RefinementStackType stack() const { return {binders, closed()}; }
};

inline Formula conj_opt(const Formula& a, const Formula& b) {
  if (a.is(FormulaKind::True)) return b;
  if (b.is(FormulaKind::True)) return a;
  return Formula::conj(a, b);
}

inline Formula weave_nil(const Measures& ms, const Type& elem) {
  Formula out = Formula::top();
  for (const auto& m : ms)
    if (m.elem == elem) out = conj_opt(out, Formula::eq(Term::measure(m.name, Term::lit(Value::nil())), m.nil_rhs));
  return out;
}

inline Formula weave_cons(const Measures& ms, const Type& elem, const Term& h, const Term& t) {
  Formula out = Formula::top();
  for (const auto& m : ms)
    if (m.elem == elem) {
      Term rhs = substitute(m.cons_rhs, TermSubst{{m.head_var, h}, {m.tail_var, t}});
      out = conj_opt(out, Formula::eq(Term::measure(m.name, Term::cons(h, t)), rhs));
    }
  return out;
}

// Conjoins each measure's defining equation at a freshly introduced list term.
inline Formula weave_measures(const Measures& ms, const Formula& post, const Type& elem, const Term& list_term) {
  if (list_term.is(TermKind::Cons)) return conj_opt(post, weave_cons(ms, elem, list_term.arg(0), list_term.arg(1)));
  return conj_opt(post, weave_nil(ms, elem));
}

inline void check_measures(const Measures& ms) {
  for (size_t k = 0; k < ms.size(); ++k) {
    const auto& m = ms[k];
    Measures visible(ms.begin(), ms.begin() + long(k) + 1);
    try {
      check_term({}, m.nil_rhs, m.result, visible);
      check_term({{m.head_var, m.elem}, {m.tail_var, Type::list(m.elem)}}, m.cons_rhs, m.result, visible);
    } catch (const SortError& e) {
      throw VerifyError("measure " + m.name + ": " + e.what());
    }
    std::function<void(const Term&)> rec = [&](const Term& t) {
      if (t.is(TermKind::Measure) && t.name() == m.name &&
          !(t.arg(0).is(TermKind::Var) && t.arg(0).name() == m.tail_var))
        throw VerifyError("measure " + m.name + " may only recurse on " + m.tail_var);
      for (const auto& a : t.args()) rec(a);
    };
    rec(m.nil_rhs);
    if (free_vars(m.nil_rhs).size()) throw VerifyError("measure " + m.name + ": [] clause has free variables");
    rec(m.cons_rhs);
  }
}

namespace detail {

class Checker {
 public:
  Checker(const AnnotatedContract* c, const Measures& ms, CheckOptions opt) : c_(c), ms_(ms), opt_(opt) {}

  CheckResult result;

  struct Frame {
    Formula exc = Formula::bottom();
    size_t base = 0;
  };

  struct State {
    TypeEnv gamma;
    bool diverged = false;
    RefinementStackType cur;
  };

  std::string fresh() {
    for (;;) {
      std::string x = "v#" + std::to_string(counter_++);
      if (!used_.count(x)) {
        used_.insert(x);
        return x;
      }
    }
  }
  Binding fresh(const Type& t) { return {fresh(), t}; }
  void reserve(const std::set<std::string>& xs) { used_.insert(xs.begin(), xs.end()); }

  void index_types(const TypeTrace& tr) {
    for (const auto& e : tr) types_[e.node] = &e;
  }

  void set_err_type(Type t) { err_ = std::move(t); }
  const Type& err_type() const { return err_; }

  // ---------------------------------------------------------------- desugaring

  Desugared desugar(const StackAnnot& a, const TypeStack& expected, const TypeEnv& gamma, Span sp,
                    bool top_vars_as_pvars = false) {
    if (expected.failed) throw VerifyError("annotation at an unreachable point", sp);
    Desugared d;
    std::set<std::string> seen;
    auto claim = [&](const std::string& x) {
      if (gamma.contains(x)) throw VerifyError("binder " + x + " shadows a variable in scope", sp);
      if (!seen.insert(x).second) throw VerifyError("binder " + x + " is bound twice", sp);
      used_.insert(x);
    };
    if (!a.rest && a.items.size() != expected.items.size())
      throw VerifyError("stack annotation has " + std::to_string(a.items.size()) + " elements, the stack has " +
                            std::to_string(expected.items.size()),
                        sp);
    if (a.rest && a.items.size() > expected.items.size())
      throw VerifyError("stack annotation is deeper than the stack", sp);
    std::function<Term(const Pattern&, const Type&)> build = [&](const Pattern& p, const Type& t) -> Term {
      if (p.type.valid() && p.type != t)
        throw VerifyError("pattern type " + to_string(p.type) + " does not match " + to_string(t), sp);
      switch (p.kind) {
        case Pattern::Kind::Var:
          claim(p.name);
          d.pvars.push_back({p.name, t});
          return Term::var(p.name);
        case Pattern::Kind::Wild: {
          Binding b = fresh(t);
          d.pvars.push_back(b);
          return Term::var(b.name);
        }
        case Pattern::Kind::Pair:
          if (!t.is(TypeKind::Pair)) throw VerifyError("pair pattern against " + to_string(t), sp);
          {
            Term x = build(p.kids[0], t.fst());
            return Term::pair(x, build(p.kids[1], t.snd()));
          }
      }
      return Term::var("?");
    };
    for (size_t k = 0; k < a.items.size(); ++k) {
      const Pattern& p = a.items[k];
      const Type& t = expected.items[k];
      if (p.type.valid() && p.type != t)
        throw VerifyError("annotated type " + to_string(p.type) + " does not match stack type " + to_string(t), sp);
      if (p.kind == Pattern::Kind::Var && !top_vars_as_pvars) {
        claim(p.name);
        d.binders.push_back({p.name, t});
      } else if (p.kind == Pattern::Kind::Wild) {
        d.binders.push_back(fresh(t));
      } else {
        Binding y = fresh(t);
        d.binders.push_back(y);
        d.defs = conj_opt(d.defs, Formula::eq(Term::var(y.name), build(p, t)));
      }
    }
    for (size_t k = a.items.size(); k < expected.items.size(); ++k) d.binders.push_back(fresh(expected.items[k]));
    TypeEnv env = gamma;
    try {
      for (const auto& b : d.binders) env.add(b.name, b.type);
      for (const auto& b : d.pvars) env.add(b.name, b.type);
      d.body = elaborate_formula(env, a.pred, ms_);
    } catch (const SortError& e) {
      throw VerifyError(std::string("ill-sorted annotation: ") + e.what(), sp);
    } catch (const StructuralError& e) {
      throw VerifyError(e.what(), sp);
    }
    return d;
  }

  // Renames the binders of d positionally and its pattern variables away from `avoid`.
  Desugared align(const Desugared& d, const BindingStack& names, const std::set<std::string>& avoid) {
    std::map<std::string, std::string> m;
    for (size_t k = 0; k < d.binders.size(); ++k) m[d.binders[k].name] = names[k].name;
    Desugared out;
    out.binders = names;
    std::set<std::string> taken = avoid;
    for (const auto& b : names) taken.insert(b.name);
    for (const auto& p : d.pvars) {
      std::string x = p.name;
      if (taken.count(x)) x = fresh();
      taken.insert(x);
      m[p.name] = x;
      out.pvars.push_back({x, p.type});
    }
    out.defs = rename_vars(d.defs, m);
    out.body = rename_vars(d.body, m);
    return out;
  }

  // Adopted annotations get fresh binder names.
  RefinementStackType adopt(const Desugared& d) {
    BindingStack names;
    for (const auto& b : d.binders) names.push_back(fresh(b.type));
    return align(d, names, {}).stack();
  }

  // ---------------------------------------------------------------- VCs

  void emit(const TypeEnv& gamma, const State& s, const Desugared& goal, VcOrigin origin, Span sp) {
    VerificationCondition vc;
    vc.origin = origin;
    vc.span = sp;
    BindingStack names;
    Formula hyp = Formula::bottom();
    if (s.diverged) {
      for (const auto& b : goal.binders) names.push_back(fresh(b.type));
    } else {
      if (erase(s.cur) != erase(goal.binders))
        throw VerifyError("stack shape " + to_string(erase(s.cur)) + " does not match annotation " +
                              to_string(erase(goal.binders)),
                          sp);
      names = s.cur.binders;
      hyp = s.cur.pred;
    }
    std::set<std::string> avoid = free_vars(hyp);
    for (const auto& b : gamma.items()) avoid.insert(b.name);
    Desugared g = align(goal, names, avoid);
    vc.binders = gamma.items();
    vc.binders.insert(vc.binders.end(), names.begin(), names.end());
    vc.binders.insert(vc.binders.end(), g.pvars.begin(), g.pvars.end());
    vc.hyp = s.diverged ? hyp : conj_opt(hyp, g.defs);
    vc.goal = g.body;
    vc.id = int(result.vcs.size());
    result.vcs.push_back(std::move(vc));
  }

  void emit_exc(const TypeEnv& gamma, const Formula& exc, const Desugared& goal, VcOrigin origin, Span sp) {
    State s;
    s.cur = {{{kErrVar, err_}}, exc};
    emit(gamma, s, goal, origin, sp);
  }

  // ---------------------------------------------------------------- rules

  const TypeTraceEntry& typed(const Instr& i) const {
    auto it = types_.find(i.id());
    if (it == types_.end()) throw VerifyError(std::string("internal: untyped instruction ") + op_name(i.op()));
    return *it->second;
  }

  Span span(const Instr& i) const { return c_ ? c_->span_of(i) : Span{}; }

  void check_fresh(const State& s, const Instr& i) const {
    if (s.diverged) return;
    std::set<std::string> names;
    for (const auto& b : s.gamma.items()) names.insert(b.name);
    for (const auto& b : s.cur.binders)
      if (!names.insert(b.name).second)
        throw VerifyError("internal: binder " + b.name + " collides after " + op_name(i.op()), span(i));
  }

  void annotate(State& s, Frame& f, const std::vector<Annotation>& as, const TypeStack& ts) {
    for (const auto& a : as) {
      if (s.diverged) return;
      if (a.kind == AnnotKind::Assert) {
        Desugared d = desugar(a.stack, ts, s.gamma, a.span);
        emit(s.gamma, s, d, VcOrigin::Assert, a.span);
      } else if (a.kind == AnnotKind::Assume) {
        Desugared d = desugar(a.stack, ts, s.gamma, a.span);
        result.assume_tainted = true;
        if (opt_.assume == AssumeMode::Replace) {
          s.cur = adopt(d);
        } else {
          Desugared g = align(d, s.cur.binders, free_vars(s.cur.pred));
          s.cur.pred = Formula::conj(s.cur.pred, g.closed());
        }
      }
    }
    (void)f;
  }

  State seq(State s, Frame& f, const InstrSeq& is) {
    for (const auto& i : is) {
      const AnnotationSite* site = c_ ? c_->site(i) : nullptr;
      const TypeTraceEntry& te = typed(i);
      if (site) annotate(s, f, site->before, te.before);
      s = instr(std::move(s), f, i);
      check_fresh(s, i);
      result.trace.push_back({i.id(), s.diverged, s.diverged ? RefinementStackType{{}, Formula::bottom()} : s.cur});
      if (site) annotate(s, f, site->after, te.after);
    }
    return s;
  }

  Formula locals_closed(const State& s, const Frame& f, const Formula& body) const {
    std::vector<Binding> locals(s.gamma.items().begin() + long(f.base), s.gamma.items().end());
    return Formula::exists_all(locals, body);
  }

  State join(State a, State b) {
    if (a.diverged) return b;
    if (b.diverged) return a;
    BindingStack ys;
    for (const auto& x : a.cur.binders) ys.push_back(fresh(x.type));
    auto rn = [&](const RefinementStackType& p) {
      std::map<std::string, std::string> m;
      for (size_t k = 0; k < ys.size(); ++k) m[p.binders[k].name] = ys[k].name;
      return rename_vars(p.pred, m);
    };
    State out = a;
    out.cur = {ys, Formula::disj(rn(a.cur), rn(b.cur))};
    return out;
  }

  static Term v(const Binding& b) { return Term::var(b.name); }

  State instr(State s, Frame& f, const Instr& i) {
    if (s.diverged) throw VerifyError("instruction after a diverging one", span(i));
    BindingStack& u = s.cur.binders;
    Formula& phi = s.cur.pred;
    auto rest = [&](size_t n) { return BindingStack(u.begin() + long(n), u.end()); };
    auto set = [&](BindingStack ups, Formula p) {
      s.cur = {std::move(ups), std::move(p)};
      return s;
    };
    auto prepend = [](Binding b, BindingStack r) {
      r.insert(r.begin(), std::move(b));
      return r;
    };
    const TypeTraceEntry& te = typed(i);
    switch (i.op()) {
      case Op::Seq: return seq(std::move(s), f, i.body());
      case Op::Drop: return set(rest(1), Formula::exists(u[0].name, u[0].type, phi));
      case Op::Dup: {
        Binding y = fresh(u[0].type);
        return set(prepend(y, u), Formula::conj(phi, Formula::eq(v(y), v(u[0]))));
      }
      case Op::Swap: std::swap(u[0], u[1]); return s;
      case Op::Push: {
        Binding y = fresh(i.type());
        return set(prepend(y, u), Formula::conj(phi, Formula::eq(v(y), Term::lit(i.value()))));
      }
      case Op::Not: {
        Binding y = fresh(Type::int_());
        Term x = v(u[0]), zero = Term::integer(0);
        Formula body = Formula::disj(
            Formula::conj(Formula::negate(Formula::eq(x, zero)), Formula::eq(v(y), zero)),
            Formula::conj(Formula::eq(x, zero), Formula::eq(v(y), Term::integer(1))));
        return set(prepend(y, rest(1)), Formula::exists(u[0].name, u[0].type, Formula::conj(phi, body)));
      }
      case Op::Add: {
        Binding y = fresh(te.after.items[0]);
        Formula body = Formula::conj(phi, Formula::eq(Term::plus(v(u[0]), v(u[1])), v(y)));
        return set(prepend(y, rest(2)), Formula::exists_all({u[0], u[1]}, body));
      }
      case Op::Pair: {
        Binding y = fresh(Type::pair(u[0].type, u[1].type));
        Formula body = Formula::conj(phi, Formula::eq(Term::pair(v(u[0]), v(u[1])), v(y)));
        return set(prepend(y, rest(2)), Formula::exists_all({u[0], u[1]}, body));
      }
      case Op::Car:
      case Op::Cdr: {
        bool car = i.op() == Op::Car;
        const Type& pt = u[0].type;
        Binding y = fresh(car ? pt.fst() : pt.snd());
        Binding z = fresh(car ? pt.snd() : pt.fst());
        Term pr = car ? Term::pair(v(y), v(z)) : Term::pair(v(z), v(y));
        Formula body = Formula::conj(phi, Formula::eq(v(u[0]), pr));
        return set(prepend(y, rest(1)), Formula::exists_all({u[0], z}, body));
      }
      case Op::Nil: {
        Binding y = fresh(Type::list(i.type()));
        Formula body = Formula::conj(phi, Formula::eq(v(y), Term::lit(Value::nil())));
        return set(prepend(y, u), weave_measures(ms_, body, i.type(), Term::lit(Value::nil())));
      }
      case Op::Cons: {
        Binding y = fresh(u[1].type);
        Term c = Term::cons(v(u[0]), v(u[1]));
        Formula body = weave_measures(ms_, Formula::conj(phi, Formula::eq(c, v(y))), u[0].type, c);
        return set(prepend(y, rest(2)), Formula::exists_all({u[0], u[1]}, body));
      }
      case Op::If: {
        Binding x = u[0];
        Term zero = Term::integer(0);
        State a = s, b = s;
        a.cur = {rest(1), Formula::exists(x.name, x.type, Formula::conj(phi, Formula::negate(Formula::eq(v(x), zero))))};
        b.cur = {rest(1), Formula::exists(x.name, x.type, Formula::conj(phi, Formula::eq(v(x), zero)))};
        return join(seq(a, f, i.body()), seq(b, f, i.body2()));
      }
      case Op::IfCons: {
        Binding x = u[0];
        Type elem = x.type.elem();
        Binding h = fresh(elem), t = fresh(x.type);
        Term c = Term::cons(v(h), v(t));
        State a = s, b = s;
        a.cur = {prepend(h, prepend(t, rest(1))),
                 Formula::exists(x.name, x.type, weave_measures(ms_, Formula::conj(phi, Formula::eq(c, v(x))), elem, c))};
        Term nil = Term::lit(Value::nil());
        b.cur = {rest(1), Formula::exists(x.name, x.type,
                                          weave_measures(ms_, Formula::conj(phi, Formula::eq(v(x), nil)), elem, nil))};
        return join(seq(a, f, i.body()), seq(b, f, i.body2()));
      }
      case Op::Loop: {
        const Annotation* inv = c_ ? c_->find(i, AnnotKind::LoopInv) : nullptr;
        if (!inv) throw VerifyError("missing LoopInv for LOOP", span(i));
        Desugared d = desugar(inv->stack, te.before, s.gamma, inv->span);
        emit(s.gamma, s, d, VcOrigin::LoopInvEntry, inv->span);
        RefinementStackType psi = adopt(d);
        Binding x = psi.binders[0];
        BindingStack r(psi.binders.begin() + 1, psi.binders.end());
        Term zero = Term::integer(0);
        State body = s;
        body.cur = {r, Formula::exists(x.name, x.type, Formula::conj(psi.pred, Formula::negate(Formula::eq(v(x), zero))))};
        State out = seq(body, f, i.body());
        emit(s.gamma, out, d, VcOrigin::LoopInvPreserve, inv->span);
        return set(r, Formula::exists(x.name, x.type, Formula::conj(psi.pred, Formula::eq(v(x), zero))));
      }
      case Op::Iter: {
        const Annotation* inv = c_ ? c_->find(i, AnnotKind::LoopInv) : nullptr;
        if (!inv) throw VerifyError("missing LoopInv for ITER", span(i));
        Desugared d = desugar(inv->stack, te.before, s.gamma, inv->span);
        emit(s.gamma, s, d, VcOrigin::LoopInvEntry, inv->span);
        RefinementStackType psi = adopt(d);
        Binding x = psi.binders[0];
        Type elem = x.type.elem();
        BindingStack r(psi.binders.begin() + 1, psi.binders.end());
        Binding x1 = fresh(elem), x2 = fresh(x.type);
        Term c = Term::cons(v(x1), v(x2));
        State body = s;
        body.gamma.add(x2.name, x2.type);
        body.cur = {prepend(x1, r), Formula::exists(x.name, x.type,
                                                    weave_measures(ms_, Formula::conj(psi.pred, Formula::eq(c, v(x))), elem, c))};
        State out = seq(body, f, i.body());
        // goal: the invariant for the remaining list x2
        Desugared g = d;
        g.binders.erase(g.binders.begin());
        TermSubst sub{{d.binders[0].name, v(x2)}};
        g.defs = substitute(d.defs, sub);
        g.body = substitute(d.body, sub);
        emit(body.gamma, out, g, VcOrigin::LoopInvPreserve, inv->span);
        Term nil = Term::lit(Value::nil());
        return set(r, Formula::exists(x.name, x.type,
                                      weave_measures(ms_, Formula::conj(psi.pred, Formula::eq(v(x), nil)), elem, nil)));
      }
      case Op::Dip: {
        Binding x = u[0];
        State inner = s;
        inner.gamma.add(x.name, x.type);
        inner.cur = {rest(1), phi};
        State out = seq(inner, f, i.body());
        if (out.diverged) {
          s.diverged = true;
          return s;
        }
        return set(prepend(x, out.cur.binders), out.cur.pred);
      }
      case Op::Lambda: return lambda(std::move(s), i);
      case Op::Exec: {
        Binding x1 = u[0], x2 = u[1];
        Binding y = fresh(x2.type.snd());
        Formula post = Formula::conj(phi, Formula::call(v(x2), v(x1), v(y)));
        Formula err = Formula::conj(phi, Formula::call_err(v(x2), v(x1), Term::var(kErrVar)));
        f.exc = disj_opt(f.exc, locals_closed(s, f, Formula::exists_all(u, err)));
        return set(prepend(y, rest(2)), Formula::exists_all({x1, x2}, post));
      }
      case Op::TransferTokens: {
        Binding y = fresh(Type::operation());
        Formula body = Formula::conj(phi, Formula::eq(Term::transfer(v(u[0]), v(u[1]), v(u[2])), v(y)));
        return set(prepend(y, rest(3)), Formula::exists_all({u[0], u[1], u[2]}, body));
      }
      case Op::Failwith: {
        Formula body = Formula::conj(phi, Formula::eq(v(u[0]), Term::var(kErrVar)));
        f.exc = disj_opt(f.exc, locals_closed(s, f, Formula::exists_all(u, body)));
        s.diverged = true;
        s.cur = {{}, Formula::bottom()};
        return s;
      }
      case Op::Pack:
      case Op::Sha256: {
        Binding y = fresh(Type::bytes());
        Term app = i.op() == Op::Pack ? Term::mangled("pack", u[0].type, v(u[0])) : Term::mangled("sha256", {}, v(u[0]));
        return set(prepend(y, rest(1)), Formula::exists(u[0].name, u[0].type, Formula::conj(phi, Formula::eq(app, v(y)))));
      }
    }
    throw VerifyError("unknown instruction", span(i));
  }

  static Formula disj_opt(const Formula& a, const Formula& b) {
    if (a.is(FormulaKind::False)) return b;
    return Formula::disj(a, b);
  }

  State lambda(State s, const Instr& i) {
    const Annotation* ann = c_ ? c_->find(i, AnnotKind::LambdaAnnot) : nullptr;
    if (!ann) throw VerifyError("missing LambdaAnnot for LAMBDA", span(i));
    const SpecAnnot& sp = ann->spec;
    Type t1 = i.type(), t2 = i.type2();
    Desugared pre = desugar(sp.pre, TypeStack{{t1}, false}, {}, ann->span, true);
    TypeEnv lg;
    try {
      for (const auto& b : pre.pvars) lg.add(b.name, b.type);
      for (const auto& b : sp.ghosts) lg.add(b.name, b.type);
    } catch (const StructuralError& e) {
      throw VerifyError(e.what(), ann->span);
    }
    Desugared post = desugar(sp.post, TypeStack{{t2}, false}, lg, ann->span);
    Desugared exc = desugar(sp.exc, TypeStack{{err_}, false}, lg, ann->span);

    Frame lf;
    lf.base = lg.size();
    State body;
    body.gamma = lg;
    body.cur = {pre.binders, conj_opt(pre.defs, pre.body)};
    State out = seq(body, lf, i.body());
    emit(lg, out, post, VcOrigin::LambdaPost, ann->span);
    emit_exc(lg, lf.exc, exc, VcOrigin::LambdaExc, ann->span);

    // forall Γλ, a, r, e. a = pat /\ pre => (call(f,a)=r => post(r)) /\ (call_err(f,a)=e => exc(e))
    Binding fb = fresh(Type::arrow(t1, t2));
    Binding a = fresh(t1), r = fresh(t2), e = fresh(err_);
    auto inst = [&](const Desugared& d, const Binding& to) {
      return align(d, {to}, {fb.name, a.name, r.name, e.name}).closed();
    };
    Formula pre_a = rename_vars(conj_opt(pre.defs, pre.body), {{pre.binders[0].name, a.name}});
    Formula spec = Formula::implies(
        pre_a, Formula::conj(Formula::forall(r.name, r.type, Formula::implies(Formula::call(v(fb), v(a), v(r)), inst(post, r))),
                             Formula::forall(e.name, e.type,
                                             Formula::implies(Formula::call_err(v(fb), v(a), v(e)), inst(exc, e)))));
    std::vector<Binding> all = lg.items();
    all.push_back(a);
    Formula fact = Formula::forall_all(all, spec);
    BindingStack ups = s.cur.binders;
    ups.insert(ups.begin(), fb);
    s.cur = {ups, Formula::conj(s.cur.pred, fact)};
    return s;
  }

 private:
  const AnnotatedContract* c_;
  const Measures& ms_;
  CheckOptions opt_;
  std::map<InstrId, const TypeTraceEntry*> types_;
  std::set<std::string> used_;
  unsigned counter_ = 0;
  Type err_ = Type::int_();
};

inline void collect_failwith_types(const InstrSeq& is, const std::map<InstrId, const TypeTraceEntry*>& types,
                                   std::vector<Type>& out) {
  for (const auto& i : is) {
    if (i.op() == Op::Failwith) {
      auto it = types.find(i.id());
      if (it != types.end() && !it->second->before.items.empty()) out.push_back(it->second->before.items[0]);
    }
    collect_failwith_types(i.body(), types, out);
    collect_failwith_types(i.body2(), types, out);
  }
}

inline void collect_lambda_exc_types(const InstrSeq& is, const AnnotatedContract& c, std::vector<std::pair<Type, Span>>& out) {
  for (const auto& i : is) {
    if (i.op() == Op::Lambda)
      if (const auto* a = c.find(i, AnnotKind::LambdaAnnot))
        if (!a->spec.exc.items.empty() && a->spec.exc.items[0].type.valid())
          out.push_back({a->spec.exc.items[0].type, a->span});
    collect_lambda_exc_types(i.body(), c, out);
    collect_lambda_exc_types(i.body2(), c, out);
  }
}

}  // namespace detail

// Builds the VC Γ, Υ1 |= φ1 => φ2 after aligning Φ2's binders to Φ1's.
inline VerificationCondition subtype_vc(const TypeEnv& gamma, const RefinementStackType& phi1,
                                        const RefinementStackType& phi2, VcOrigin origin, Span sp = {}) {
  if (erase(phi1) != erase(phi2))
    throw VerifyError("subtyping between stacks of different shapes: " + to_string(erase(phi1)) + " vs " +
                      to_string(erase(phi2)));
  std::map<std::string, std::string> m;
  for (size_t k = 0; k < phi1.binders.size(); ++k) m[phi2.binders[k].name] = phi1.binders[k].name;
  VerificationCondition vc;
  vc.binders = gamma.items();
  vc.binders.insert(vc.binders.end(), phi1.binders.begin(), phi1.binders.end());
  vc.hyp = phi1.pred;
  vc.goal = rename_vars(phi2.pred, m);
  vc.origin = origin;
  vc.span = sp;
  return vc;
}

// Forward rule application for a single annotation-free instruction.
inline RefinementStackType strongest_post(const TypeEnv& gamma, const RefinementStackType& phi, const Instr& i,
                                          const Measures& ms = {}, bool* diverged = nullptr) {
  TypeTrace tr;
  simple_check_seq(erase(phi), {i}, &tr);
  detail::Checker ck(nullptr, ms, {});
  ck.index_types(tr);
  std::set<std::string> taken;
  all_names(phi.pred, taken);
  for (const auto& b : gamma.items()) taken.insert(b.name);
  for (const auto& b : phi.binders) taken.insert(b.name);
  ck.reserve(taken);
  detail::Checker::State s{gamma, false, phi};
  detail::Checker::Frame f;
  f.base = gamma.size();
  s = ck.instr(s, f, i);
  if (diverged) *diverged = s.diverged;
  return s.cur;
}

inline CheckResult check_contract(const AnnotatedContract& c, const CheckOptions& opt = {}) {
  check_measures(c.measures);
  Type in = Type::pair(c.parameter, c.storage);
  Type out_t = Type::pair(Type::list(Type::operation()), c.storage);
  TypeTrace tr;
  TypeStack out;
  try {
    out = simple_check_seq(TypeStack{{in}, false}, c.code, &tr);
  } catch (const SimpleTypeError& e) {
    throw VerifyError(std::string("simple typing: ") + e.what());
  }
  if (out.failed) throw VerifyError("the contract fails on every input");
  if (out != TypeStack{{out_t}, false})
    throw VerifyError("the contract must end with " + to_string(TypeStack{{out_t}, false}) + ", got " + to_string(out));

  detail::Checker ck(&c, c.measures, opt);
  ck.result.simple_trace = tr;
  ck.index_types(ck.result.simple_trace);

  // one exception sort per contract
  std::map<InstrId, const TypeTraceEntry*> types;
  for (const auto& e : ck.result.simple_trace) types[e.node] = &e;
  std::vector<Type> fails;
  detail::collect_failwith_types(c.code, types, fails);
  std::vector<std::pair<Type, Span>> lam;
  detail::collect_lambda_exc_types(c.code, c, lam);
  Type err;
  if (c.spec.exc.items[0].type.valid()) err = c.spec.exc.items[0].type;
  else if (!fails.empty()) err = fails[0];
  else if (!lam.empty()) err = lam[0].first;
  else err = Type::int_();
  for (const auto& t : fails)
    if (t != err) throw VerifyError("FAILWITH operands of sorts " + to_string(err) + " and " + to_string(t));
  for (const auto& [t, sp] : lam)
    if (t != err) throw VerifyError("exception sort " + to_string(t) + " differs from " + to_string(err), sp);
  ck.set_err_type(err);

  Desugared pre = ck.desugar(c.spec.pre, TypeStack{{in}, false}, {}, {}, true);
  TypeEnv gamma;
  try {
    for (const auto& b : pre.pvars) gamma.add(b.name, b.type);
    for (const auto& b : c.spec.ghosts) gamma.add(b.name, b.type);
  } catch (const StructuralError& e) {
    throw VerifyError(e.what());
  }
  Desugared post = ck.desugar(c.spec.post, TypeStack{{out_t}, false}, gamma, {});
  Desugared exc = ck.desugar(c.spec.exc, TypeStack{{err}, false}, gamma, {});

  detail::Checker::Frame f;
  f.base = gamma.size();
  detail::Checker::State s;
  s.gamma = gamma;
  s.cur = {pre.binders, conj_opt(pre.defs, pre.body)};
  RefinementStackType s0 = s.cur;
  s = ck.seq(s, f, c.code);
  ck.emit(gamma, s, post, VcOrigin::ContractPost, {});
  ck.emit_exc(gamma, f.exc, exc, VcOrigin::ContractExc, {});
  ck.result.gamma = gamma;
  ck.result.err_type = err;
  ck.result.pre = s0;
  ck.result.post = post.stack();
  ck.result.exc = exc.stack();
  return std::move(ck.result);
}

}  // namespace mmv
