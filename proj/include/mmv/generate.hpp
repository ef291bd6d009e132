#pragma once

#include "mmv/logic.hpp"
#include "mmv/semantics.hpp"

#include <random>
#include <vector>

namespace mmv {

namespace detail {

class ProgramGen {
 public:
  ProgramGen(std::uint64_t seed) : rng_(seed) {}

  InstrSeq seq(TypeStack ts, int size, int depth) {
    InstrSeq out;
    while (size > 0 && !ts.failed) {
      int used = 1;
      Instr i = pick(ts, size, depth, used);
      ts = simple_check_seq(ts, {i});
      out.push_back(std::move(i));
      size -= used;
    }
    return out;
  }

  // Appends instructions taking `from` to exactly `to`.
  void fix(InstrSeq& is, const TypeStack& from, const TypeStack& to, int depth) {
    if (from.failed) return;
    const auto& a = from.items;
    const auto& b = to.items;
    size_t common = 0;
    while (common < a.size() && common < b.size() && a[a.size() - 1 - common] == b[b.size() - 1 - common]) ++common;
    for (size_t k = common; k < a.size(); ++k) is.push_back(Instr::simple(Op::Drop));
    for (size_t k = b.size() - common; k-- > 0;) is.push_back(produce(b[k], depth));
  }

  Instr produce(const Type& t, int depth) {
    if (t.is(TypeKind::Arrow)) {
      InstrSeq body;
      if (depth > 0 && coin(2)) body = seq(TypeStack{{t.fst()}, false}, int(uniform(0, 2)), depth - 1);
      fix(body, simple_check_seq(TypeStack{{t.fst()}, false}, body), TypeStack{{t.snd()}, false}, depth - 1);
      return Instr::lambda(t.fst(), t.snd(), body);
    }
    if (t.is(TypeKind::Operation))
      return Instr::push(t, Value::transfer(Value::integer(uniform(-2, 2)), Int(uniform(0, 3)), "tz1a"));
    return Instr::push(t, value_of(t));
  }

  Value value_of(const Type& t) {
    switch (t.kind()) {
      case TypeKind::Arrow: return Value::code(produce(t, 0).body());
      case TypeKind::Operation: return produce(t, 0).value();
      case TypeKind::Pair: {
        Value a = value_of(t.fst());
        return Value::pair(a, value_of(t.snd()));
      }
      case TypeKind::List: {
        std::vector<Value> xs;
        for (long long k = uniform(0, 2); k > 0; --k) xs.push_back(value_of(t.elem()));
        return Value::list(xs);
      }
      default: {
        Budget b;
        b.int_bound = 3;
        return *random_value(t, b, rng_);
      }
    }
  }

  Type small_type(int depth = 1) {
    switch (uniform(0, depth > 0 ? 7 : 4)) {
      case 0:
      case 1: return Type::int_();
      case 2: return Type::nat();
      case 3: return Type::bytes();
      case 4: return Type::address();
      case 5: return Type::pair(small_type(depth - 1), small_type(depth - 1));
      case 6: return Type::list(small_type(depth - 1));
      default: return Type::arrow(small_type(0), small_type(0));
    }
  }

 private:
  long long uniform(long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng_); }
  bool coin(int n) { return uniform(0, n - 1) == 0; }

  InstrSeq body(const TypeStack& in, const TypeStack& out, int budget, int depth) {
    InstrSeq b = seq(in, int(uniform(0, std::max(0, budget))), depth - 1);
    fix(b, simple_check_seq(in, b), out, depth - 1);
    return b;
  }

  static TypeStack pop(TypeStack ts, size_t n) {
    ts.items.erase(ts.items.begin(), ts.items.begin() + long(n));
    return ts;
  }

  Instr pick(const TypeStack& ts, int size, int depth, int& used) {
    const auto& it = ts.items;
    const size_t n = it.size();
    auto integer = [&](size_t k) { return n > k && is_integer_type(it[k]); };
    auto is_int = [&](size_t k) { return n > k && it[k].is(TypeKind::Int); };
    int sub = std::max(0, size / 2);
    for (int attempt = 0; attempt < 64; ++attempt) {
      switch (uniform(0, 24)) {
        case 0:
        case 1: return produce(small_type(), depth);
        case 2: if (n >= 1) return Instr::simple(Op::Drop); break;
        case 3: if (n >= 1) return Instr::simple(Op::Dup); break;
        case 4: if (n >= 2) return Instr::simple(Op::Swap); break;
        case 5: if (integer(0)) return Instr::simple(Op::Not); break;
        case 6: if (integer(0) && integer(1)) return Instr::simple(Op::Add); break;
        case 7: if (n >= 2) return Instr::simple(Op::Pair); break;
        case 8: if (n >= 1 && it[0].is(TypeKind::Pair)) return Instr::simple(coin(2) ? Op::Car : Op::Cdr); break;
        case 9: return Instr::nil(n >= 1 && coin(2) ? it[0] : small_type());
        case 10: if (n >= 2 && it[1].is(TypeKind::List) && it[1].elem() == it[0]) return Instr::simple(Op::Cons); break;
        case 11: if (n >= 1 && loops_ == 0) return Instr::simple(Op::Pack); break;
        case 12: if (n >= 1 && it[0].is(TypeKind::Bytes)) return Instr::simple(Op::Sha256); break;
        case 13:
          if (n >= 2 && it[1].is(TypeKind::Arrow) && it[1].fst() == it[0]) return Instr::simple(Op::Exec);
          break;
        case 14:
          if (n >= 3 && it[1].is(TypeKind::Int) && it[2].is(TypeKind::Address)) return Instr::transfer_tokens(it[0]);
          break;
        case 15:
          if (n >= 1 && coin(6)) return Instr::simple(Op::Failwith);
          break;
        case 16:
          if (n >= 1 && depth > 0) {
            used += sub;
            return Instr::dip(seq(pop(ts, 1), sub, depth - 1));
          }
          break;
        case 17:
          if (is_int(0) && depth > 0) {
            used += sub;
            TypeStack rest = pop(ts, 1);
            InstrSeq a = seq(rest, int(uniform(0, sub)), depth - 1);
            TypeStack target = simple_check_seq(rest, a);
            if (target.failed) {
              InstrSeq b = seq(rest, int(uniform(0, sub)), depth - 1);
              return Instr::if_(a, b);
            }
            return Instr::if_(a, body(rest, target, sub, depth));
          }
          break;
        case 18:
          if (is_int(0) && depth > 0) {
            used += sub;
            TypeStack rest = pop(ts, 1);
            TypeStack out = rest;
            out.items.insert(out.items.begin(), Type::int_());
            ++loops_;
            InstrSeq b = body(rest, out, sub, depth);
            --loops_;
            return Instr::loop(b);
          }
          break;
        case 19:
          if (n >= 1 && it[0].is(TypeKind::List) && depth > 0) {
            used += sub;
            TypeStack rest = pop(ts, 1);
            TypeStack cons_in = rest;
            cons_in.items.insert(cons_in.items.begin(), {it[0].elem(), it[0]});
            InstrSeq a = seq(cons_in, int(uniform(0, sub)), depth - 1);
            TypeStack target = simple_check_seq(cons_in, a);
            if (target.failed) return Instr::if_cons(a, seq(rest, int(uniform(0, sub)), depth - 1));
            return Instr::if_cons(a, body(rest, target, sub, depth));
          }
          break;
        case 20:
          if (n >= 1 && it[0].is(TypeKind::List) && depth > 0) {
            used += sub;
            TypeStack rest = pop(ts, 1);
            TypeStack in = rest;
            in.items.insert(in.items.begin(), it[0].elem());
            ++loops_;
            InstrSeq b = body(in, rest, sub, depth);
            --loops_;
            return Instr::iter(b);
          }
          break;
        case 21:
          if (depth > 0) {
            used += sub;
            Type a = small_type(0), b = coin(2) ? a : small_type(0);
            return Instr::lambda(a, b, body(TypeStack{{a}, false}, TypeStack{{b}, false}, sub, depth));
          }
          break;
        case 22:
          if (n >= 1 && depth > 0) return Instr::seq(seq(ts, std::min(sub, 2), depth - 1));
          break;
        default:
          if (n >= 1 && depth > 0) {
            // set up an EXEC on the current top
            return Instr::seq({produce(Type::arrow(it[0], small_type(0)), depth - 1), Instr::simple(Op::Swap),
                               Instr::simple(Op::Exec)});
          }
          break;
      }
    }
    return produce(Type::int_(), depth);
  }

  std::mt19937_64 rng_;
  int loops_ = 0;  // PACK inside a loop can grow values exponentially
};

inline void count_sizes(const InstrSeq& is, size_t& n) {
  for (const auto& i : is) {
    ++n;
    count_sizes(i.body(), n);
    count_sizes(i.body2(), n);
  }
}

}  // namespace detail

// Instruction count, including nested bodies.
inline size_t program_size(const InstrSeq& is) {
  size_t n = 0;
  detail::count_sizes(is, n);
  return n;
}

// A random program that simple-types from ts; size is a soft target.
inline InstrSeq generate_welltyped(const TypeStack& ts, int size, std::uint64_t seed) {
  return detail::ProgramGen(seed).seq(ts, size, 3);
}

// A random type stack of the given height.
inline TypeStack random_type_stack(size_t height, std::uint64_t seed) {
  detail::ProgramGen g(seed);
  TypeStack ts;
  for (size_t k = 0; k < height; ++k) ts.items.push_back(g.small_type());
  return ts;
}

// A random stack inhabiting ts; lambdas are drawn from generated bodies.
inline Stack random_stack(const TypeStack& ts, std::uint64_t seed) {
  detail::ProgramGen g(seed);
  std::vector<Value> vs;
  for (const auto& t : ts.items) vs.push_back(g.value_of(t));
  return Stack(vs);
}

// Every program of at most max_size instructions over the atoms, with
// DIP, IF, LOOP, IF_CONS, ITER and LAMBDA wrapping smaller programs.
inline std::vector<InstrSeq> enumerate_programs(int max_size, const std::vector<Instr>& atoms) {
  // by_size[k]: sequences with exactly k instructions
  std::vector<std::vector<InstrSeq>> by_size(size_t(max_size + 1));
  std::vector<std::vector<Instr>> instrs(size_t(max_size + 1));
  by_size[0].push_back({});
  for (int k = 1; k <= max_size; ++k) {
    auto& ik = instrs[size_t(k)];
    if (k == 1) ik = atoms;
    for (const auto& b : by_size[size_t(k - 1)]) {
      ik.push_back(Instr::dip(b));
      ik.push_back(Instr::loop(b));
      ik.push_back(Instr::iter(b));
      ik.push_back(Instr::lambda(Type::int_(), Type::int_(), b));
    }
    for (int a = 0; a <= k - 1; ++a)
      for (const auto& x : by_size[size_t(a)])
        for (const auto& y : by_size[size_t(k - 1 - a)]) {
          ik.push_back(Instr::if_(x, y));
          ik.push_back(Instr::if_cons(x, y));
        }
    for (int first = 1; first <= k; ++first)
      for (const auto& i : instrs[size_t(first)])
        for (const auto& rest : by_size[size_t(k - first)]) {
          InstrSeq s{i};
          s.insert(s.end(), rest.begin(), rest.end());
          by_size[size_t(k)].push_back(std::move(s));
        }
  }
  std::vector<InstrSeq> out;
  for (const auto& v : by_size) out.insert(out.end(), v.begin(), v.end());
  return out;
}


// ---------------------------------------------------------------- random assertions

struct FormulaGen {
  std::mt19937_64& rng;
  TypeEnv env;  // variables terms may mention
  int int_bound = 3;
  bool quantifiers = false;
  bool arithmetic_mul = true;

  long long uniform(long long lo, long long hi) { return std::uniform_int_distribution<long long>(lo, hi)(rng); }

  Value literal(const Type& t) {
    Budget b;
    b.int_bound = int_bound;
    b.list_len = 2;
    return *random_value(t, b, rng);
  }

  Type sort() {
    switch (uniform(0, 5)) {
      case 0:
      case 1: return Type::int_();
      case 2: return Type::nat();
      case 3: return Type::list(Type::int_());
      case 4: return Type::pair(Type::int_(), Type::int_());
      default: return Type::address();
    }
  }

  Term term(const Type& t, int depth) {
    std::vector<std::string> vars;
    for (const auto& b : env.items())
      if (carrier(b.type) == carrier(t)) vars.push_back(b.name);
    int pick = int(uniform(0, 3));
    if (pick == 0 && !vars.empty()) return Term::var(vars[size_t(uniform(0, long(vars.size()) - 1))]);
    if (depth > 0 && pick >= 2) {
      switch (carrier(t).kind()) {
        case TypeKind::Int:
          if (uniform(0, 5) == 0) return Term::mangled("size", {}, Term::lit(literal(Type::bytes())));
          if (arithmetic_mul && uniform(0, 2) == 0) return Term::mul(term(t, depth - 1), term(t, depth - 1));
          return Term::plus(term(t, depth - 1), term(t, depth - 1));
        case TypeKind::List: return Term::cons(term(t.elem(), depth - 1), term(t, depth - 1));
        case TypeKind::Pair: return Term::pair(term(t.fst(), depth - 1), term(t.snd(), depth - 1));
        default: break;
      }
    }
    if (!vars.empty() && pick == 1) return Term::var(vars[size_t(uniform(0, long(vars.size()) - 1))]);
    return Term::lit(literal(t));
  }

  Formula atom(int depth) {
    if (uniform(0, 2) == 0) return Formula::le(term(Type::int_(), depth), term(Type::int_(), depth));
    Type t = sort();
    return Formula::eq(term(t, depth), term(t, depth));
  }

  Formula formula(int depth) {
    if (depth <= 0) return atom(1);
    switch (uniform(0, quantifiers ? 7 : 5)) {
      case 0: return Formula::negate(formula(depth - 1));
      case 1: return Formula::conj(formula(depth - 1), formula(depth - 1));
      case 2: return Formula::disj(formula(depth - 1), formula(depth - 1));
      case 3: return Formula::implies(formula(depth - 1), formula(depth - 1));
      case 6:
      case 7: {
        std::string x;
        for (int k = 0; x.empty() || env.contains(x); ++k) x = "q" + std::to_string(k);
        Type t = uniform(0, 1) ? Type::int_() : Type::nat();
        TypeEnv saved = env;
        env.add(x, t);
        Formula body = formula(depth - 1);
        env = saved;
        return uniform(0, 1) ? Formula::exists(x, t, body) : Formula::forall(x, t, body);
      }
      default: return atom(2);
    }
  }
};

}  // namespace mmv
